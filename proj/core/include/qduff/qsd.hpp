#pragma once

// Single-trajectory quantum state diffusion integrator: complex Wiener noise,
// Euler-Maruyama drift/diffusion, per-step renormalization, moving-frame
// recentering.

#include <cstdint>
#include <vector>

#include "qduff/model.hpp"

namespace qduff {

/// Deterministic complex-Gaussian source. Identical seed gives a bit-identical
/// draw sequence regardless of thread assignment (own Box-Muller over a
/// 64-bit counter-free generator; nothing implementation-defined).
class NoiseStream {
public:
    explicit NoiseStream(std::uint64_t seed);

    /// dxi = sqrt(dt/2)(g1 + i g2), g1, g2 independent standard normals.
    Complex sample(double dt);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    /// Stable 64-bit mix for per-trajectory substream seeds.
    static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream_a,
                                     std::uint64_t stream_b);

private:
    double next_normal();
    std::uint64_t next_u64();

    std::uint64_t seed_;
    std::uint64_t state_[4];
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct IntegratorConfig {
    std::size_t steps_per_period = 4096;
    std::size_t cutoff = 64;
    double recenter_threshold = 1.0;  // in-frame centroid distance triggering recentering
    double leakage_bound = 1e-6;      // top-two-level population abort threshold
    bool renormalize_every_step = true;
    bool moving_frame = true;

    void validate() const;
};

struct StrobeSample {
    std::size_t period;
    double t;
    double q_exp;  // physical <Q>
    double p_exp;  // physical <P>
    double energy;  // physical <H_D>
    double norm_deficit_max;  // max over the period
    double leakage_max;       // max over the period
};

struct FineSample {
    double t;
    double q_exp;
    double p_exp;
    double energy;
};

struct FrameEvent {
    double t;
    double frame_q;
    double frame_p;
};

struct TrajectoryRecord {
    ModelParams params;
    IntegratorConfig config;
    std::uint64_t seed = 0;
    double period = 0.0;
    std::size_t transient_periods = 0;
    std::vector<StrobeSample> strobes;
    std::vector<FineSample> fine;
    std::vector<FrameEvent> frame_history;
};

Complex sample_noise(NoiseStream& stream, double dt);

/// One Euler-Maruyama step of
///   |dpsi> = -i H(t)|psi> dt
///          + (<Kd> K - 1/2 Kd K - 1/2 <Kd><K>)|psi> dt
///          + (K - <K>)|psi> dxi
/// followed by renormalization. The noise term and the frozen expectations
/// <K>, <Kd> are evaluated at the step start; the (stiff) drift itself is
/// advanced with internal RK4 substeps sized from a spectral-radius bound,
/// since one explicit update is unstable at the top of the truncated basis.
/// Operators must already be expressed in the state's frame.
struct StepResult {
    double deficit;
    double leakage;
};

StepResult qsd_step(FockState& state, double t, const ShiftedModelOps& ops, double dt,
                    Complex dxi, bool renormalize_after = true);

/// Recenter the frame on the physical centroid when the in-frame centroid has
/// drifted past config.recenter_threshold. Returns true if a shift happened
/// (callers must then rebuild frame-shifted operators).
bool maybe_recenter(FockState& state, const IntegratorConfig& config);

/// Integrate a full trajectory: strobes exactly at period boundaries, fine
/// samples fine_per_period times per period. Deterministic for fixed
/// (seed, config, model).
TrajectoryRecord evolve(const FockState& initial, const ModelParams& model,
                        const IntegratorConfig& config, std::size_t periods_total,
                        std::size_t transient_periods, std::uint64_t seed,
                        std::size_t fine_per_period = 1);

}  // namespace qduff
