#include "qduff/qsd.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qduff {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

NoiseStream::NoiseStream(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = splitmix64(sm);
}

std::uint64_t NoiseStream::next_u64() {
    // xoshiro256++
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double NoiseStream::next_normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller on (0,1] uniforms built from the top 53 bits.
    double u1;
    do {
        u1 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    } while (u1 <= 0.0);
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

Complex NoiseStream::sample(double dt) {
    if (!(dt >= 0.0)) throw Error("NoiseStream::sample: dt must be >= 0");
    ++counter_;
    if (dt == 0.0) {
        // Keep the draw sequence aligned with the nonzero-dt path.
        next_normal();
        next_normal();
        return {0.0, 0.0};
    }
    const double s = std::sqrt(0.5 * dt);
    const double g1 = next_normal();
    const double g2 = next_normal();
    return {s * g1, s * g2};
}

std::uint64_t NoiseStream::derive_seed(std::uint64_t base, std::uint64_t stream_a,
                                       std::uint64_t stream_b) {
    std::uint64_t x = base;
    std::uint64_t h = splitmix64(x);
    x = h ^ (stream_a * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
    h = splitmix64(x);
    x = h ^ (stream_b * 0xda942042e4dd58b5ULL + 0x9fb21c651e98df25ULL);
    return splitmix64(x);
}

void IntegratorConfig::validate() const {
    if (steps_per_period < 256) throw Error("IntegratorConfig: steps_per_period must be >= 256");
    if (!(recenter_threshold > 0.0)) throw Error("IntegratorConfig: recenter_threshold must be > 0");
    if (cutoff < 2) throw Error("IntegratorConfig: cutoff must be >= 2");
}

Complex sample_noise(NoiseStream& stream, double dt) { return stream.sample(dt); }

namespace {

// Max row sum of |Re| + |Im|: cheap upper bound on the spectral radius.
double row_abs_bound(const BandedOperator& op) {
    double best = 0.0;
    const int b = op.half_bandwidth();
    for (std::size_t row = 0; row < op.cutoff(); ++row) {
        double s = 0.0;
        for (int o = -b; o <= b; ++o) {
            const Complex v = op.at(row, o);
            s += std::abs(v.real()) + std::abs(v.imag());
        }
        best = std::max(best, s);
    }
    return best;
}

// y = G(tt) x with the expectations <K>, <Kd> frozen at the step start:
//   G = -i(h0 + c(tt) Q) + <Kd> K - 1/2 Kd K - 1/2 |<K>|^2
void apply_drift(const ShiftedModelOps& ops, double tt, Complex ekc, double ek2,
                 const std::vector<Complex>& x, std::vector<Complex>& y,
                 std::vector<Complex>& kx, std::vector<Complex>& kdkx) {
    const std::size_t n = x.size();
    y.assign(n, Complex{0, 0});
    ops.h0.apply_add(x, Complex{0.0, -1.0}, y);
    const double c = ops.drive_coefficient(tt);
    if (c != 0.0) ops.q_drive.apply_add(x, Complex{0.0, -c}, y);
    ops.k.apply(x, kx);
    ops.kdk.apply(x, kdkx);
    for (std::size_t m = 0; m < n; ++m)
        y[m] += ekc * kx[m] - 0.5 * kdkx[m] - 0.5 * ek2 * x[m];
}

}  // namespace

StepResult qsd_step(FockState& state, double t, const ShiftedModelOps& ops, double dt,
                    Complex dxi, bool renormalize_after) {
    const std::size_t n = state.cutoff();
    if (ops.h0.cutoff() != n) throw Error("qsd_step: cutoff mismatch");
    if (ops.kdk.cutoff() != n) throw Error("qsd_step: model is missing Kd K");

    thread_local std::vector<Complex> kpsi, kdkx, diffusion, s1, s2, s3, s4, xwork;
    kpsi.assign(n, Complex{0, 0});
    kdkx.assign(n, Complex{0, 0});
    diffusion.assign(n, Complex{0, 0});

    ops.k.apply(state.amplitudes, kpsi);
    Complex ek{0, 0};
    for (std::size_t m = 0; m < n; ++m) ek += std::conj(state.amplitudes[m]) * kpsi[m];
    const Complex ekc = std::conj(ek);
    const double ek2 = std::norm(ek);

    // Euler-Maruyama stochastic term from the step-start state.
    for (std::size_t m = 0; m < n; ++m)
        diffusion[m] = dxi * (kpsi[m] - ek * state.amplitudes[m]);

    // The drift with frozen expectations is a linear ODE. The truncated basis
    // makes it stiff (spectral radius grows like N^2), so a single explicit
    // Euler update is unstable at the top of the basis for any practical dt;
    // the drift is advanced by enough classical RK4 substeps to keep the
    // whole spectrum inside the stability region.
    const double bound = row_abs_bound(ops.h0) +
                         (ops.params.beta > 0.0 ? std::abs(ops.params.g / ops.params.beta) : 0.0) *
                             row_abs_bound(ops.q_drive) +
                         std::sqrt(ek2) * row_abs_bound(ops.k) +
                         0.5 * row_abs_bound(ops.kdk) + 0.5 * ek2;
    const std::size_t substeps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(bound * dt / 1.5)));
    const double h = dt / static_cast<double>(substeps);

    auto& psi = state.amplitudes;
    xwork.resize(n);
    for (std::size_t j = 0; j < substeps; ++j) {
        const double tj = t + static_cast<double>(j) * h;
        apply_drift(ops, tj, ekc, ek2, psi, s1, kpsi, kdkx);
        for (std::size_t m = 0; m < n; ++m) xwork[m] = psi[m] + 0.5 * h * s1[m];
        apply_drift(ops, tj + 0.5 * h, ekc, ek2, xwork, s2, kpsi, kdkx);
        for (std::size_t m = 0; m < n; ++m) xwork[m] = psi[m] + 0.5 * h * s2[m];
        apply_drift(ops, tj + 0.5 * h, ekc, ek2, xwork, s3, kpsi, kdkx);
        for (std::size_t m = 0; m < n; ++m) xwork[m] = psi[m] + h * s3[m];
        apply_drift(ops, tj + h, ekc, ek2, xwork, s4, kpsi, kdkx);
        for (std::size_t m = 0; m < n; ++m)
            psi[m] += (h / 6.0) * (s1[m] + 2.0 * s2[m] + 2.0 * s3[m] + s4[m]);
    }

    double sum = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        state.amplitudes[m] += diffusion[m];
        sum += std::norm(state.amplitudes[m]);
    }
    if (!std::isfinite(sum))
        throw Error("qsd_step: non-finite amplitudes (dt too large?)");

    double deficit = std::abs(1.0 - sum);
    if (renormalize_after) {
        const double inv = 1.0 / std::sqrt(sum);
        for (auto& a : state.amplitudes) a *= inv;
    }
    return StepResult{deficit, state.leakage()};
}

bool maybe_recenter(FockState& state, const IntegratorConfig& config) {
    const std::size_t n = state.cutoff();
    // <a> in one band-1 pass; <Q> = sqrt2 Re<a>, <P> = sqrt2 Im<a>.
    Complex ea{0, 0};
    for (std::size_t m = 0; m + 1 < n; ++m)
        ea += std::conj(state.amplitudes[m]) * std::sqrt(static_cast<double>(m + 1)) *
              state.amplitudes[m + 1];
    const double qf = std::sqrt(2.0) * ea.real();
    const double pf = std::sqrt(2.0) * ea.imag();
    if (std::hypot(qf, pf) <= config.recenter_threshold) return false;
    displace_frame(state, qf, pf, 1e-12, 1e-2);
    renormalize(state);
    return true;
}

TrajectoryRecord evolve(const FockState& initial, const ModelParams& model,
                        const IntegratorConfig& config, std::size_t periods_total,
                        std::size_t transient_periods, std::uint64_t seed,
                        std::size_t fine_per_period) {
    config.validate();
    model.validate();
    if (periods_total <= transient_periods)
        throw Error("evolve: periods_total must exceed transient_periods");
    if (fine_per_period == 0 || config.steps_per_period % fine_per_period != 0)
        throw Error("evolve: fine_per_period must divide steps_per_period");

    const double period = 2.0 * std::numbers::pi / model.Omega;
    const double dt = period / static_cast<double>(config.steps_per_period);
    const std::size_t fine_stride = config.steps_per_period / fine_per_period;

    TrajectoryRecord rec;
    rec.params = model;
    rec.config = config;
    rec.seed = seed;
    rec.period = period;
    rec.transient_periods = transient_periods;
    rec.strobes.reserve(periods_total + 1);
    rec.fine.reserve(periods_total * fine_per_period + 1);

    FockState state = initial;
    NoiseStream noise(seed);
    ShiftedModelOps ops =
        build_shifted_model(model, config.cutoff, state.frame_q, state.frame_p);

    auto record_fine = [&](double t) {
        const Complex eq = expectation(state, ops.q_drive);
        Complex ep{0, 0};
        {
            // <P> from <a>: P = i(adag - a)/sqrt2
            Complex ea{0, 0};
            for (std::size_t m = 0; m + 1 < state.cutoff(); ++m)
                ea += std::conj(state.amplitudes[m]) * std::sqrt(static_cast<double>(m + 1)) *
                      state.amplitudes[m + 1];
            ep = std::sqrt(2.0) * ea.imag();
        }
        const double e = expectation(state, ops.h_d_full).real();
        return FineSample{t, state.frame_q + eq.real(), state.frame_p + ep.real(), e};
    };

    // t = 0 samples
    rec.fine.push_back(record_fine(0.0));
    {
        const FineSample f0 = rec.fine.back();
        rec.strobes.push_back({0, 0.0, f0.q_exp, f0.p_exp, f0.energy, 0.0, 0.0});
    }

    for (std::size_t k = 0; k < periods_total; ++k) {
        double deficit_max = 0.0;
        double leakage_max = 0.0;
        const double t_base = static_cast<double>(k) * period;
        for (std::size_t i = 0; i < config.steps_per_period; ++i) {
            const double t = t_base + static_cast<double>(i) * dt;
            const Complex dxi = noise.sample(dt);
            StepResult sr;
            try {
                sr = qsd_step(state, t, ops, dt, dxi, config.renormalize_every_step);
            } catch (const Error& e) {
                throw Error("trajectory abort in period " + std::to_string(k) + ": " + e.what());
            }
            deficit_max = std::max(deficit_max, sr.deficit);
            leakage_max = std::max(leakage_max, sr.leakage);
            if (sr.leakage > config.leakage_bound)
                throw Error("trajectory abort in period " + std::to_string(k) +
                            ": truncation leakage " + std::to_string(sr.leakage) +
                            " above bound; increase cutoff");
            if (config.moving_frame && maybe_recenter(state, config)) {
                ops = build_shifted_model(model, config.cutoff, state.frame_q, state.frame_p);
                rec.frame_history.push_back(
                    {t + dt, state.frame_q, state.frame_p});
            }
            if ((i + 1) % fine_stride == 0 && (i + 1) != config.steps_per_period)
                rec.fine.push_back(record_fine(t_base + static_cast<double>(i + 1) * dt));
        }
        const double t_strobe = static_cast<double>(k + 1) * period;
        const FineSample f = record_fine(t_strobe);
        rec.fine.push_back(f);
        rec.strobes.push_back(
            {k + 1, t_strobe, f.q_exp, f.p_exp, f.energy, deficit_max, leakage_max});
    }
    return rec;
}

}  // namespace qduff
