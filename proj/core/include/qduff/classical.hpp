#pragma once

// Classical reference dynamics for the driven dissipative Duffing oscillator:
// RK4 integration, strobed sections, Benettin Lyapunov exponents.

#include <cstddef>
#include <vector>

#include "qduff/model.hpp"

namespace qduff {

struct ClassicalState {
    double q = 0.0;
    double p = 0.0;
    double t = 0.0;
};

struct ClassicalDeriv {
    double dq;
    double dp;
};

/// dq/dt = p; dp/dt = -2 Gamma p + q - q^3 + g cos(Omega t). beta plays no role.
ClassicalDeriv classical_rhs(const ClassicalState& s, const ModelParams& params);

struct ClassicalTrajectory {
    std::vector<ClassicalState> samples;  // every step, or strobe-only
    bool strobe_only = false;
};

/// Fixed-step RK4. Default dt is (2 pi / Omega)/1000. With strobe_only the
/// samples land exactly on period boundaries (one per period, t = 2 pi k/Omega).
ClassicalTrajectory integrate(const ClassicalState& s0, const ModelParams& params,
                              double dt, double t_total, bool strobe_only = false);

double default_classical_dt(const ModelParams& params);

struct LyapunovResult {
    double lambda_max;
    std::vector<double> running;  // estimate after each renormalization interval
    // Filled when two exponents are requested (sum rule lambda1+lambda2 = -2 Gamma).
    double lambda_sum = 0.0;
    bool has_two = false;
};

/// Benettin method on the tangent flow (d dq/dt = dp; d dp/dt = -2 Gamma dp +
/// (1 - 3 q^2) dq). Skips transient_periods before accumulating.
LyapunovResult lyapunov_max(const ModelParams& params, const ClassicalState& s0,
                            double dt, double t_total, double renorm_interval,
                            double transient_periods = 100.0, bool two_exponents = false);

}  // namespace qduff
