#include "qduff/classical.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace qduff {

namespace {

bool finite(const ClassicalState& s) { return std::isfinite(s.q) && std::isfinite(s.p); }

// State + up to two tangent vectors, integrated together so the tangent flow
// sees the exact linearization along the orbit.
struct Extended {
    double q, p;
    double v1q, v1p;
    double v2q, v2p;
};

Extended rhs(const Extended& s, double t, const ModelParams& mp) {
    Extended d;
    d.q = s.p;
    d.p = -2.0 * mp.Gamma * s.p + s.q - s.q * s.q * s.q + mp.g * std::cos(mp.Omega * t);
    const double jac = 1.0 - 3.0 * s.q * s.q;
    d.v1q = s.v1p;
    d.v1p = -2.0 * mp.Gamma * s.v1p + jac * s.v1q;
    d.v2q = s.v2p;
    d.v2p = -2.0 * mp.Gamma * s.v2p + jac * s.v2q;
    return d;
}

Extended axpy(const Extended& a, double c, const Extended& b) {
    return {a.q + c * b.q, a.p + c * b.p, a.v1q + c * b.v1q,
            a.v1p + c * b.v1p, a.v2q + c * b.v2q, a.v2p + c * b.v2p};
}

Extended rk4_step(const Extended& s, double t, double dt, const ModelParams& mp) {
    const Extended k1 = rhs(s, t, mp);
    const Extended k2 = rhs(axpy(s, 0.5 * dt, k1), t + 0.5 * dt, mp);
    const Extended k3 = rhs(axpy(s, 0.5 * dt, k2), t + 0.5 * dt, mp);
    const Extended k4 = rhs(axpy(s, dt, k3), t + dt, mp);
    Extended out = s;
    out = axpy(out, dt / 6.0, k1);
    out = axpy(out, dt / 3.0, k2);
    out = axpy(out, dt / 3.0, k3);
    out = axpy(out, dt / 6.0, k4);
    return out;
}

}  // namespace

ClassicalDeriv classical_rhs(const ClassicalState& s, const ModelParams& params) {
    return {s.p, -2.0 * params.Gamma * s.p + s.q - s.q * s.q * s.q +
                     params.g * std::cos(params.Omega * s.t)};
}

double default_classical_dt(const ModelParams& params) {
    return (2.0 * std::numbers::pi / params.Omega) / 1000.0;
}

ClassicalTrajectory integrate(const ClassicalState& s0, const ModelParams& params,
                              double dt, double t_total, bool strobe_only) {
    if (!(dt > 0.0)) throw Error("classical integrate: dt must be positive");
    const double period = 2.0 * std::numbers::pi / params.Omega;
    // Snap dt so that an integer number of steps lands exactly on each strobe.
    const long steps_per_period = std::max(1L, std::lround(period / dt));
    const double h = period / static_cast<double>(steps_per_period);
    const long total_steps = std::lround(t_total / h);

    ClassicalTrajectory traj;
    traj.strobe_only = strobe_only;
    Extended s{s0.q, s0.p, 0, 0, 0, 0};
    double t = s0.t;
    if (!strobe_only) traj.samples.push_back({s.q, s.p, t});
    for (long i = 0; i < total_steps; ++i) {
        s = rk4_step(s, t, h, params);
        t = s0.t + static_cast<double>(i + 1) * h;
        if (!std::isfinite(s.q) || !std::isfinite(s.p))
            throw Error("classical integrate: state diverged at t=" + std::to_string(t));
        const bool on_strobe = ((i + 1) % steps_per_period) == 0;
        if (!strobe_only || on_strobe) traj.samples.push_back({s.q, s.p, t});
    }
    return traj;
}

LyapunovResult lyapunov_max(const ModelParams& params, const ClassicalState& s0,
                            double dt, double t_total, double renorm_interval,
                            double transient_periods, bool two_exponents) {
    if (!(dt > 0.0) || !(renorm_interval > 0.0))
        throw Error("lyapunov_max: dt and renorm_interval must be positive");
    const double period = 2.0 * std::numbers::pi / params.Omega;
    const long steps_per_interval = std::max(1L, std::lround(renorm_interval / dt));
    const double h = renorm_interval / static_cast<double>(steps_per_interval);
    const double t_transient = transient_periods * period;

    Extended s{s0.q, s0.p, 1.0, 0.0, 0.0, 1.0};
    double t = s0.t;

    // Transient: orbit only, tangent vectors reset afterwards.
    while (t < s0.t + t_transient - 0.5 * h) {
        s = rk4_step(s, t, h, params);
        t += h;
        const double m1 = std::hypot(s.v1q, s.v1p);
        if (m1 > 0.0) { s.v1q /= m1; s.v1p /= m1; }
        const double m2 = std::hypot(s.v2q, s.v2p);
        if (m2 > 0.0) { s.v2q /= m2; s.v2p /= m2; }
        if (!finite({s.q, s.p, t})) throw Error("lyapunov_max: orbit diverged in transient");
    }
    s.v1q = 1.0; s.v1p = 0.0;
    s.v2q = 0.0; s.v2p = 1.0;

    LyapunovResult res;
    double log_sum1 = 0.0;
    double log_sum2 = 0.0;
    double elapsed = 0.0;
    const double t_end = s0.t + t_total;
    while (t < t_end - 0.5 * h) {
        for (long i = 0; i < steps_per_interval && t < t_end - 0.5 * h; ++i) {
            s = rk4_step(s, t, h, params);
            t += h;
        }
        const double m1 = std::hypot(s.v1q, s.v1p);
        if (!(m1 > 0.0) || !std::isfinite(m1)) throw Error("lyapunov_max: tangent degenerate");
        log_sum1 += std::log(m1);
        s.v1q /= m1;
        s.v1p /= m1;
        if (two_exponents) {
            // Gram-Schmidt against v1, then measure the residual stretch.
            const double proj = s.v2q * s.v1q + s.v2p * s.v1p;
            s.v2q -= proj * s.v1q;
            s.v2p -= proj * s.v1p;
            const double m2 = std::hypot(s.v2q, s.v2p);
            if (!(m2 > 0.0)) throw Error("lyapunov_max: second tangent degenerate");
            log_sum2 += std::log(m2);
            s.v2q /= m2;
            s.v2p /= m2;
        }
        elapsed += renorm_interval;
        res.running.push_back(log_sum1 / elapsed);
    }
    if (elapsed <= 0.0) throw Error("lyapunov_max: no accumulation intervals");
    res.lambda_max = log_sum1 / elapsed;
    if (two_exponents) {
        res.lambda_sum = (log_sum1 + log_sum2) / elapsed;
        res.has_two = true;
    }
    return res;
}

}  // namespace qduff
