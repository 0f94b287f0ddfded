#include "qduff/lindblad.hpp"

#include <algorithm>
#include <cmath>

namespace qduff {

DenseMatrix to_dense(const BandedOperator& op) {
    const auto n = static_cast<Eigen::Index>(op.cutoff());
    DenseMatrix m = DenseMatrix::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = std::max<Eigen::Index>(0, r - op.half_bandwidth());
             c <= std::min(n - 1, r + op.half_bandwidth()); ++c)
            m(r, c) = op.entry(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    return m;
}

DensityMatrix pure_density(const FockState& state) {
    const auto n = static_cast<Eigen::Index>(state.cutoff());
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = state.amplitudes[static_cast<std::size_t>(i)];
    DensityMatrix d;
    d.rho = v * v.adjoint();
    d.frame_q = state.frame_q;
    d.frame_p = state.frame_p;
    return d;
}

void DensityMatrix::check_invariants(double herm_tol, double trace_tol, double eig_floor) const {
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > herm_tol) throw Error("DensityMatrix: hermiticity violated: " + std::to_string(herm));
    const double tr = std::abs(rho.trace() - Complex{1.0, 0.0});
    if (tr > trace_tol) throw Error("DensityMatrix: trace deviates from 1 by " + std::to_string(tr));
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < eig_floor)
        throw Error("DensityMatrix: eigenvalue below floor: " +
                    std::to_string(es.eigenvalues().minCoeff()));
}

namespace {

struct DenseModel {
    DenseMatrix h0;       // H_D + H_R (scalars dropped)
    DenseMatrix q_drive;
    DenseMatrix k, kd, kdk;
    DenseMatrix q_full, p_full, hd_full;  // physical observables in-frame
    const ShiftedModelOps* ops;
};

DenseModel densify(const ShiftedModelOps& ops) {
    DenseModel d;
    d.h0 = to_dense(ops.h0);
    d.q_drive = to_dense(ops.q_drive);
    d.k = to_dense(ops.k);
    d.kd = d.k.adjoint();
    d.kdk = d.kd * d.k;
    d.hd_full = to_dense(ops.h_d_full);
    const StandardOps std_ops = build_standard_ops(ops.h0.cutoff());
    d.q_full = to_dense(std_ops.q);
    d.p_full = to_dense(std_ops.p);
    d.ops = &ops;
    return d;
}

DenseMatrix rhs(const DenseMatrix& rho, double t, const DenseModel& m) {
    const double c = m.ops->drive_coefficient(t);
    DenseMatrix h = m.h0;
    if (c != 0.0) h += c * m.q_drive;
    DenseMatrix out = Complex{0.0, -1.0} * (h * rho - rho * h);
    out += m.k * rho * m.kd;
    out -= 0.5 * (m.kdk * rho + rho * m.kdk);
    return out;
}

ObservableSeries run(const DensityMatrix& rho0, const DenseModel& m, double dt,
                     const std::vector<double>& checkpoints, double trace_drift_tol) {
    if (rho0.cutoff() > 200) throw Error("evolve_density: dense cutoff guard (N <= 200)");
    if (!(dt > 0.0)) throw Error("evolve_density: dt must be positive");
    ObservableSeries out;
    DenseMatrix rho = rho0.rho;
    double t = 0.0;
    double drift_max = 0.0;

    auto sample = [&](double tt) {
        out.t.push_back(tt);
        out.q_exp.push_back((m.q_full * rho).trace().real() + rho0.frame_q);
        out.p_exp.push_back((m.p_full * rho).trace().real() + rho0.frame_p);
        out.energy.push_back((m.hd_full * rho).trace().real());
        out.trace_drift.push_back(drift_max);
        out.purity.push_back((rho * rho).trace().real());
    };

    for (double target : checkpoints) {
        if (target < t - 1e-12) throw Error("evolve_density: checkpoints must be increasing");
        const double span = target - t;
        const long steps = span > 1e-12 ? std::max(1L, std::lround(span / dt)) : 0L;
        const double h = steps > 0 ? span / static_cast<double>(steps) : 0.0;
        for (long i = 0; i < steps; ++i) {
            const DenseMatrix k1 = rhs(rho, t, m);
            const DenseMatrix k2 = rhs(rho + 0.5 * h * k1, t + 0.5 * h, m);
            const DenseMatrix k3 = rhs(rho + 0.5 * h * k2, t + 0.5 * h, m);
            const DenseMatrix k4 = rhs(rho + h * k3, t + h, m);
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
            // Re-hermitize and re-trace-normalize, logging the drift.
            rho = 0.5 * (rho + rho.adjoint()).eval();
            const double tr = rho.trace().real();
            const double drift = std::abs(1.0 - tr);
            drift_max = std::max(drift_max, drift);
            if (drift > trace_drift_tol)
                throw Error("evolve_density: trace drift " + std::to_string(drift) +
                            " signals dt too large");
            rho /= tr;
        }
        t = target;
        sample(t);
    }
    return out;
}

}  // namespace

DenseMatrix master_rhs(const DensityMatrix& rho, double t, const ShiftedModelOps& ops) {
    if (rho.cutoff() != ops.h0.cutoff()) throw Error("master_rhs: cutoff mismatch");
    const DenseModel m = densify(ops);
    return rhs(rho.rho, t, m);
}

ObservableSeries evolve_density(const DensityMatrix& rho0, const ModelParams& model,
                                double dt, const std::vector<double>& checkpoints,
                                double trace_drift_tol) {
    const ShiftedModelOps ops =
        build_shifted_model(model, rho0.cutoff(), rho0.frame_q, rho0.frame_p);
    return run(rho0, densify(ops), dt, checkpoints, trace_drift_tol);
}

ObservableSeries evolve_density_ops(const DensityMatrix& rho0, const ShiftedModelOps& ops,
                                    double dt, const std::vector<double>& checkpoints,
                                    double trace_drift_tol) {
    return run(rho0, densify(ops), dt, checkpoints, trace_drift_tol);
}

EnsembleSummary ensemble_reduce(const std::vector<TrajectoryRecord>& records,
                                const std::vector<double>& checkpoints, double time_tol) {
    if (records.empty()) throw Error("ensemble_reduce: no records");
    const std::size_t nc = checkpoints.size();
    EnsembleSummary s;
    s.t = checkpoints;
    s.count = records.size();

    // Locate checkpoint indices in the first record's fine grid; all records
    // must share the grid.
    std::vector<std::size_t> idx(nc);
    const auto& fine0 = records.front().fine;
    for (std::size_t c = 0; c < nc; ++c) {
        bool found = false;
        for (std::size_t i = 0; i < fine0.size(); ++i) {
            if (std::abs(fine0[i].t - checkpoints[c]) <= time_tol) {
                idx[c] = i;
                found = true;
                break;
            }
        }
        if (!found)
            throw Error("ensemble_reduce: checkpoint t=" + std::to_string(checkpoints[c]) +
                        " not on the fine grid");
    }
    for (const auto& r : records) {
        if (r.fine.size() != fine0.size()) throw Error("ensemble_reduce: mismatched grids");
        for (std::size_t c = 0; c < nc; ++c)
            if (std::abs(r.fine[idx[c]].t - checkpoints[c]) > time_tol)
                throw Error("ensemble_reduce: mismatched checkpoint grids");
    }

    auto reduce = [&](auto getter, std::vector<double>& mean, std::vector<double>& stderr_out) {
        mean.resize(nc);
        stderr_out.resize(nc);
        const double mcount = static_cast<double>(records.size());
        for (std::size_t c = 0; c < nc; ++c) {
            double sum = 0.0;
            for (const auto& r : records) sum += getter(r.fine[idx[c]]);
            const double mu = sum / mcount;
            double ss = 0.0;
            for (const auto& r : records) {
                const double d = getter(r.fine[idx[c]]) - mu;
                ss += d * d;
            }
            mean[c] = mu;
            stderr_out[c] =
                records.size() > 1 ? std::sqrt(ss / (mcount - 1.0)) / std::sqrt(mcount) : 0.0;
        }
    };
    reduce([](const FineSample& f) { return f.q_exp; }, s.q_mean, s.q_stderr);
    reduce([](const FineSample& f) { return f.p_exp; }, s.p_mean, s.p_stderr);
    reduce([](const FineSample& f) { return f.energy; }, s.energy_mean, s.energy_stderr);
    return s;
}

}  // namespace qduff
