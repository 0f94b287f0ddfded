#pragma once

// Dense density-matrix master-equation integrator, the independent oracle for
// QSD ensembles, plus the ensemble reduction that realizes rho = M |psi><psi|.

#include <Eigen/Dense>

#include "qduff/model.hpp"
#include "qduff/qsd.hpp"

namespace qduff {

using DenseMatrix = Eigen::MatrixXcd;

struct DensityMatrix {
    DenseMatrix rho;
    double frame_q = 0.0;
    double frame_p = 0.0;

    std::size_t cutoff() const { return static_cast<std::size_t>(rho.rows()); }
    void check_invariants(double herm_tol = 1e-10, double trace_tol = 1e-10,
                          double eig_floor = -1e-8) const;
};

DenseMatrix to_dense(const BandedOperator& op);

DensityMatrix pure_density(const FockState& state);

/// dRho/dt = -i [H(t), rho] + K rho Kd - 1/2 {Kd K, rho}; the operators are
/// the frame-shifted ones matching the density matrix's frame.
DenseMatrix master_rhs(const DensityMatrix& rho, double t, const ShiftedModelOps& ops);

struct ObservableSeries {
    std::vector<double> t;
    std::vector<double> q_exp;   // physical <Q>
    std::vector<double> p_exp;   // physical <P>
    std::vector<double> energy;  // physical <H_D>
    std::vector<double> trace_drift;  // |1 - tr rho| logged per checkpoint
    std::vector<double> purity;
};

/// RK4 on the matrix ODE with per-step re-hermitization and trace
/// renormalization. Checkpoints are absolute times; dt is snapped so an
/// integer number of steps lands on each.
ObservableSeries evolve_density(const DensityMatrix& rho0, const ModelParams& model,
                                double dt, const std::vector<double>& checkpoints,
                                double trace_drift_tol = 1e-8);

/// Same, for an arbitrary frame-shifted operator set (test models).
ObservableSeries evolve_density_ops(const DensityMatrix& rho0, const ShiftedModelOps& ops,
                                    double dt, const std::vector<double>& checkpoints,
                                    double trace_drift_tol = 1e-8);

struct EnsembleSummary {
    std::vector<double> t;  // checkpoints
    std::vector<double> q_mean, q_stderr;
    std::vector<double> p_mean, p_stderr;
    std::vector<double> energy_mean, energy_stderr;
    std::size_t count = 0;
};

/// Mean and standard error of <Q>, <P>, <H_D> across trajectory records at
/// the given checkpoint times (which must exist in every record's fine grid).
/// Summation order is fixed by the input order.
EnsembleSummary ensemble_reduce(const std::vector<TrajectoryRecord>& records,
                                const std::vector<double>& checkpoints,
                                double time_tol = 1e-9);

}  // namespace qduff
