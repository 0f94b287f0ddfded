#include "qduff/model.hpp"

#include <cmath>

namespace qduff {

void PhysicalParams::validate() const {
    if (!(m > 0.0) || !(omega0 > 0.0) || !(l > 0.0) || !(omega > 0.0) || !(hbar > 0.0))
        throw Error("PhysicalParams: m, omega0, l, omega, hbar must be positive");
    if (g < 0.0 || gamma < 0.0) throw Error("PhysicalParams: g and gamma must be >= 0");
}

void ModelParams::validate() const {
    if (!(beta > 0.0)) throw Error("ModelParams: beta must be positive");
    if (Gamma < 0.0) throw Error("ModelParams: Gamma must be >= 0");
    if (!(Omega > 0.0)) throw Error("ModelParams: Omega must be positive");
}

ModelParams reduce_params(const PhysicalParams& p) {
    p.validate();
    ModelParams mp;
    mp.Gamma = p.gamma / p.omega0;
    mp.Omega = p.omega / p.omega0;
    mp.beta = std::sqrt(p.hbar / (p.m * p.l * p.l * p.omega0));
    mp.g = p.g;
    return mp;
}

WellGeometry well_geometry(const ModelParams& params) {
    params.validate();
    WellGeometry w;
    w.q_well = 1.0 / params.beta;
    w.barrier_energy = 0.0;
    const double depth = 1.0 / (4.0 * params.beta * params.beta);
    w.well_depth = -depth;
    w.well_frequency = std::sqrt(2.0);
    w.zero_point_ratio = (0.5 * std::sqrt(2.0)) / depth;
    return w;
}

double ModelOps::drive_coefficient(double t) const {
    return -(params.g / params.beta) * std::cos(params.Omega * t);
}

ModelOps build_model(const ModelParams& params, std::size_t cutoff) {
    params.validate();
    const StandardOps ops = build_standard_ops(cutoff);
    const double b2 = params.beta * params.beta;

    ModelOps m;
    m.params = params;
    m.h_d = Complex{0.5, 0.0} * ops.p2 + Complex{0.25 * b2, 0.0} * ops.q4 +
            Complex{-0.5, 0.0} * ops.q2;
    m.h_d.set_hermitian(true);
    m.h_r = Complex{0.5 * params.Gamma, 0.0} * ops.qp_sym;
    m.h_r.set_hermitian(true);
    m.q_drive = ops.q;
    const double sg = std::sqrt(params.Gamma);
    m.k = Complex{sg, 0.0} * ops.q + Complex{0.0, sg} * ops.p;
    return m;
}

double ShiftedModelOps::drive_coefficient(double t) const {
    return -(params.g / params.beta) * std::cos(params.Omega * t);
}

ShiftedModelOps build_shifted_model(const ModelParams& params, std::size_t cutoff,
                                    double frame_q, double frame_p) {
    params.validate();
    const StandardOps ops = build_standard_ops(cutoff);
    const double qb = frame_q;
    const double pb = frame_p;
    const double b2 = params.beta * params.beta;

    // Powers of the shifted position: (Q+qb)^k expanded over {1, Q, Q^2, Q^3, Q^4}.
    const BandedOperator q3 = ops.q2 * ops.q;

    auto scal = [](double v) { return Complex{v, 0.0}; };

    // H_D(Q+qb, P+pb) without the pure-scalar part.
    BandedOperator h_d_shift =
        scal(0.5) * ops.p2 + scal(pb) * ops.p +
        scal(0.25 * b2) * ops.q4 + scal(b2 * qb) * q3 +
        scal(1.5 * b2 * qb * qb - 0.5) * ops.q2 +
        scal(b2 * qb * qb * qb - qb) * ops.q;
    h_d_shift.set_hermitian(true);

    const double h_d_scalar = 0.5 * pb * pb + 0.25 * b2 * qb * qb * qb * qb - 0.5 * qb * qb;

    // H_R(Q+qb, P+pb) = (Gamma/2)[(QP+PQ) + 2 pb Q + 2 qb P] + scalar.
    BandedOperator h_r_shift = scal(0.5 * params.Gamma) * ops.qp_sym +
                               scal(params.Gamma * pb) * ops.q +
                               scal(params.Gamma * qb) * ops.p;
    h_r_shift.set_hermitian(true);

    ShiftedModelOps s;
    s.params = params;
    s.frame_q = qb;
    s.frame_p = pb;
    s.h0 = h_d_shift + h_r_shift;
    s.h0.set_hermitian(true);
    s.q_drive = ops.q;

    const double sg = std::sqrt(params.Gamma);
    BandedOperator k = Complex{sg, 0.0} * ops.q + Complex{0.0, sg} * ops.p;
    const Complex k_scalar = Complex{sg * qb, sg * pb};
    s.k = k + k_scalar * BandedOperator::identity(cutoff);
    s.k_dag = s.k.adjoint();
    s.kdk = s.k_dag * s.k;
    s.kdk.set_hermitian(true);

    s.h_d_full = h_d_shift + scal(h_d_scalar) * BandedOperator::identity(cutoff);
    s.h_d_full.set_hermitian(true);
    return s;
}

double energy(const FockState& state, const ModelParams& params) {
    if (state.frame_q == 0.0 && state.frame_p == 0.0) {
        const ModelOps m = build_model(params, state.cutoff());
        return expectation(state, m.h_d).real();
    }
    const ShiftedModelOps s =
        build_shifted_model(params, state.cutoff(), state.frame_q, state.frame_p);
    return expectation(state, s.h_d_full).real();
}

}  // namespace qduff
