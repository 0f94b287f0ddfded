#pragma once

// Dimensionless quantum Duffing model: Hamiltonian parts, Lindblad operator,
// parameter reduction from physical units, classical potential geometry.

#include "qduff/fock.hpp"

namespace qduff {

struct PhysicalParams {
    double m;       // mass
    double omega0;  // natural frequency
    double l;       // well half-separation length
    double gamma;   // damping rate
    double omega;   // drive frequency
    double g;       // dimensionless drive amplitude
    double hbar;

    void validate() const;
};

struct ModelParams {
    double Gamma = 0.3;  // dimensionless damping
    double g = 0.3;      // drive amplitude
    double Omega = 1.0;  // dimensionless drive frequency
    double beta = 1.0;   // relative quantum scale (beta^2 is the system-size parameter)

    void validate() const;
};

ModelParams reduce_params(const PhysicalParams& p);

struct WellGeometry {
    double q_well;          // minima at Q = +-1/beta
    double barrier_energy;  // V(0) = 0
    double well_depth;      // -1/(4 beta^2)
    double well_frequency;  // sqrt(2)
    double zero_point_ratio;  // (sqrt(2)/2) / (1/(4 beta^2)); >= 1 flags the single-well regime
};

WellGeometry well_geometry(const ModelParams& params);

/// Operator content of the model at a given cutoff. The drive is the pair
/// (q_drive, drive_coefficient(t)); the full generator is
/// H(t) = h_d + h_r + drive_coefficient(t) * q_drive.
struct ModelOps {
    ModelParams params;
    BandedOperator h_d;      // 1/2 P^2 + (beta^2/4) Q^4 - 1/2 Q^2, hermitian, b=4
    BandedOperator h_r;      // (Gamma/2)(QP + PQ), hermitian, b=2
    BandedOperator q_drive;  // Q; schedule c(t) = -(g/beta) cos(Omega t)
    BandedOperator k;        // sqrt(Gamma)(Q + iP) = sqrt(2 Gamma) a

    double drive_coefficient(double t) const;
};

ModelOps build_model(const ModelParams& params, std::size_t cutoff);

/// Same operator content expressed in a frame shifted by (frame_q, frame_p):
/// Q -> Q + frame_q, P -> P + frame_p by exact polynomial expansion. Pure
/// scalar terms are dropped from the Hamiltonian parts (state-independent
/// phase); K keeps its scalar term. h_d_full keeps the scalars so that
/// expectations of it are the physical <H_D>.
struct ShiftedModelOps {
    ModelParams params;
    double frame_q = 0.0;
    double frame_p = 0.0;
    BandedOperator h0;        // h_d + h_r in-frame, scalars dropped
    BandedOperator q_drive;   // in-frame Q (scalar dropped)
    BandedOperator k;         // in-frame K including scalar
    BandedOperator k_dag;     // adjoint of k, cached for the integrator
    BandedOperator kdk;       // Kd K, cached for the integrator
    BandedOperator h_d_full;  // in-frame H_D including scalar (for energy records)

    double drive_coefficient(double t) const;
};

ShiftedModelOps build_shifted_model(const ModelParams& params, std::size_t cutoff,
                                    double frame_q, double frame_p);

/// Physical <H_D> of a (possibly frame-offset) state.
double energy(const FockState& state, const ModelParams& params);

}  // namespace qduff
