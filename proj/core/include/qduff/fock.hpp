#pragma once

// Truncated Fock-space linear algebra: states carried in a displaceable
// phase-space frame, operators stored by diagonals.

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qduff {

using Complex = std::complex<double>;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class TruncationError : public Error {
public:
    explicit TruncationError(const std::string& what) : Error(what) {}
};

/// State vector over Fock levels 0..N-1, expressed relative to a phase-space
/// frame at (frame_q, frame_p). Physical centroid = frame offset + in-frame
/// centroid.
struct FockState {
    std::vector<Complex> amplitudes;
    double frame_q = 0.0;
    double frame_p = 0.0;

    FockState() = default;
    explicit FockState(std::size_t cutoff) : amplitudes(cutoff, Complex{0.0, 0.0}) {}

    std::size_t cutoff() const { return amplitudes.size(); }

    double norm_sq() const;
    double norm() const;

    /// Population of the top two Fock levels (truncation leakage monitor).
    double leakage() const;
};

/// Banded matrix stored by diagonals. diag(o) holds entries A(m, m+o) for
/// offset o in [-b, +b]; slot index m runs over rows, entries outside the
/// matrix are kept zero. Apply cost is O(N * b).
class BandedOperator {
public:
    BandedOperator() = default;
    BandedOperator(std::size_t cutoff, int half_bandwidth, bool hermitian = false);

    std::size_t cutoff() const { return n_; }
    int half_bandwidth() const { return b_; }
    bool hermitian() const { return hermitian_; }
    void set_hermitian(bool h) { hermitian_ = h; }

    Complex& at(std::size_t row, int offset);
    Complex at(std::size_t row, int offset) const;

    /// Dense entry A(m, n); zero outside the band.
    Complex entry(std::size_t m, std::size_t n) const;

    /// y = A x (exact banded matrix-vector product).
    void apply(const std::vector<Complex>& x, std::vector<Complex>& y) const;

    /// y += c * (A x)
    void apply_add(const std::vector<Complex>& x, Complex c, std::vector<Complex>& y) const;

    BandedOperator adjoint() const;

    friend BandedOperator operator*(const BandedOperator& a, const BandedOperator& b);
    friend BandedOperator operator+(const BandedOperator& a, const BandedOperator& b);
    friend BandedOperator operator-(const BandedOperator& a, const BandedOperator& b);
    friend BandedOperator operator*(Complex c, const BandedOperator& a);

    static BandedOperator identity(std::size_t cutoff);

private:
    std::size_t n_ = 0;
    int b_ = 0;
    bool hermitian_ = false;
    // diags_[o + b_][m] = A(m, m+o)
    std::vector<std::vector<Complex>> diags_;
};

/// The ladder/quadrature operator set used by every model. Convention:
/// [Q, P] = i, Q = (a + a^dag)/sqrt(2), P = i (a^dag - a)/sqrt(2).
struct StandardOps {
    BandedOperator a;       // annihilation
    BandedOperator adag;    // creation
    BandedOperator n;       // number
    BandedOperator q;       // position quadrature
    BandedOperator p;       // momentum quadrature
    BandedOperator q2;
    BandedOperator p2;
    BandedOperator q4;
    BandedOperator qp_sym;  // QP + PQ
};

StandardOps build_standard_ops(std::size_t cutoff);

struct CoherentResult {
    FockState state;
    double deficit;  // 1 - sum|c_n|^2 before renormalization
};

/// Coherent state |alpha> truncated to the first N levels, frame at origin.
/// Fails if the truncated Poisson tail exceeds deficit_tol.
CoherentResult coherent_state(Complex alpha, std::size_t cutoff, double deficit_tol = 1e-8);

/// y = op |state>, frame unchanged, not renormalized.
FockState apply(const BandedOperator& op, const FockState& state);

/// <psi|op|psi> in the state's frame. Requires unit norm within norm_tol.
Complex expectation(const FockState& state, const BandedOperator& op, double norm_tol = 1e-6);

/// Inner product <bra|op|ket> without normalization checks.
Complex matrix_element(const FockState& bra, const BandedOperator& op, const FockState& ket);

struct RenormalizeResult {
    double deficit;  // |1 - previous squared norm|
};

RenormalizeResult renormalize(FockState& state);

/// Re-express the state in a frame shifted by (dq, dp). Physical expectation
/// values are invariant; amplitudes are displaced by D(-delta_alpha) with
/// delta_alpha = (dq + i dp)/sqrt(2), evaluated as a scaled exponential series.
/// Fails if the displaced state leaks past leakage_bound in the top two levels.
void displace_frame(FockState& state, double dq, double dp,
                    double series_tol = 1e-12, double leakage_bound = 1e-3);

}  // namespace qduff
