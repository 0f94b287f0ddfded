#include "qduff/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qduff {

double FockState::norm_sq() const {
    double s = 0.0;
    for (const auto& c : amplitudes) s += std::norm(c);
    return s;
}

double FockState::norm() const { return std::sqrt(norm_sq()); }

double FockState::leakage() const {
    const std::size_t n = amplitudes.size();
    if (n < 2) return norm_sq();
    return std::norm(amplitudes[n - 1]) + std::norm(amplitudes[n - 2]);
}

BandedOperator::BandedOperator(std::size_t cutoff, int half_bandwidth, bool hermitian)
    : n_(cutoff), b_(half_bandwidth), hermitian_(hermitian),
      diags_(2 * half_bandwidth + 1, std::vector<Complex>(cutoff, Complex{0.0, 0.0})) {}

Complex& BandedOperator::at(std::size_t row, int offset) {
    return diags_[static_cast<std::size_t>(offset + b_)][row];
}

Complex BandedOperator::at(std::size_t row, int offset) const {
    return diags_[static_cast<std::size_t>(offset + b_)][row];
}

Complex BandedOperator::entry(std::size_t m, std::size_t n) const {
    const long off = static_cast<long>(n) - static_cast<long>(m);
    if (off < -b_ || off > b_ || m >= n_ || n >= n_) return {0.0, 0.0};
    return at(m, static_cast<int>(off));
}

void BandedOperator::apply(const std::vector<Complex>& x, std::vector<Complex>& y) const {
    if (x.size() != n_) throw Error("BandedOperator::apply: cutoff mismatch");
    y.assign(n_, Complex{0.0, 0.0});
    apply_add(x, Complex{1.0, 0.0}, y);
}

void BandedOperator::apply_add(const std::vector<Complex>& x, Complex c,
                               std::vector<Complex>& y) const {
    if (x.size() != n_ || y.size() != n_) throw Error("BandedOperator::apply_add: cutoff mismatch");
    const long n = static_cast<long>(n_);
    for (int o = -b_; o <= b_; ++o) {
        const auto& d = diags_[static_cast<std::size_t>(o + b_)];
        const long lo = std::max<long>(0, -o);
        const long hi = std::min<long>(n, n - o);
        for (long m = lo; m < hi; ++m) {
            y[static_cast<std::size_t>(m)] +=
                c * d[static_cast<std::size_t>(m)] * x[static_cast<std::size_t>(m + o)];
        }
    }
}

BandedOperator BandedOperator::adjoint() const {
    BandedOperator r(n_, b_, hermitian_);
    for (int o = -b_; o <= b_; ++o) {
        for (std::size_t m = 0; m < n_; ++m) {
            const long col = static_cast<long>(m) + o;
            if (col < 0 || col >= static_cast<long>(n_)) continue;
            // A^dag(col, m) = conj(A(m, col))
            r.at(static_cast<std::size_t>(col), -o) = std::conj(at(m, o));
        }
    }
    return r;
}

BandedOperator operator*(const BandedOperator& a, const BandedOperator& b) {
    if (a.n_ != b.n_) throw Error("banded multiply: cutoff mismatch");
    const long n = static_cast<long>(a.n_);
    BandedOperator c(a.n_, a.b_ + b.b_, false);
    for (long m = 0; m < n; ++m) {
        for (int oa = -a.b_; oa <= a.b_; ++oa) {
            const long k = m + oa;
            if (k < 0 || k >= n) continue;
            const Complex am = a.at(static_cast<std::size_t>(m), oa);
            if (am == Complex{0.0, 0.0}) continue;
            for (int ob = -b.b_; ob <= b.b_; ++ob) {
                const long col = k + ob;
                if (col < 0 || col >= n) continue;
                c.at(static_cast<std::size_t>(m), static_cast<int>(col - m)) +=
                    am * b.at(static_cast<std::size_t>(k), ob);
            }
        }
    }
    return c;
}

BandedOperator operator+(const BandedOperator& a, const BandedOperator& b) {
    if (a.n_ != b.n_) throw Error("banded add: cutoff mismatch");
    BandedOperator c(a.n_, std::max(a.b_, b.b_), a.hermitian_ && b.hermitian_);
    for (int o = -c.b_; o <= c.b_; ++o) {
        for (std::size_t m = 0; m < a.n_; ++m) {
            Complex v{0.0, 0.0};
            if (o >= -a.b_ && o <= a.b_) v += a.at(m, o);
            if (o >= -b.b_ && o <= b.b_) v += b.at(m, o);
            c.at(m, o) = v;
        }
    }
    return c;
}

BandedOperator operator-(const BandedOperator& a, const BandedOperator& b) {
    return a + (Complex{-1.0, 0.0} * b);
}

BandedOperator operator*(Complex c, const BandedOperator& a) {
    BandedOperator r = a;
    const bool real_scale = (c.imag() == 0.0);
    r.hermitian_ = a.hermitian_ && real_scale;
    for (auto& d : r.diags_)
        for (auto& v : d) v *= c;
    return r;
}

BandedOperator BandedOperator::identity(std::size_t cutoff) {
    BandedOperator id(cutoff, 0, true);
    for (std::size_t m = 0; m < cutoff; ++m) id.at(m, 0) = 1.0;
    return id;
}

StandardOps build_standard_ops(std::size_t cutoff) {
    if (cutoff < 2) throw Error("build_standard_ops: cutoff must be >= 2");
    StandardOps ops;
    const std::size_t n = cutoff;

    BandedOperator a(n, 1, false);
    for (std::size_t m = 0; m + 1 < n; ++m) a.at(m, +1) = std::sqrt(static_cast<double>(m + 1));
    ops.a = a;
    ops.adag = a.adjoint();

    BandedOperator num(n, 0, true);
    for (std::size_t m = 0; m < n; ++m) num.at(m, 0) = static_cast<double>(m);
    ops.n = num;

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    ops.q = inv_sqrt2 * (ops.a + ops.adag);
    ops.q.set_hermitian(true);
    ops.p = Complex{0.0, inv_sqrt2} * (ops.adag - ops.a);
    ops.p.set_hermitian(true);

    // Composites by exact banded multiplication.
    ops.q2 = ops.q * ops.q;
    ops.q2.set_hermitian(true);
    ops.p2 = ops.p * ops.p;
    ops.p2.set_hermitian(true);
    ops.q4 = ops.q2 * ops.q2;
    ops.q4.set_hermitian(true);
    ops.qp_sym = ops.q * ops.p + ops.p * ops.q;
    ops.qp_sym.set_hermitian(true);
    return ops;
}

CoherentResult coherent_state(Complex alpha, std::size_t cutoff, double deficit_tol) {
    if (cutoff < 2) throw Error("coherent_state: cutoff must be >= 2");
    FockState st(cutoff);
    // c_n = exp(-|a|^2/2) a^n / sqrt(n!), built recursively.
    Complex c = std::exp(Complex{-0.5 * std::norm(alpha), 0.0});
    for (std::size_t nlev = 0; nlev < cutoff; ++nlev) {
        st.amplitudes[nlev] = c;
        c *= alpha / std::sqrt(static_cast<double>(nlev + 1));
    }
    const double deficit = 1.0 - st.norm_sq();
    if (deficit > deficit_tol) {
        const double amag = std::abs(alpha);
        std::ostringstream msg;
        msg << "coherent_state: truncation deficit " << deficit << " exceeds tolerance "
            << deficit_tol << " at cutoff " << cutoff << "; estimated required cutoff "
            << static_cast<std::size_t>(std::ceil(amag * amag + 8.0 * amag));
        throw TruncationError(msg.str());
    }
    renormalize(st);
    return CoherentResult{std::move(st), deficit};
}

FockState apply(const BandedOperator& op, const FockState& state) {
    if (op.cutoff() != state.cutoff()) throw Error("apply: cutoff mismatch");
    FockState out(state.cutoff());
    out.frame_q = state.frame_q;
    out.frame_p = state.frame_p;
    op.apply(state.amplitudes, out.amplitudes);
    return out;
}

Complex expectation(const FockState& state, const BandedOperator& op, double norm_tol) {
    if (op.cutoff() != state.cutoff()) throw Error("expectation: cutoff mismatch");
    const double nrm = state.norm();
    if (std::abs(nrm - 1.0) > norm_tol) {
        throw Error("expectation: state norm " + std::to_string(nrm) +
                    " outside unit tolerance " + std::to_string(norm_tol));
    }
    return matrix_element(state, op, state);
}

Complex matrix_element(const FockState& bra, const BandedOperator& op, const FockState& ket) {
    std::vector<Complex> tmp;
    op.apply(ket.amplitudes, tmp);
    Complex s{0.0, 0.0};
    for (std::size_t m = 0; m < tmp.size(); ++m) s += std::conj(bra.amplitudes[m]) * tmp[m];
    return s;
}

RenormalizeResult renormalize(FockState& state) {
    const double n2 = state.norm_sq();
    if (!(n2 > 0.0)) throw Error("renormalize: zero (or non-finite) state vector");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& c : state.amplitudes) c *= inv;
    return RenormalizeResult{std::abs(1.0 - n2)};
}

void displace_frame(FockState& state, double dq, double dp,
                    double series_tol, double leakage_bound) {
    if (dq == 0.0 && dp == 0.0) return;
    const std::size_t n = state.cutoff();
    const Complex delta_alpha = Complex{dq, dp} / std::sqrt(2.0);

    // Amplitudes pick up D(-delta_alpha) = exp(A) with
    // A = -delta_alpha a^dag + conj(delta_alpha) a, applied as
    // (exp(A / 2^s))^(2^s) with the inner exponential summed as a Taylor
    // series of banded applies.
    BandedOperator gen(n, 1, false);
    for (std::size_t m = 0; m + 1 < n; ++m) {
        const double sq = std::sqrt(static_cast<double>(m + 1));
        gen.at(m + 1, -1) = -delta_alpha * sq;        // a^dag part
        gen.at(m, +1) = std::conj(delta_alpha) * sq;  // conj a part
    }

    // Crude norm bound ||A|| <= 2 |delta_alpha| sqrt(N); scale until <= 0.5.
    const double bound = 2.0 * std::abs(delta_alpha) * std::sqrt(static_cast<double>(n));
    int scalings = 0;
    double scaled = bound;
    while (scaled > 0.5 && scalings < 60) {
        scaled *= 0.5;
        ++scalings;
    }
    const double factor = std::ldexp(1.0, -scalings);

    std::vector<Complex> term = state.amplitudes;
    std::vector<Complex> next(n);
    const long reps = 1L << scalings;
    for (long r = 0; r < reps; ++r) {
        std::vector<Complex> acc = state.amplitudes;
        term = state.amplitudes;
        for (int k = 1; k <= 200; ++k) {
            gen.apply(term, next);
            const Complex coef = Complex{factor / static_cast<double>(k), 0.0};
            for (std::size_t m = 0; m < n; ++m) next[m] *= coef;
            term.swap(next);
            double tn = 0.0;
            for (const auto& c : term) tn += std::norm(c);
            for (std::size_t m = 0; m < n; ++m) acc[m] += term[m];
            if (tn < series_tol * series_tol) break;
        }
        state.amplitudes = acc;
    }

    state.frame_q += dq;
    state.frame_p += dp;

    if (state.leakage() > leakage_bound) {
        std::ostringstream msg;
        msg << "displace_frame: top-two-level population " << state.leakage()
            << " exceeds bound " << leakage_bound << " after shift (dq=" << dq
            << ", dp=" << dp << "); increase the Fock cutoff";
        throw TruncationError(msg.str());
    }
}

}  // namespace qduff
