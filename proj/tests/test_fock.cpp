#include <doctest.h>

#include <cmath>
#include <random>

#include "qduff/fock.hpp"

using namespace qduff;

namespace {

// Independent oracle: coherent amplitudes via lgamma, centroid by direct
// summation of the Poisson-weighted series.
std::vector<Complex> coherent_amplitudes_oracle(Complex alpha, std::size_t n) {
    std::vector<Complex> c(n);
    const double a2 = std::norm(alpha);
    for (std::size_t k = 0; k < n; ++k) {
        const double logmag = -0.5 * a2 + static_cast<double>(k) * std::log(std::abs(alpha)) -
                              0.5 * std::lgamma(static_cast<double>(k) + 1.0);
        const double phase = static_cast<double>(k) * std::arg(alpha);
        c[k] = std::exp(logmag) * Complex{std::cos(phase), std::sin(phase)};
    }
    return c;
}

double centroid_q_oracle(const std::vector<Complex>& c) {
    Complex ea{0, 0};
    for (std::size_t k = 0; k + 1 < c.size(); ++k)
        ea += std::conj(c[k]) * std::sqrt(static_cast<double>(k + 1)) * c[k + 1];
    return std::sqrt(2.0) * ea.real();
}

FockState basis_state(std::size_t level, std::size_t n) {
    FockState st(n);
    st.amplitudes[level] = 1.0;
    return st;
}

FockState random_state(std::mt19937& rng, std::size_t n, std::size_t support) {
    std::normal_distribution<double> dist;
    FockState st(n);
    for (std::size_t k = 0; k < std::min(support, n); ++k)
        st.amplitudes[k] = Complex{dist(rng), dist(rng)};
    renormalize(st);
    return st;
}

}  // namespace

TEST_CASE("coherent state: vacuum") {
    const auto res = coherent_state(Complex{0, 0}, 16);
    CHECK(res.deficit == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::abs(res.state.amplitudes[0] - Complex{1, 0}) < 1e-15);
    for (std::size_t k = 1; k < 16; ++k) CHECK(std::abs(res.state.amplitudes[k]) == 0.0);
}

TEST_CASE("coherent state: centroid matches the summation oracle") {
    const Complex alpha{0.7, -0.2};
    const auto res = coherent_state(alpha, 40);
    const auto ops = build_standard_ops(40);
    const double q = expectation(res.state, ops.q).real();
    const double p = expectation(res.state, ops.p).real();
    CHECK(q == doctest::Approx(1.4 / std::sqrt(2.0)).epsilon(1e-8));
    CHECK(p == doctest::Approx(-0.4 / std::sqrt(2.0)).epsilon(1e-8));
    // cross-check against the independent series
    const auto oracle = coherent_amplitudes_oracle(alpha, 40);
    CHECK(q == doctest::Approx(centroid_q_oracle(oracle)).epsilon(1e-10));
}

TEST_CASE("coherent state: truncation error names a cutoff estimate") {
    // Poisson tail oracle for |alpha|^2 = 4 over levels 0..5
    double kept = 0.0;
    const auto oracle = coherent_amplitudes_oracle(Complex{2, 0}, 6);
    for (const auto& c : oracle) kept += std::norm(c);
    CHECK(1.0 - kept > 0.1);
    CHECK_THROWS_AS(coherent_state(Complex{2, 0}, 6), TruncationError);
    try {
        coherent_state(Complex{2, 0}, 6);
    } catch (const TruncationError& e) {
        CHECK(std::string(e.what()).find("required cutoff") != std::string::npos);
        CHECK(std::string(e.what()).find("20") != std::string::npos);  // 4 + 16
    }
}

TEST_CASE("standard ops: vacuum moments and ladder rule") {
    const auto ops = build_standard_ops(16);
    const FockState vac = basis_state(0, 16);
    CHECK(expectation(vac, ops.q2).real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(expectation(vac, ops.p2).real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(expectation(vac, ops.q4).real() == doctest::Approx(0.75).epsilon(1e-12));

    const FockState three = basis_state(3, 16);
    const FockState lowered = apply(ops.a, three);
    CHECK(std::abs(lowered.amplitudes[2] - std::sqrt(3.0)) < 1e-14);
    for (std::size_t k = 0; k < 16; ++k)
        if (k != 2) CHECK(std::abs(lowered.amplitudes[k]) == 0.0);
}

TEST_CASE("canonical commutator below the truncation boundary") {
    std::mt19937 rng(7);
    for (std::size_t n : {8u, 32u, 128u}) {
        const auto ops = build_standard_ops(n);
        const BandedOperator comm = ops.q * ops.p - ops.p * ops.q;
        const FockState v = random_state(rng, n, n - 2);
        FockState cv = apply(comm, v);
        double resid = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            resid += std::norm(cv.amplitudes[k] - Complex{0, 1} * v.amplitudes[k]);
        CHECK(std::sqrt(resid) < 1e-10);
    }
}

TEST_CASE("apply: identity, coherent eigenrelation, linearity") {
    const auto ops = build_standard_ops(40);
    const auto psi = coherent_state(Complex{0.5, 0.0}, 40).state;

    const FockState same = apply(BandedOperator::identity(40), psi);
    for (std::size_t k = 0; k < 40; ++k)
        CHECK(std::abs(same.amplitudes[k] - psi.amplitudes[k]) == 0.0);

    const FockState a_psi = apply(ops.a, psi);
    double resid = 0.0;
    for (std::size_t k = 0; k < 40; ++k)
        resid += std::norm(a_psi.amplitudes[k] - 0.5 * psi.amplitudes[k]);
    CHECK(std::sqrt(resid) < 1e-8);

    const FockState nthree = apply(ops.n, basis_state(3, 40));
    CHECK(std::abs(nthree.amplitudes[3] - Complex{3, 0}) < 1e-14);

    // linearity
    std::mt19937 rng(11);
    const FockState u = random_state(rng, 40, 40);
    const FockState w = random_state(rng, 40, 40);
    const Complex ca{0.3, -0.8}, cb{-1.1, 0.2};
    FockState mix(40);
    for (std::size_t k = 0; k < 40; ++k)
        mix.amplitudes[k] = ca * u.amplitudes[k] + cb * w.amplitudes[k];
    const FockState lhs = apply(ops.q4, mix);
    const FockState ru = apply(ops.q4, u);
    const FockState rw = apply(ops.q4, w);
    for (std::size_t k = 0; k < 40; ++k)
        CHECK(std::abs(lhs.amplitudes[k] - (ca * ru.amplitudes[k] + cb * rw.amplitudes[k])) <
              1e-12);

    FockState small(8);
    CHECK_THROWS_AS(apply(ops.q, small), Error);
}

TEST_CASE("expectation: eigenvalue, guard on unnormalized states, hermitian realness") {
    const auto ops = build_standard_ops(32);
    CHECK(expectation(basis_state(3, 32), ops.n).real() == doctest::Approx(3.0));

    FockState half = basis_state(2, 32);
    half.amplitudes[2] = 0.5;
    CHECK_THROWS_AS(expectation(half, ops.n), Error);

    std::mt19937 rng(3);
    for (int i = 0; i < 100; ++i) {
        const FockState v = random_state(rng, 32, 32);
        for (const BandedOperator* op : {&ops.q, &ops.p, &ops.q2, &ops.q4, &ops.qp_sym}) {
            CHECK(op->hermitian());
            CHECK(std::abs(expectation(v, *op).imag()) < 1e-12);
        }
    }
}

TEST_CASE("renormalize: deficit bookkeeping") {
    auto psi = coherent_state(Complex{0.3, 0.1}, 24).state;
    const auto r0 = renormalize(psi);
    CHECK(r0.deficit < 1e-12);

    FockState doubled = psi;
    for (auto& c : doubled.amplitudes) c *= 2.0;
    const auto r1 = renormalize(doubled);
    CHECK(r1.deficit == doctest::Approx(3.0).epsilon(1e-12));
    for (std::size_t k = 0; k < 24; ++k)
        CHECK(std::abs(doubled.amplitudes[k] - psi.amplitudes[k]) < 1e-14);

    FockState zero(8);
    CHECK_THROWS_AS(renormalize(zero), Error);
}

TEST_CASE("displace_frame: identity, vacuum recentering, round trip") {
    auto psi = coherent_state(Complex{0.7, -0.2}, 48).state;
    FockState copy = psi;
    displace_frame(copy, 0.0, 0.0);
    for (std::size_t k = 0; k < 48; ++k)
        CHECK(std::abs(copy.amplitudes[k] - psi.amplitudes[k]) == 0.0);

    // Moving the origin onto the centroid leaves (up to phase) the vacuum.
    FockState centered = psi;
    const double q0 = std::sqrt(2.0) * 0.7;
    const double p0 = std::sqrt(2.0) * -0.2;
    displace_frame(centered, q0, p0);
    CHECK(centered.frame_q == doctest::Approx(q0));
    CHECK(std::norm(centered.amplitudes[0]) > 1.0 - 1e-6);

    FockState round = psi;
    displace_frame(round, 1.3, -0.4);
    displace_frame(round, -1.3, 0.4);
    CHECK(round.frame_q == doctest::Approx(0.0).epsilon(1e-14));
    for (std::size_t k = 0; k < 48; ++k)
        CHECK(std::abs(round.amplitudes[k] - psi.amplitudes[k]) < 1e-8);
}

TEST_CASE("displace_frame: physical expectations are frame invariant") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> shift(-3.0, 3.0);
    const std::size_t n = 64;
    const auto ops = build_standard_ops(n);
    for (int trial = 0; trial < 100; ++trial) {
        FockState psi = random_state(rng, n, 8);
        const double dq = shift(rng);
        const double dp = shift(rng);

        const double q_in = expectation(psi, ops.q).real();
        const double p_in = expectation(psi, ops.p).real();
        const double q_phys = psi.frame_q + q_in;
        const double p_phys = psi.frame_p + p_in;
        const double r2_phys = expectation(psi, ops.q2).real() + 2.0 * psi.frame_q * q_in +
                               psi.frame_q * psi.frame_q + expectation(psi, ops.p2).real() +
                               2.0 * psi.frame_p * p_in + psi.frame_p * psi.frame_p;

        displace_frame(psi, dq, dp);
        renormalize(psi);
        const double q_in2 = expectation(psi, ops.q).real();
        const double p_in2 = expectation(psi, ops.p).real();
        CHECK(psi.frame_q + q_in2 == doctest::Approx(q_phys).epsilon(1e-6));
        CHECK(psi.frame_p + p_in2 == doctest::Approx(p_phys).epsilon(1e-6));
        const double r2_after = expectation(psi, ops.q2).real() + 2.0 * psi.frame_q * q_in2 +
                                psi.frame_q * psi.frame_q + expectation(psi, ops.p2).real() +
                                2.0 * psi.frame_p * p_in2 + psi.frame_p * psi.frame_p;
        CHECK(r2_after == doctest::Approx(r2_phys).epsilon(1e-6));
    }
}

TEST_CASE("leakage monitor reports the top two levels") {
    FockState st(10);
    st.amplitudes[8] = 0.6;
    st.amplitudes[9] = 0.8;
    CHECK(st.leakage() == doctest::Approx(1.0));
    CHECK(basis_state(0, 10).leakage() == doctest::Approx(0.0));
}
