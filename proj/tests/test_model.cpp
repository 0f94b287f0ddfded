#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "qduff/classical.hpp"
#include "qduff/lindblad.hpp"
#include "qduff/model.hpp"

using namespace qduff;

namespace {

// Independent dense construction of H_D from ladder matrices.
Eigen::MatrixXcd dense_h_d(std::size_t n, double beta) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t k = 0; k + 1 < n; ++k) a(k, k + 1) = std::sqrt(static_cast<double>(k + 1));
    const Eigen::MatrixXcd ad = a.adjoint();
    const Eigen::MatrixXcd q = (a + ad) / std::sqrt(2.0);
    const Eigen::MatrixXcd p = Complex{0, 1} * (ad - a) / std::sqrt(2.0);
    return 0.5 * p * p + 0.25 * beta * beta * q * q * q * q - 0.5 * q * q;
}

Eigen::VectorXcd to_vec(const FockState& st) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(st.cutoff()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = st.amplitudes[static_cast<std::size_t>(i)];
    return v;
}

}  // namespace

TEST_CASE("reduce_params") {
    const ModelParams unit = reduce_params({1, 1, 1, 0.3, 1, 0.3, 1});
    CHECK(unit.Gamma == doctest::Approx(0.3));
    CHECK(unit.g == doctest::Approx(0.3));
    CHECK(unit.Omega == doctest::Approx(1.0));
    CHECK(unit.beta == doctest::Approx(1.0));

    const ModelParams wide = reduce_params({1, 1, 10, 0.3, 1, 0.3, 1});
    CHECK(wide.beta == doctest::Approx(0.1));
    CHECK(wide.Gamma == doctest::Approx(unit.Gamma));
    CHECK(wide.Omega == doctest::Approx(unit.Omega));

    // the chaotic reference set corresponds to gamma = 0.125 omega0, omega = omega0
    const ModelParams fixed = reduce_params({1, 2, 1, 0.25, 2, 0.3, 4});
    CHECK(fixed.Gamma == doctest::Approx(0.125));
    CHECK(fixed.Omega == doctest::Approx(1.0));
}

TEST_CASE("build_model: vacuum energy, drive schedule, damping matrix element") {
    ModelParams mp{0.125, 0.3, 1.0, 0.3};
    const ModelOps m = build_model(mp, 24);
    FockState vac(24);
    vac.amplitudes[0] = 1.0;
    CHECK(expectation(vac, m.h_d).real() ==
          doctest::Approx(3.0 * 0.09 / 16.0).epsilon(1e-12));
    CHECK(m.drive_coefficient(0.0) == doctest::Approx(-1.0).epsilon(1e-12));

    FockState one(24);
    one.amplitudes[1] = 1.0;
    CHECK(std::abs(matrix_element(vac, m.k, one) - Complex{0.5, 0.0}) < 1e-12);

    ModelParams bad = mp;
    bad.beta = 0.0;
    CHECK_THROWS_AS(build_model(bad, 24), Error);
}

TEST_CASE("hermiticity and positivity of the dissipator kernel") {
    const ModelOps m = build_model({0.3, 0.3, 1.0, 0.5}, 20);
    const DenseMatrix hd = to_dense(m.h_d);
    const DenseMatrix hr = to_dense(m.h_r);
    CHECK((hd - hd.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((hr - hr.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    const DenseMatrix k = to_dense(m.k);
    const DenseMatrix kdk = k.adjoint() * k;
    CHECK((kdk - kdk.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(kdk, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("well geometry across regimes") {
    const WellGeometry deep = well_geometry({0.3, 0.3, 1.0, 1.0});
    CHECK(deep.q_well == doctest::Approx(1.0));
    CHECK(deep.well_depth == doctest::Approx(-0.25));
    CHECK(deep.well_frequency == doctest::Approx(std::sqrt(2.0)));
    CHECK(deep.zero_point_ratio == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(deep.zero_point_ratio > 1.0);

    const WellGeometry mid = well_geometry({0.3, 0.3, 1.0, 0.3});
    CHECK(mid.q_well == doctest::Approx(1.0 / 0.3));
    CHECK(mid.well_depth == doctest::Approx(-2.77777777778).epsilon(1e-9));
    CHECK(mid.zero_point_ratio < 1.0);

    const WellGeometry tiny = well_geometry({0.3, 0.3, 1.0, 0.01});
    CHECK(tiny.q_well == doctest::Approx(100.0));
    CHECK(tiny.well_depth == doctest::Approx(-2500.0));
}

TEST_CASE("energy: vacuum, well-bottom coherent state, frame independence") {
    ModelParams mp{0.3, 0.3, 1.0, 0.3};
    FockState vac(32);
    vac.amplitudes[0] = 1.0;
    CHECK(energy(vac, mp) == doctest::Approx(3.0 * 0.09 / 16.0).epsilon(1e-12));

    // Coherent state at the well bottom (physical centroid (1/beta, 0)),
    // pinned by a dense-matrix evaluation at N=200.
    const double q0 = 1.0 / mp.beta;
    const Complex alpha{q0 / std::sqrt(2.0), 0.0};
    const auto psi = coherent_state(alpha, 200).state;
    const Eigen::MatrixXcd hd = dense_h_d(200, mp.beta);
    const Eigen::VectorXcd v = to_vec(psi);
    const double dense_val = (v.adjoint() * hd * v)(0, 0).real();
    CHECK(energy(psi, mp) == doctest::Approx(dense_val).epsilon(1e-10));
    // below the barrier top, near well_depth + zero-point correction
    CHECK(energy(psi, mp) < 0.0);
    CHECK(energy(psi, mp) > well_geometry(mp).well_depth);

    // Same physical state carried in a frame centered on the well.
    FockState framed = psi;
    displace_frame(framed, q0, 0.0, 1e-12, 1e-6);
    renormalize(framed);
    CHECK(energy(framed, mp) == doctest::Approx(dense_val).epsilon(1e-8));
}

TEST_CASE("Ehrenfest consistency of the master-equation generator (g=0)") {
    ModelParams mp{0.17, 0.0, 1.0, 0.4};
    const std::size_t n = 48;
    const ShiftedModelOps ops = build_shifted_model(mp, n, 0.0, 0.0);
    const StandardOps so = build_standard_ops(n);
    const BandedOperator q3 = so.q2 * so.q;

    std::mt19937 rng(5);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 5; ++trial) {
        FockState psi(n);
        for (std::size_t k = 0; k < 12; ++k) psi.amplitudes[k] = Complex{dist(rng), dist(rng)};
        renormalize(psi);
        DensityMatrix rho = pure_density(psi);

        const double dt = 1e-5;
        const DenseMatrix drho = master_rhs(rho, 0.0, ops);
        const DenseMatrix rho1 = rho.rho + dt * drho;

        const DenseMatrix qd = to_dense(so.q);
        const DenseMatrix pd = to_dense(so.p);
        const DenseMatrix q3d = to_dense(q3);

        const double dq_dt = ((qd * rho1).trace().real() - (qd * rho.rho).trace().real()) / dt;
        const double dp_dt = ((pd * rho1).trace().real() - (pd * rho.rho).trace().real()) / dt;
        const double eq = (qd * rho.rho).trace().real();
        const double ep = (pd * rho.rho).trace().real();
        const double eq3 = (q3d * rho.rho).trace().real();

        CHECK(dq_dt == doctest::Approx(ep).epsilon(1e-6));
        CHECK(dp_dt ==
              doctest::Approx(eq - mp.beta * mp.beta * eq3 - 2.0 * mp.Gamma * ep).epsilon(1e-6));
    }
}

TEST_CASE("classical-limit scaling of the master equation at beta=0.05") {
    ModelParams mp{0.3, 0.3, 1.0, 0.05};
    const double period = 2.0 * std::numbers::pi;

    // Start at a well bottom: classical (q,p) = (-1, 0), i.e. a coherent
    // state at physical Q = -20 carried in a static frame on the well.
    const double q_phys = -1.0 / mp.beta;
    const std::size_t n = 60;
    FockState psi(n);
    psi.amplitudes[0] = 1.0;
    psi.frame_q = q_phys;

    DensityMatrix rho0 = pure_density(psi);
    std::vector<double> checkpoints;
    for (int i = 1; i <= 16; ++i)
        checkpoints.push_back(2.0 * period * static_cast<double>(i) / 16.0);
    const ObservableSeries series = evolve_density(rho0, mp, 2e-3, checkpoints);

    const ClassicalTrajectory cls =
        integrate({-1.0, 0.0, 0.0}, mp, period / 2048.0, 2.0 * period, false);

    double max_err = 0.0;
    double max_q = 0.0;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        // locate the classical sample at this time
        const double t = checkpoints[i];
        const std::size_t idx = static_cast<std::size_t>(std::lround(t / (period / 2048.0)));
        const double q_cls = cls.samples[idx].q;
        const double q_qm = mp.beta * series.q_exp[i];
        max_err = std::max(max_err, std::abs(q_qm - q_cls));
        max_q = std::max(max_q, std::abs(q_cls));
    }
    CHECK(max_err < 0.02 * max_q);
}
