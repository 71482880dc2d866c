#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "starstab/hamiltonian.hpp"

using namespace starstab;

namespace {

Eigen::MatrixXd orth_range(const Eigen::MatrixXd& M) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    qr.setThreshold(1e-10);
    const Eigen::Index r = qr.rank();
    return qr.householderQ() * Eigen::MatrixXd::Identity(M.rows(), r);
}

Eigen::Index rank_of(const Eigen::MatrixXd& M) {
    if (M.cols() == 0 || M.rows() == 0) return 0;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    qr.setThreshold(1e-10);
    return qr.rank();
}

// smallest |eigenvalue| of the symmetric restriction Q' S Q
double min_abs_eig(const Eigen::MatrixXd& S, const Eigen::MatrixXd& Q) {
    if (Q.cols() == 0) return 1e300;
    Eigen::MatrixXd R = Q.transpose() * S * Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().minCoeff();
}

}  // namespace

TEST_CASE("5x5 nilpotent showcase: exact powers and cubic growth") {
    auto t = nilpotent_5x5();
    Eigen::MatrixXd JL1(5, 5), JL2(5, 5), JL3(5, 5);
    JL1 << 0, 0, 0, 1, 0,
           0, 0, 0, 1, 0,
          -2, 1, 0, 0, 0,
          -1, 1, 0, 0, 0,
           0, 0, 0, 0, 0;
    JL2 << -1, 1, 0, 0, 0,
           -1, 1, 0, 0, 0,
            0, 0, 0,-1, 0,
            0, 0, 0, 0, 0,
            0, 0, 0, 0, 0;
    JL3 << 0, 0, 0, 0, 0,
           0, 0, 0, 0, 0,
           1,-1, 0, 0, 0,
           0, 0, 0, 0, 0,
           0, 0, 0, 0, 0;
    // small-integer arithmetic: the products are exact in doubles
    CHECK(t.JL == JL1);
    CHECK(Eigen::MatrixXd(t.JL * t.JL) == JL2);
    CHECK(Eigen::MatrixXd(t.JL * t.JL * t.JL) == JL3);
    CHECK(Eigen::MatrixXd(t.JL * t.JL * t.JL * t.JL).norm() == 0.0);

    auto tr = trichotomy(t);
    CHECK(tr.d_u == 0);
    CHECK(tr.d_s == 0);
    CHECK(tr.d_c == 5);
    auto fit = growth_degree(t, tr);
    CHECK(fit.degree == 3);
    CHECK(fit.slope == Catch::Approx(3.0).margin(0.2));
}

TEST_CASE("harmonic oscillator: pure rotation, no growth") {
    Eigen::MatrixXd I1 = Eigen::MatrixXd::Identity(1, 1);
    auto t = assemble(I1, I1, I1);
    auto ev = spectrum(t);
    REQUIRE(ev.size() == 2);
    CHECK(std::min(std::abs(ev(0) - std::complex<double>(0, 1)),
                   std::abs(ev(0) + std::complex<double>(0, 1))) < 1e-12);
    auto tr = trichotomy(t);
    CHECK(tr.d_u == 0);
    CHECK(tr.d_c == 2);
    CHECK(growth_degree(t, tr).degree == 0);
}

TEST_CASE("positive energy implies a bounded spectrum on the imaginary axis") {
    std::mt19937 rng(99);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        const int nx = 4, ny = 5;
        Eigen::MatrixXd R(nx, nx), S(ny, ny), B(nx, ny);
        for (auto* M : {&R, &B}) (void)M;
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < nx; ++j) R(i, j) = g(rng);
        for (int i = 0; i < ny; ++i)
            for (int j = 0; j < ny; ++j) S(i, j) = g(rng);
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) B(i, j) = g(rng);
        Eigen::MatrixXd L = R * R.transpose() + 0.1 * Eigen::MatrixXd::Identity(nx, nx);
        Eigen::MatrixXd A = S * S.transpose() + 0.1 * Eigen::MatrixXd::Identity(ny, ny);
        auto t = assemble(L, A, B);
        auto tr = trichotomy(t);
        CHECK(tr.d_u == 0);
        CHECK(tr.d_s == 0);
        CHECK(growth_degree(t, tr).degree == 0);
        for (const auto& ev : spectrum(t)) CHECK(std::fabs(ev.real()) < 1e-8);
    }
}

TEST_CASE("radial pulsation triple reproduces the pencil spectrum") {
    const std::size_t N = 120;
    auto soft = integrate_profile(EquationOfState::polytrope(1.0, 1.3), 1.0, 1e-10, 2000);
    auto t = build_radial_triple(soft, N);
    auto tr = trichotomy(t);
    CHECK(tr.d_u == 1);
    CHECK(tr.d_s == 1);
    const double om2 = assemble_eddington(soft, N).T.eigenvalue(0);
    REQUIRE(om2 < 0.0);
    CHECK(tr.lambda_u == Catch::Approx(std::sqrt(-om2)).epsilon(1e-6));
    // the conserved form vanishes on the unstable and stable directions
    const Eigen::MatrixXd EM = t.energy_matrix();
    for (const auto* E : {&tr.Eu, &tr.Es}) {
        const Eigen::VectorXd w = E->col(0);
        CHECK(std::fabs(w.dot(EM * w)) < 1e-8 * EM.norm() * w.squaredNorm());
    }

    auto stiff = integrate_profile(EquationOfState::polytrope(1.0, 5.0 / 3.0), 1.0,
                                   1e-10, 2000);
    auto t2 = build_radial_triple(stiff, N);
    auto tr2 = trichotomy(t2);
    CHECK(tr2.d_u == 0);
    CHECK(tr2.d_s == 0);
}

TEST_CASE("random corpus: index formula, symmetry, growth caps") {
    std::mt19937 rng(12345);
    int bounded = 0, linear_cap = 0, quad_cap = 0;
    for (int rep = 0; rep < 200; ++rep) {
        auto t = make_random_triple(rng);
        // trichotomy cross-validates the eigenvalue count against the inertia
        // of L on range(BA) internally and throws on any mismatch
        Trichotomy tr;
        REQUIRE_NOTHROW(tr = trichotomy(t));
        CHECK(tr.d_u == tr.d_s);
        CHECK(tr.d_u == negative_index_on_range_BA(t));
        REQUIRE_NOTHROW(spectrum(t));  // closed under conjugation and negation

        // nonzero eigenvalues are semi-simple: each cluster of algebraic
        // multiplicity m leaves an m-dimensional near-null space of JL - z
        Eigen::EigenSolver<Eigen::MatrixXd> es(t.JL);
        const double nrm = std::max(1.0, t.JL.norm());
        std::vector<bool> used(std::size_t(es.eigenvalues().size()), false);
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const std::complex<double> z = es.eigenvalues()(i);
            if (used[std::size_t(i)] || std::abs(z) < 1e-6 * nrm) continue;
            int mult = 0;
            double radius = 0.0;
            for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
                const double d = std::abs(es.eigenvalues()(j) - z);
                if (d < 1e-6 * nrm) {
                    ++mult;
                    used[std::size_t(j)] = true;
                    radius = std::max(radius, d);
                }
            }
            Eigen::MatrixXcd M = t.JL.cast<std::complex<double>>();
            M -= z * Eigen::MatrixXcd::Identity(M.rows(), M.cols());
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
            int small = 0;
            const double th = 10.0 * radius + 1e-7 * nrm;
            for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k)
                if (svd.singularValues()(k) < th) ++small;
            CHECK(small == mult);
        }

        auto fit = growth_degree(t, tr);
        CHECK(fit.degree <= 3);

        // conditional sharp caps, checked whenever the hypothesis holds
        const Eigen::MatrixXd BA = t.B * t.A;
        const Eigen::MatrixXd M1 = t.B.transpose() * t.L * BA;
        const Eigen::MatrixXd Q1 = orth_range(M1);
        if (rank_of(t.A * Q1) == Q1.cols()) {  // A injective on range(B'LBA)
            CHECK(fit.degree <= 2);
            ++quad_cap;
        }
        if (rank_of(BA) == t.nx) {  // BA surjective
            CHECK(fit.degree <= 1);
            ++linear_cap;
        }
        const Eigen::MatrixXd Qb = orth_range(t.B);
        const Eigen::MatrixXd Qbt = orth_range(Eigen::MatrixXd(t.B.transpose()));
        if (min_abs_eig(t.L, Qb) > 1e-6 * std::max(1.0, t.L.norm()) &&
            min_abs_eig(t.A, Qbt) > 1e-6 * std::max(1.0, t.A.norm())) {
            CHECK(fit.degree == 0);  // nondegenerate energy: bounded motion
            ++bounded;
        }
    }
    // the corpus genuinely exercises each hypothesis
    CHECK(bounded > 10);
    CHECK(linear_cap > 10);
    CHECK(quad_cap > 10);
}

TEST_CASE("midpoint evolution conserves the energy form") {
    auto t = nilpotent_5x5();
    Eigen::VectorXd w0(5);
    w0 << 0.3, -1.1, 0.7, 0.2, 0.5;
    auto traj = evolve(t, w0, 100.0, 1e-3, 1000);
    CHECK(traj.energy_drift < 1e-10);

    std::mt19937 rng(7);
    for (int rep = 0; rep < 3; ++rep) {
        auto rt = make_random_triple(rng);
        Eigen::VectorXd w = Eigen::VectorXd::Random(rt.nx + rt.ny);
        auto tj = evolve(rt, w, 10.0, 1e-4, 1000);
        CHECK(tj.energy_drift < 1e-10);
    }
}

TEST_CASE("unstable triple grows at the predicted exponential rate") {
    const std::size_t N = 120;
    auto m = integrate_profile(EquationOfState::polytrope(1.0, 1.3), 1.0, 1e-10, 2000);
    auto t = build_radial_triple(m, N);
    auto tr = trichotomy(t);
    REQUIRE(tr.d_u == 1);
    Eigen::VectorXd w0 = tr.Eu.col(0);
    w0 /= w0.norm();
    const double dt = 2e-4, t_end = 20.0;  // 1e5 midpoint steps
    auto traj = evolve(t, w0, t_end, dt, 100);
    CHECK(traj.energy_drift < 1e-10);
    // fit the rate over the second half, clear of any transient
    const std::size_t n = traj.times.size();
    const double rate = std::log(traj.norms[n - 1] / traj.norms[n / 2]) /
                        (traj.times[n - 1] - traj.times[n / 2]);
    CHECK(rate == Catch::Approx(tr.lambda_u).epsilon(0.01));
}

TEST_CASE("stable triple stays bounded over long times") {
    const std::size_t N = 120;
    auto m = integrate_profile(EquationOfState::polytrope(1.0, 5.0 / 3.0), 1.0,
                               1e-10, 2000);
    auto t = build_radial_triple(m, N);
    Eigen::VectorXd w0 = Eigen::VectorXd::Random(t.nx + t.ny);
    w0 /= w0.norm();
    auto traj = evolve(t, w0, 20.0, 2e-4, 100);
    CHECK(traj.energy_drift < 1e-10);
    double maxn = 0.0;
    for (double x : traj.norms) maxn = std::max(maxn, x);
    CHECK(maxn < 50.0);  // no secular growth: the energy form is positive here
}

TEST_CASE("assembly validation") {
    Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd B23 = Eigen::MatrixXd::Ones(2, 3);
    CHECK_THROWS_AS(assemble(I2, I2, B23), std::invalid_argument);
    CHECK_THROWS_AS(assemble(I2, -I2, I2), std::invalid_argument);  // A < 0
    // the dt guard needs a nonzero spectral radius to trip
    auto t = assemble(I2, I2, I2);
    Eigen::VectorXd w0 = Eigen::VectorXd::Ones(4);
    CHECK_THROWS_AS(evolve(t, w0, 1.0, 1e3), std::invalid_argument);
}
