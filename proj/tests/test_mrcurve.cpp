#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "starstab/mrcurve.hpp"

using namespace starstab;

TEST_CASE("stiff polytrope: monotone curve, stable walk") {
    auto eos = EquationOfState::polytrope(1.0, 5.0 / 3.0);
    auto c = trace_curve(eos, 0.1, 10.0, 161, 1e-10, 600);
    CHECK_FALSE(c.truncated);
    CHECK(c.mass_extrema.empty());
    CHECK(c.mr_criticals.empty());
    for (std::size_t i = 0; i < c.mus.size(); ++i) {
        CHECK(c.dM[i] > c.thM[i]);    // M' > 0
        CHECK(c.dMR[i] > c.thMR[i]);  // (M/R)' > 0
        CHECK(index_imu(c, c.mus[i]) == 1);
    }
    auto w = tpp_walk(c, eos.gamma0());
    CHECK(w.small_mu_ok);
    CHECK(w.fitted_small_mu_slope == Catch::Approx(0.5).margin(0.02));
    for (const auto& v : w.verdicts) {
        CHECK(v.n_u_tpp == 0);
        CHECK(v.classification == Stability::stable);
    }
}

TEST_CASE("soft polytrope: M decreasing, one unstable mode expected") {
    auto eos = EquationOfState::polytrope(1.0, 1.3);
    auto c = trace_curve(eos, 0.1, 10.0, 161, 1e-10, 600);
    for (std::size_t i = 0; i < c.mus.size(); ++i) {
        CHECK(c.dM[i] < -c.thM[i]);   // M' < 0
        CHECK(c.dMR[i] > c.thMR[i]);  // M/R ~ mu^{g-1} still grows
        CHECK(index_imu(c, c.mus[i]) == 0);
    }
    auto w = tpp_walk(c, eos.gamma0());
    CHECK(w.small_mu_ok);
    for (const auto& v : w.verdicts) {
        CHECK(v.n_u_tpp == 1);
        CHECK(v.classification == Stability::unstable);
    }
}

TEST_CASE("white dwarf sequence is stable throughout") {
    auto eos = EquationOfState::white_dwarf(1.0, 1.0);
    auto c = trace_curve(eos, 1.0, 1e4, 201, 1e-9, 600);
    CHECK(c.mass_extrema.empty());
    for (std::size_t i = 0; i < c.mus.size(); ++i) {
        CHECK(c.dM[i] > c.thM[i]);
        CHECK(c.dMR[i] > c.thMR[i]);
    }
    auto w = tpp_walk(c, eos.gamma0());
    for (const auto& v : w.verdicts) CHECK(v.n_u_tpp == 0);
}

TEST_CASE("local i_mu agrees with the curve-based i_mu") {
    for (auto eos : {EquationOfState::polytrope(1.0, 5.0 / 3.0),
                     EquationOfState::polytrope(1.0, 1.3),
                     EquationOfState::white_dwarf(1.0, 1.0)}) {
        auto c = trace_curve(eos, 0.5, 8.0, 101, 1e-10, 600);
        for (double mu : {1.0, 2.0, 4.0})
            CHECK(index_imu_local(eos, mu, 1e-10) == index_imu(c, mu));
    }
}

TEST_CASE("composite curve: extrema and critical points land where they should") {
    auto eos = EquationOfState::composite(1.0, 5.0 / 3.0, 1.1, 1.0);
    auto c = trace_curve(eos, 0.1, 1e3, 241, 1e-9, 800);
    REQUIRE(c.mass_extrema.size() == 1);
    CHECK(c.mass_extrema[0].kind == 1);
    const double mu_max = c.mass_extrema[0].mu;
    CHECK(mu_max > 3.0);
    CHECK(mu_max < 15.0);
    REQUIRE(c.mr_criticals.size() == 1);
    CHECK(c.mr_criticals[0] > mu_max);
    CHECK(c.mr_criticals[0] < 60.0);
    // M really is bigger at the detected maximum than at the range ends
    const double M_at_max = c.Ms[c.nearest(mu_max)];
    CHECK(M_at_max > c.Ms.front());
    CHECK(M_at_max > c.Ms.back());

    auto w = tpp_walk(c, eos.gamma0());
    CHECK(w.small_mu_ok);
    // n_u: 0 before the first mass maximum, 1 after it, across the whole range
    for (std::size_t i = 0; i < c.mus.size(); ++i) {
        if (c.mus[i] < 0.8 * mu_max) CHECK(w.verdicts[i].n_u_tpp == 0);
        if (c.mus[i] > 1.25 * mu_max) CHECK(w.verdicts[i].n_u_tpp == 1);
    }
    // i_mu flips 1 -> 0 at the mass max and back 0 -> 1 at the M/R critical
    CHECK(index_imu(c, 0.5 * mu_max) == 1);
    CHECK(index_imu(c, std::sqrt(mu_max * c.mr_criticals[0])) == 0);
    CHECK(index_imu(c, 2.5 * c.mr_criticals[0]) == 1);
}

TEST_CASE("extremum location is resolution-robust") {
    auto eos = EquationOfState::composite(1.0, 5.0 / 3.0, 1.1, 1.0);
    auto c1 = trace_curve(eos, 1.0, 60.0, 101, 1e-9, 800);
    auto c2 = trace_curve(eos, 1.0, 60.0, 201, 1e-9, 800);
    REQUIRE(c1.mass_extrema.size() == 1);
    REQUIRE(c2.mass_extrema.size() == 1);
    CHECK(c1.mass_extrema[0].mu ==
          Catch::Approx(c2.mass_extrema[0].mu).epsilon(0.05));
    REQUIRE(c1.mr_criticals.size() == 1);
    REQUIRE(c2.mr_criticals.size() == 1);
    CHECK(c1.mr_criticals[0] == Catch::Approx(c2.mr_criticals[0]).epsilon(0.05));
}

TEST_CASE("verdict fuses walk and spectral count, and throws on mismatch") {
    auto eos = EquationOfState::polytrope(1.0, 5.0 / 3.0);
    auto c = trace_curve(eos, 0.5, 2.0, 49, 1e-10, 600);
    auto w = tpp_walk(c, eos.gamma0());
    auto v = verdict(c, w, 1.0, /*n_minus_D0=*/1);
    CHECK(v.i_mu == 1);
    CHECK(v.n_u_formula == 0);
    CHECK(v.classification == Stability::stable);
    CHECK_THROWS_AS(verdict(c, w, 1.0, 2), std::runtime_error);

    auto eos2 = EquationOfState::polytrope(1.0, 1.3);
    auto c2 = trace_curve(eos2, 0.5, 2.0, 49, 1e-10, 600);
    auto w2 = tpp_walk(c2, eos2.gamma0());
    auto v2 = verdict(c2, w2, 1.0, 1);
    CHECK(v2.i_mu == 0);
    CHECK(v2.n_u_formula == 1);
    CHECK(v2.classification == Stability::unstable);
}

TEST_CASE("small-mu slope validation flags a wrong gamma0") {
    auto eos = EquationOfState::polytrope(1.0, 5.0 / 3.0);
    auto c = trace_curve(eos, 0.1, 10.0, 161, 1e-10, 600);
    auto w = tpp_walk(c, 1.3);  // lie about gamma0
    CHECK_FALSE(w.small_mu_ok);
    for (const auto& v : w.verdicts) CHECK(v.small_mu_warning);
}

TEST_CASE("curve argument validation") {
    auto eos = EquationOfState::polytrope(1.0, 5.0 / 3.0);
    CHECK_THROWS_AS(trace_curve(eos, -1.0, 2.0, 16, 1e-10), std::invalid_argument);
    CHECK_THROWS_AS(trace_curve(eos, 2.0, 1.0, 16, 1e-10), std::invalid_argument);
    CHECK_THROWS_AS(trace_curve(eos, 0.1, 10.0, 4, 1e-10), std::invalid_argument);
}
