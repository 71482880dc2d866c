// Acceptance gate: one line per criterion, PASS/FAIL with timing; exits
// nonzero if any criterion fails. Tolerances are pinned here on purpose —
// loosening them is a decision, not a code change.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "starstab/equilibrium.hpp"
#include "starstab/hamiltonian.hpp"
#include "starstab/mrcurve.hpp"
#include "starstab/spectral.hpp"

using namespace starstab;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double secs() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

void report(int num, const char* what, bool ok, double secs, const std::string& note) {
    std::printf("criterion %2d  %-52s %s  (%.2fs)%s%s\n", num, what,
                ok ? "PASS" : "FAIL", secs, note.empty() ? "" : "  -- ",
                note.c_str());
    if (!ok) ++g_failures;
}

// independent fixed-step RK4 solver for the scaled gas-sphere profile,
// Richardson-extrapolated; shares no code with the production integrator
double le_rk4(double n, double h) {
    double s = 1e-10, th = 1.0, w = 0.0;  // w = -s^2 theta'
    auto f = [n](double s_, double th_, double w_, double& dth, double& dw) {
        dth = -w_ / (s_ * s_);
        dw = s_ * s_ * std::pow(th_ > 0.0 ? th_ : 0.0, n);
    };
    double ps = s, pt = th;
    while (true) {
        double k1t, k1w, k2t, k2w, k3t, k3w, k4t, k4w;
        f(s, th, w, k1t, k1w);
        f(s + 0.5 * h, th + 0.5 * h * k1t, w + 0.5 * h * k1w, k2t, k2w);
        f(s + 0.5 * h, th + 0.5 * h * k2t, w + 0.5 * h * k2w, k3t, k3w);
        f(s + h, th + h * k3t, w + h * k3w, k4t, k4w);
        ps = s;
        pt = th;
        th += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        s += h;
        if (th <= 0.0) break;
    }
    return ps + (s - ps) * pt / (pt - th);
}

double le_oracle(double n) {
    const double c1 = le_rk4(n, 2e-4), c2 = le_rk4(n, 1e-4);
    return c2 + (c2 - c1);
}

void criterion_1() {
    Timer tall;
    bool ok = true;
    std::string note;
    {
        Timer t;
        auto s = lane_emden(1.0, 1e-12);
        if (std::fabs(s.xi1 - PI) > 1e-10 || t.secs() > 1.0) ok = false;
        note = "xi1(n=1)-pi = " + std::to_string(s.xi1 - PI);
    }
    for (double n : {1.5, 3.0}) {
        const double ref = le_oracle(n);
        Timer t;
        auto s = lane_emden(n, 1e-12);
        if (std::fabs(s.xi1 - ref) > 1e-6 * ref || t.secs() > 1.0) ok = false;
    }
    report(1, "profile zero: analytic + independent RK4 oracle", ok, tall.secs(), note);
}

void criterion_2() {
    Timer t;
    bool ok = true;
    for (double g : {1.25, 4.0 / 3.0 - 0.01, 4.0 / 3.0 + 0.01, 5.0 / 3.0, 1.9}) {
        auto eos = EquationOfState::polytrope(1.0, g);
        auto m1 = integrate_profile(eos, 1.0, 1e-10, 800);
        auto m2 = integrate_profile(eos, 2.0, 1e-10, 800);
        const double sM = std::log(m2.M / m1.M) / std::log(2.0);
        const double sR = std::log(m2.R / m1.R) / std::log(2.0);
        if (std::fabs(sM - (3.0 * g - 4.0) / 2.0) > 1e-3) ok = false;
        if (std::fabs(sR - (g - 2.0) / 2.0) > 1e-3) ok = false;
    }
    ok = ok && t.secs() < 30.0;
    report(2, "polytrope mass/radius scaling exponents (5 gammas)", ok, t.secs(), "");
}

void criterion_3() {
    Timer t;
    bool ok = true;
    for (double g : {1.3, 5.0 / 3.0, 1.9}) {
        auto eos = EquationOfState::polytrope(1.0, g);
        for (double mu : {0.3, 1.0, 3.0, 10.0, 30.0}) {
            auto m = integrate_profile(eos, mu, 1e-10, 2000);
            const std::size_t nD0 = negative_index(assemble_D0(m, 3.0, 1200));
            const std::size_t nLr = negative_index(assemble_Lr(m, 300));
            if (nD0 != 1 || nLr != 1) ok = false;
        }
    }
    ok = ok && t.secs() < 60.0;
    report(3, "energy negative index = 1 on 15 polytropes, both forms", ok, t.secs(),
           "");
}

void criterion_4() {
    Timer t;
    bool ok = true;
    std::string note;
    for (double g : {1.3, 5.0 / 3.0}) {
        auto m = integrate_profile(EquationOfState::polytrope(1.0, g), 1.0, 1e-10, 2000);
        auto d1 = assemble_Dl(m, 1, 3.0, 1200);
        if (std::fabs(d1.T.eigenvalue(0)) >= d1.kernel_tol()) ok = false;
        auto k = kernel_test(d1);
        if (k.dim != 1) { ok = false; continue; }
        double dot = 0, nu = 0, nv = 0;
        for (std::size_t j = 0; j < d1.grid.size(); ++j) {
            const double u = d1.grid[j] * m.Vprime_at(d1.grid[j]);
            dot += u * k.vectors[0][j];
            nu += u * u;
            nv += k.vectors[0][j] * k.vectors[0][j];
        }
        const double cosine = std::fabs(dot) / std::sqrt(nu * nv);
        if (cosine < 0.99) ok = false;
        if (note.empty()) note = "cosine = " + std::to_string(cosine);
        auto d2 = assemble_Dl(m, 2, 3.0, 1200);
        if (d2.T.eigenvalue(0) <= d2.kernel_tol()) ok = false;
    }
    report(4, "l=1 kernel is the translation mode; l=2 positive", ok, t.secs(), note);
}

void criterion_5() {
    Timer t;
    bool ok = true;
    for (double mu : {0.5, 1.0, 2.0}) {
        auto soft = integrate_profile(EquationOfState::polytrope(1.0, 1.3), mu,
                                      1e-10, 2000);
        if (eddington_spectrum(soft, 800, 1).neg_count != 1) ok = false;
        auto stiff = integrate_profile(EquationOfState::polytrope(1.0, 5.0 / 3.0), mu,
                                       1e-10, 2000);
        if (eddington_spectrum(stiff, 800, 1).neg_count != 0) ok = false;
    }
    auto marg = integrate_profile(EquationOfState::polytrope(1.0, 4.0 / 3.0), 1.0,
                                  1e-11, 4000);
    double prev = 0.0;
    std::string note = "gamma=4/3 ratios:";
    for (std::size_t N : {200, 400, 800}) {
        const double ev0 = assemble_eddington(marg, N).T.eigenvalue(0);
        if (!(ev0 < 0.0)) ok = false;
        if (prev < 0.0) {
            const double ratio = prev / ev0;
            note += " " + std::to_string(ratio);
            if (!(ratio >= 2.0)) ok = false;
        }
        prev = ev0;
    }
    report(5, "pulsation dichotomy and the marginal-index limit", ok, t.secs(), note);
}

void criterion_6() {
    Timer t;
    bool ok = true;
    int checked = 0;
    auto probe = [&](const EquationOfState& eos, double mu, double tol) {
        auto m = integrate_profile(eos, mu, tol, 2000);
        const std::size_t neg = eddington_spectrum(m, 600, 1).neg_count;
        const std::size_t nD0 = negative_index(assemble_D0(m, 3.0, 1200));
        const int imu = index_imu_local(eos, mu, 1e-10);
        if (int(neg) != int(nD0) - imu) ok = false;
        ++checked;
    };
    auto soft = EquationOfState::polytrope(1.0, 1.3);
    auto stiff = EquationOfState::polytrope(1.0, 5.0 / 3.0);
    auto wd = EquationOfState::white_dwarf(1.0, 1.0);
    auto comp = EquationOfState::composite(1.0, 5.0 / 3.0, 1.1, 1.0);
    for (double mu : {0.5, 1.0, 2.0}) probe(soft, mu, 1e-10);
    for (double mu : {1.0, 2.0}) probe(stiff, mu, 1e-10);
    for (double mu : {1.0, 100.0, 1e4}) probe(wd, mu, 1e-9);
    for (double mu : {5.0, 60.0, 3e4, 2e5}) probe(comp, mu, 1e-9);
    ok = ok && checked == 12;
    report(6, "mode count = negative index - i_mu on a 12-model grid", ok, t.secs(),
           "");
}

void criterion_7() {
    Timer t;
    bool ok = true;
    auto eos = EquationOfState::white_dwarf(1.0, 1.0);
    auto c = trace_curve(eos, 1.0, 1e4, 201, 1e-9, 600);
    if (!c.mass_extrema.empty() || !c.mr_criticals.empty()) ok = false;
    for (std::size_t i = 0; i < c.mus.size(); ++i)
        if (!(c.dM[i] > c.thM[i] && c.dMR[i] > c.thMR[i])) ok = false;
    for (double mu : {1.0, 1e2, 1e4, 1e6}) {
        auto m = integrate_profile(eos, mu, 1e-10, 2000);
        if (eddington_spectrum(m, 600, 1).neg_count != 0) ok = false;
    }
    // the high-density limit is the K = 2 A B^{-4/3} marginal polytrope, whose
    // mass is central-density independent
    auto limit = integrate_profile(EquationOfState::polytrope(2.0, 4.0 / 3.0), 1.0,
                                   1e-11, 2000);
    auto mwd = integrate_profile(eos, 1e6, 1e-10, 2000);
    const double rel = std::fabs(mwd.M - limit.M) / limit.M;
    if (!(rel < 0.05)) ok = false;
    report(7, "degenerate-gas sequence: stable, limit mass matches", ok, t.secs(),
           "limit-mass deficit = " + std::to_string(rel));
}

void criterion_8() {
    Timer t;
    bool ok = true;
    std::string note;
    auto eos = EquationOfState::composite(1.0, 5.0 / 3.0, 1.1, 1.0);
    auto c = trace_curve(eos, 0.01, 3e5, 401, 1e-9, 1000);
    auto w = tpp_walk(c, eos.gamma0());
    if (!w.small_mu_ok) ok = false;
    if (c.mass_extrema.empty() || c.mass_extrema[0].kind != 1) ok = false;
    const double mu_max = c.mass_extrema.empty() ? 0.0 : c.mass_extrema[0].mu;
    note = "first mass max at mu = " + std::to_string(mu_max);
    // the walk count steps 0 -> 1 across the first mass maximum, and the
    // direct spectrum agrees at two densities on each side
    for (double mu : {2.0, 4.0, 10.0, 18.0}) {
        const int want = mu < mu_max ? 0 : 1;
        if (w.verdicts[c.nearest(mu)].n_u_tpp != want) ok = false;
        auto m = integrate_profile(eos, mu, 1e-9, 1000);
        if (int(eddington_spectrum(m, 600, 1).neg_count) != want) ok = false;
    }
    // at every detected M/R critical point the negative index of the energy
    // jumps by exactly the jump of i_mu
    if (c.mr_criticals.size() != 2) ok = false;
    for (double mu_c : c.mr_criticals) {
        int n_lo = 0, n_hi = 0, i_lo = 0, i_hi = 0;
        {
            auto m = integrate_profile(eos, mu_c / 1.5, 1e-9, 2000);
            n_lo = int(negative_index(assemble_D0(m, 3.0, 1200)));
            i_lo = index_imu_local(eos, mu_c / 1.5, 1e-10);
        }
        {
            auto m = integrate_profile(eos, mu_c * 1.5, 1e-9, 2000);
            n_hi = int(negative_index(assemble_D0(m, 3.0, 1200)));
            i_hi = index_imu_local(eos, mu_c * 1.5, 1e-10);
        }
        if (n_hi - n_lo != i_hi - i_lo || n_hi == n_lo) ok = false;
    }
    report(8, "composite family: turning points vs spectra end to end", ok, t.secs(),
           note);
}

Eigen::MatrixXd orth_range(const Eigen::MatrixXd& M) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    qr.setThreshold(1e-10);
    return qr.householderQ() * Eigen::MatrixXd::Identity(M.rows(), qr.rank());
}

Eigen::Index rank_of(const Eigen::MatrixXd& M) {
    if (M.cols() == 0 || M.rows() == 0) return 0;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    qr.setThreshold(1e-10);
    return qr.rank();
}

double min_abs_eig(const Eigen::MatrixXd& S, const Eigen::MatrixXd& Q) {
    if (Q.cols() == 0) return 1e300;
    Eigen::MatrixXd R = Q.transpose() * S * Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().minCoeff();
}

void criterion_9() {
    Timer t;
    bool ok = true;
    // explicit 5x5 example: exact matrix powers and cubic center growth
    {
        auto tt = nilpotent_5x5();
        Eigen::MatrixXd JL1(5, 5), JL2(5, 5), JL3(5, 5);
        JL1 << 0, 0, 0, 1, 0,  0, 0, 0, 1, 0,  -2, 1, 0, 0, 0,
              -1, 1, 0, 0, 0,  0, 0, 0, 0, 0;
        JL2 << -1, 1, 0, 0, 0,  -1, 1, 0, 0, 0,  0, 0, 0, -1, 0,
                0, 0, 0, 0, 0,   0, 0, 0, 0, 0;
        JL3 << 0, 0, 0, 0, 0,  0, 0, 0, 0, 0,  1, -1, 0, 0, 0,
               0, 0, 0, 0, 0,  0, 0, 0, 0, 0;
        if (tt.JL != JL1) ok = false;
        if (Eigen::MatrixXd(tt.JL * tt.JL) != JL2) ok = false;
        if (Eigen::MatrixXd(tt.JL * tt.JL * tt.JL) != JL3) ok = false;
        if (Eigen::MatrixXd(tt.JL * tt.JL * tt.JL * tt.JL).norm() != 0.0) ok = false;
        auto tr = trichotomy(tt);
        if (growth_degree(tt, tr).degree != 3) ok = false;
    }
    // seed-pinned random corpus: eigenvalue count vs inertia, semi-simple
    // nonzero spectrum, and the growth caps under each structural hypothesis
    std::mt19937 rng(12345);
    int violations = 0;
    for (int rep = 0; rep < 200; ++rep) {
        auto tt = make_random_triple(rng);
        Trichotomy tr;
        try {
            tr = trichotomy(tt);
        } catch (const std::exception&) {
            ++violations;
            continue;
        }
        if (tr.d_u != negative_index_on_range_BA(tt)) ++violations;

        Eigen::EigenSolver<Eigen::MatrixXd> es(tt.JL);
        const double nrm = std::max(1.0, tt.JL.norm());
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
            Eigen::MatrixXcd M = tt.JL.cast<std::complex<double>>();
            M -= z * Eigen::MatrixXcd::Identity(M.rows(), M.cols());
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
            int small = 0;
            for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k)
                if (svd.singularValues()(k) < 10.0 * radius + 1e-7 * nrm) ++small;
            if (small != mult) ++violations;
        }

        GrowthFit fit;
        try {
            fit = growth_degree(tt, tr);
        } catch (const std::exception&) {
            ++violations;
            continue;
        }
        if (fit.degree > 3) ++violations;
        const Eigen::MatrixXd BA = tt.B * tt.A;
        const Eigen::MatrixXd Q1 = orth_range(tt.B.transpose() * tt.L * BA);
        if (rank_of(tt.A * Q1) == Q1.cols() && fit.degree > 2) ++violations;
        if (rank_of(BA) == tt.nx && fit.degree > 1) ++violations;
        const Eigen::MatrixXd Qb = orth_range(tt.B);
        const Eigen::MatrixXd Qbt = orth_range(Eigen::MatrixXd(tt.B.transpose()));
        if (min_abs_eig(tt.L, Qb) > 1e-6 * std::max(1.0, tt.L.norm()) &&
            min_abs_eig(tt.A, Qbt) > 1e-6 * std::max(1.0, tt.A.norm()) &&
            fit.degree != 0)
            ++violations;
    }
    ok = ok && violations == 0 && t.secs() < 120.0;
    report(9, "explicit 5x5 + 200-triple corpus (seed 12345)", ok, t.secs(),
           "violations = " + std::to_string(violations));
}

void criterion_10() {
    Timer t;
    bool ok = true;
    std::string note;
    // 1e5 implicit-midpoint steps on each fixture; the quadratic invariant
    // must hold to 1e-10 relative, growth/boundedness must match the theory
    {
        auto tt = nilpotent_5x5();
        Eigen::VectorXd w0(5);
        w0 << 0.3, -1.1, 0.7, 0.2, 0.5;
        auto traj = evolve(tt, w0, 100.0, 1e-3, 1000);
        if (!(traj.energy_drift <= 1e-10)) ok = false;
    }
    {
        auto m = integrate_profile(EquationOfState::polytrope(1.0, 1.3), 1.0,
                                   1e-10, 2000);
        auto tt = build_radial_triple(m, 120);
        auto tr = trichotomy(tt);
        if (tr.d_u != 1) ok = false;
        Eigen::VectorXd w0 = tr.Eu.col(0);
        w0 /= w0.norm();
        auto traj = evolve(tt, w0, 20.0, 2e-4, 100);
        if (!(traj.energy_drift <= 1e-10)) ok = false;
        const std::size_t n = traj.times.size();
        const double rate = std::log(traj.norms[n - 1] / traj.norms[n / 2]) /
                            (traj.times[n - 1] - traj.times[n / 2]);
        const double rel = std::fabs(rate - tr.lambda_u) / tr.lambda_u;
        if (!(rel < 0.01)) ok = false;
        note = "growth-rate mismatch = " + std::to_string(rel);
    }
    {
        auto m = integrate_profile(EquationOfState::polytrope(1.0, 5.0 / 3.0), 1.0,
                                   1e-10, 2000);
        auto tt = build_radial_triple(m, 120);
        Eigen::VectorXd w0 = Eigen::VectorXd::Ones(tt.nx + tt.ny);
        w0 /= w0.norm();
        auto traj = evolve(tt, w0, 20.0, 2e-4, 100);
        if (!(traj.energy_drift <= 1e-10)) ok = false;
        double maxn = 0.0;
        for (double x : traj.norms) maxn = std::max(maxn, x);
        if (!(maxn < 100.0)) ok = false;
    }
    report(10, "symplectic evolution: drift, rate, boundedness", ok, t.secs(), note);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    std::printf("%s (%d of 10 criteria failed)\n",
                g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL", g_failures);
    return g_failures == 0 ? 0 : 1;
}
