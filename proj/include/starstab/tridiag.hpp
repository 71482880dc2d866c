#pragma once

// Symmetric tridiagonal spectral tools: Sturm-sequence inertia counts,
// eigenvalues by shift-and-count bisection, eigenvectors by inverse
// iteration with a partially pivoted tridiagonal solve.

#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace starstab {

struct Tridiag {
    std::vector<double> diag;  // size n
    std::vector<double> off;   // size n-1

    std::size_t n() const { return diag.size(); }

    // Gershgorin bounds on the spectrum
    void bounds(double& lo, double& hi) const {
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        for (std::size_t i = 0; i < n(); ++i) {
            double r = 0.0;
            if (i > 0) r += std::fabs(off[i - 1]);
            if (i + 1 < n()) r += std::fabs(off[i]);
            lo = std::min(lo, diag[i] - r);
            hi = std::max(hi, diag[i] + r);
        }
    }

    // number of eigenvalues < shift (Sturm sequence / LDL pivot count)
    std::size_t count_below(double shift) const {
        std::size_t cnt = 0;
        double d = 1.0;
        const double tiny = std::numeric_limits<double>::min();
        for (std::size_t i = 0; i < n(); ++i) {
            const double o2 = (i > 0) ? off[i - 1] * off[i - 1] : 0.0;
            d = diag[i] - shift - o2 / d;
            if (d == 0.0) d = tiny;
            if (d < 0.0) ++cnt;
        }
        return cnt;
    }

    // k-th smallest eigenvalue (k = 0 is the lowest) by bisection
    double eigenvalue(std::size_t k) const {
        double lo, hi;
        bounds(lo, hi);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            (count_below(mid) <= k ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    std::vector<double> eigenvalues(std::size_t k) const {
        std::vector<double> ev(std::min(k, n()));
        for (std::size_t j = 0; j < ev.size(); ++j) ev[j] = eigenvalue(j);
        return ev;
    }

    // solve (T - shift I) x = b with partial pivoting (dgtsv-style)
    std::vector<double> solve_shifted(double shift, std::vector<double> b) const {
        const std::size_t m = n();
        std::vector<double> dl(m, 0.0), dd(m), du(m, 0.0), du2(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) dd[i] = diag[i] - shift;
        for (std::size_t i = 0; i + 1 < m; ++i) { dl[i] = off[i]; du[i] = off[i]; }
        const double tiny = 1e-300;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            if (std::fabs(dd[i]) >= std::fabs(dl[i])) {
                if (dd[i] == 0.0) dd[i] = tiny;
                const double f = dl[i] / dd[i];
                dd[i + 1] -= f * du[i];
                b[i + 1] -= f * b[i];
            } else {  // swap rows i, i+1
                const double f = dd[i] / dl[i];
                dd[i] = dl[i];
                double t = dd[i + 1];
                dd[i + 1] = du[i] - f * t;
                du2[i] = (i + 2 < m) ? du[i + 1] : 0.0;
                du[i] = t;
                if (i + 2 < m) du[i + 1] = -f * du2[i];
                std::swap(b[i], b[i + 1]);
                b[i + 1] -= f * b[i];
            }
        }
        if (dd[m - 1] == 0.0) dd[m - 1] = tiny;
        std::vector<double> x(m);
        x[m - 1] = b[m - 1] / dd[m - 1];
        if (m >= 2) x[m - 2] = (b[m - 2] - du[m - 2] * x[m - 1]) / dd[m - 2];
        for (std::size_t ii = m; ii >= 3; --ii) {
            const std::size_t i = ii - 3;
            x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / dd[i];
        }
        return x;
    }

    // eigenvector for an isolated eigenvalue by inverse iteration
    std::vector<double> eigenvector(double lambda, unsigned seed = 7u) const {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        std::vector<double> v(n());
        for (auto& vi : v) vi = uni(rng);
        double lo, hi;
        bounds(lo, hi);
        const double eps = 1e-12 * std::max(std::fabs(lo), std::fabs(hi));
        for (int it = 0; it < 8; ++it) {
            v = solve_shifted(lambda + eps, std::move(v));
            double nrm = 0.0;
            for (double vi : v) nrm += vi * vi;
            nrm = std::sqrt(nrm);
            if (!(nrm > 0.0) || !std::isfinite(nrm))
                throw std::runtime_error("inverse iteration failed");
            for (auto& vi : v) vi /= nrm;
        }
        return v;
    }
};

}  // namespace starstab
