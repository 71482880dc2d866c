#pragma once

// Mass-radius curve tracing and the turning-point bookkeeping: detect mass
// extrema and M/R critical points, evaluate the 0/1 index i_mu from the signs
// of M'(mu) and (M/R)'(mu), and walk the curve counting unstable modes. The
// count changes only at mass extrema: +1 when M'R' turns - to + (the mass-
// radius curve bends counterclockwise), -1 on the opposite turn.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "equilibrium.hpp"

namespace starstab {

struct MassRadiusCurve {
    std::vector<double> mus, Ms, Rs;
    std::vector<double> dM, dR, dMR;          // d/dmu estimates
    std::vector<double> thM, thMR;            // degeneracy thresholds for zero tests
    struct Extremum {
        double mu = 0;
        int kind = 0;  // +1 max, -1 min, 0 non-extremal critical point
    };
    std::vector<Extremum> mass_extrema;
    std::vector<double> mr_criticals;
    bool truncated = false;
    double mu_truncated = 0;

    std::size_t nearest(double mu) const {
        std::size_t best = 0;
        double err = std::fabs(std::log(mus[0] / mu));
        for (std::size_t i = 1; i < mus.size(); ++i) {
            const double e = std::fabs(std::log(mus[i] / mu));
            if (e < err) { err = e; best = i; }
        }
        return best;
    }
};

namespace detail {

// centered differences in log mu, one-sided at the ends; the threshold is
// 1e3 x the truncation error estimated by comparing the h and 2h stencils.
// The raw Richardson estimate is smoothed by a windowed minimum so that an
// isolated curvature kink (e.g. the center density crossing a C^1 blend
// point of the EOS) does not inflate the threshold past the derivative.
inline void log_derivatives(const std::vector<double>& mus, const std::vector<double>& f,
                            std::vector<double>& df, std::vector<double>& th) {
    const std::size_t n = mus.size();
    df.assign(n, 0.0);
    th.assign(n, 0.0);
    std::vector<double> lm(n), raw(n);
    for (std::size_t i = 0; i < n; ++i) lm[i] = std::log(mus[i]);
    for (std::size_t i = 0; i < n; ++i) {
        double d1;
        if (i == 0) d1 = (f[1] - f[0]) / (lm[1] - lm[0]);
        else if (i + 1 == n) d1 = (f[n - 1] - f[n - 2]) / (lm[n - 1] - lm[n - 2]);
        else d1 = (f[i + 1] - f[i - 1]) / (lm[i + 1] - lm[i - 1]);
        double d2 = d1;
        if (i >= 2 && i + 2 < n) d2 = (f[i + 2] - f[i - 2]) / (lm[i + 2] - lm[i - 2]);
        df[i] = d1 / mus[i];  // back to d/dmu
        raw[i] = std::fabs(d1 - d2) / 3.0 / mus[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        double trunc = raw[i];
        const std::size_t a = i >= 3 ? i - 3 : 0, b = std::min(i + 3, n - 1);
        for (std::size_t j = a; j <= b; ++j) trunc = std::min(trunc, raw[j]);
        th[i] = 1e3 * trunc + 1e-12 * std::fabs(df[i]) +
                1e-14 * std::fabs(f[i] / mus[i]);
    }
}

}  // namespace detail

inline MassRadiusCurve trace_curve(const EquationOfState& eos, double mu_lo, double mu_hi,
                                   std::size_t N, double tol,
                                   std::size_t grid_N = 1200) {
    if (!(0.0 < mu_lo && mu_lo < mu_hi)) throw std::invalid_argument("bad mu range");
    if (N < 8) throw std::invalid_argument("trace_curve: N >= 8");
    MassRadiusCurve c;
    const double ratio = std::log(mu_hi / mu_lo) / double(N - 1);
    for (std::size_t i = 0; i < N; ++i) {
        const double mu = mu_lo * std::exp(ratio * double(i));
        try {
            auto m = integrate_profile(eos, mu, tol, grid_N);
            c.mus.push_back(mu);
            c.Ms.push_back(m.M);
            c.Rs.push_back(m.R);
        } catch (const NoCompactSupport&) {
            c.truncated = true;
            c.mu_truncated = mu;
            break;
        }
    }
    if (c.mus.size() < 8) throw std::runtime_error("trace_curve: too few valid samples");
    detail::log_derivatives(c.mus, c.Ms, c.dM, c.thM);
    std::vector<double> mr(c.mus.size()), thR;
    for (std::size_t i = 0; i < c.mus.size(); ++i) mr[i] = c.Ms[i] / c.Rs[i];
    detail::log_derivatives(c.mus, mr, c.dMR, c.thMR);
    detail::log_derivatives(c.mus, c.Rs, c.dR, thR);

    // Critical points are found between consecutive *clean* samples (those
    // with |d| above the degeneracy threshold): a genuine extremum flips the
    // sign inside a below-threshold band a few samples wide, so testing raw
    // neighbors would miss it. The location is the zero of a straight-line
    // fit of d vs log mu through the flanking clean samples.
    auto find_criticals = [&](const std::vector<double>& d, const std::vector<double>& th,
                              auto&& emit) {
        std::ptrdiff_t prev = -1;
        for (std::size_t i = 0; i < c.mus.size(); ++i) {
            if (std::fabs(d[i]) <= th[i]) continue;
            if (prev >= 0) {
                const std::size_t p = std::size_t(prev);
                if (d[p] * d[i] < 0.0) {
                    const double x0 = std::log(c.mus[p]), x1 = std::log(c.mus[i]);
                    const double xv = x0 + (x1 - x0) * d[p] / (d[p] - d[i]);
                    emit(std::exp(xv), d[p] > 0.0 ? +1 : -1);
                } else if (i > p + 1) {
                    // same-sign clean neighbors around a below-threshold dip
                    std::size_t k = p + 1;
                    for (std::size_t j = p + 1; j < i; ++j)
                        if (std::fabs(d[j]) < std::fabs(d[k])) k = j;
                    emit(c.mus[k], 0);
                }
            }
            prev = std::ptrdiff_t(i);
        }
    };
    find_criticals(c.dM, c.thM, [&](double mu, int kind) {
        c.mass_extrema.push_back({mu, kind});
    });
    find_criticals(c.dMR, c.thMR, [&](double mu, int kind) {
        if (kind != 0) c.mr_criticals.push_back(mu);
    });
    // the (M, M/R) pair must never be simultaneously critical
    for (std::size_t i = 0; i < c.mus.size(); ++i)
        if (std::fabs(c.dM[i]) < c.thM[i] && std::fabs(c.dMR[i]) < c.thMR[i])
            throw std::runtime_error("trace_curve: M' and (M/R)' both vanish at mu=" +
                                     std::to_string(c.mus[i]));
    return c;
}

// i_mu = 1 if M'(M/R)' > 0 or M' = 0;  0 if M'(M/R)' < 0 or (M/R)' = 0
inline int index_imu(const MassRadiusCurve& c, double mu) {
    const std::size_t i = c.nearest(mu);
    const bool m_zero = std::fabs(c.dM[i]) < c.thM[i];
    const bool mr_zero = std::fabs(c.dMR[i]) < c.thMR[i];
    if (m_zero && mr_zero)
        throw std::runtime_error("index_imu: both derivatives below threshold");
    if (m_zero) return 1;
    if (mr_zero) return 0;
    return c.dM[i] * c.dMR[i] > 0.0 ? 1 : 0;
}

// i_mu at a single mu without a traced curve (local finite differences);
// the stencil is wide enough that adaptive-integrator output noise stays
// well below the 1e3 x truncation threshold on these smooth curves
inline int index_imu_local(const EquationOfState& eos, double mu, double tol = 1e-10,
                           double rel_step = 5e-3, std::size_t grid_N = 1200) {
    double M[5], R[5];
    for (int k = -2; k <= 2; ++k) {
        auto m = integrate_profile(eos, mu * std::exp(rel_step * k), tol, grid_N);
        M[k + 2] = m.M;
        R[k + 2] = m.R;
    }
    auto d = [&](const double* f, int stride) {
        return (f[2 + stride] - f[2 - stride]) / (2.0 * rel_step * stride) / mu;
    };
    const double dM1 = d(M, 1), dM2 = d(M, 2);
    const double thM = 1e3 * std::fabs(dM1 - dM2) / 3.0 + 1e-12 * std::fabs(dM1);
    double mr[5];
    for (int k = 0; k < 5; ++k) mr[k] = M[k] / R[k];
    const double dmr1 = d(mr, 1), dmr2 = d(mr, 2);
    const double thMR = 1e3 * std::fabs(dmr1 - dmr2) / 3.0 + 1e-12 * std::fabs(dmr1);
    const bool m_zero = std::fabs(dM1) < thM, mr_zero = std::fabs(dmr1) < thMR;
    if (m_zero && mr_zero)
        throw std::runtime_error("index_imu_local: both derivatives below threshold");
    if (m_zero) return 1;
    if (mr_zero) return 0;
    return dM1 * dmr1 > 0.0 ? 1 : 0;
}

enum class Stability { stable, unstable, neutral };

struct StabilityVerdict {
    double mu = 0;
    int i_mu = 0;
    int n_minus_D0 = -1;    // optional, from the spectral module
    int n_u_tpp = -1;
    int n_u_formula = -1;   // n_minus_D0 - i_mu when available
    Stability classification = Stability::stable;
    bool critical_index = false;   // gamma0 == 4/3: formula does not apply
    bool small_mu_warning = false; // left end outside the asymptotic regime
};

struct TppWalk {
    std::vector<StabilityVerdict> verdicts;  // one per curve sample
    bool small_mu_ok = true;
    double fitted_small_mu_slope = 0;
};

inline TppWalk tpp_walk(const MassRadiusCurve& c, double gamma0) {
    TppWalk out;
    const std::size_t n = c.mus.size();
    // validate the small-mu regime: fitted log M / log mu slope vs (3g-4)/2
    const std::size_t nf = std::max<std::size_t>(3, n / 8);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < nf; ++i) {
        const double x = std::log(c.mus[i]), y = std::log(c.Ms[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double slope = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
    const double want = (3.0 * gamma0 - 4.0) / 2.0;
    out.fitted_small_mu_slope = slope;
    out.small_mu_ok = std::fabs(slope - want) <= std::max(0.1 * std::fabs(want), 0.02);

    const bool critical = std::fabs(gamma0 - 4.0 / 3.0) < 1e-12;
    int n_u = (!critical && gamma0 > 6.0 / 5.0 && gamma0 < 4.0 / 3.0) ? 1 : 0;

    // sign of M'R' just left/right of each extremum, outside the threshold band
    auto product_sign = [&](std::size_t i) {
        return c.dM[i] * c.dR[i] > 0.0 ? +1 : -1;
    };
    std::size_t next_ext = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (next_ext < c.mass_extrema.size() &&
               c.mass_extrema[next_ext].mu <= c.mus[i]) {
            const auto& e = c.mass_extrema[next_ext];
            if (e.kind != 0 && i >= 1 && i < n) {
                // find clean samples on each side of the extremum
                std::size_t lft = i >= 2 ? i - 2 : 0, rgt = std::min(i + 1, n - 1);
                while (lft > 0 && std::fabs(c.dM[lft]) < c.thM[lft]) --lft;
                while (rgt + 1 < n && std::fabs(c.dM[rgt]) < c.thM[rgt]) ++rgt;
                const int before = product_sign(lft), after = product_sign(rgt);
                if (before < 0 && after > 0) ++n_u;
                else if (before > 0 && after < 0) --n_u;
                if (n_u < 0)
                    throw std::runtime_error("tpp_walk: negative mode count (bad extrema?)");
            }
            ++next_ext;
        }
        StabilityVerdict v;
        v.mu = c.mus[i];
        v.n_u_tpp = n_u;
        v.critical_index = critical;
        v.small_mu_warning = !out.small_mu_ok;
        const bool at_extremum = std::fabs(c.dM[i]) < c.thM[i];
        try {
            v.i_mu = index_imu(c, c.mus[i]);
        } catch (const std::runtime_error&) {
            v.i_mu = -1;
        }
        v.classification = at_extremum || critical
                               ? Stability::neutral
                               : (n_u == 0 ? Stability::stable : Stability::unstable);
        out.verdicts.push_back(v);
    }
    return out;
}

// combine a spectral count with the walk; the two unstable-mode counts are
// the same theorem computed two ways, so a mismatch is an error, not a vote
inline StabilityVerdict verdict(const MassRadiusCurve& c, const TppWalk& walk, double mu,
                                int n_minus_D0) {
    const std::size_t i = c.nearest(mu);
    StabilityVerdict v = walk.verdicts.at(i);
    v.mu = mu;
    v.n_minus_D0 = n_minus_D0;
    v.n_u_formula = n_minus_D0 - v.i_mu;
    if (v.n_u_formula != v.n_u_tpp)
        throw std::runtime_error(
            "verdict: spectral count n-(D0)-i_mu = " + std::to_string(v.n_u_formula) +
            " disagrees with TPP walk " + std::to_string(v.n_u_tpp) +
            " at mu=" + std::to_string(mu));
    v.classification = v.n_u_formula == 0
                           ? (std::fabs(c.dM[i]) < c.thM[i] ? Stability::neutral
                                                            : Stability::stable)
                           : Stability::unstable;
    return v;
}

}  // namespace starstab
