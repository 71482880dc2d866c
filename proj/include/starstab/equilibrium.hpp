#pragma once

// Hydrostatic equilibria of a self-gravitating barotropic gas sphere.
//
// In the enthalpy variable y(r) (y = Phi'(rho) inside the star, y(0) = alpha
// = Phi'(mu), y(R) = 0) the equilibrium condition is
//     y'' + (2/r) y' = -4 pi F+(y),     y(0) = alpha, y'(0) = 0,
// integrated here as the regular first-order system in (y, m) with
// m(r) = 4 pi int_0^r s^2 F+(y) ds, so y' = -m/r^2 and m' = 4 pi r^2 F+(y).

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "eos.hpp"
#include "ode.hpp"

namespace starstab {

inline constexpr double PI = 3.14159265358979323846;

struct NoCompactSupport : std::runtime_error {
    double mu, r_last, y_last;
    NoCompactSupport(double mu_, double r_, double y_)
        : std::runtime_error("no compact support detected before r_max at mu=" +
                             std::to_string(mu_)),
          mu(mu_), r_last(r_), y_last(y_) {}
};

struct StellarModel {
    EquationOfState eos;
    double mu = 0;      // center density
    double alpha = 0;   // central enthalpy Phi'(mu)
    double R = 0;       // support radius (first zero of y)
    double M = 0;       // total mass
    std::vector<double> grid;    // uniform radii, grid[0]=0, grid[N]=R
    std::vector<double> y;       // enthalpy profile
    std::vector<double> rho;     // F+(y)
    std::vector<double> yprime;  // y' = -m/r^2

    double h() const { return grid[1] - grid[0]; }

    // enthalpy variable continued outside the star: y = -M/R + M/r < 0
    double y_at(double r) const {
        if (r >= R) return -M / R + M / r;
        const double hh = h();
        const std::size_t i = std::min(std::size_t(r / hh), grid.size() - 2);
        const double t = (r - grid[i]) / hh;
        return (1.0 - t) * y[i] + t * y[i + 1];
    }

    double rho_at(double r) const {
        if (r >= R) return 0.0;
        const double hh = h();
        const std::size_t i = std::min(std::size_t(r / hh), grid.size() - 2);
        const double t = (r - grid[i]) / hh;
        return (1.0 - t) * rho[i] + t * rho[i + 1];
    }

    // gravitational potential, normalized to -M/r at infinity:
    // V(r) = -M/R - y(r) inside, -M/r outside
    double V_at(double r) const { return r >= R ? -M / r : -M / R - y_at(r); }

    double Vprime_at(double r) const {  // = m(r)/r^2
        if (r <= 0.0) return 0.0;
        if (r >= R) return M / (r * r);
        return -yprime_interp(r);
    }

    double yprime_interp(double r) const {
        const double hh = h();
        const std::size_t i = std::min(std::size_t(r / hh), grid.size() - 2);
        const double t = (r - grid[i]) / hh;
        return (1.0 - t) * yprime[i] + t * yprime[i + 1];
    }
};

// surface potential V(R) = -M/R
inline double surface_potential(const StellarModel& m) { return -m.M / m.R; }

inline StellarModel integrate_profile(const EquationOfState& eos, double mu, double tol,
                                      std::size_t N = 2000) {
    if (!(mu > 0.0)) throw std::domain_error("integrate_profile: mu must be > 0");
    if (!(tol > 0.0)) throw std::domain_error("integrate_profile: tol must be > 0");
    const EnthalpyInverse inv = enthalpy_inverse(eos);
    const double alpha = eos.enthalpy_slope(mu);
    const double rho_c = inv.F(alpha);  // = mu up to inverse tolerance

    // natural length scale of the configuration; guards the r_max cutoff
    const double n0 = 1.0 / (eos.gamma0() - 1.0);
    const double rscale = std::pow(alpha, -(n0 - 1.0) / 2.0);
    const double r_max = 1e4 * rscale;

    // series start y = alpha - (2 pi / 3) F+(alpha) r^2 + O(r^4) off r = 0
    const double r0 = 1e-6 * rscale;
    std::array<double, 2> s0{alpha - 2.0 * PI / 3.0 * rho_c * r0 * r0,
                             4.0 * PI / 3.0 * rho_c * r0 * r0 * r0};

    auto rhs = [&](double r, const std::array<double, 2>& s) {
        const double rho = inv.F(s[0]);
        return std::array<double, 2>{-s[1] / (r * r), 4.0 * PI * r * r * rho};
    };
    auto event = [](double, const std::array<double, 2>& s) { return s[0]; };

    auto sol = integrate_rk45<2>(rhs, r0, s0, r_max, event, tol, tol * alpha,
                                 1e-3 * rscale);
    if (!sol.event_hit) {
        const auto& last = sol.steps.empty() ? OdeStep<2>{r0, r0, s0, s0, {}, {}}
                                             : sol.steps.back();
        throw NoCompactSupport(mu, last.t1, last.y1[0]);
    }

    StellarModel model;
    model.eos = eos;
    model.mu = mu;
    model.alpha = alpha;
    model.R = sol.t_event;
    model.M = sol.y_event[1];  // m(R) = -R^2 y'(R)

    model.grid.resize(N + 1);
    model.y.resize(N + 1);
    model.rho.resize(N + 1);
    model.yprime.resize(N + 1);
    const double h = model.R / double(N);
    for (std::size_t i = 0; i <= N; ++i) {
        const double r = double(i) * h;
        model.grid[i] = r;
        if (i == 0) {
            model.y[0] = alpha;
            model.rho[0] = rho_c;
            model.yprime[0] = 0.0;
        } else if (i == N) {
            model.y[N] = 0.0;  // exact zero at the detected radius
            model.rho[N] = 0.0;
            model.yprime[N] = -model.M / (model.R * model.R);
        } else if (r < sol.steps.front().t0) {
            model.y[i] = alpha - 2.0 * PI / 3.0 * rho_c * r * r;
            model.rho[i] = inv.F(model.y[i]);
            model.yprime[i] = -4.0 * PI / 3.0 * rho_c * r;
        } else {
            const auto s = sol.eval(std::min(r, sol.t_event));
            model.y[i] = s[0];
            model.rho[i] = inv.F(s[0]);
            model.yprime[i] = -s[1] / (r * r);
        }
    }
    return model;
}

// Mass by quadrature 4 pi int rho r^2 dr (composite Simpson on the uniform
// grid), cross-checked against -R^2 y'(R) which the integrator carries as m.
inline double total_mass(const StellarModel& m, double tol = 1e-8) {
    auto simpson = [&](std::size_t stride) {
        const std::size_t N = m.grid.size() - 1;
        const double h = m.h() * double(stride);
        double s = 0.0;
        std::size_t i = 0;
        for (; i + 2 * stride <= N; i += 2 * stride) {
            const double f0 = m.rho[i] * m.grid[i] * m.grid[i];
            const double f1 = m.rho[i + stride] * m.grid[i + stride] * m.grid[i + stride];
            const double f2 = m.rho[i + 2 * stride] * m.grid[i + 2 * stride] *
                              m.grid[i + 2 * stride];
            s += h / 3.0 * (f0 + 4.0 * f1 + f2);
        }
        for (; i + stride <= N; i += stride)  // trapezoid remainder
            s += h / 2.0 * (m.rho[i] * m.grid[i] * m.grid[i] +
                            m.rho[i + stride] * m.grid[i + stride] * m.grid[i + stride]);
        return 4.0 * PI * s;
    };
    const double Mq = simpson(1);
    const double err_est = std::fabs(Mq - simpson(2));  // resampling quadrature error
    const double Mflux = -m.R * m.R * m.yprime.back();
    // the grid profile comes through cubic-Hermite dense output, one order
    // below the integrator, so its error floor is ~ tol^{4/5}, not tol
    const double interp = std::pow(tol, 0.8);
    if (std::fabs(Mq - Mflux) > 50.0 * interp * std::fabs(Mflux) + 4.0 * err_est +
                                    1e-12 * std::fabs(Mflux))
        throw std::runtime_error("total_mass: quadrature and flux mass disagree");
    return Mq;
}

struct LaneEmdenSolution {
    double n = 0;
    double xi1 = 0;                     // first zero of theta
    double minus_xi2_thetaprime = 0;    // -xi1^2 theta'(xi1)
    std::vector<double> grid, theta;
};

// theta'' + (2/s) theta' = -theta_+^n, theta(0)=1, theta'(0)=0.
inline LaneEmdenSolution lane_emden(double n, double tol, std::size_t N = 2000) {
    if (!(n > 0.0 && n < 5.0)) throw std::domain_error("lane_emden: need 0 < n < 5");
    const double s0 = 1e-8;
    std::array<double, 2> y0{1.0 - s0 * s0 / 6.0, s0 * s0 * s0 / 3.0};  // (theta, w= -s^2 theta')
    auto rhs = [n](double s, const std::array<double, 2>& y) {
        const double th = y[0] > 0.0 ? y[0] : 0.0;
        return std::array<double, 2>{-y[1] / (s * s), s * s * std::pow(th, n)};
    };
    auto event = [](double, const std::array<double, 2>& y) { return y[0]; };
    auto sol = integrate_rk45<2>(rhs, s0, y0, 50.0, event, tol, tol, 1e-3);
    if (!sol.event_hit) throw std::runtime_error("lane_emden: no zero found");
    LaneEmdenSolution out;
    out.n = n;
    out.xi1 = sol.t_event;
    out.minus_xi2_thetaprime = sol.y_event[1];
    out.grid.resize(N + 1);
    out.theta.resize(N + 1);
    const double h = out.xi1 / double(N);
    for (std::size_t i = 0; i <= N; ++i) {
        const double s = double(i) * h;
        out.grid[i] = s;
        if (i == 0) out.theta[0] = 1.0;
        else if (i == N) out.theta[N] = 0.0;
        else if (s < sol.steps.front().t0) out.theta[i] = 1.0 - s * s / 6.0;
        else out.theta[i] = sol.eval(s)[0];
    }
    return out;
}

}  // namespace starstab
