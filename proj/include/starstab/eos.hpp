#pragma once

// Barotropic equation-of-state families P(rho) together with the enthalpy
// machinery: Phi''(rho) = P'(rho)/rho, its antiderivative Phi' (with
// Phi'(0)=0), and the inverse F+ = (Phi')^{-1} extended by zero, which is
// what the hydrostatic ODE actually consumes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace starstab {

enum class EosFamily { polytrope, white_dwarf, composite, tabulated };

// f(x) = x sqrt(x^2+1) (2x^2-3) + 3 asinh(x) = 8 \int_0^x u^4/sqrt(1+u^2) du.
// The closed form cancels to ~x^5 for small x, so switch to the series there.
inline double white_dwarf_f(double x) {
    if (x < 0.0) throw std::domain_error("white_dwarf_f: x < 0");
    // below the switch the closed form loses ~x^{-4} digits to cancellation
    // (~1e-11 relative at 0.05); the truncated series is ~4e-12 there
    if (x < 0.05) {
        // 8 * sum_k (-1)^k C(2k,k) 4^{-k} x^{5+2k}/(5+2k)
        const double x2 = x * x;
        double term = x2 * x2 * x;  // x^5
        double s = 8.0 * term / 5.0;
        s -= 4.0 * (term *= x2) / 7.0;        // -(8/2)/7 x^7
        s += 8.0 * 0.375 * (term *= x2) / 9.0;  // 8*(3/8)/9 x^9
        s -= 8.0 * 0.3125 * (term *= x2) / 11.0; // 8*(5/16)/11 x^11
        return s;
    }
    const double w = std::sqrt(x * x + 1.0);
    return x * w * (2.0 * x * x - 3.0) + 3.0 * std::asinh(x);
}

namespace detail {

// Monotone cubic (Fritsch-Carlson) interpolant; keeps d/dx >= 0 for
// increasing data, which is what guards P' > 0 for tabulated EOS.
struct Pchip {
    std::vector<double> x, y, d;  // nodes, values, node slopes

    void build(std::vector<double> xs, std::vector<double> ys) {
        x = std::move(xs);
        y = std::move(ys);
        const std::size_t n = x.size();
        if (n < 2) throw std::invalid_argument("pchip: need >= 2 points");
        std::vector<double> h(n - 1), del(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x[i + 1] - x[i];
            if (h[i] <= 0.0) throw std::invalid_argument("pchip: x not increasing");
            del[i] = (y[i + 1] - y[i]) / h[i];
        }
        d.assign(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (del[i - 1] * del[i] > 0.0) {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
            }
        }
        // one-sided ends (Fritsch-Butland style), clipped for monotonicity
        auto endslope = [](double h0, double h1, double d0, double d1) {
            double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if (s * d0 <= 0.0) s = 0.0;
            else if (d0 * d1 < 0.0 && std::fabs(s) > 3.0 * std::fabs(d0)) s = 3.0 * d0;
            return s;
        };
        d[0] = (n == 2) ? del[0] : endslope(h[0], h[1], del[0], del[1]);
        d[n - 1] = (n == 2) ? del[0] : endslope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    }

    std::size_t cell(double xq) const {
        auto it = std::upper_bound(x.begin(), x.end(), xq);
        std::size_t i = (it == x.begin()) ? 0 : std::size_t(it - x.begin()) - 1;
        return std::min(i, x.size() - 2);
    }

    double eval(double xq) const {
        const std::size_t i = cell(xq);
        const double h = x[i + 1] - x[i], t = (xq - x[i]) / h;
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        return h00 * y[i] + h * h10 * d[i] + h01 * y[i + 1] + h * h11 * d[i + 1];
    }

    double deriv(double xq) const {
        const std::size_t i = cell(xq);
        const double h = x[i + 1] - x[i], t = (xq - x[i]) / h;
        const double g00 = 6 * t * (t - 1) / h, g10 = (1 - t) * (1 - 3 * t);
        const double g01 = -g00, g11 = t * (3 * t - 2);
        return g00 * y[i] + g10 * d[i] + g01 * y[i + 1] + g11 * d[i + 1];
    }
};

struct TableData {
    Pchip logP;          // log P vs log rho
    Pchip phi;           // Phi' vs log rho (cumulative integral cache)
    double rho_min = 0, rho_max = 0;
    double gamma0 = 0;   // log-log slope at the low end
    double phi_min = 0;  // Phi'(rho_min), power-law closed form below the table
    double phi_max = 0;  // Phi'(rho_max) = s_max of the supported range
};

}  // namespace detail

class EquationOfState {
public:
    static EquationOfState polytrope(double K, double gamma) {
        if (!(K > 0.0) || !(gamma > 1.0))
            throw std::invalid_argument("polytrope: need K > 0, gamma > 1");
        EquationOfState e;
        e.family_ = EosFamily::polytrope;
        e.K_ = K;
        e.gamma_ = gamma;
        e.gamma0_ = gamma;
        return e;
    }

    static EquationOfState white_dwarf(double A, double B) {
        if (!(A > 0.0) || !(B > 0.0))
            throw std::invalid_argument("white_dwarf: need A > 0, B > 0");
        EquationOfState e;
        e.family_ = EosFamily::white_dwarf;
        e.A_ = A;
        e.B_ = B;
        e.gamma0_ = 5.0 / 3.0;
        return e;
    }

    // Two-zone C^1 law: P = c- rho^g0 below rho_blend, c+ rho^ginf + d above,
    // with c+, d fixed by continuity of P and P'.
    static EquationOfState composite(double c_minus, double gamma0, double gamma_inf,
                                     double rho_blend) {
        if (!(c_minus > 0.0) || !(rho_blend > 0.0) || !(gamma_inf > 0.0))
            throw std::invalid_argument("composite: need c_minus, gamma_inf, rho_blend > 0");
        if (!(gamma0 > 4.0 / 3.0 && gamma0 < 2.0))
            throw std::invalid_argument("composite: gamma0 must lie in (4/3, 2)");
        EquationOfState e;
        e.family_ = EosFamily::composite;
        e.cm_ = c_minus;
        e.gamma_ = gamma0;
        e.gi_ = gamma_inf;
        e.rb_ = rho_blend;
        e.gamma0_ = gamma0;
        // C^1 matching at rho_blend
        e.cp_ = c_minus * gamma0 / gamma_inf * std::pow(rho_blend, gamma0 - gamma_inf);
        e.dd_ = c_minus * std::pow(rho_blend, gamma0) - e.cp_ * std::pow(rho_blend, gamma_inf);
        if (!(e.cp_ > 0.0))
            throw std::invalid_argument("composite: construction gives nonpositive P'");
        return e;
    }

    static EquationOfState tabulated(std::vector<double> rho, std::vector<double> P) {
        if (rho.size() != P.size() || rho.size() < 4)
            throw std::invalid_argument("tabulated: need >= 4 matched samples");
        std::vector<double> lr(rho.size()), lp(P.size());
        for (std::size_t i = 0; i < rho.size(); ++i) {
            if (!(rho[i] > 0.0) || !(P[i] > 0.0))
                throw std::invalid_argument("tabulated: samples must be positive");
            if (i && (rho[i] <= rho[i - 1] || P[i] <= P[i - 1]))
                throw std::invalid_argument("tabulated: samples must be strictly increasing");
            lr[i] = std::log(rho[i]);
            lp[i] = std::log(P[i]);
        }
        EquationOfState e;
        e.family_ = EosFamily::tabulated;
        auto tab = std::make_shared<detail::TableData>();
        tab->logP.build(lr, lp);
        tab->rho_min = rho.front();
        tab->rho_max = rho.back();
        tab->gamma0 = tab->logP.deriv(lr.front());
        if (!(tab->gamma0 > 1.0))
            throw std::invalid_argument("tabulated: low-end slope must exceed 1");
        tab->phi_min = tab->gamma0 / (tab->gamma0 - 1.0) * P.front() / rho.front();
        // cumulative Phi'(rho) = Phi'(rho_min) + int P'(s)/s ds, integrated in
        // u = log rho by composite Simpson on a fine grid, then interpolated
        const std::size_t per = 16;
        std::vector<double> us, ph;
        us.push_back(lr.front());
        ph.push_back(tab->phi_min);
        auto g = [&](double u) {  // P'(rho) at rho = e^u, equals (P/rho) dlogP/dlogrho
            return std::exp(tab->logP.eval(u) - u) * tab->logP.deriv(u);
        };
        for (std::size_t i = 0; i + 1 < lr.size(); ++i) {
            const double du = (lr[i + 1] - lr[i]) / double(per);
            for (std::size_t k = 0; k < per; ++k) {
                const double a = lr[i] + k * du, b = a + du;
                const double inc = du / 6.0 * (g(a) + 4.0 * g(0.5 * (a + b)) + g(b));
                us.push_back(b);
                ph.push_back(ph.back() + inc);
            }
        }
        tab->phi_max = ph.back();
        tab->phi.build(us, ph);
        e.tab_ = std::move(tab);
        e.gamma0_ = e.tab_->gamma0;
        return e;
    }

    EosFamily family() const { return family_; }
    double gamma0() const { return gamma0_; }
    // whether gamma0 lies in the open interval the stability theory assumes
    bool gamma0_in_theory() const { return gamma0_ > 6.0 / 5.0 && gamma0_ < 2.0; }

    double pressure(double rho) const {
        if (rho < 0.0) throw std::domain_error("pressure: rho < 0");
        if (rho == 0.0) return 0.0;
        switch (family_) {
            case EosFamily::polytrope:
                return K_ * std::pow(rho, gamma_);
            case EosFamily::white_dwarf:
                return A_ * white_dwarf_f(std::cbrt(rho / B_));
            case EosFamily::composite:
                return rho <= rb_ ? cm_ * std::pow(rho, gamma_)
                                  : cp_ * std::pow(rho, gi_) + dd_;
            case EosFamily::tabulated:
                check_table_range(rho);
                return std::exp(tab_->logP.eval(std::log(rho)));
        }
        return 0.0;
    }

    double dpressure(double rho) const {  // P'(rho)
        if (rho < 0.0) throw std::domain_error("dpressure: rho < 0");
        if (rho == 0.0) return 0.0;
        switch (family_) {
            case EosFamily::polytrope:
                return K_ * gamma_ * std::pow(rho, gamma_ - 1.0);
            case EosFamily::white_dwarf: {
                const double x = std::cbrt(rho / B_);
                return 8.0 * A_ / (3.0 * B_) * x * x / std::sqrt(1.0 + x * x);
            }
            case EosFamily::composite:
                return rho <= rb_ ? cm_ * gamma_ * std::pow(rho, gamma_ - 1.0)
                                  : cp_ * gi_ * std::pow(rho, gi_ - 1.0);
            case EosFamily::tabulated: {
                check_table_range(rho);
                const double u = std::log(rho);
                return std::exp(tab_->logP.eval(u) - u) * tab_->logP.deriv(u);
            }
        }
        return 0.0;
    }

    double enthalpy_curv(double rho) const {  // Phi''(rho) = P'(rho)/rho
        if (!(rho > 0.0)) throw std::domain_error("enthalpy_curv: rho must be > 0");
        return dpressure(rho) / rho;
    }

    double enthalpy_slope(double rho) const {  // Phi'(rho), Phi'(0) = 0
        if (rho < 0.0) throw std::domain_error("enthalpy_slope: rho < 0");
        if (rho == 0.0) return 0.0;
        switch (family_) {
            case EosFamily::polytrope:
                return K_ * gamma_ / (gamma_ - 1.0) * std::pow(rho, gamma_ - 1.0);
            case EosFamily::white_dwarf: {
                const double x = std::cbrt(rho / B_);
                return 8.0 * A_ / B_ * (std::sqrt(1.0 + x * x) - 1.0);
            }
            case EosFamily::composite: {
                if (rho <= rb_)
                    return cm_ * gamma_ / (gamma_ - 1.0) * std::pow(rho, gamma_ - 1.0);
                const double phib = cm_ * gamma_ / (gamma_ - 1.0) * std::pow(rb_, gamma_ - 1.0);
                if (gi_ == 1.0) return phib + cp_ * std::log(rho / rb_);
                return phib + cp_ * gi_ / (gi_ - 1.0) *
                                  (std::pow(rho, gi_ - 1.0) - std::pow(rb_, gi_ - 1.0));
            }
            case EosFamily::tabulated: {
                check_table_range(rho);
                if (rho < tab_->rho_min)  // power-law extension below the table
                    return tab_->phi_min * std::pow(rho / tab_->rho_min, tab_->gamma0 - 1.0);
                return tab_->phi.eval(std::log(rho));
            }
        }
        return 0.0;
    }

    // sup of the range of Phi' (inf means every y > 0 is invertible)
    double s_max() const {
        switch (family_) {
            case EosFamily::polytrope:
            case EosFamily::white_dwarf:
                return std::numeric_limits<double>::infinity();
            case EosFamily::composite:
                if (gi_ >= 1.0) return std::numeric_limits<double>::infinity();
                return cm_ * gamma_ / (gamma_ - 1.0) * std::pow(rb_, gamma_ - 1.0) +
                       cp_ * gi_ / (1.0 - gi_) * std::pow(rb_, gi_ - 1.0);
            case EosFamily::tabulated:
                return tab_->phi_max;
        }
        return 0.0;
    }

    // inverse of Phi' (positive branch); internal helper for EnthalpyInverse
    double invert_enthalpy(double y) const {
        if (y <= 0.0) return 0.0;
        if (!(y < s_max())) throw std::range_error("enthalpy inverse: y beyond s_max");
        switch (family_) {
            case EosFamily::polytrope:
                return std::pow((gamma_ - 1.0) * y / (K_ * gamma_), 1.0 / (gamma_ - 1.0));
            case EosFamily::white_dwarf: {
                const double t = 1.0 + y * B_ / (8.0 * A_);
                const double x = std::sqrt((t - 1.0) * (t + 1.0));
                return B_ * x * x * x;
            }
            case EosFamily::composite: {
                const double phib = cm_ * gamma_ / (gamma_ - 1.0) * std::pow(rb_, gamma_ - 1.0);
                if (y <= phib)
                    return std::pow((gamma_ - 1.0) * y / (cm_ * gamma_), 1.0 / (gamma_ - 1.0));
                if (gi_ == 1.0) return rb_ * std::exp((y - phib) / cp_);
                const double t = (y - phib) * (gi_ - 1.0) / (cp_ * gi_) +
                                 std::pow(rb_, gi_ - 1.0);
                return std::pow(t, 1.0 / (gi_ - 1.0));
            }
            case EosFamily::tabulated: {
                if (y <= tab_->phi_min)  // closed-form power-law zone
                    return tab_->rho_min *
                           std::pow(y / tab_->phi_min, 1.0 / (tab_->gamma0 - 1.0));
                // bisection on the cached monotone Phi'(log rho)
                double lo = std::log(tab_->rho_min), hi = std::log(tab_->rho_max);
                for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(hi));
                     ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (tab_->phi.eval(mid) < y ? lo : hi) = mid;
                }
                return std::exp(0.5 * (lo + hi));
            }
        }
        return 0.0;
    }

private:
    void check_table_range(double rho) const {
        // queries below the table use the power-law extension; above is an error
        if (rho > tab_->rho_max * (1.0 + 1e-12))
            throw std::range_error("tabulated EOS queried above the table");
    }

    EosFamily family_ = EosFamily::polytrope;
    double K_ = 1.0, gamma_ = 5.0 / 3.0;   // polytrope (gamma_ reused as gamma0 for composite)
    double A_ = 1.0, B_ = 1.0;             // white dwarf
    double cm_ = 1.0, gi_ = 1.0, rb_ = 1.0, cp_ = 1.0, dd_ = 0.0;  // composite
    std::shared_ptr<const detail::TableData> tab_;  // tabulated
    double gamma0_ = 5.0 / 3.0;
};

inline EquationOfState make_composite(double c_minus, double gamma0, double gamma_inf,
                                      double rho_blend) {
    return EquationOfState::composite(c_minus, gamma0, gamma_inf, rho_blend);
}

// F+ = (Phi')^{-1} extended by zero on y <= 0, plus its derivative
// F+'(y) = rho / P'(rho) at rho = F+(y)  (inverse-function rule).
struct EnthalpyInverse {
    EquationOfState eos;
    double s_max = 0.0;

    double F(double y) const { return y <= 0.0 ? 0.0 : eos.invert_enthalpy(y); }

    double dF(double y) const {
        if (y <= 0.0) return 0.0;
        const double rho = eos.invert_enthalpy(y);
        if (rho == 0.0) return 0.0;
        return rho / eos.dpressure(rho);
    }
};

inline EnthalpyInverse enthalpy_inverse(const EquationOfState& eos) {
    return EnthalpyInverse{eos, eos.s_max()};
}

}  // namespace starstab
