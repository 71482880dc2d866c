#pragma once

// Adaptive embedded Runge-Kutta (Cash-Karp 4(5)) with stored steps, cubic
// Hermite dense output, and terminal-event detection by sign-change
// bracketing plus bisection on the interpolant.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace starstab {

template <std::size_t D>
struct OdeStep {
    double t0 = 0, t1 = 0;
    std::array<double, D> y0{}, y1{}, f0{}, f1{};
};

template <std::size_t D>
struct OdeSolution {
    std::vector<OdeStep<D>> steps;
    bool event_hit = false;
    double t_event = 0;
    std::array<double, D> y_event{};

    // cubic Hermite interpolation inside the step containing t
    std::array<double, D> eval(double t) const {
        const OdeStep<D>* s = locate(t);
        return hermite(*s, t);
    }

    std::array<double, D> eval_deriv(double t) const {
        const OdeStep<D>* s = locate(t);
        return hermite_deriv(*s, t);
    }

    static std::array<double, D> hermite(const OdeStep<D>& s, double t) {
        const double h = s.t1 - s.t0, u = (t - s.t0) / h;
        const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
        const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
        std::array<double, D> y;
        for (std::size_t i = 0; i < D; ++i)
            y[i] = h00 * s.y0[i] + h * h10 * s.f0[i] + h01 * s.y1[i] + h * h11 * s.f1[i];
        return y;
    }

    static std::array<double, D> hermite_deriv(const OdeStep<D>& s, double t) {
        const double h = s.t1 - s.t0, u = (t - s.t0) / h;
        const double g00 = 6 * u * (u - 1) / h, g10 = (1 - u) * (1 - 3 * u);
        const double g01 = -g00, g11 = u * (3 * u - 2);
        std::array<double, D> y;
        for (std::size_t i = 0; i < D; ++i)
            y[i] = g00 * s.y0[i] + g10 * s.f0[i] + g01 * s.y1[i] + g11 * s.f1[i];
        return y;
    }

private:
    const OdeStep<D>* locate(double t) const {
        std::size_t lo = 0, hi = steps.size();
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (steps[mid].t0 <= t ? lo : hi) = mid;
        }
        return &steps[lo];
    }
};

// Integrate y' = f(t, y) from (t0, y0) until the event function crosses zero
// (terminal) or t reaches t_max. rtol controls both the step error and the
// relative accuracy of the event time.
template <std::size_t D, class F, class G>
OdeSolution<D> integrate_rk45(F&& f, double t0, std::array<double, D> y0, double t_max,
                              G&& event, double rtol, double atol = 0.0,
                              double h_init = 0.0) {
    static const double A2 = 1. / 5, A3 = 3. / 10, A4 = 3. / 5, A5 = 1., A6 = 7. / 8;
    static const double B21 = 1. / 5;
    static const double B31 = 3. / 40, B32 = 9. / 40;
    static const double B41 = 3. / 10, B42 = -9. / 10, B43 = 6. / 5;
    static const double B51 = -11. / 54, B52 = 5. / 2, B53 = -70. / 27, B54 = 35. / 27;
    static const double B61 = 1631. / 55296, B62 = 175. / 512, B63 = 575. / 13824,
                        B64 = 44275. / 110592, B65 = 253. / 4096;
    static const double C1 = 37. / 378, C3 = 250. / 621, C4 = 125. / 594, C6 = 512. / 1771;
    static const double D1 = C1 - 2825. / 27648, D3 = C3 - 18575. / 48384,
                        D4 = C4 - 13525. / 55296, D5 = -277. / 14336, D6 = C6 - 1. / 4;

    OdeSolution<D> sol;
    double t = t0;
    std::array<double, D> y = y0;
    std::array<double, D> fy;
    auto rhs = [&](double tt, const std::array<double, D>& yy) {
        return f(tt, yy);
    };
    fy = rhs(t, y);
    double h = h_init > 0.0 ? h_init : (t_max - t0) * 1e-6;
    double gprev = event(t, y);

    for (std::size_t it = 0; it < 2000000; ++it) {
        if (t >= t_max) return sol;
        if (t + h > t_max) h = t_max - t;
        std::array<double, D> k1 = fy, k2, k3, k4, k5, k6, yt, y5;
        auto stage = [&](double a, auto&&... terms) {
            std::array<double, D> z;
            for (std::size_t i = 0; i < D; ++i) {
                double acc = y[i];
                ((acc += h * terms.first * terms.second[i]), ...);
                z[i] = acc;
            }
            return rhs(t + a * h, z);
        };
        using P = std::pair<double, const std::array<double, D>&>;
        k2 = stage(A2, P{B21, k1});
        k3 = stage(A3, P{B31, k1}, P{B32, k2});
        k4 = stage(A4, P{B41, k1}, P{B42, k2}, P{B43, k3});
        k5 = stage(A5, P{B51, k1}, P{B52, k2}, P{B53, k3}, P{B54, k4});
        k6 = stage(A6, P{B61, k1}, P{B62, k2}, P{B63, k3}, P{B64, k4}, P{B65, k5});
        double errmax = 0.0;
        for (std::size_t i = 0; i < D; ++i) {
            y5[i] = y[i] + h * (C1 * k1[i] + C3 * k3[i] + C4 * k4[i] + C6 * k6[i]);
            const double err = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] +
                                    D6 * k6[i]);
            const double sc = atol + rtol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
            if (sc > 0.0) errmax = std::max(errmax, std::fabs(err) / sc);
        }
        if (errmax > 1.0) {
            h *= std::max(0.1, 0.9 * std::pow(errmax, -0.25));
            continue;
        }
        OdeStep<D> st;
        st.t0 = t;
        st.t1 = t + h;
        st.y0 = y;
        st.f0 = fy;
        st.y1 = y5;
        st.f1 = rhs(st.t1, y5);
        sol.steps.push_back(st);
        const double gnew = event(st.t1, y5);
        if (gprev > 0.0 && gnew <= 0.0) {
            // bisection for the event time on the Hermite interpolant
            double lo = st.t0, hi = st.t1;
            for (int b = 0; b < 200 && (hi - lo) > rtol * std::max(1.0, std::fabs(hi));
                 ++b) {
                const double mid = 0.5 * (lo + hi);
                auto ym = OdeSolution<D>::hermite(st, mid);
                (event(mid, ym) > 0.0 ? lo : hi) = mid;
            }
            sol.event_hit = true;
            sol.t_event = 0.5 * (lo + hi);
            sol.y_event = OdeSolution<D>::hermite(st, sol.t_event);
            return sol;
        }
        gprev = gnew;
        t = st.t1;
        y = y5;
        fy = st.f1;
        h *= std::min(5.0, 0.9 * std::pow(std::max(errmax, 1e-16), -0.2));
    }
    throw std::runtime_error("integrate_rk45: step limit exceeded");
}

}  // namespace starstab
