#pragma once

// Finite-dimensional separable linear Hamiltonian systems
//     d/dt (u, v) = JL (u, v),   JL = [[0, B A], [-B' L, 0]],
// with L = L' on the u-block, A = A' >= 0 on the v-block. The unstable
// dimension equals the negative index of L restricted to range(BA); the
// center space grows at most like (1+|t|)^3, realized by the 5x5 nilpotent
// example shipped below.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "spectral.hpp"

namespace starstab {

struct SeparableTriple {
    Eigen::MatrixXd L, A, B;  // B maps the v-block to the u-block
    Eigen::MatrixXd JL;
    Eigen::Index nx = 0, ny = 0;

    Eigen::MatrixXd energy_matrix() const {  // blkdiag(L, A): the conserved form
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(nx + ny, nx + ny);
        E.topLeftCorner(nx, nx) = L;
        E.bottomRightCorner(ny, ny) = A;
        return E;
    }
};

inline SeparableTriple assemble(Eigen::MatrixXd L, Eigen::MatrixXd A, Eigen::MatrixXd B,
                                double tol = 1e-10) {
    if (L.rows() != L.cols() || A.rows() != A.cols() || B.rows() != L.rows() ||
        B.cols() != A.rows())
        throw std::invalid_argument("assemble: incompatible dimensions");
    SeparableTriple t;
    t.nx = L.rows();
    t.ny = A.rows();
    t.L = 0.5 * (L + L.transpose());
    t.A = 0.5 * (A + A.transpose());
    t.B = std::move(B);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.A, Eigen::EigenvaluesOnly);
    const double anorm = std::max(1e-300, t.A.norm());
    if (es.eigenvalues().minCoeff() < -tol * anorm)
        throw std::invalid_argument("assemble: A is not positive semidefinite");
    t.JL = Eigen::MatrixXd::Zero(t.nx + t.ny, t.nx + t.ny);
    t.JL.topRightCorner(t.nx, t.ny) = t.B * t.A;
    t.JL.bottomLeftCorner(t.ny, t.nx) = -t.B.transpose() * t.L;
    return t;
}

// the fully explicit 5x5 nilpotent showcase: (JL)^4 = 0, center growth ~ t^3
inline SeparableTriple nilpotent_5x5() {
    Eigen::MatrixXd L(2, 2), A(3, 3), B(2, 3);
    L << 2, -1, -1, 0;
    A = Eigen::MatrixXd::Zero(3, 3);
    A(1, 1) = 1;
    A(2, 2) = 1;
    B << 1, 1, 0, 0, 1, 0;
    return assemble(L, A, B);
}

// eigenvalues of JL, verified closed under conjugation and negation
inline Eigen::VectorXcd spectrum(const SeparableTriple& t, double tol = 1e-8) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(t.JL);
    Eigen::VectorXcd ev = es.eigenvalues();
    const double sc = std::max(1.0, t.JL.norm()) * tol;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        for (const std::complex<double> target :
             {-ev(i), std::conj(ev(i)), -std::conj(ev(i))}) {
            double best = 1e300;
            for (Eigen::Index j = 0; j < ev.size(); ++j)
                best = std::min(best, std::abs(ev(j) - target));
            if (best > sc)
                throw std::runtime_error("spectrum: Hamiltonian quadruple symmetry broken");
        }
    }
    return ev;
}

struct Trichotomy {
    int d_u = 0, d_s = 0, d_c = 0;
    double lambda_u = 0;                       // smallest unstable real part
    std::vector<std::complex<double>> unstable;
    Eigen::MatrixXd Eu, Es, Ec;                // real bases (columns)
};

namespace detail {

inline Eigen::MatrixXd real_basis_from_eigenvectors(
    const Eigen::EigenSolver<Eigen::MatrixXd>& es, bool unstable, double th) {
    const auto& ev = es.eigenvalues();
    const auto& V = es.eigenvectors();
    std::vector<Eigen::VectorXd> cols;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const double re = ev(i).real(), im = ev(i).imag();
        if (unstable ? (re <= th) : (re >= -th)) continue;
        // phase-normalize so a real eigenvector does not hide in the imag part
        Eigen::Index imax = 0;
        V.col(i).cwiseAbs().maxCoeff(&imax);
        const std::complex<double> ph = V(imax, i) / std::abs(V(imax, i));
        Eigen::VectorXcd v = V.col(i) / ph;
        if (std::fabs(im) <= th) {
            cols.push_back(v.real());
        } else if (im > 0.0) {  // complex pair contributes two real columns
            cols.push_back(v.real());
            cols.push_back(v.imag());
        }
    }
    Eigen::MatrixXd E(es.eigenvectors().rows(), Eigen::Index(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) E.col(Eigen::Index(c)) = cols[c];
    return E;
}

}  // namespace detail

inline int negative_index_on_range_BA(const SeparableTriple& t) {
    Eigen::MatrixXd BA = t.B * t.A;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(BA);
    qr.setThreshold(1e-10);  // relative to the largest pivot, times |BA|-ish
    const Eigen::Index rank = qr.rank();
    if (rank == 0) return 0;
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(t.nx, rank);
    Eigen::MatrixXd Lp = Q.transpose() * t.L * Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Lp, Eigen::EigenvaluesOnly);
    const double width = std::max(1e-300, double(es.eigenvalues().cwiseAbs().maxCoeff()));
    // floor by the roundoff of the projection arithmetic so an exactly-zero
    // restriction (Lp ~ eps |L|) is not miscounted as negative
    const double thneg = 1e-10 * width + 1e-13 * t.L.norm();
    int cnt = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) < -thneg) ++cnt;
    return cnt;
}

inline Trichotomy trichotomy(const SeparableTriple& t, double tol = 1e-8) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(t.JL);
    const Eigen::Index n = t.nx + t.ny;
    // a defective (Jordan-block) zero eigenvalue scatters by eps^{1/k}, far
    // above roundoff; if the tight threshold disagrees with the inertia count,
    // retry once at the defectivity noise floor before declaring failure.
    // Only the zero eigenvalue can be defective and its blocks have size <= 4
    // (center growth is at most cubic), so the floor is eps^{1/4}.
    const double jlnorm = std::max(1.0, t.JL.norm());
    const double th_lo = tol * jlnorm;
    const double th_hi = std::max(
        th_lo, jlnorm * std::pow(std::numeric_limits<double>::epsilon(), 0.25));
    const int by_inertia = negative_index_on_range_BA(t);
    Trichotomy tr;
    double th = th_lo;
    for (const double cand : {th_lo, th_hi}) {
        tr = Trichotomy{};
        th = cand;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const double re = es.eigenvalues()(i).real();
            if (re > th) {
                ++tr.d_u;
                tr.unstable.push_back(es.eigenvalues()(i));
                tr.lambda_u = tr.lambda_u == 0.0 ? re : std::min(tr.lambda_u, re);
            } else if (re < -th) {
                ++tr.d_s;
            }
        }
        if (tr.d_u == by_inertia) break;
    }
    if (tr.d_u != by_inertia)
        throw std::runtime_error("trichotomy: eigenvalue count " + std::to_string(tr.d_u) +
                                 " != inertia count " + std::to_string(by_inertia));
    tr.d_c = int(n) - tr.d_u - tr.d_s;
    tr.Eu = detail::real_basis_from_eigenvectors(es, true, th);
    tr.Es = detail::real_basis_from_eigenvectors(es, false, th);
    if (tr.Eu.cols() != tr.d_u || tr.Es.cols() != tr.d_s)
        throw std::runtime_error("trichotomy: eigenvector basis extraction failed");

    if (tr.d_u + tr.d_s == 0) {
        tr.Ec = Eigen::MatrixXd::Identity(n, n);
        return tr;
    }
    if (tr.d_c == 0) {
        tr.Ec = Eigen::MatrixXd::Zero(n, 0);
        return tr;
    }
    // E^c is the energy-orthogonal complement of E^u + E^s
    Eigen::MatrixXd Eus(n, tr.d_u + tr.d_s);
    Eus << tr.Eu, tr.Es;
    Eigen::MatrixXd K = Eus.transpose() * t.energy_matrix();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    lu.setThreshold(1e-10);
    Eigen::MatrixXd ker = lu.kernel();
    if (ker.cols() != tr.d_c)
        throw std::runtime_error("trichotomy: center space ill-conditioned");
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(ker);
    tr.Ec = qr.householderQ() * Eigen::MatrixXd::Identity(n, tr.d_c);
    // invariance sanity check
    Eigen::MatrixXd JC = t.JL * tr.Ec;
    Eigen::MatrixXd resid = JC - tr.Ec * (tr.Ec.transpose() * JC);
    if (resid.norm() > 1e-6 * std::max(1.0, t.JL.norm()))
        throw std::runtime_error("trichotomy: center space not invariant");
    return tr;
}

struct GrowthFit {
    int degree = 0;
    double slope = 0;
    double residual = 0;
};

// polynomial growth degree of |exp(t JL)| on the center space, fitted on
// log-spaced t in [T/10, T]; keep t |JL| well below eps^{-1/4} or the
// scaling-and-squaring roundoff of exp() starts inflating the norm
inline GrowthFit growth_degree(const SeparableTriple& t, const Trichotomy& tr,
                               double T = 1e3, int samples = 16) {
    GrowthFit fit;
    if (tr.d_c == 0) return fit;
    Eigen::MatrixXd Mc = tr.Ec.transpose() * (t.JL * tr.Ec);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> xs(samples), ys(samples);
    for (int i = 0; i < samples; ++i) {
        const double lt = std::log(T / 10.0) +
                          (std::log(T) - std::log(T / 10.0)) * double(i) / (samples - 1);
        const double tt = std::exp(lt);
        Eigen::MatrixXd E = (tt * Mc).exp();
        const double nrm = E.operatorNorm();
        if (!std::isfinite(nrm) || nrm > 1e100)
            throw std::runtime_error("growth_degree: exponential growth on center space");
        xs[i] = lt;
        ys[i] = std::log(std::max(nrm, 1e-300));
        sx += lt; sy += ys[i]; sxx += lt * lt; sxy += lt * ys[i];
    }
    fit.slope = (samples * sxy - sx * sy) / (samples * sxx - sx * sx);
    if (fit.slope > 3.49)
        throw std::runtime_error("growth_degree: super-cubic growth on center space");
    fit.degree = std::max(0, int(std::lround(fit.slope)));
    const double icept = (sy - fit.slope * sx) / samples;
    for (int i = 0; i < samples; ++i)
        fit.residual = std::max(fit.residual, std::fabs(ys[i] - icept - fit.slope * xs[i]));
    return fit;
}

struct Trajectory {
    std::vector<double> times, norms, energies;
    Eigen::VectorXd final_state;
    double energy_drift = 0;  // relative to |L|_F * max |w|^2 (the roundoff floor)
};

// implicit midpoint: exactly conserves the quadratic invariant <blkdiag(L,A)w,w>
inline Trajectory evolve(const SeparableTriple& t, const Eigen::VectorXd& w0, double t_end,
                         double dt, std::size_t record_every = 100) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(t.JL);
    double lmax = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        lmax = std::max(lmax, std::abs(es.eigenvalues()(i)));
    if (dt * lmax >= 0.5)
        throw std::invalid_argument("evolve: dt too large for the fastest mode");
    const Eigen::Index n = t.JL.rows();
    Eigen::MatrixXd Aop = Eigen::MatrixXd::Identity(n, n) - 0.5 * dt * t.JL;
    Eigen::MatrixXd Bop = Eigen::MatrixXd::Identity(n, n) + 0.5 * dt * t.JL;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Aop);
    Eigen::MatrixXd EM = t.energy_matrix();
    const double emnorm = std::max(1e-300, EM.norm());
    Eigen::VectorXd w = w0;
    const double E0 = w.dot(EM * w);
    Trajectory out;
    double maxw2 = w.squaredNorm(), maxdev = 0.0;
    const std::size_t steps = std::size_t(std::ceil(t_end / dt));
    for (std::size_t s = 0; s < steps; ++s) {
        w = lu.solve(Bop * w);
        maxw2 = std::max(maxw2, w.squaredNorm());
        if (s % record_every == 0 || s + 1 == steps) {
            const double E = w.dot(EM * w);
            maxdev = std::max(maxdev, std::fabs(E - E0));
            out.times.push_back(double(s + 1) * dt);
            out.norms.push_back(w.norm());
            out.energies.push_back(E);
        }
    }
    out.final_state = w;
    out.energy_drift = maxdev / (emnorm * maxw2);
    return out;
}

// Discretized radial pulsation triple in weighted coordinates: X carries the
// cell-midpoint densities with the local <Phi''.,.> norm, Y the interior node
// velocities with the <rho.,.> norm, so A becomes the identity and the
// unstable eigenvalue squares to -omega^2_min of the Eddington pencil.
inline SeparableTriple build_radial_triple(const StellarModel& model, std::size_t N) {
    const EddingtonAssembly a = eddington_assembly(model, N);
    const Eigen::Index nx = Eigen::Index(N), ny = Eigen::Index(N - 1);
    Eigen::VectorXd sx(nx), sy(ny);
    for (Eigen::Index j = 0; j < nx; ++j) sx(j) = std::sqrt(a.Lr.wloc[std::size_t(j)]);
    for (Eigen::Index i = 0; i < ny; ++i) sy(i) = std::sqrt(a.wy[std::size_t(i)]);
    Eigen::MatrixXd Lh = sx.cwiseInverse().asDiagonal() * a.Lr.S *
                         sx.cwiseInverse().asDiagonal();
    // Dg: sigma_j = -(g_{j+1} - g_j) / (h r_mj^2), g at node k = r_k^2 rho_k v_k
    Eigen::MatrixXd Dg = Eigen::MatrixXd::Zero(nx, ny);
    for (std::size_t j = 0; j < N; ++j) {
        const double rm = a.Lr.grid[j];
        const double den = a.h * rm * rm;
        if (j >= 1)
            Dg(Eigen::Index(j), Eigen::Index(j - 1)) =
                a.rnode[j - 1] * a.rnode[j - 1] * a.rhonode[j - 1] / den;
        if (j + 1 <= N - 1)
            Dg(Eigen::Index(j), Eigen::Index(j)) =
                -a.rnode[j] * a.rnode[j] * a.rhonode[j] / den;
    }
    Eigen::MatrixXd Bh = sx.asDiagonal() * Dg * sy.cwiseInverse().asDiagonal();
    return assemble(std::move(Lh), Eigen::MatrixXd::Identity(ny, ny), std::move(Bh));
}

// random corpus member: mixed-signature L, semidefinite A of random rank
inline SeparableTriple make_random_triple(std::mt19937& rng) {
    std::uniform_int_distribution<int> dim(2, 12);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int nx = dim(rng), ny = dim(rng);
    auto randmat = [&](int r, int c) {
        Eigen::MatrixXd M(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) M(i, j) = gauss(rng);
        return M;
    };
    Eigen::MatrixXd L = randmat(nx, nx);
    L = 0.5 * (L + L.transpose()).eval();
    Eigen::MatrixXd G = randmat(ny, ny);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd Q = qr.householderQ();
    Eigen::VectorXd d(ny);
    for (int i = 0; i < ny; ++i) d(i) = (uni(rng) < 0.3) ? 0.0 : uni(rng) + 0.1;
    Eigen::MatrixXd A = Q * d.asDiagonal() * Q.transpose();
    return assemble(std::move(L), std::move(A), randmat(nx, ny));
}

}  // namespace starstab
