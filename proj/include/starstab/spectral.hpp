#pragma once

// Discretizations of the radial stability operators.
//
//  D^l = -Delta_r + l(l+1)/r^2 - 4 pi F+'(y(r))   on (0, R_out), via u = r phi
//        which maps -Delta_r to -d^2/dr^2 with u(0) = 0.
//  L_r : quadratic form on radial densities sigma supported in [0, R]:
//        <L sigma, sigma> = int Phi''(rho) sigma^2 dx - (1/4pi) int |grad V|^2 dx,
//        Delta V = 4 pi sigma, evaluated through the radial Green solve
//        V'(r) = 4 pi m_sigma(r)/r^2, m_sigma(r) = int_0^r sigma s^2 ds.
//  Eddington pencil: radial pulsations in the velocity variable v, stiffness
//        Q(v) = int Phi'' sigma^2 dx - 16 pi^2 int rho^2 v^2 r^2 dr with
//        sigma = -(r^2 rho v)'/r^2, against weight int rho v^2 dx; omega^2 < 0
//        means a growing mode of rate sqrt(-omega^2).

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "equilibrium.hpp"
#include "tridiag.hpp"

namespace starstab {

enum class RadialKind { D0, Dl, Lr, Eddington };

// boundary treatment at R_out for the D^l family
enum class OuterBC {
    dirichlet,  // u(R_out) = 0; adequate for strictly negative modes only
    matched     // u' = -(l/R_out) u, matching the decaying exterior harmonic
                // (default: near-zero eigenvalues are what the counts hinge on)
};

struct RadialOperator {
    RadialKind kind = RadialKind::D0;
    int l = 0;
    double h = 0;        // DOF spacing
    double R = 0;        // stellar radius
    double R_out = 0;    // truncation radius (D0/Dl only)
    double scale = 0;    // physical spectral scale used by tolerances

    // banded path (D0, Dl, Eddington): symmetrized stiffness, weight = I
    Tridiag T;
    std::vector<double> grid;     // DOF radii
    std::vector<double> sqrt_w;   // v = vhat / sqrt_w maps back to the pencil variable

    // dense path (Lr): quadratic-form matrix over cell-midpoint densities
    Eigen::MatrixXd S;
    std::vector<double> wloc;     // local weights 4 pi Phi'' r^2 h (boundary-corrected)
    std::vector<double> wmass;    // mass-functional coefficients 4 pi r^2 h

    double kernel_tol() const { return std::max(10.0 * h * h, 1e-8) * scale; }
};

namespace detail {

inline RadialOperator assemble_D_impl(const StellarModel& model, int l,
                                      double R_out_factor, std::size_t N, OuterBC bc) {
    if (!(R_out_factor >= 3.0)) throw std::invalid_argument("R_out_factor must be >= 3");
    RadialOperator op;
    op.kind = l == 0 ? RadialKind::D0 : RadialKind::Dl;
    op.l = l;
    op.R = model.R;
    op.R_out = R_out_factor * model.R;
    const double h = op.R_out / double(N);
    op.h = h;
    if (std::size_t(model.R / h) < 100)
        throw std::invalid_argument("assemble_D: fewer than 100 nodes inside the star");

    const EnthalpyInverse inv = enthalpy_inverse(model.eos);
    const bool robin = (bc == OuterBC::matched);
    const std::size_t n = robin ? N : N - 1;  // include the node at R_out only for Robin
    op.grid.resize(n);
    std::vector<double> q(n), w(n), cterm(n);
    double qmax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double r = double(j + 1) * h;
        op.grid[j] = r;
        q[j] = 4.0 * PI * inv.dF(model.y_at(r));
        qmax = std::max(qmax, q[j]);
        cterm[j] = double(l) * double(l + 1) / (r * r);
        w[j] = (robin && j + 1 == N) ? 0.5 * h : h;
    }
    op.scale = qmax > 0.0 ? qmax : 1.0;

    // quadratic form sum_cells (u_{j+1}-u_j)^2/h + sum_j (c_j - q_j) u_j^2 w_j
    // (+ l/R_out * u_N^2 for the matched condition) against weight diag(w);
    // node j touches two cells (kinetic 2/h) except the Robin end node (1/h)
    op.T.diag.assign(n, 0.0);
    op.T.off.assign(n - 1, 0.0);
    op.sqrt_w.resize(n);
    for (std::size_t j = 0; j < n; ++j) op.sqrt_w[j] = std::sqrt(w[j]);
    for (std::size_t j = 0; j < n; ++j) {
        double kin = 2.0 / h;
        if (robin && j + 1 == n) kin = 1.0 / h + double(l) / op.R_out;
        const double Qd = kin + (cterm[j] - q[j]) * w[j];
        op.T.diag[j] = Qd / w[j];  // T = W^{-1/2} Q W^{-1/2}
    }
    for (std::size_t j = 0; j + 1 < n; ++j)
        op.T.off[j] = -1.0 / h / (op.sqrt_w[j] * op.sqrt_w[j + 1]);
    return op;
}

}  // namespace detail

inline RadialOperator assemble_D0(const StellarModel& model, double R_out_factor,
                                  std::size_t N, OuterBC bc = OuterBC::matched) {
    return detail::assemble_D_impl(model, 0, R_out_factor, N, bc);
}

inline RadialOperator assemble_Dl(const StellarModel& model, int l, double R_out_factor,
                                  std::size_t N, OuterBC bc = OuterBC::matched) {
    if (l < 1) throw std::invalid_argument("assemble_Dl: l >= 1");
    return detail::assemble_D_impl(model, l, R_out_factor, N, bc);
}

inline RadialOperator assemble_Lr(const StellarModel& model, std::size_t N) {
    RadialOperator op;
    op.kind = RadialKind::Lr;
    op.R = model.R;
    const double h = model.R / double(N);
    op.h = h;
    op.grid.resize(N);
    op.wloc.resize(N);
    op.wmass.resize(N);
    const double g0 = model.eos.gamma0();
    const double beta = (2.0 - g0) / (g0 - 1.0);  // Phi'' ~ (R-r)^{-beta} near R
    for (std::size_t j = 0; j < N; ++j) {
        const double r = (double(j) + 0.5) * h;  // cell midpoints; rho > 0 there
        op.grid[j] = r;
        const double rho = model.rho_at(r);
        double wl = 4.0 * PI * model.eos.enthalpy_curv(rho) * r * r * h;
        if (j + 1 == N && beta < 1.0)
            wl *= std::pow(2.0, -beta) / (1.0 - beta);  // analytic power-law cell
        op.wloc[j] = wl;
        op.wmass[j] = 4.0 * PI * r * r * h;
    }
    // gravity block: G_{jl} = 16 pi^2 a_j a_l (P_{max(j,l)} + 1/R) with
    // a_j = r_j^2 h and P_m the suffix sum of w_k / r_k^2 over nodes k > m
    std::vector<double> a(N), suffix(N + 1, 0.0);
    for (std::size_t j = 0; j < N; ++j) a[j] = op.grid[j] * op.grid[j] * h;
    for (std::size_t k = N; k >= 1; --k) {
        const double rk = double(k) * h;
        const double wk = (k == N) ? 0.5 * h : h;
        suffix[k - 1] = suffix[k] + wk / (rk * rk);
    }
    op.S = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t j = 0; j < N; ++j) {
        for (std::size_t l2 = 0; l2 <= j; ++l2) {
            const double g = 16.0 * PI * PI * a[j] * a[l2] * (suffix[j] + 1.0 / model.R);
            op.S(j, l2) -= g;
            if (l2 != j) op.S(l2, j) -= g;
        }
        op.S(j, j) += op.wloc[j];
    }
    op.scale = 4.0 * PI * model.mu;  // dynamical-frequency^2 scale
    return op;
}

// count of strictly negative eigenvalues, with a +-delta retry bracket;
// if the bracket is ambiguous a kernel is present and the lower count is used
inline std::size_t negative_index(const RadialOperator& op, bool* ambiguous = nullptr) {
    // the zero band is set by the physical spectral scale, not the matrix
    // width: a boundary-singular Phi'' inflates the top of the spectrum by
    // orders of magnitude without touching the physically meaningful bottom
    const double delta = 1e-10 * op.scale;
    if (op.kind == RadialKind::Lr) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.S, Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        std::size_t below = 0, above = 0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            if (ev(i) < -delta) ++below;
            if (ev(i) < delta) ++above;
        }
        if (ambiguous) *ambiguous = (below != above);
        return below;
    }
    const std::size_t below = op.T.count_below(-delta);
    const std::size_t above = op.T.count_below(delta);
    if (ambiguous) *ambiguous = (below != above);
    return below;
}

struct KernelResult {
    std::size_t dim = 0;
    std::vector<double> eigenvalues;                // those inside the kernel band
    std::vector<std::vector<double>> vectors;       // in the operator's DOF variable
};

inline KernelResult kernel_test(const RadialOperator& op, double tol_abs = 0.0) {
    if (tol_abs <= 0.0) tol_abs = op.kernel_tol();
    KernelResult out;
    if (op.kind == RadialKind::Lr) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.S);
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const double ev = es.eigenvalues()(i);
            if (std::fabs(ev) < tol_abs) {
                out.eigenvalues.push_back(ev);
                std::vector<double> v(es.eigenvectors().rows());
                for (Eigen::Index r = 0; r < es.eigenvectors().rows(); ++r)
                    v[r] = es.eigenvectors()(r, i);
                out.vectors.push_back(std::move(v));
            }
        }
        out.dim = out.vectors.size();
        return out;
    }
    for (std::size_t k = 0;; ++k) {
        const double ev = op.T.eigenvalue(k);
        if (ev >= tol_abs) break;
        if (ev > -tol_abs) {
            out.eigenvalues.push_back(ev);
            auto vhat = op.T.eigenvector(ev);
            if (!op.sqrt_w.empty())  // back to the pencil variable
                for (std::size_t j = 0; j < vhat.size(); ++j) vhat[j] /= op.sqrt_w[j];
            out.vectors.push_back(std::move(vhat));
        }
        if (k > 32) throw std::runtime_error("kernel_test: kernel band too crowded");
    }
    out.dim = out.vectors.size();
    return out;
}

struct SpectrumSlice {
    std::vector<double> eigenvalues;            // ascending, lowest k
    std::vector<std::vector<double>> vectors;   // v on the node grid
    std::vector<double> grid;                   // node radii
    std::size_t neg_count = 0;
    std::size_t kernel_dim = 0;
};

// Pieces of the Eddington discretization shared with the Hamiltonian module.
struct EddingtonAssembly {
    double h = 0;
    std::vector<double> rnode, rhonode;  // interior nodes 1..N-1
    std::vector<double> wy;              // weight 4 pi rho r^2 h at nodes
    std::vector<double> dgrav;           // 16 pi^2 rho^2 r^2 h at nodes
    RadialOperator Lr;                   // midpoint-density form (cells 0..N-1)
};

inline EddingtonAssembly eddington_assembly(const StellarModel& model, std::size_t N) {
    if (N < 100) throw std::invalid_argument("eddington: fewer than 100 nodes in the star");
    EddingtonAssembly a;
    a.Lr = assemble_Lr(model, N);
    a.h = a.Lr.h;
    a.rnode.resize(N - 1);
    a.rhonode.resize(N - 1);
    a.wy.resize(N - 1);
    a.dgrav.resize(N - 1);
    for (std::size_t i = 0; i + 1 < N; ++i) {
        const double r = double(i + 1) * a.h;
        const double rho = model.rho_at(r);
        if (!(rho > 0.0)) throw std::runtime_error("eddington: nonpositive interior rho");
        a.rnode[i] = r;
        a.rhonode[i] = rho;
        a.wy[i] = 4.0 * PI * rho * r * r * a.h;
        a.dgrav[i] = 16.0 * PI * PI * rho * rho * r * r * a.h;
    }
    return a;
}

inline RadialOperator assemble_eddington(const StellarModel& model, std::size_t N) {
    const EddingtonAssembly a = eddington_assembly(model, N);
    const std::size_t n = N - 1;
    RadialOperator op;
    op.kind = RadialKind::Eddington;
    op.R = model.R;
    op.h = a.h;
    op.grid = a.rnode;
    op.scale = 4.0 * PI * model.mu;
    // Q(v) = sum_j c_j (g_{j+1}-g_j)^2 - sum_i d_i v_i^2, g_i = r_i^2 rho_i v_i,
    // with c_j = wloc_j / (h r_mj^2)^2 so that Q = Dg' S_local Dg exactly
    std::vector<double> c(N), gc(n);
    for (std::size_t j = 0; j < N; ++j) {
        const double rm = a.Lr.grid[j];
        c[j] = a.Lr.wloc[j] / ((a.h * rm * rm) * (a.h * rm * rm));
    }
    for (std::size_t i = 0; i < n; ++i) gc[i] = a.rnode[i] * a.rnode[i] * a.rhonode[i];
    std::vector<double> Qd(n), Qo(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        Qd[i] = (c[i] + c[i + 1]) * gc[i] * gc[i] - a.dgrav[i];
    for (std::size_t i = 0; i + 1 < n; ++i) Qo[i] = -c[i + 1] * gc[i] * gc[i + 1];
    op.T.diag.resize(n);
    op.T.off.resize(n - 1);
    op.sqrt_w.resize(n);
    for (std::size_t i = 0; i < n; ++i) op.sqrt_w[i] = std::sqrt(a.wy[i]);
    for (std::size_t i = 0; i < n; ++i) op.T.diag[i] = Qd[i] / a.wy[i];
    for (std::size_t i = 0; i + 1 < n; ++i)
        op.T.off[i] = Qo[i] / (op.sqrt_w[i] * op.sqrt_w[i + 1]);
    return op;
}

inline SpectrumSlice eddington_spectrum(const StellarModel& model, std::size_t N,
                                        std::size_t k) {
    const RadialOperator op = assemble_eddington(model, N);
    SpectrumSlice out;
    out.grid = op.grid;
    const double delta = 1e-10 * op.scale;
    out.neg_count = op.T.count_below(-delta);
    out.kernel_dim = op.T.count_below(delta) - out.neg_count;
    out.eigenvalues = op.T.eigenvalues(k);
    for (std::size_t j = 0; j < out.eigenvalues.size(); ++j) {
        auto vhat = op.T.eigenvector(out.eigenvalues[j]);
        // weight-orthogonalize against previously returned modes (vhat space)
        // then map back to v
        std::vector<double> v(vhat.size());
        for (std::size_t i = 0; i < vhat.size(); ++i) v[i] = vhat[i] / op.sqrt_w[i];
        out.vectors.push_back(std::move(v));
    }
    // explicit weight Gram-Schmidt pass for near-degenerate pairs
    for (std::size_t a2 = 0; a2 < out.vectors.size(); ++a2) {
        for (std::size_t b = 0; b < a2; ++b) {
            double dot = 0.0, nb = 0.0;
            for (std::size_t i = 0; i < out.grid.size(); ++i) {
                const double w = op.sqrt_w[i] * op.sqrt_w[i];
                dot += w * out.vectors[a2][i] * out.vectors[b][i];
                nb += w * out.vectors[b][i] * out.vectors[b][i];
            }
            for (std::size_t i = 0; i < out.grid.size(); ++i)
                out.vectors[a2][i] -= dot / nb * out.vectors[b][i];
        }
        double na = 0.0;
        for (std::size_t i = 0; i < out.grid.size(); ++i)
            na += op.sqrt_w[i] * op.sqrt_w[i] * out.vectors[a2][i] * out.vectors[a2][i];
        for (std::size_t i = 0; i < out.grid.size(); ++i)
            out.vectors[a2][i] /= std::sqrt(na);
    }
    return out;
}

// negative index of Lr restricted to the zero-total-mass subspace
// {sigma : sum wmass_j sigma_j = 0} (one linear constraint, projected out)
inline std::size_t negative_index_constrained(const RadialOperator& lr) {
    if (lr.kind != RadialKind::Lr) throw std::invalid_argument("expects an Lr operator");
    const Eigen::Index n = lr.S.rows();
    Eigen::VectorXd cvec(n);
    for (Eigen::Index j = 0; j < n; ++j) cvec(j) = lr.wmass[std::size_t(j)];
    Eigen::MatrixXd c = cvec;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
    Eigen::MatrixXd Qfull = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd Z = Qfull.rightCols(n - 1);
    Eigen::MatrixXd M = Z.transpose() * lr.S * Z;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    std::size_t cnt = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) < -1e-10 * lr.scale) ++cnt;
    return cnt;
}

}  // namespace starstab
