// starstab: construct gas-sphere equilibria, trace mass-radius curves,
// and decide linear stability by turning-point counting cross-checked
// against direct radial-oscillation spectra.
//
// Exit codes: 0 ok, 1 I/O error, 2 config error, 3 numerical-consistency
// failure (e.g. the turning-point count and the spectral count disagree).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "starstab/config.hpp"
#include "starstab/equilibrium.hpp"
#include "starstab/hamiltonian.hpp"
#include "starstab/io.hpp"
#include "starstab/mrcurve.hpp"
#include "starstab/spectral.hpp"

using nlohmann::json;
using namespace starstab;

namespace {

constexpr int SCHEMA_VERSION = 1;

struct NumericFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json curve_report(const MassRadiusCurve& c, const TppWalk& walk) {
    json j;
    j["schema_version"] = SCHEMA_VERSION;
    j["truncated"] = c.truncated;
    if (c.truncated) j["mu_truncated"] = c.mu_truncated;
    for (const auto& e : c.mass_extrema)
        j["mass_extrema"].push_back(
            {{"mu", e.mu},
             {"kind", e.kind == 1 ? "max" : (e.kind == -1 ? "min" : "non-extremal")}});
    j["mass_extrema"] = j.value("mass_extrema", json::array());
    j["mr_criticals"] = c.mr_criticals;
    j["small_mu_slope"] = walk.fitted_small_mu_slope;
    j["small_mu_ok"] = walk.small_mu_ok;
    json vs = json::array();
    for (const auto& v : walk.verdicts) {
        vs.push_back({{"mu", v.mu},
                      {"i_mu", v.i_mu},
                      {"n_u", v.n_u_tpp},
                      {"classification", v.classification == Stability::stable
                                             ? "stable"
                                             : v.classification == Stability::unstable
                                                   ? "unstable"
                                                   : "neutral"}});
    }
    j["verdicts"] = vs;
    return j;
}

int run_equilibrium(const RunConfig& cfg, double mu, const std::string& out) {
    auto model = integrate_profile(cfg.eos, mu, cfg.tol, cfg.N_grid);
    total_mass(model, cfg.tol);  // throws on internal inconsistency
    StagedFile f(out);
    json hdr = {{"schema_version", SCHEMA_VERSION},
                {"mu", model.mu},
                {"R", model.R},
                {"M", model.M},
                {"V_R", surface_potential(model)}};
    f.stream() << hdr.dump() << "\n";
    write_csv(f, {"r", "y", "rho", "yprime"},
              {model.grid, model.y, model.rho, model.yprime});
    f.commit();
    return 0;
}

int run_curve(const RunConfig& cfg, double mu_lo, double mu_hi, std::size_t N,
              const std::string& out, const std::string& jout) {
    auto curve = trace_curve(cfg.eos, mu_lo, mu_hi, N, cfg.tol, cfg.N_grid);
    auto walk = tpp_walk(curve, cfg.eos.gamma0());
    std::vector<double> imu(curve.mus.size()), nu(curve.mus.size());
    for (std::size_t i = 0; i < curve.mus.size(); ++i) {
        imu[i] = double(walk.verdicts[i].i_mu);
        nu[i] = double(walk.verdicts[i].n_u_tpp);
    }
    StagedFile f(out);
    write_csv(f, {"mu", "M", "R", "dM", "dMR", "i_mu", "n_u"},
              {curve.mus, curve.Ms, curve.Rs, curve.dM, curve.dMR, imu, nu});
    f.commit();
    if (!jout.empty()) {
        StagedFile jf(jout);
        jf.stream() << curve_report(curve, walk).dump(2) << "\n";
        jf.commit();
    }
    return 0;
}

int run_stability(const RunConfig& cfg, double mu_lo, double mu_hi, std::size_t N,
                  std::size_t n_check, const std::string& jout) {
    auto curve = trace_curve(cfg.eos, mu_lo, mu_hi, N, cfg.tol, cfg.N_grid);
    auto walk = tpp_walk(curve, cfg.eos.gamma0());
    json rep = curve_report(curve, walk);
    json checks = json::array();
    const std::size_t n = curve.mus.size();
    const std::size_t nD = std::max<std::size_t>(1200,
                                                 std::size_t(120 * cfg.R_out_factor));
    for (std::size_t k = 0; k < n_check; ++k) {
        const std::size_t i = (n - 1) * (k + 1) / (n_check + 1);
        const double mu = curve.mus[i];
        auto model = integrate_profile(cfg.eos, mu, cfg.tol, cfg.N_grid);
        auto d0 = assemble_D0(model, cfg.R_out_factor, nD);
        const int nminus = int(negative_index(d0));
        StabilityVerdict v;
        try {
            v = verdict(curve, walk, mu, nminus);
        } catch (const std::runtime_error& e) {
            throw NumericFailure(e.what());
        }
        checks.push_back({{"mu", mu},
                          {"n_minus_D0", nminus},
                          {"i_mu", v.i_mu},
                          {"n_u_formula", v.n_u_formula},
                          {"n_u_tpp", v.n_u_tpp}});
    }
    rep["spectral_checks"] = checks;
    if (!jout.empty()) {
        StagedFile jf(jout);
        jf.stream() << rep.dump(2) << "\n";
        jf.commit();
    } else {
        std::cout << rep.dump(2) << "\n";
    }
    return 0;
}

int run_spectrum(const RunConfig& cfg, double mu, int l, std::size_t k,
                 const std::string& out, const std::string& dump) {
    auto model = integrate_profile(cfg.eos, mu, cfg.tol, cfg.N_grid);
    json j = {{"schema_version", SCHEMA_VERSION}, {"mu", mu}, {"R", model.R},
              {"M", model.M}, {"l", l}};
    const std::size_t nD = std::max<std::size_t>(1200,
                                                 std::size_t(120 * cfg.R_out_factor));
    RadialOperator op;
    if (l == 0) {
        const std::size_t Ne = 1500;
        auto slice = eddington_spectrum(model, Ne, k);
        j["kind"] = "radial-pulsation";
        j["eigenvalues"] = slice.eigenvalues;
        j["neg_count"] = slice.neg_count;
        j["kernel_dim"] = slice.kernel_dim;
        j["grid_h"] = model.R / double(Ne);
        auto d0 = assemble_D0(model, cfg.R_out_factor, nD);
        j["n_minus_D0"] = negative_index(d0);
        op = assemble_eddington(model, Ne);
    } else {
        op = assemble_Dl(model, l, cfg.R_out_factor, nD);
        j["kind"] = "D_l";
        j["eigenvalues"] = op.T.eigenvalues(k);
        j["neg_count"] = negative_index(op);
        j["kernel_dim"] = kernel_test(op).dim;
        j["grid_h"] = op.h;
        j["R_out"] = op.R_out;
    }
    StagedFile f(out);
    f.stream() << j.dump(2) << "\n";
    f.commit();
    if (!dump.empty()) {
        StagedFile df(dump);
        auto& o = df.stream();
        o << "i,diag,off\n";
        for (std::size_t i = 0; i < op.T.n(); ++i)
            o << i << "," << fmt17(op.T.diag[i]) << ","
              << fmt17(i + 1 < op.T.n() ? op.T.off[i] : 0.0) << "\n";
        df.commit();
    }
    return 0;
}

void print_matrix(const Eigen::MatrixXd& M, const std::string& name) {
    std::cout << name << " =\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            std::cout << (j ? " " : "  ") << M(i, j);
        std::cout << "\n";
    }
}

int run_toy(bool showcase, bool random_suite, unsigned seed, std::size_t n_triples,
            const std::string& jout) {
    if (showcase) {
        auto t = nilpotent_5x5();
        Eigen::MatrixXd P = t.JL;
        print_matrix(t.JL, "JL");
        print_matrix((P * t.JL).eval(), "(JL)^2");
        print_matrix((P * t.JL * t.JL).eval(), "(JL)^3");
        print_matrix((P * t.JL * t.JL * t.JL).eval(), "(JL)^4");
        auto tr = trichotomy(t);
        auto g = growth_degree(t, tr);
        std::cout << "center growth degree: " << g.degree << " (slope " << g.slope
                  << ")\n";
        return 0;
    }
    if (random_suite) {
        std::mt19937 rng(seed);
        json ledger = {{"schema_version", SCHEMA_VERSION}, {"seed", seed}};
        json items = json::array();
        std::size_t failures = 0;
        for (std::size_t i = 0; i < n_triples; ++i) {
            auto t = make_random_triple(rng);
            json item = {{"index", i}, {"nx", t.nx}, {"ny", t.ny}};
            try {
                auto tr = trichotomy(t);
                auto g = growth_degree(t, tr);
                item["d_u"] = tr.d_u;
                item["d_c"] = tr.d_c;
                item["growth_degree"] = g.degree;
                item["pass"] = g.degree <= 3;
                if (g.degree > 3) ++failures;
            } catch (const std::exception& e) {
                item["pass"] = false;
                item["error"] = e.what();
                ++failures;
            }
            items.push_back(item);
        }
        ledger["triples"] = items;
        ledger["failures"] = failures;
        if (!jout.empty()) {
            StagedFile jf(jout);
            jf.stream() << ledger.dump(2) << "\n";
            jf.commit();
        } else {
            std::cout << ledger.dump(2) << "\n";
        }
        return failures == 0 ? 0 : 3;
    }
    std::cerr << "toy: nothing to do (use --showcase or --random)\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gas-sphere equilibria, mass-radius curves, and linear stability"};
    app.require_subcommand(1);

    std::string config_path, out_path, json_path, dump_path;
    double mu = 1.0, mu_lo = 0.01, mu_hi = 100.0;
    std::size_t Nmu = 0, kwant = 6, n_check = 4, n_triples = 200;
    int l = 0;
    unsigned seed = 12345;
    bool showcase = false, random_suite = false;

    auto* eq = app.add_subcommand("equilibrium", "integrate one stellar model");
    eq->add_option("--config", config_path)->required();
    eq->add_option("--mu", mu)->required();
    eq->add_option("--out", out_path)->required();

    auto* cv = app.add_subcommand("curve", "trace the mass-radius curve");
    cv->add_option("--config", config_path)->required();
    cv->add_option("--mu-lo", mu_lo)->required();
    cv->add_option("--mu-hi", mu_hi)->required();
    cv->add_option("-N,--samples", Nmu);
    cv->add_option("--out", out_path)->required();
    cv->add_option("--json", json_path);

    auto* st = app.add_subcommand("stability", "turning-point walk vs spectral counts");
    st->add_option("--config", config_path)->required();
    st->add_option("--mu-lo", mu_lo)->required();
    st->add_option("--mu-hi", mu_hi)->required();
    st->add_option("-N,--samples", Nmu);
    st->add_option("--checks", n_check);
    st->add_option("--json", json_path);

    auto* sp = app.add_subcommand("spectrum", "radial/nonradial oscillation spectrum");
    sp->add_option("--config", config_path)->required();
    sp->add_option("--mu", mu)->required();
    sp->add_option("-l", l);
    sp->add_option("-k", kwant);
    sp->add_option("--out", out_path)->required();
    sp->add_option("--dump-operator", dump_path);

    auto* toy = app.add_subcommand("toy", "finite-dimensional Hamiltonian toolkit");
    toy->add_flag("--showcase", showcase, "print the 5x5 nilpotent example");
    toy->add_flag("--random", random_suite, "run the random-triple property suite");
    toy->add_option("--seed", seed);
    toy->add_option("-n,--triples", n_triples);
    toy->add_option("--json", json_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (toy->parsed()) return run_toy(showcase, random_suite, seed, n_triples,
                                          json_path);
        RunConfig cfg = load_config(config_path);
        if (Nmu == 0) Nmu = cfg.N_mu;
        if (eq->parsed()) return run_equilibrium(cfg, mu, out_path);
        if (cv->parsed()) return run_curve(cfg, mu_lo, mu_hi, Nmu, out_path, json_path);
        if (st->parsed()) return run_stability(cfg, mu_lo, mu_hi, Nmu, n_check, json_path);
        if (sp->parsed()) return run_spectrum(cfg, mu, l, kwant, out_path, dump_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericFailure& e) {
        std::cerr << "numerical-consistency failure: " << e.what() << "\n";
        return 3;
    } catch (const NoCompactSupport& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
