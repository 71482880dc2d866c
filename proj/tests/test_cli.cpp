#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using nlohmann::json;

namespace {

std::string bin() {
    const char* p = std::getenv("STARSTAB_BIN");
    REQUIRE(p != nullptr);
    return p;
}

int run(const std::string& args, const std::string& stdout_to = "/dev/null") {
    const std::string cmd = bin() + " " + args + " > " + stdout_to + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool exists(const std::string& path) { return std::ifstream(path).good(); }

struct TempDir {
    std::string path;
    TempDir() {
        char tmpl[] = "/tmp/starstab_cli_XXXXXX";
        path = mkdtemp(tmpl);
    }
    ~TempDir() { std::system(("rm -rf " + path).c_str()); }
    std::string file(const std::string& name) const { return path + "/" + name; }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

const char* kPolytropeCfg =
    "[eos]\nfamily = polytrope\nK = 1.0\ngamma = 1.6666666666666667\n"
    "[numerics]\ntol = 1e-10\nN_grid = 1500\nN_mu = 33\n";

}  // namespace

TEST_CASE("equilibrium run: schema header, CSV body, determinism") {
    TempDir d;
    write_file(d.file("cfg.ini"), kPolytropeCfg);
    const std::string base = "equilibrium --config " + d.file("cfg.ini") + " --mu 2.0";
    REQUIRE(run(base + " --out " + d.file("a.csv")) == 0);
    REQUIRE(run(base + " --out " + d.file("b.csv")) == 0);
    const std::string a = slurp(d.file("a.csv"));
    CHECK(a == slurp(d.file("b.csv")));  // byte-identical reruns

    std::istringstream ss(a);
    std::string header_line, csv_header;
    REQUIRE(std::getline(ss, header_line));
    const json hdr = json::parse(header_line);
    CHECK(hdr.at("schema_version") == 1);
    CHECK(hdr.at("mu") == 2.0);
    CHECK(hdr.at("M").get<double>() > 0.0);
    CHECK(hdr.at("R").get<double>() > 0.0);
    CHECK(hdr.at("V_R").get<double>() ==
          Catch::Approx(-hdr.at("M").get<double>() / hdr.at("R").get<double>()));
    REQUIRE(std::getline(ss, csv_header));
    CHECK(csv_header == "r,y,rho,yprime");
}

TEST_CASE("curve run writes the CSV and a JSON report") {
    TempDir d;
    write_file(d.file("cfg.ini"), kPolytropeCfg);
    REQUIRE(run("curve --config " + d.file("cfg.ini") +
                " --mu-lo 0.5 --mu-hi 2.0 -N 33 --out " + d.file("c.csv") +
                " --json " + d.file("c.json")) == 0);
    std::istringstream ss(slurp(d.file("c.csv")));
    std::string csv_header;
    REQUIRE(std::getline(ss, csv_header));
    CHECK(csv_header == "mu,M,R,dM,dMR,i_mu,n_u");
    const json rep = json::parse(slurp(d.file("c.json")));
    CHECK(rep.at("schema_version") == 1);
    CHECK(rep.at("small_mu_ok") == true);
    CHECK(rep.at("mass_extrema").empty());
    REQUIRE(rep.at("verdicts").size() == 33);
    for (const auto& v : rep.at("verdicts")) {
        CHECK(v.at("n_u") == 0);
        CHECK(v.at("i_mu") == 1);
        CHECK(v.at("classification") == "stable");
    }
}

TEST_CASE("stability run cross-checks the spectral count") {
    TempDir d;
    write_file(d.file("cfg.ini"), kPolytropeCfg);
    REQUIRE(run("stability --config " + d.file("cfg.ini") +
                " --mu-lo 0.8 --mu-hi 1.25 --checks 2 --json " + d.file("s.json")) == 0);
    const json rep = json::parse(slurp(d.file("s.json")));
    REQUIRE(rep.at("spectral_checks").size() == 2);
    for (const auto& c : rep.at("spectral_checks")) {
        CHECK(c.at("n_minus_D0") == 1);
        CHECK(c.at("i_mu") == 1);
        CHECK(c.at("n_u_formula") == 0);
        CHECK(c.at("n_u_formula") == c.at("n_u_tpp"));
    }
}

TEST_CASE("spectrum run reports the pulsation dichotomy") {
    TempDir d;
    write_file(d.file("soft.ini"),
               "[eos]\nfamily = polytrope\nK = 1.0\ngamma = 1.3\n"
               "[numerics]\ntol = 1e-10\nN_grid = 1500\n");
    REQUIRE(run("spectrum --config " + d.file("soft.ini") +
                " --mu 1.0 -l 0 -k 3 --out " + d.file("sp.json")) == 0);
    const json sp = json::parse(slurp(d.file("sp.json")));
    CHECK(sp.at("schema_version") == 1);
    CHECK(sp.at("kind") == "radial-pulsation");
    CHECK(sp.at("neg_count") == 1);
    CHECK(sp.at("n_minus_D0") == 1);
    REQUIRE(sp.at("eigenvalues").size() == 3);
    CHECK(sp.at("eigenvalues")[0].get<double>() < 0.0);
    CHECK(sp.at("eigenvalues")[1].get<double>() > 0.0);

    // l = 1 path with the operator dump
    REQUIRE(run("spectrum --config " + d.file("soft.ini") +
                " --mu 1.0 -l 1 -k 2 --out " + d.file("d1.json") +
                " --dump-operator " + d.file("d1.csv")) == 0);
    const json d1 = json::parse(slurp(d.file("d1.json")));
    CHECK(d1.at("kind") == "D_l");
    CHECK(d1.at("kernel_dim") == 1);  // translation mode
    std::istringstream ss(slurp(d.file("d1.csv")));
    std::string line;
    REQUIRE(std::getline(ss, line));
    CHECK(line == "i,diag,off");
}

TEST_CASE("toy showcase prints the nilpotent example and its growth degree") {
    TempDir d;
    REQUIRE(run("toy --showcase", d.file("out.txt")) == 0);
    const std::string out = slurp(d.file("out.txt"));
    CHECK(out.find("JL =") != std::string::npos);
    CHECK(out.find("(JL)^4") != std::string::npos);
    CHECK(out.find("center growth degree: 3") != std::string::npos);
}

TEST_CASE("toy random suite reports a clean ledger") {
    TempDir d;
    REQUIRE(run("toy --random --seed 12345 -n 25 --json " + d.file("l.json")) == 0);
    const json ledger = json::parse(slurp(d.file("l.json")));
    CHECK(ledger.at("seed") == 12345);
    CHECK(ledger.at("failures") == 0);
    REQUIRE(ledger.at("triples").size() == 25);
    for (const auto& t : ledger.at("triples")) {
        CHECK(t.at("pass") == true);
        CHECK(t.at("growth_degree").get<int>() <= 3);
    }
    // same seed, same ledger
    REQUIRE(run("toy --random --seed 12345 -n 25 --json " + d.file("l2.json")) == 0);
    CHECK(slurp(d.file("l.json")) == slurp(d.file("l2.json")));
}

TEST_CASE("exit codes separate I/O, config, and usage errors") {
    TempDir d;
    // missing config file -> I/O error
    CHECK(run("equilibrium --config " + d.file("nope.ini") + " --mu 1.0 --out " +
              d.file("x.csv")) == 1);
    CHECK_FALSE(exists(d.file("x.csv")));
    // malformed config -> config error, and no output is left behind
    write_file(d.file("bad.ini"), "[eos]\nfamily = polytrope\nK = 1.0\n"
                                  "gamma = 1.5\nbogus_key = 7\n");
    CHECK(run("equilibrium --config " + d.file("bad.ini") + " --mu 1.0 --out " +
              d.file("y.csv")) == 2);
    CHECK_FALSE(exists(d.file("y.csv")));
    // unparsable numeric
    write_file(d.file("nan.ini"), "[eos]\nfamily = polytrope\nK = pickle\ngamma = 1.5\n");
    CHECK(run("equilibrium --config " + d.file("nan.ini") + " --mu 1.0 --out " +
              d.file("z.csv")) == 2);
    // missing required CLI option / unknown subcommand -> usage error
    CHECK(run("equilibrium --mu 1.0") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("toy") == 2);  // toy without a mode
    // help exits 0
    CHECK(run("--help") == 0);
    // invalid physics parameters in a well-formed file -> config error
    write_file(d.file("g1.ini"), "[eos]\nfamily = polytrope\nK = 1.0\ngamma = 1.0\n");
    CHECK(run("equilibrium --config " + d.file("g1.ini") + " --mu 1.0 --out " +
              d.file("w.csv")) == 2);
}
