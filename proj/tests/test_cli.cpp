#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "beam/cli.hpp"
#include "beam/config.hpp"

using namespace beam;
using doctest::Approx;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "beam");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path(BEAM_TEST_TMP) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const fs::path& dir, const json& j, const std::string& name = "run.json") {
    const fs::path p = dir / name;
    std::ofstream(p) << j.dump(2);
    return p;
}

json small_config() {
    return json{{"modes", 4},
                {"params", {{"beta", -10.0}, {"k", 97.40909103400242}}},
                {"kernel", {{"type", "exponential"}, {"delta", 1.0}, {"kappa", 0.5}}},
                {"integrator", {{"dt", 1e-3}, {"t_final", 2.0}, {"sample_every", 50}}},
                {"initial", {{"c", {0.1}}, {"random", {{"radius", 0.5}}}}},
                {"seed", 42}};
}

}  // namespace

TEST_CASE("statics report") {
    const auto r = run({"statics", "--k", "97.409091", "--beta", "-39.478418"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["classification"] == "finite");
    REQUIRE(j["equilibria"].size() == 3);
    CHECK(j["equilibria"][1]["amplitude"].get<double>() == Approx(2.0).epsilon(1e-6));
    CHECK(j["equilibria"][2]["amplitude"].get<double>() == Approx(-2.0).epsilon(1e-6));
    CHECK(r.out.find('\n') == r.out.size() - 1);  // one line

    const auto pretty = run({"statics", "--k", "97.409091", "--beta", "-39.478418", "--json"});
    CHECK(json::parse(pretty.out) == j);
}

TEST_CASE("bifurcation csv") {
    const auto dir = scratch("bifurcation");
    // 877.681819 as printed in the usage example, and 9 pi^4 = 876.681819...
    for (const std::string k : {"877.681819", "876.68181930602"}) {
        const auto out = dir / "b.csv";
        const auto r = run({"bifurcation", "--k", k, "--beta-min", "-120", "--beta-max", "0", "--steps", "480", "--out",
                            out.string()});
        REQUIRE(r.code == 0);
        std::ifstream in(out);
        std::string line;
        std::getline(in, line);
        CHECK(line == "beta,n,a_plus,a_minus");
        double birth2 = -1e300, birth1 = -1e300;
        while (std::getline(in, line)) {
            std::istringstream ss(line);
            std::string b, n;
            std::getline(ss, b, ',');
            std::getline(ss, n, ',');
            if (n == "2") birth2 = std::max(birth2, std::stod(b));
            if (n == "1") birth1 = std::max(birth1, std::stod(b));
        }
        const double mu2 = std::stod(k) / (4.0 * 9.869604401089358) + 4.0 * 9.869604401089358;
        CHECK(std::abs(birth2 + mu2) <= 0.25);
        CHECK(std::abs(birth2 + 61.685) <= 0.3);
        CHECK(birth2 > birth1);
        CHECK(fs::exists(dir / "b_families.csv"));
    }
}

TEST_CASE("invalid input exits with 1") {
    CHECK(run({"simulate", "--config", "missing.json", "--out", "x"}).code == kExitInvalid);
    CHECK(run({"statics", "--k", "-1", "--beta", "0"}).code == kExitInvalid);
    CHECK(run({"statics", "--k", "abc", "--beta", "0"}).code == kExitInvalid);
    CHECK(run({"nonsense"}).code == kExitInvalid);
    CHECK(run({}).code == kExitInvalid);
    CHECK(run({"--help"}).code == kExitOk);

    const auto dir = scratch("invalid");
    auto bad = small_config();
    bad["integrator"]["order"] = 4;
    const auto r = run({"simulate", "--config", write_config(dir, bad).string(), "--out", (dir / "o").string()});
    CHECK(r.code == kExitInvalid);
    CHECK(r.err.find("unknown key 'order'") != std::string::npos);

    auto big_dt = small_config();
    big_dt["integrator"]["dt"] = 0.1;
    CHECK(run({"simulate", "--config", write_config(dir, big_dt).string(), "--out", (dir / "o").string()}).code ==
          kExitInvalid);
    CHECK(run({"stability", "rate", "--config", write_config(dir, small_config()).string(), "--window", "0.5"}).code ==
          kExitInvalid);
}

TEST_CASE("numerical failure exits with 2") {
    const auto dir = scratch("blowup");
    auto cfg = small_config();
    cfg["initial"] = {{"c", {1e60}}};
    const auto r = run({"simulate", "--config", write_config(dir, cfg).string(), "--out", (dir / "o").string()});
    CHECK(r.code == kExitNumerical);
    CHECK(r.err.find("t = ") != std::string::npos);
}

TEST_CASE("simulate outputs are deterministic and the effective config round-trips") {
    const auto dir = scratch("simulate");
    const auto cfg_path = write_config(dir, small_config());
    REQUIRE(run({"simulate", "--config", cfg_path.string(), "--out", (dir / "a").string()}).code == 0);
    REQUIRE(run({"simulate", "--config", cfg_path.string(), "--out", (dir / "b").string()}).code == 0);
    for (const char* f : {"trajectory.csv", "final_state.json", "effective_config.json"}) {
        CHECK(fs::exists(dir / "a" / f));
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
    const RunConfig original = load_run_config(cfg_path);
    const RunConfig echoed = load_run_config(dir / "a" / "effective_config.json");
    CHECK(echoed == original);
    CHECK(to_json(echoed) == to_json(original));

    SUBCASE("a different seed changes the run") {
        auto other = small_config();
        other["seed"] = 43;
        REQUIRE(run({"simulate", "--config", write_config(dir, other, "other.json").string(), "--out",
                     (dir / "c").string()})
                    .code == 0);
        CHECK(slurp(dir / "a" / "trajectory.csv") != slurp(dir / "c" / "trajectory.csv"));
    }
    SUBCASE("restart from the final state") {
        auto cont = small_config();
        cont["initial"] = {{"history", {{"type", "snapshot"}, {"path", "a/final_state.json"}}}};
        REQUIRE(run({"simulate", "--config", write_config(dir, cont, "cont.json").string(), "--out",
                     (dir / "d").string()})
                    .code == 0);
        CHECK(fs::exists(dir / "d" / "trajectory.csv"));
    }
}

TEST_CASE("config parsing") {
    const auto dir = scratch("config");
    SUBCASE("defaults are filled in") {
        const auto cfg = parse_run_config(json{{"params", {{"beta", 1.0}}}}, dir);
        CHECK(cfg.modes == 12);
        CHECK(cfg.kernel.type == "exponential");
        CHECK(cfg.integrator.dt == 1e-3);
        CHECK(cfg.initial.c.empty());
        CHECK(cfg.build_initial().c.size() == 12);
    }
    SUBCASE("missing params") { CHECK_THROWS_AS(parse_run_config(json::object(), dir), std::invalid_argument); }
    SUBCASE("type errors") {
        CHECK_THROWS_AS(parse_run_config(json{{"params", {{"beta", "x"}}}}, dir), std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config(json{{"params", {{"k", -2.0}}}}, dir), std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config(json{{"params", {}}, {"modes", 0}}, dir), std::invalid_argument);
        CHECK_THROWS_AS(parse_run_config(json{{"params", {}}, {"seed", -1}}, dir), std::invalid_argument);
    }
    SUBCASE("tabulated kernel and history tables") {
        json table{{"ds", 0.01}, {"samples", json::array()}};
        for (int i = 0; i <= 3000; ++i) table["samples"].push_back(0.5 * std::exp(-i * 0.01));
        std::ofstream(dir / "mu.json") << table.dump();
        json eta{{"ds", 0.01}, {"eta", {json::array(), json::array()}}};
        for (int i = 0; i <= 100; ++i) {
            eta["eta"][0].push_back(0.01 * i * 0.01);
            eta["eta"][1].push_back(0.0);
        }
        std::ofstream(dir / "eta.json") << eta.dump();
        json j{{"modes", 2},
               {"params", {{"beta", 0.0}, {"k", 1.0}}},
               {"kernel", {{"type", "tabulated"}, {"delta", 1.0}, {"kappa", 0.5}, {"table", "mu.json"}}},
               {"integrator", {{"backend", "history_quadrature"}, {"ds", 0.01}}},
               {"initial", {{"c", {0.1, 0.0}}, {"history", {{"type", "table"}, {"path", "eta.json"}}}}}};
        const auto cfg = parse_run_config(j, dir);
        CHECK(cfg.build_kernel().kind() == MemoryKernel::Kind::tabulated);
        CHECK(cfg.build_initial().history.has_value());
        CHECK(parse_run_config(to_json(cfg), "/") == cfg);

        j["integrator"]["backend"] = "ode_reduction";
        CHECK_THROWS_AS(parse_run_config(j, dir), std::invalid_argument);
    }
}

TEST_CASE("stability subcommands") {
    const auto dir = scratch("stability");
    const auto map = dir / "map.csv";
    REQUIRE(run({"stability", "map", "--k-min", "0", "--k-max", "3000", "--beta-min", "-150", "--beta-max", "10",
                 "--steps", "20", "--out", map.string()})
                .code == 0);
    CHECK(slurp(map).rfind("k,beta,beta_c,beta_bar,nu,region\n", 0) == 0);

    auto cfg = small_config();
    cfg["params"]["beta"] = 0.0;
    cfg["integrator"]["t_final"] = 10.0;
    const auto r = run({"stability", "rate", "--config", write_config(dir, cfg).string(), "--window", "0.2:0.8"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["rate"].get<double>() > 0.0);
    CHECK(j.contains("residual"));
    CHECK(j["window"][0].get<double>() == Approx(2.0));
    CHECK(j["window"][1].get<double>() == Approx(8.0));
}

TEST_CASE("attractor graph and decomposition subcommands") {
    const auto dir = scratch("attractor");
    auto cfg = small_config();
    cfg["params"]["beta"] = 0.0;
    cfg["integrator"]["sample_every"] = 20;
    const auto path = write_config(dir, cfg);
    const auto graph = dir / "graph.json";
    REQUIRE(run({"attractor", "graph", "--config", path.string(), "--tmax", "100", "--out", graph.string()}).code == 0);
    const auto g = json::parse(slurp(graph));
    CHECK(g["nodes"].size() == 1);
    CHECK(g["edges"].empty());

    const auto split = dir / "split.csv";
    const auto r = run({"verify", "decomposition", "--config", path.string(), "--out", split.string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(split).rfind("t,norm_u,norm_v_H0,norm_w_H2,sum_error\n", 0) == 0);
    CHECK(run({"verify", "decomposition", "--config", path.string()}).code == kExitInvalid);
}
