#include "beam/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "beam/attractor.hpp"
#include "beam/config.hpp"
#include "beam/format.hpp"
#include "beam/snapshot.hpp"
#include "beam/stability.hpp"
#include "beam/statics.hpp"

namespace beam {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::invalid_argument("cannot write " + path.string());
    return os;
}

void write_json(const fs::path& path, const json& j) { open_output(path) << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------

int run_statics(double k, double beta, bool pretty, std::ostream& out) {
    const BeamParams params(beta, k, {});
    const StationarySet set = enumerate_equilibria(params);
    json eqs = json::array();
    for (const auto& eq : set.equilibria) {
        eqs.push_back({{"n", eq.mode},
                       {"sign", to_string(eq.sign)},
                       {"amplitude", eq.amplitude},
                       {"lyapunov", static_lyapunov(eq.modal, params)},
                       {"residual", static_residual(eq.modal, params)}});
    }
    json fams = json::array();
    for (const auto& f : set.families) {
        fams.push_back({{"i", f.i}, {"j", f.j}, {"mu", f.mu}, {"level", f.level}});
    }
    json report{{"k", k},
                {"beta", beta},
                {"beta_c", beta_c(k)},
                {"n_star", set.n_star},
                {"classification", to_string(set.classification)},
                {"equilibria", eqs},
                {"families", fams}};
    if (const auto res = resonance(k)) report["resonance"] = {{"i", res->i}, {"j", res->j}, {"mu", res->mu}};
    out << (pretty ? report.dump(2) : report.dump()) << '\n';
    return kExitOk;
}

int run_bifurcation(double k, double beta_min, double beta_max, int steps, const fs::path& path, std::ostream& out) {
    const BranchTable table = bifurcation_sweep(k, beta_min, beta_max, steps);
    {
        auto os = open_output(path);
        write_branch_csv(os, table);
    }
    const fs::path fam_path = path.parent_path() / (path.stem().string() + "_families.csv");
    {
        auto os = open_output(fam_path);
        write_family_csv(os, table);
    }
    // Birth of the first branch: the largest sampled beta carrying a nonzero mode.
    const BranchRow* first = nullptr;
    for (const auto& row : table.rows) {
        if (row.n > 0 && (first == nullptr || row.beta > first->beta)) first = &row;
    }
    out << "bifurcation: " << table.rows.size() << " rows -> " << path.string() << ", " << table.families.size()
        << " family markers -> " << fam_path.string();
    if (first != nullptr) out << "; first branch n=" << first->n << " at beta=" << format_real(first->beta);
    out << '\n';
    return kExitOk;
}

int run_simulate(const fs::path& config_path, const fs::path& dir, std::ostream& out) {
    const RunConfig cfg = load_run_config(config_path);
    const Trajectory traj = simulate(cfg.params(), cfg.build_kernel(), cfg.build_initial(), cfg.integrator,
                                     cfg.simulation_options());
    fs::create_directories(dir);
    {
        auto os = open_output(dir / "trajectory.csv");
        write_trajectory_csv(os, traj);
    }
    write_json(dir / "final_state.json", snapshot_to_json(traj.final_state));
    write_json(dir / "effective_config.json", to_json(cfg));
    const auto& last = traj.samples.back();
    out << "simulate: " << traj.samples.size() << " rows to t=" << format_real(last.t)
        << ", E_cal=" << format_real(last.mon.energy) << ", L=" << format_real(last.mon.lyapunov) << " -> "
        << dir.string() << '\n';
    return kExitOk;
}

int run_stability_map(double kmin, double kmax, double bmin, double bmax, int steps, const fs::path& path,
                      std::ostream& out) {
    const auto grid = stability_map(kmin, kmax, bmin, bmax, steps);
    {
        auto os = open_output(path);
        write_stability_csv(os, grid);
    }
    std::size_t counts[4] = {0, 0, 0, 0};
    for (const auto& v : grid) ++counts[static_cast<int>(v.region)];
    out << "stability map: " << grid.size() << " cells (exponential " << counts[0] << ", gap " << counts[1]
        << ", buckled " << counts[2] << ", boundary " << counts[3] << ") -> " << path.string() << '\n';
    return kExitOk;
}

std::pair<double, double> parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("--window expects A:B");
    try {
        std::size_t pa = 0, pb = 0;
        const std::string sa = text.substr(0, colon), sb = text.substr(colon + 1);
        const double a = std::stod(sa, &pa);
        const double b = std::stod(sb, &pb);
        if (pa != sa.size() || pb != sb.size()) throw std::invalid_argument("");
        return {a, b};
    } catch (const std::logic_error&) {
        throw std::invalid_argument("--window expects A:B with numeric fractions, got '" + text + "'");
    }
}

int run_stability_rate(const fs::path& config_path, const std::string& window, std::ostream& out) {
    const RunConfig cfg = load_run_config(config_path);
    const auto [a, b] = window.empty() ? std::pair{0.25, 0.9} : parse_window(window);
    if (!(a >= 0.0 && a < b && b <= 1.0)) throw std::invalid_argument("--window needs 0 <= A < B <= 1");
    const Trajectory traj = simulate(cfg.params(), cfg.build_kernel(), cfg.build_initial(), cfg.integrator,
                                     cfg.simulation_options());
    const DecayFit fit = estimate_decay_rate(traj, a, b);
    const StabilityVerdict verdict = classify(cfg.beta, cfg.k);
    json report{{"rate", std::isfinite(fit.rate) ? json(fit.rate) : json(nullptr)},
                {"residual", fit.residual},
                {"window", {fit.t0, fit.t1}},
                {"region", to_string(verdict.region)},
                {"nu", verdict.nu},
                {"beta_bar", verdict.beta_bar}};
    if (!fit.diagnostic.empty()) {
        report["diagnostic"] = fit.diagnostic;
    } else {
        // Exploratory: bending of log E_cal (positive hints at sub-exponential decay).
        std::vector<double> t, e;
        for (const auto& s : traj.samples) {
            t.push_back(s.t);
            e.push_back(s.mon.energy);
        }
        report["log_energy_curvature"] = log_energy_curvature(t, e, a, b);
    }
    out << report.dump() << '\n';
    return kExitOk;
}

int run_attractor_graph(const fs::path& config_path, const GraphOptions& options, const fs::path& path,
                        std::ostream& out) {
    const RunConfig cfg = load_run_config(config_path);
    const ConnectionGraph graph =
        connection_graph(cfg.params(), cfg.build_kernel(), cfg.integrator, cfg.modes, options);
    write_json(path, graph_to_json(graph));
    out << "attractor graph: " << graph.nodes.size() << " nodes, " << graph.edges.size() << " edges, "
        << graph.returns.size() << " returns, " << graph.unresolved.size() << " unresolved -> " << path.string()
        << '\n';
    return kExitOk;
}

int run_verify_decomposition(const fs::path& config_path, const fs::path& path, std::ostream& out) {
    const RunConfig cfg = load_run_config(config_path);
    const SplitTrajectory split = split_simulate(cfg.build_initial(), cfg.params(), cfg.build_kernel(), cfg.integrator);
    {
        auto os = open_output(path);
        write_split_csv(os, split);
    }
    double worst = 0.0;
    for (const auto& s : split.samples) worst = std::max(worst, s.sum_error);
    out << "verify decomposition: alpha=" << format_real(split.constants.alpha)
        << " gamma=" << format_real(split.constants.gamma) << " m=" << format_real(split.constants.m)
        << ", max sum_error=" << format_real(worst) << " -> " << path.string() << '\n';
    return kExitOk;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Extensible viscoelastic beam: statics, dynamics, stability and attractor tools", "beam"};
    app.require_subcommand(1);

    double k = 0.0, beta = 0.0, beta_min = 0.0, beta_max = 0.0, k_min = 0.0, k_max = 0.0;
    int steps = 0;
    bool pretty = false;
    std::string out_path, config_path, window;
    GraphOptions graph_opts;

    auto* statics = app.add_subcommand("statics", "Enumerate steady states");
    statics->add_option("--k", k, "Foundation stiffness")->required();
    statics->add_option("--beta", beta, "Axial load")->required();
    statics->add_flag("--json", pretty, "Pretty-print the JSON report");

    auto* bif = app.add_subcommand("bifurcation", "Branch table over a beta sweep");
    bif->add_option("--k", k)->required();
    bif->add_option("--beta-min", beta_min)->required();
    bif->add_option("--beta-max", beta_max)->required();
    bif->add_option("--steps", steps)->required();
    bif->add_option("--out", out_path)->required();

    auto* sim = app.add_subcommand("simulate", "Integrate one run");
    sim->add_option("--config", config_path)->required();
    sim->add_option("--out", out_path, "Output directory")->required();

    auto* stab = app.add_subcommand("stability", "Stability thresholds and decay rates");
    stab->require_subcommand(1);
    auto* smap = stab->add_subcommand("map", "Region map on a (k, beta) grid");
    smap->add_option("--k-min", k_min)->required();
    smap->add_option("--k-max", k_max)->required();
    smap->add_option("--beta-min", beta_min)->required();
    smap->add_option("--beta-max", beta_max)->required();
    smap->add_option("--steps", steps)->required();
    smap->add_option("--out", out_path)->required();
    auto* srate = stab->add_subcommand("rate", "Fitted decay rate of E_cal");
    srate->add_option("--config", config_path)->required();
    srate->add_option("--window", window, "Fit window as fractions A:B of [0, T]");

    auto* attr = app.add_subcommand("attractor", "Connections between equilibria");
    attr->require_subcommand(1);
    auto* graph = attr->add_subcommand("graph", "Heteroclinic connection graph");
    graph->add_option("--config", config_path)->required();
    graph->add_option("--eps", graph_opts.perturb_eps);
    graph->add_option("--tmax", graph_opts.t_max);
    graph->add_option("--tol", graph_opts.tol);
    graph->add_option("--out", out_path)->required();

    auto* verify = app.add_subcommand("verify", "Numerical checks of the analysis");
    verify->require_subcommand(1);
    auto* decomp = verify->add_subcommand("decomposition", "Co-integrated decaying/compact split");
    decomp->add_option("--config", config_path)->required();
    decomp->add_option("--out", out_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*statics) return run_statics(k, beta, pretty, out);
        if (*bif) return run_bifurcation(k, beta_min, beta_max, steps, out_path, out);
        if (*sim) return run_simulate(config_path, out_path, out);
        if (*smap) return run_stability_map(k_min, k_max, beta_min, beta_max, steps, out_path, out);
        if (*srate) return run_stability_rate(config_path, window, out);
        if (*graph) return run_attractor_graph(config_path, graph_opts, out_path, out);
        if (*decomp) return run_verify_decomposition(config_path, out_path, out);
    } catch (const NumericalBlowup& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    err << "error: no subcommand\n";
    return kExitInvalid;
}

}  // namespace beam
