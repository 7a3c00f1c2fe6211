#include "beam/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <stdexcept>

#include "beam/snapshot.hpp"

namespace beam {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument("config: " + what); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(where + " must be an object");
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* a) { return item.key() == a; });
        if (!known) fail("unknown key '" + item.key() + "' in " + where);
    }
}

double get_real(const json& obj, const char* key, const std::string& where, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(where + "." + key + " must be a number");
    return v.get<double>();
}

std::vector<double> get_reals(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) return {};
    const json& v = obj.at(key);
    if (!v.is_array()) fail(where + "." + key + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) fail(where + "." + key + " must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::string get_string(const json& obj, const char* key, const std::string& where, std::string fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string()) fail(where + "." + key + " must be a string");
    return obj.at(key).get<std::string>();
}

std::string resolve(const std::string& p, const fs::path& base) {
    fs::path path(p);
    if (path.is_relative()) path = base / path;
    return fs::absolute(path).lexically_normal().string();
}

}  // namespace

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument("malformed JSON in " + path.string() + ": " + e.what());
    }
}

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
    check_keys(j, "config", {"modes", "params", "kernel", "integrator", "initial", "seed", "phi_eps"});
    RunConfig cfg;
    if (j.contains("modes")) {
        if (!j["modes"].is_number_integer() || j["modes"].get<long long>() < 1) fail("modes must be a positive integer");
        cfg.modes = j["modes"].get<std::size_t>();
    }
    if (!j.contains("params")) fail("missing 'params'");
    const json& p = j["params"];
    check_keys(p, "params", {"beta", "k", "f_modes"});
    cfg.beta = get_real(p, "beta", "params", 0.0);
    cfg.k = get_real(p, "k", "params", 0.0);
    cfg.f_modes = get_reals(p, "f_modes", "params");

    if (j.contains("kernel")) {
        const json& kj = j["kernel"];
        check_keys(kj, "kernel", {"type", "delta", "kappa", "table"});
        cfg.kernel.type = get_string(kj, "type", "kernel", cfg.kernel.type);
        cfg.kernel.delta = get_real(kj, "delta", "kernel", cfg.kernel.delta);
        cfg.kernel.kappa = get_real(kj, "kappa", "kernel", cfg.kernel.kappa);
        if (kj.contains("table")) cfg.kernel.table = resolve(get_string(kj, "table", "kernel", ""), base_dir);
    }

    if (j.contains("integrator")) {
        const json& ij = j["integrator"];
        check_keys(ij, "integrator", {"backend", "dt", "t_final", "sample_every", "s_max_tol", "ds"});
        auto& ic = cfg.integrator;
        try {
            ic.backend = backend_from_string(get_string(ij, "backend", "integrator", to_string(ic.backend)));
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
        ic.dt = get_real(ij, "dt", "integrator", ic.dt);
        ic.t_final = get_real(ij, "t_final", "integrator", ic.t_final);
        if (ij.contains("sample_every")) {
            if (!ij["sample_every"].is_number_integer()) fail("integrator.sample_every must be an integer");
            ic.sample_every = ij["sample_every"].get<int>();
        }
        ic.s_max_tol = get_real(ij, "s_max_tol", "integrator", ic.s_max_tol);
        ic.ds = get_real(ij, "ds", "integrator", ic.ds);
    }

    if (j.contains("initial")) {
        const json& in = j["initial"];
        check_keys(in, "initial", {"c", "cdot", "history", "random"});
        cfg.initial.c = get_reals(in, "c", "initial");
        cfg.initial.cdot = get_reals(in, "cdot", "initial");
        if (in.contains("history")) {
            const json& h = in["history"];
            check_keys(h, "initial.history", {"type", "path"});
            cfg.initial.history.type = get_string(h, "type", "initial.history", "zero");
            if (h.contains("path")) cfg.initial.history.path = resolve(get_string(h, "path", "initial.history", ""), base_dir);
        }
        if (in.contains("random")) {
            const json& r = in["random"];
            check_keys(r, "initial.random", {"radius"});
            if (!r.contains("radius")) fail("initial.random needs 'radius'");
            cfg.initial.random_radius = get_real(r, "radius", "initial.random", 0.0);
        }
    }

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) fail("seed must be a non-negative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("phi_eps")) cfg.phi_eps = get_real(j, "phi_eps", "config", 0.0);

    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    const json j = read_json_file(path);
    return parse_run_config(j, fs::absolute(path).parent_path());
}

json to_json(const RunConfig& cfg) {
    json kernel{{"type", cfg.kernel.type}, {"delta", cfg.kernel.delta}, {"kappa", cfg.kernel.kappa}};
    if (cfg.kernel.table) kernel["table"] = *cfg.kernel.table;
    const auto& ic = cfg.integrator;
    json integrator{{"backend", to_string(ic.backend)}, {"dt", ic.dt},         {"t_final", ic.t_final},
                    {"sample_every", ic.sample_every},  {"s_max_tol", ic.s_max_tol}, {"ds", ic.ds}};
    json history{{"type", cfg.initial.history.type}};
    if (cfg.initial.history.path) history["path"] = *cfg.initial.history.path;
    json initial{{"c", cfg.initial.c}, {"cdot", cfg.initial.cdot}, {"history", history}};
    if (cfg.initial.random_radius) initial["random"] = {{"radius", *cfg.initial.random_radius}};
    json out{{"modes", cfg.modes},
             {"params", {{"beta", cfg.beta}, {"k", cfg.k}, {"f_modes", cfg.f_modes}}},
             {"kernel", kernel},
             {"integrator", integrator},
             {"initial", initial},
             {"seed", cfg.seed}};
    if (cfg.phi_eps) out["phi_eps"] = *cfg.phi_eps;
    return out;
}

BeamParams RunConfig::params() const { return BeamParams(beta, k, f_modes); }

MemoryKernel RunConfig::build_kernel() const {
    if (kernel.type == "none") return MemoryKernel::none();
    if (kernel.type == "exponential") {
        if (kernel.table) fail("kernel.table is only valid for the tabulated type");
        return MemoryKernel::exponential(kernel.delta, kernel.kappa);
    }
    if (kernel.type == "tabulated") {
        if (!kernel.table) fail("tabulated kernel needs kernel.table");
        const json t = read_json_file(*kernel.table);
        check_keys(t, "kernel table", {"ds", "samples"});
        if (!t.contains("ds") || !t.contains("samples")) fail("kernel table needs 'ds' and 'samples'");
        return MemoryKernel::tabulated(kernel.delta, kernel.kappa, get_real(t, "ds", "kernel table", 0.0),
                                       get_reals(t, "samples", "kernel table"));
    }
    fail("unknown kernel type '" + kernel.type + "'");
}

InitialData RunConfig::build_initial() const {
    InitialData init;
    const HistorySpec& h = initial.history;
    if (h.type == "snapshot") {
        if (!h.path) fail("snapshot history needs a path");
        if (!initial.c.empty() || !initial.cdot.empty()) fail("initial.c/cdot must be empty with a snapshot history");
        init = snapshot_from_json(read_json_file(*h.path)).as_initial_data();
        if (init.modes() != modes) fail("snapshot has " + std::to_string(init.modes()) + " modes, config has " + std::to_string(modes));
    } else {
        if (initial.c.size() > modes || initial.cdot.size() > modes) fail("initial.c/cdot longer than modes");
        init.c = initial.c;
        init.cdot = initial.cdot;
        init.c.resize(modes, 0.0);
        init.cdot.resize(modes, 0.0);
        if (h.type == "table") {
            if (!h.path) fail("table history needs a path");
            const json t = read_json_file(*h.path);
            check_keys(t, "history table", {"ds", "eta"});
            if (!t.contains("ds") || !t.contains("eta") || !t["eta"].is_array()) fail("history table needs 'ds' and 'eta'");
            SampledHistory hist;
            hist.ds = get_real(t, "ds", "history table", 0.0);
            for (const auto& row : t["eta"]) {
                json wrap{{"row", row}};
                hist.eta.push_back(get_reals(wrap, "row", "history table eta"));
            }
            if (hist.eta.size() != modes) fail("history table needs one eta row per mode");
            init.history = std::move(hist);
        } else if (h.type != "zero") {
            fail("unknown history type '" + h.type + "'");
        } else if (h.path) {
            fail("zero history takes no path");
        }
    }
    if (initial.random_radius) {
        const InitialData draw = InitialData::random(modes, *initial.random_radius, seed);
        for (std::size_t i = 0; i < modes; ++i) {
            init.c[i] += draw.c[i];
            init.cdot[i] += draw.cdot[i];
        }
    }
    return init;
}

SimulationOptions RunConfig::simulation_options() const {
    SimulationOptions opts;
    if (phi_eps) opts.phi_eps = *phi_eps;
    return opts;
}

void RunConfig::validate() const {
    const BeamParams p = [&] {
        try {
            return params();
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }();
    if (p.f_modes().size() > modes) fail("params.f_modes longer than modes");
    if (integrator.sample_every < 1) fail("integrator.sample_every must be >= 1");
    if (!(integrator.t_final > 0.0)) fail("integrator.t_final must be positive");
    if (phi_eps && !(*phi_eps >= 0.0 && *phi_eps < 2.0 && (k == 0.0 || *phi_eps < 2.0 * k))) {
        fail("phi_eps must satisfy 0 <= eps < 2 and eps < 2k");
    }
    try {
        const MemoryKernel kern = build_kernel();
        integrator.validate(modes, kern, k);
        const InitialData init = build_initial();
        if (kern.has_memory()) (void)initial_moments(init, kern);
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        throw std::invalid_argument(msg.rfind("config: ", 0) == 0 ? msg : "config: " + msg);
    }
}

}  // namespace beam
