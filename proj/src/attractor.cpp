#include "beam/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "beam/format.hpp"
#include "beam/parallel.hpp"

namespace beam {

SplitConstants split_constants(double beta, double k) {
    SplitConstants sc;
    sc.gamma = std::max(1.0, 0.5 * beta * beta + 1.0);
    sc.alpha = sc.gamma - k;
    if (sc.alpha < 1.0) {
        sc.alpha = 1.0;
        sc.gamma = 1.0 + k;
    }
    // (x^2 + beta x + gamma)/x^2 = 1 + beta y + gamma y^2 with y = 1/x in (0, 1/pi^2]
    // is convex in y, so the supremum sits at an endpoint.
    sc.m = std::max(1.0, 1.0 + beta / kPi2 + sc.gamma / kLambda1);
    return sc;
}

bool split_bounds_hold(const SplitConstants& sc, double beta, std::size_t modes) {
    for (std::size_t i = 0; i < modes; ++i) {
        const double x = sqrt_eigenvalue(static_cast<int>(i + 1));
        const double lambda = x * x;
        const double q = lambda + beta * x + sc.gamma;
        if (q < 0.5 * lambda || q > sc.m * lambda * (1.0 + 1e-15)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Split integration

namespace {

// Offsets into the flat state: three systems of [c | c' | w | m] and the
// moment of the history defect xi + zeta - eta.
struct SplitLayout {
    std::size_t n;
    std::size_t sys(int s) const { return static_cast<std::size_t>(s) * 4 * n; }
    std::size_t c(int s) const { return sys(s); }
    std::size_t v(int s) const { return sys(s) + n; }
    std::size_t w(int s) const { return sys(s) + 2 * n; }
    std::size_t m(int s) const { return sys(s) + 3 * n; }
    std::size_t defect() const { return 12 * n; }
    std::size_t size() const { return 13 * n; }
};

constexpr int kU = 0, kV = 1, kW = 2;

}  // namespace

SplitTrajectory split_simulate(const InitialData& z, const BeamParams& params, const MemoryKernel& kernel,
                               const IntegratorConfig& cfg) {
    const std::size_t n = z.modes();
    if (n == 0 || z.cdot.size() != n) throw std::invalid_argument("split_simulate: malformed initial data");
    if (cfg.backend != Backend::ode_reduction) {
        throw std::invalid_argument("split_simulate: co-integration requires the ode_reduction backend");
    }
    if (params.f_modes().size() > n) throw std::invalid_argument("split_simulate: load has more modes than the truncation");
    cfg.validate(n, kernel, params.k());

    SplitTrajectory out;
    out.constants = split_constants(params.beta(), params.k());
    const double alpha = out.constants.alpha;
    const double k = params.k();
    const bool memory = kernel.has_memory();
    const double delta = kernel.delta();
    const double kappa = kernel.kappa();

    std::vector<double> lambda(n), root(n), load(n);
    for (std::size_t i = 0; i < n; ++i) {
        root[i] = sqrt_eigenvalue(static_cast<int>(i + 1));
        lambda[i] = root[i] * root[i];
        load[i] = params.load(i);
    }

    const SplitLayout at{n};
    std::vector<double> y(at.size(), 0.0);
    const MomentHistory mom0 = initial_moments(z, kernel);
    for (int s : {kU, kV}) {
        std::copy(z.c.begin(), z.c.end(), y.begin() + static_cast<std::ptrdiff_t>(at.c(s)));
        std::copy(z.cdot.begin(), z.cdot.end(), y.begin() + static_cast<std::ptrdiff_t>(at.v(s)));
        std::copy(mom0.w.begin(), mom0.w.end(), y.begin() + static_cast<std::ptrdiff_t>(at.w(s)));
        std::copy(mom0.m.begin(), mom0.m.end(), y.begin() + static_cast<std::ptrdiff_t>(at.m(s)));
    }

    auto rhs = [&](const std::vector<double>& in, std::vector<double>& d) {
        double stretch = params.beta();
        for (std::size_t i = 0; i < n; ++i) stretch += root[i] * in[at.c(kU) + i] * in[at.c(kU) + i];
        for (int s : {kU, kV, kW}) {
            // Shift on the system's own displacement: k for u, alpha + k for v, k for w.
            const double shift = (s == kV) ? alpha + k : k;
            for (std::size_t i = 0; i < n; ++i) {
                const double c = in[at.c(s) + i];
                const double v = in[at.v(s) + i];
                const double w = in[at.w(s) + i];
                double force = -lambda[i] * (c + w) - (stretch * root[i] + shift) * c;
                if (s == kU) force += load[i];
                if (s == kW) force += load[i] + alpha * in[at.c(kV) + i];
                d[at.c(s) + i] = v;
                d[at.v(s) + i] = force;
                d[at.w(s) + i] = memory ? -delta * w + kappa * v : 0.0;
                d[at.m(s) + i] = memory ? -delta * in[at.m(s) + i] + 2.0 * v * w : 0.0;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double dv = in[at.v(kV) + i] + in[at.v(kW) + i] - in[at.v(kU) + i];
            const double dw = in[at.w(kV) + i] + in[at.w(kW) + i] - in[at.w(kU) + i];
            d[at.defect() + i] = memory ? -delta * in[at.defect() + i] + 2.0 * dv * dw : 0.0;
        }
    };

    auto sample = [&](double t) {
        SplitSample s;
        s.t = t;
        double eu = 0.0, ev = 0.0, ew = 0.0, err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double l = lambda[i];
            const auto h0 = [&](int sys) {
                return l * y[at.c(sys) + i] * y[at.c(sys) + i] + y[at.v(sys) + i] * y[at.v(sys) + i] +
                       (memory ? l * y[at.m(sys) + i] : 0.0);
            };
            eu += h0(kU);
            ev += h0(kV);
            // H_2 = H_4 x H_2 x L^2_mu(H_4).
            ew += l * l * y[at.c(kW) + i] * y[at.c(kW) + i] + l * y[at.v(kW) + i] * y[at.v(kW) + i] +
                  (memory ? l * l * y[at.m(kW) + i] : 0.0);
            const double dc = y[at.c(kV) + i] + y[at.c(kW) + i] - y[at.c(kU) + i];
            const double dv = y[at.v(kV) + i] + y[at.v(kW) + i] - y[at.v(kU) + i];
            err += l * dc * dc + dv * dv + (memory ? l * std::max(0.0, y[at.defect() + i]) : 0.0);
        }
        s.norm_u = std::sqrt(std::max(0.0, eu));
        s.norm_v_h0 = std::sqrt(std::max(0.0, ev));
        s.norm_w_h2 = std::sqrt(std::max(0.0, ew));
        s.sum_error = std::sqrt(err);
        out.samples.push_back(s);
    };

    const auto steps = static_cast<std::size_t>(std::ceil(cfg.t_final / cfg.dt - 1e-9));
    const double dt = cfg.dt;
    std::vector<double> k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
    sample(0.0);
    for (std::size_t step = 1; step <= steps; ++step) {
        rhs(y, k1);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + dt * k3[i];
        rhs(tmp, k4);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        const double t = static_cast<double>(step) * dt;
        if (!std::all_of(y.begin(), y.end(), [](double x) { return std::isfinite(x) && std::abs(x) < 1e150; })) {
            throw NumericalBlowup(t);
        }
        if (step % static_cast<std::size_t>(cfg.sample_every) == 0 || step == steps) sample(t);
    }
    return out;
}

void write_split_csv(std::ostream& os, const SplitTrajectory& split) {
    os << "t,norm_u,norm_v_H0,norm_w_H2,sum_error\n";
    for (const auto& s : split.samples) {
        os << format_real(s.t) << ',' << format_real(s.norm_u) << ',' << format_real(s.norm_v_h0) << ','
           << format_real(s.norm_w_h2) << ',' << format_real(s.sum_error) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Connection graph

namespace {

int sign_value(Sign s) {
    switch (s) {
        case Sign::plus: return 1;
        case Sign::minus: return -1;
        case Sign::zero: return 0;
    }
    return 0;
}

// H_0 distance of (c, c', eta) to the static state (c_eq, 0, 0).
double distance_to(const TrajectorySample& s, const GraphNode& node) {
    double d = 0.0;
    for (std::size_t i = 0; i < s.c.size(); ++i) {
        const double diff = s.c[i] - node.modal.c[i];
        d += eigenvalue(static_cast<int>(i + 1)) * diff * diff;
    }
    d += s.mon.norm_ut * s.mon.norm_ut + s.mon.norm_eta_mu * s.mon.norm_eta_mu;
    return std::sqrt(d);
}

std::pair<int, double> nearest(const TrajectorySample& s, const std::vector<GraphNode>& nodes) {
    int best = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& node : nodes) {
        const double d = distance_to(s, node);
        if (d < dist) {
            dist = d;
            best = node.id;
        }
    }
    return {best, dist};
}

}  // namespace

ConnectionGraph connection_graph(const BeamParams& params, const MemoryKernel& kernel, const IntegratorConfig& cfg,
                                 std::size_t modes, const GraphOptions& options) {
    if (!(options.perturb_eps > 0.0) || !(options.t_max > 0.0) || !(options.tol > 0.0)) {
        throw std::invalid_argument("connection_graph: eps, t_max and tol must be positive");
    }
    const StationarySet set = enumerate_equilibria(params, options.rel_tol, modes);
    if (set.classification == Classification::infinite) {
        throw std::invalid_argument(
            "connection_graph: the stationary set is infinite (resonant k with beta below the smallest "
            "non-simple level); connections are only computed for finite stationary sets");
    }
    const int probe_modes = set.n_star + 1;
    if (modes < static_cast<std::size_t>(probe_modes)) {
        throw std::invalid_argument("connection_graph: need at least n_star + 1 = " + std::to_string(probe_modes) +
                                    " modes");
    }

    ConnectionGraph graph;
    for (const auto& eq : set.equilibria) {
        GraphNode node;
        node.id = static_cast<int>(graph.nodes.size());
        node.n = eq.mode;
        node.sign = sign_value(eq.sign);
        node.amplitude = eq.amplitude;
        node.modal = eq.modal.resized(modes);
        node.lyapunov = static_lyapunov(node.modal, params);
        graph.nodes.push_back(std::move(node));
    }

    struct Probe {
        int src;
        int mode;
        int sign;
    };
    std::vector<Probe> probes;
    for (const auto& node : graph.nodes) {
        for (int mode = 1; mode <= probe_modes; ++mode) {
            for (int sign : {1, -1}) probes.push_back({node.id, mode, sign});
        }
    }

    IntegratorConfig run_cfg = cfg;
    run_cfg.t_final = options.t_max;
    struct Outcome {
        int nearest = -1;
        double dist = 0.0;
        double t_end = 0.0;
        bool resolved = false;
    };
    std::vector<Outcome> outcomes(probes.size());
    parallel_for(probes.size(), [&](std::size_t p) {
        const Probe& probe = probes[p];
        InitialData init = InitialData::at_rest(graph.nodes[static_cast<std::size_t>(probe.src)].modal.c);
        init.c[static_cast<std::size_t>(probe.mode - 1)] += probe.sign * options.perturb_eps;
        SimulationOptions sim;
        sim.stop = [&](const TrajectorySample& s) {
            return s.t > 0.0 && nearest(s, graph.nodes).second <= options.tol / 10.0;
        };
        const Trajectory traj = simulate(params, kernel, init, run_cfg, sim);
        const TrajectorySample& last = traj.samples.back();
        const auto [id, dist] = nearest(last, graph.nodes);
        Outcome& o = outcomes[p];
        o.nearest = id;
        o.dist = dist;
        o.t_end = last.t;
        o.resolved = dist <= options.tol && last.mon.norm_ut + last.mon.norm_eta_mu <= options.tol;
    });

    for (std::size_t p = 0; p < probes.size(); ++p) {
        const Probe& probe = probes[p];
        const Outcome& o = outcomes[p];
        if (!o.resolved) {
            graph.unresolved.push_back(
                {probe.src, probe.mode, probe.sign, options.perturb_eps, o.t_end, o.dist, o.nearest});
            continue;
        }
        GraphEdge edge{probe.src, o.nearest, probe.mode, probe.sign, options.perturb_eps, o.t_end, o.dist};
        (o.nearest == probe.src ? graph.returns : graph.edges).push_back(edge);
    }
    return graph;
}

nlohmann::json graph_to_json(const ConnectionGraph& graph) {
    using nlohmann::json;
    json nodes = json::array(), edges = json::array(), unresolved = json::array();
    for (const auto& n : graph.nodes) {
        nodes.push_back({{"id", n.id}, {"n", n.n}, {"sign", n.sign}, {"amplitude", n.amplitude}, {"lyapunov", n.lyapunov}});
    }
    for (const auto& e : graph.edges) {
        edges.push_back({{"src", e.src},
                         {"dst", e.dst},
                         {"mode", e.mode},
                         {"sign", e.sign},
                         {"eps", e.eps},
                         {"t_transit", e.t_transit},
                         {"final_dist", e.final_dist}});
    }
    for (const auto& u : graph.unresolved) {
        unresolved.push_back({{"src", u.src},
                              {"mode", u.mode},
                              {"sign", u.sign},
                              {"eps", u.eps},
                              {"t_end", u.t_end},
                              {"final_dist", u.final_dist},
                              {"nearest", u.nearest}});
    }
    return json{{"nodes", nodes}, {"edges", edges}, {"unresolved", unresolved}};
}

}  // namespace beam
