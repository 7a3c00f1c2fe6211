#pragma once

// Numerical view of the global attractor: the decaying/compact splitting of
// the semigroup and the heteroclinic connections between equilibria.

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "beam/dynamics.hpp"
#include "beam/statics.hpp"

namespace beam {

struct SplitConstants {
    double alpha = 0.0;
    double gamma = 0.0;  // gamma = alpha + k
    double m = 0.0;      // sup over x >= pi^2 of (x^2 + beta x + gamma) / x^2
};

/// gamma = max(1, beta^2/2 + 1), alpha = gamma - k clamped to alpha >= 1
/// (gamma then grows to 1 + k), so that for every mode
///   lambda/2 <= lambda + beta sqrt(lambda) + gamma <= m lambda.
SplitConstants split_constants(double beta, double k);

/// Mode-wise check of both inequalities above for n = 1..modes.
bool split_bounds_hold(const SplitConstants& sc, double beta, std::size_t modes);

struct SplitSample {
    double t = 0.0;
    double norm_u = 0.0;     // ||S(t) z||_{H_0}
    double norm_v_h0 = 0.0;  // ||L(t) z||_{H_0}
    double norm_w_h2 = 0.0;  // ||K(t) z||_{H_2}
    double sum_error = 0.0;  // ||L(t) z + K(t) z - S(t) z||_{H_0}
};

struct SplitTrajectory {
    SplitConstants constants;
    std::vector<SplitSample> samples;
};

/// Co-integrates S(t)z = (u, u_t, eta), L(t)z = (v, v_t, xi) with data z and
/// K(t)z = (w, w_t, zeta) with zero data, on shared RK4 stages. The factor
/// beta + ||u||_1^2 in the v and w equations is taken from the u stage, which
/// makes the v/w pair linear and their sum reproduce the u recursion.
/// Requires the ode_reduction backend (exponential or no memory).
SplitTrajectory split_simulate(const InitialData& z, const BeamParams& params, const MemoryKernel& kernel,
                               const IntegratorConfig& cfg);

/// CSV header t,norm_u,norm_v_H0,norm_w_H2,sum_error.
void write_split_csv(std::ostream& os, const SplitTrajectory& split);

struct GraphNode {
    int id = 0;
    int n = 0;
    int sign = 0;  // +1, -1, 0 for the null state
    double amplitude = 0.0;
    double lyapunov = 0.0;
    ModalState modal;
};

struct GraphEdge {
    int src = 0;
    int dst = 0;
    int mode = 0;
    int sign = 0;
    double eps = 0.0;
    double t_transit = 0.0;
    double final_dist = 0.0;
};

struct UnresolvedProbe {
    int src = 0;
    int mode = 0;
    int sign = 0;
    double eps = 0.0;
    double t_end = 0.0;
    double final_dist = 0.0;
    int nearest = 0;
};

struct ConnectionGraph {
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;
    /// Probes that settled back on their source (not connections).
    std::vector<GraphEdge> returns;
    std::vector<UnresolvedProbe> unresolved;
};

struct GraphOptions {
    double perturb_eps = 1e-2;
    double t_max = 500.0;
    double tol = 1e-2;
    double rel_tol = kDefaultResonanceTol;
};

/// Perturbs every equilibrium by +-perturb_eps on each mode n <= n_star + 1
/// (zero velocity and history), integrates until the state is within tol/10 of
/// an equilibrium in H_0 or t_max, and classifies the endpoint by the nearest
/// equilibrium with ||u_t|| + ||eta||_{0,mu} <= tol. Probes run concurrently.
/// Throws std::invalid_argument for an infinite stationary set or too few modes.
ConnectionGraph connection_graph(const BeamParams& params, const MemoryKernel& kernel, const IntegratorConfig& cfg,
                                 std::size_t modes, const GraphOptions& options = {});

/// {nodes:[{id,n,sign,amplitude,lyapunov}], edges:[{src,dst,mode,sign,eps,t_transit,final_dist}], unresolved:[...]}
nlohmann::json graph_to_json(const ConnectionGraph& graph);

}  // namespace beam
