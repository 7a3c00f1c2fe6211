#pragma once

// Time integration of the Galerkin-truncated history-space system
//
//   c_n'' + lambda_n c_n + lambda_n w_n + (beta + ||u||_1^2) n^2 pi^2 c_n + k c_n = f_n,
//   w_n(t) = int_0^inf mu(s) eta_n(t, s) ds,   d/dt eta = -d/ds eta + d/dt u,
//
// with two interchangeable memory backends:
//
//  ode_reduction        Exponential kernels only. The moments w_n and
//                       m_n = int mu eta_n^2 obey the closed system
//                         w_n' = -delta w_n + kappa c_n',
//                         m_n' = -delta m_n + 2 c_n' w_n
//                       (integrate d/dt eta = -d/ds eta + c' against mu and
//                       2 mu eta by parts, using eta(0) = 0 and mu' = -delta mu).
//                       Classical RK4 on (c, c', w, m).
//
//  history_quadrature   Any admissible kernel. eta_n(t, s) = c_n(t) - c_n(t - s)
//                       along characteristics from a ring buffer of past
//                       displacements (completed by the initial history for
//                       s > t); moments by trapezoid quadrature on [0, s_max]
//                       plus the kernel tail times eta(s_max). Velocity Verlet
//                       with the memory force evaluated at whole steps.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "beam/spectral_core.hpp"

namespace beam {

enum class Backend { ode_reduction, history_quadrature };

const char* to_string(Backend b);
/// Throws std::invalid_argument for unknown names.
Backend backend_from_string(std::string_view name);

struct IntegratorConfig {
    Backend backend = Backend::ode_reduction;
    double dt = 1e-3;
    double t_final = 10.0;
    int sample_every = 10;
    double s_max_tol = 1e-8;
    /// History grid step for the quadrature backend; 0 means dt. Must be an
    /// integer multiple of dt so characteristics land on stored steps.
    double ds = 0.0;

    double history_step() const noexcept { return ds > 0.0 ? ds : dt; }

    /// Largest admissible dt for `modes` modes: 2 / sqrt(lambda_N (1 + kappa) + k).
    static double stability_limit(std::size_t modes, const MemoryKernel& kernel, double k);

    /// Throws std::invalid_argument on any violated precondition.
    void validate(std::size_t modes, const MemoryKernel& kernel, double k) const;

    bool operator==(const IntegratorConfig&) const = default;
};

/// Initial state z = (u0, u1, eta0). Without a history table the past is
/// u(t) = u0 for t <= 0, i.e. eta0 = 0.
struct InitialData {
    std::vector<double> c;
    std::vector<double> cdot;
    /// eta0 sampled per mode on its own grid (eta0(0) = 0).
    std::optional<SampledHistory> history;
    /// Moment-form history for restarting the ode_reduction backend.
    std::optional<MomentHistory> moments;

    static InitialData at_rest(std::vector<double> c);
    /// Uniform draw from the ball ||(u0, u1)||_{H_0} <= radius with eta0 = 0.
    /// Deterministic for a given seed (std::mt19937_64).
    static InitialData random(std::size_t modes, double radius, std::uint64_t seed);
    std::size_t modes() const noexcept { return c.size(); }
    ModalState state() const { return ModalState{c, cdot}; }
};

/// Monitor row. Norm fields are square roots; the energies are the squared
/// quantities of the analysis.
struct Monitors {
    double energy = 0.0;       // E_cal = ||u||_2^2 + ||u_t||^2 + ||eta||_{0,mu}^2
    double augmented = 0.0;    // E = E_cal + (beta + ||u||_1^2)^2 / 2 + k ||u||^2
    double lyapunov = 0.0;     // L = E - 2 <f, u>
    double phi = 0.0;          // Phi = E + eps <u_t, u>
    double norm_u = 0.0;
    double norm_u1 = 0.0;
    double norm_u2 = 0.0;
    double norm_ut = 0.0;
    double norm_eta_mu = 0.0;
    double J_eta = 0.0;
    /// int_0^t J(eta) dt, the dissipation accumulated since t = 0.
    double dissipated = 0.0;
};

struct TrajectorySample {
    double t = 0.0;
    std::vector<double> c;
    std::vector<double> cdot;
    /// Memory moments w_n = int mu eta_n.
    std::vector<double> w;
    Monitors mon;
};

/// Full state for restarts: moments (ode_reduction) or the eta profile on the
/// quadrature grid (history_quadrature).
struct StateSnapshot {
    double t = 0.0;
    std::vector<double> c;
    std::vector<double> cdot;
    HistoryState history;

    /// Continuation data: time restarts at zero with the same state.
    InitialData as_initial_data() const;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    StateSnapshot final_state;
    bool stopped_early = false;
};

class NumericalBlowup : public std::runtime_error {
public:
    explicit NumericalBlowup(double t);
    double time() const noexcept { return t_; }

private:
    double t_;
};

/// Default Phi weight 0.5 * min(1, k).
double default_phi_eps(double k);

struct SimulationOptions {
    /// Weight of <u_t, u> in the Phi monitor; negative selects default_phi_eps(k).
    double phi_eps = -1.0;
    /// Checked at every monitor row; returning true ends the run after that row.
    std::function<bool(const TrajectorySample&)> stop;
};

/// Throws std::invalid_argument for inconsistent inputs (tabulated kernel with
/// ode_reduction, load longer than the truncation, ...) and NumericalBlowup
/// when the state stops being finite.
Trajectory simulate(const BeamParams& params, const MemoryKernel& kernel, const InitialData& init,
                    const IntegratorConfig& cfg, const SimulationOptions& options = {});

// ---------------------------------------------------------------------------
// Functionals

/// E_cal = ||u||_2^2 + ||u_t||^2 + ||eta||_{0,mu}^2.
double energy(const SquaredNorms& u, double velocity_sq, double memory_sq);

/// L = E_cal + (beta + ||u||_1^2)^2 / 2 + k ||u||^2 - 2 <f, u>.
double lyapunov(const ModalState& state, double memory_sq, const BeamParams& params);
double lyapunov(const ModalState& state, const HistoryState& history, const MemoryKernel& kernel,
                const BeamParams& params);

struct PhiValue {
    double phi = 0.0;
    double m0 = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
};

/// Phi = E + eps <u_t, u> with the sandwich constants m0 E_cal <= Phi <= m1 E_cal + m2:
///   m0 = min(1 - eps/2, 1 - eps/(2k))   (1 - eps/2 when k = 0)
///   m1 = 2 + (k + eps/2) / lambda_1 + eps/2
///   m2 = (|beta| + C / pi^2)^2 / 2, C the uniform energy bound.
/// Requires 0 <= eps < 2 and eps < 2k when k > 0.
PhiValue phi(const ModalState& state, double memory_sq, const BeamParams& params, double eps,
             double energy_bound);

/// Monitor row from raw modal data.
Monitors evaluate_monitors(const ModalState& state, double memory_sq, double j_eta, double dissipated,
                           const BeamParams& params, double phi_eps);

/// ||eta0||^2_{0,mu} (and its moments) of the initial data.
MomentHistory initial_moments(const InitialData& init, const MemoryKernel& kernel);

// ---------------------------------------------------------------------------
// Output

/// Header: t,E_cal,E_aug,L,Phi,norm_u,norm_u1,norm_u2,norm_ut,norm_eta_mu,J_eta
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace beam
