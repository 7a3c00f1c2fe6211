#pragma once

// Stability thresholds and decay-rate estimation for the unloaded beam.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "beam/dynamics.hpp"
#include "beam/statics.hpp"

namespace beam {

/// Exponential-stability threshold: beta_c(k) for 0 <= k <= lambda_1, 2 sqrt(k) beyond.
double beta_bar(double k);

/// Coercivity constant of L u = A u + beta A^{1/2} u + k u, i.e. the infimum of
/// g(x) = 1 + beta/x + k/x^2 over x >= pi^2 (continuous relaxation of the
/// spectral variable x = sqrt(lambda_n)). Positive iff beta > -beta_bar(k).
double nu(double beta, double k);

enum class Region { exponential, gap, buckled, boundary };

const char* to_string(Region r);

struct StabilityVerdict {
    double beta = 0.0;
    double k = 0.0;
    double beta_c = 0.0;
    double beta_bar = 0.0;
    Region region = Region::exponential;
    double nu = 0.0;
};

StabilityVerdict classify(double beta, double k);

/// steps x steps grid (steps points per axis, endpoints included), k outer.
std::vector<StabilityVerdict> stability_map(double k_min, double k_max, double beta_min, double beta_max, int steps);

/// CSV header k,beta,beta_c,beta_bar,nu,region.
void write_stability_csv(std::ostream& os, const std::vector<StabilityVerdict>& grid);

/// Uniform bound C >= E_cal(t). With eps = lambda_1 / 2 in the Young split
/// 2<f,u> <= ||f||^2/eps + eps ||u||^2, C = 2 L(0) + 4 ||f||^2 / lambda_1; for
/// f = 0 the direct bound C = L(0).
double energy_bound(const InitialData& init, const BeamParams& params, const MemoryKernel& kernel);

/// R0 = 1 + sqrt(2K + 4 ||f||^2 / lambda_1), K = 1 + sup of L over the
/// stationary set (resonant families are included through their constant
/// Lyapunov value).
double absorbing_radius(const BeamParams& params, const StationarySet& stationary);

struct DecayFit {
    double rate = 0.0;
    double residual = 0.0;
    double t0 = 0.0;
    double t1 = 0.0;
    /// Nonempty when the fit is degenerate (energy underflow).
    std::string diagnostic;
};

/// Least-squares line through log E(t) on t in [t_first + a T, t_first + b T]
/// with T the time span; rate = -slope, residual = RMS deviation from the line.
/// Energy that vanishes on the window yields rate = +inf and a diagnostic.
/// Throws std::invalid_argument for fewer than two samples in the window.
DecayFit estimate_decay_rate(std::span<const double> t, std::span<const double> energy, double a = 0.25,
                             double b = 0.9);
DecayFit estimate_decay_rate(const Trajectory& traj, double a = 0.25, double b = 0.9);

/// Curvature (second-order coefficient) of a quadratic fit to log E on the
/// same window. Exploratory: positive values indicate slower-than-exponential
/// decay.
double log_energy_curvature(std::span<const double> t, std::span<const double> energy, double a = 0.25,
                            double b = 0.9);

}  // namespace beam
