#pragma once

// Modal basis, parameter and kernel types, norms for the hinged beam.
//
// Displacements are expanded on the L2-orthonormal eigenbasis
//   e_n(x) = sqrt(2) sin(n pi x),   n = 1, 2, ...
// of A = d^4/dx^4 with hinged ends. A physical shape A sin(n pi x) therefore
// has modal coefficient c_n = A / sqrt(2). Internally mode n lives at vector
// index n - 1.

#include <cstddef>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

namespace beam {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kPi2 = kPi * kPi;
/// First eigenvalue of A (pi^4).
inline constexpr double kLambda1 = kPi2 * kPi2;
inline constexpr int kDefaultModes = 12;

/// lambda_n = n^4 pi^4. Requires n >= 1.
double eigenvalue(int n);

/// sqrt(lambda_n) = n^2 pi^2, the spectrum of A^{1/2} = -d^2/dx^2.
double sqrt_eigenvalue(int n);

class BeamParams {
public:
    /// Throws std::invalid_argument when k < 0 or any value is not finite.
    BeamParams(double beta, double k, std::vector<double> f_modes = {});

    double beta() const noexcept { return beta_; }
    double k() const noexcept { return k_; }
    const std::vector<double>& f_modes() const noexcept { return f_modes_; }

    /// Load component on mode index i (0-based); zero beyond the stored entries.
    double load(std::size_t i) const noexcept { return i < f_modes_.size() ? f_modes_[i] : 0.0; }
    double load_norm_sq() const noexcept;
    bool unloaded() const noexcept;

    bool operator==(const BeamParams&) const = default;

private:
    double beta_;
    double k_;
    std::vector<double> f_modes_;
};

/// Memory kernel mu(s) satisfying mu' + delta mu <= 0 and int mu = kappa.
///
/// Kinds:
///  - none:        mu == 0 (memoryless switch, used for conservation checks)
///  - exponential: mu(s) = kappa delta exp(-delta s)
///  - tabulated:   samples mu_i on the uniform grid s_i = i ds, validated at
///                 construction; linear interpolation in between and the
///                 slowest admissible decay mu_last exp(-delta (s - s_last))
///                 past the last sample.
class MemoryKernel {
public:
    enum class Kind { none, exponential, tabulated };

    static MemoryKernel none();
    static MemoryKernel exponential(double delta, double kappa);
    /// Rejects negative or increasing samples, violations of the discrete
    /// decay condition (mu_{i+1} - mu_i)/ds + delta mu_{i+1} <= tol, and a
    /// mass (trapezoid plus exponential tail) more than 1% away from kappa.
    static MemoryKernel tabulated(double delta, double kappa, double ds, std::vector<double> samples,
                                  double tol = 1e-9);

    Kind kind() const noexcept { return kind_; }
    double delta() const noexcept { return delta_; }
    double kappa() const noexcept { return kappa_; }
    double table_step() const noexcept { return ds_; }
    const std::vector<double>& samples() const noexcept { return samples_; }
    bool has_memory() const noexcept { return kind_ != Kind::none; }

    double value(double s) const;
    /// mu'(s); finite differences of the table for the tabulated kind.
    double derivative(double s) const;
    /// int_s^inf mu.
    double tail_mass(double s) const;
    /// Last abscissa where the table carries data (infinity for analytic kinds).
    double support_end() const;

    bool operator==(const MemoryKernel&) const = default;

private:
    MemoryKernel(Kind kind, double delta, double kappa, double ds, std::vector<double> samples)
        : kind_(kind), delta_(delta), kappa_(kappa), ds_(ds), samples_(std::move(samples)) {}

    Kind kind_;
    double delta_;
    double kappa_;
    double ds_;
    std::vector<double> samples_;
};

struct ModalState {
    std::vector<double> c;
    std::vector<double> cdot;

    static ModalState zero(std::size_t modes);
    /// Pads with zeros (or truncates) to the requested number of modes.
    ModalState resized(std::size_t modes) const;
    std::size_t modes() const noexcept { return c.size(); }

    bool operator==(const ModalState&) const = default;
};

/// Squared norms ||u||^2, ||u||_1^2 = ||u_x||^2, ||u||_2^2 = ||u_xx||^2.
struct SquaredNorms {
    double l2 = 0.0;
    double h1 = 0.0;
    double h2 = 0.0;
};

SquaredNorms norms(std::span<const double> c);
inline SquaredNorms norms(const ModalState& state) { return norms(state.c); }

/// ||u_t||^2.
double velocity_norm_sq(std::span<const double> cdot);

/// u(x) = sum_n c_n sqrt(2) sin(n pi x). Throws std::domain_error outside [0, 1].
double evaluate_physical(const ModalState& state, double x);

/// Moment representation of the history for exponential kernels:
/// w_n = int mu(s) eta_n(s) ds and m_n = int mu(s) eta_n(s)^2 ds.
struct MomentHistory {
    std::vector<double> w;
    std::vector<double> m;

    static MomentHistory zero(std::size_t modes);
    bool operator==(const MomentHistory&) const = default;
};

/// History sampled on the uniform grid s_j = j ds, j = 0..M, so s_max = M ds.
/// eta[n][0] must be zero. Beyond s_max the profile is held at its last value.
struct SampledHistory {
    double ds = 0.0;
    std::vector<std::vector<double>> eta;

    double s_max() const noexcept;
    bool operator==(const SampledHistory&) const = default;
};

using HistoryState = std::variant<MomentHistory, SampledHistory>;

/// ||eta||_{0,mu}^2 = int mu(s) ||eta(s)||_2^2 ds.
double memory_norm_sq(const HistoryState& history, const MemoryKernel& kernel);

/// J(eta) = -int mu'(s) ||eta(s)||_2^2 ds. For exponential kernels in moment
/// form this is delta * sum lambda_n m_n; sampled histories use trapezoid
/// quadrature, with the table's finite-difference derivative for tabulated
/// kernels.
double functional_J(const HistoryState& history, const MemoryKernel& kernel);

/// Moments (w, m) of a sampled history, by trapezoid quadrature plus the
/// kernel tail times the last sample.
MomentHistory moments_of(const SampledHistory& history, const MemoryKernel& kernel);

}  // namespace beam
