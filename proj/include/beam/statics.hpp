#pragma once

// Closed-form steady states of the unloaded hinged beam
//
//   u'''' - (beta + ||u'||^2) u'' + k u = 0,
//
// critical loads, resonance detection and bifurcation sweeps.

#include <iosfwd>
#include <optional>
#include <vector>

#include "beam/spectral_core.hpp"

namespace beam {

inline constexpr double kDefaultResonanceTol = 1e-9;

/// mu_n(k) = k / (n^2 pi^2) + n^2 pi^2.
double mu_n(double k, int n);

/// The unique n_k with (n_k - 1)^2 n_k^2 <= k / pi^4 < n_k^2 (n_k + 1)^2.
int critical_index(double k);

/// beta_c(k) = min_n mu_n(k) = mu_{n_k}(k).
double beta_c(double k);

/// A pair i < j with mu_i(k) = mu_j(k) = mu (resonance at k = i^2 j^2 pi^4).
struct Resonance {
    int i = 0;
    int j = 0;
    double mu = 0.0;

    bool operator==(const Resonance&) const = default;
};

/// All resonant pairs of k, ordered by increasing level mu. Two modes can share
/// a level only when i j = sqrt(k) / pi^2, and mu_n(k) takes each value for at
/// most two n, so every non-simple level is exactly one pair.
std::vector<Resonance> resonant_pairs(double k, double rel_tol = kDefaultResonanceTol);

/// The pair carrying the smallest non-simple value mu_m(k), if k is resonant.
std::optional<Resonance> resonance(double k, double rel_tol = kDefaultResonanceTol);

/// Exact variant for k = k_over_pi4 * pi^4 with integer k_over_pi4.
std::optional<Resonance> resonance_exact(long long k_over_pi4);

/// Number of modes with beta + mu_n(k) < 0.
int n_star(double beta, double k);

/// Physical amplitude A_n^+ = (1/(n pi)) sqrt(-2 (beta + mu_n(k))); zero when
/// beta >= -mu_n(k).
double buckled_amplitude(int n, double beta, double k);

enum class Sign { zero, plus, minus };

struct Equilibrium {
    int mode = 0;  // 0 for the null state
    Sign sign = Sign::zero;
    double amplitude = 0.0;  // physical amplitude of sin(n pi x)
    ModalState modal;        // cdot == 0
};

/// Two-mode family a sin(i pi x) + b sin(j pi x) with
/// (i^2 pi^2 / 2) a^2 + (j^2 pi^2 / 2) b^2 = level, level = -(beta + mu).
struct ResonantFamily {
    int i = 0;
    int j = 0;
    double mu = 0.0;
    double level = 0.0;
    double coeff_i = 0.0;
    double coeff_j = 0.0;

    /// Member at ellipse angle theta: a = sqrt(level/coeff_i) cos(theta),
    /// b = sqrt(level/coeff_j) sin(theta).
    ModalState member(double theta, std::size_t modes) const;
};

enum class Classification { null_only, finite, infinite };

struct StationarySet {
    Classification classification = Classification::null_only;
    std::vector<Equilibrium> equilibria;
    std::vector<ResonantFamily> families;
    int n_star = 0;
};

const char* to_string(Classification c);
const char* to_string(Sign s);

/// Enumerates all steady states for f = 0. Throws std::invalid_argument when a
/// lateral load is present. Equilibria are stored with
/// max(modes, highest buckled mode) modal coefficients.
StationarySet enumerate_equilibria(const BeamParams& params, double rel_tol = kDefaultResonanceTol,
                                   std::size_t modes = kDefaultModes);

/// L2 norm of r_n = lambda_n c_n + (beta + ||u||_1^2) n^2 pi^2 c_n + k c_n - f_n.
double static_residual(const ModalState& state, const BeamParams& params);

/// Lyapunov value of a static state (u, 0, 0):
/// ||u||_2^2 + (beta + ||u||_1^2)^2 / 2 + k ||u||^2 - 2 <f, u>.
double static_lyapunov(const ModalState& state, const BeamParams& params);

struct BranchRow {
    double beta = 0.0;
    int n = 0;
    double a_plus = 0.0;
    double a_minus = 0.0;
};

struct FamilyMarker {
    double beta = 0.0;
    int i = 0;
    int j = 0;
    double level = 0.0;
};

struct BranchTable {
    std::vector<BranchRow> rows;
    std::vector<FamilyMarker> families;
};

/// Samples beta_i = beta_min + i (beta_max - beta_min) / steps, i = 0..steps.
/// Each sample emits the zero branch (n = 0) and one row per simple mode with
/// beta + mu_n <= 0; non-simple levels become family markers instead.
BranchTable bifurcation_sweep(double k, double beta_min, double beta_max, int steps,
                              double rel_tol = kDefaultResonanceTol);

/// CSV header beta,n,a_plus,a_minus.
void write_branch_csv(std::ostream& os, const BranchTable& table);
/// CSV header beta,i,j,level.
void write_family_csv(std::ostream& os, const BranchTable& table);

}  // namespace beam
