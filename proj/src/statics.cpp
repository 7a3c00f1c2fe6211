#include "beam/statics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "beam/format.hpp"

namespace beam {

namespace {

constexpr double kClampAmplitude = 1e-12;

bool is_simple(const std::vector<Resonance>& pairs, int n) {
    return std::none_of(pairs.begin(), pairs.end(), [n](const Resonance& r) { return r.i == n || r.j == n; });
}

}  // namespace

double mu_n(double k, int n) {
    const double x = sqrt_eigenvalue(n);
    return k / x + x;
}

int critical_index(double k) {
    if (k < 0.0) throw std::invalid_argument("critical_index: k must be >= 0");
    const double q = k / kLambda1;
    int n = 1;
    while (q >= static_cast<double>(n) * n * (n + 1) * (n + 1)) ++n;
    return n;
}

double beta_c(double k) { return mu_n(k, critical_index(k)); }

std::vector<Resonance> resonant_pairs(double k, double rel_tol) {
    if (k < 0.0) throw std::invalid_argument("resonant_pairs: k must be >= 0");
    std::vector<Resonance> out;
    const double q = k / kLambda1;
    if (q <= 0.0) return out;
    const double root = std::sqrt(q);
    const int j_max = static_cast<int>(std::ceil(root)) + 1;
    for (int j = 2; j <= j_max; ++j) {
        for (int i = 1; i < j; ++i) {
            const double target = static_cast<double>(i) * i * j * j;
            if (std::abs(q / target - 1.0) <= rel_tol) {
                out.push_back({i, j, mu_n(k, i)});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const Resonance& a, const Resonance& b) { return a.mu < b.mu; });
    return out;
}

std::optional<Resonance> resonance(double k, double rel_tol) {
    auto pairs = resonant_pairs(k, rel_tol);
    if (pairs.empty()) return std::nullopt;
    return pairs.front();
}

std::optional<Resonance> resonance_exact(long long k_over_pi4) {
    if (k_over_pi4 < 0) throw std::invalid_argument("resonance_exact: k must be >= 0");
    const auto root = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(k_over_pi4))));
    if (root * root != k_over_pi4) return std::nullopt;
    // Smallest i^2 + j^2 with i j = root, i < j: largest divisor i below sqrt(root).
    std::optional<Resonance> best;
    for (long long i = 1; i * i < root; ++i) {
        if (root % i != 0) continue;
        const long long j = root / i;
        best = Resonance{static_cast<int>(i), static_cast<int>(j), static_cast<double>(i * i + j * j) * kPi2};
    }
    return best;
}

int n_star(double beta, double k) {
    int count = 0;
    // mu_n >= n^2 pi^2, so modes with n^2 pi^2 >= -beta can be skipped.
    for (int n = 1; sqrt_eigenvalue(n) < -beta; ++n) {
        if (beta + mu_n(k, n) < 0.0) ++count;
    }
    return count;
}

double buckled_amplitude(int n, double beta, double k) {
    const double gap = beta + mu_n(k, n);
    if (gap >= 0.0) return 0.0;
    return std::sqrt(-2.0 * gap) / (static_cast<double>(n) * kPi);
}

ModalState ResonantFamily::member(double theta, std::size_t modes) const {
    ModalState out = ModalState::zero(std::max<std::size_t>(modes, static_cast<std::size_t>(j)));
    const double a = std::sqrt(level / coeff_i) * std::cos(theta);
    const double b = std::sqrt(level / coeff_j) * std::sin(theta);
    out.c[static_cast<std::size_t>(i - 1)] = a / std::numbers::sqrt2;
    out.c[static_cast<std::size_t>(j - 1)] = b / std::numbers::sqrt2;
    return out;
}

const char* to_string(Classification c) {
    switch (c) {
        case Classification::null_only: return "null_only";
        case Classification::finite: return "finite";
        case Classification::infinite: return "infinite";
    }
    return "?";
}

const char* to_string(Sign s) {
    switch (s) {
        case Sign::zero: return "zero";
        case Sign::plus: return "+";
        case Sign::minus: return "-";
    }
    return "?";
}

StationarySet enumerate_equilibria(const BeamParams& params, double rel_tol, std::size_t modes) {
    if (!params.unloaded()) {
        throw std::invalid_argument("enumerate_equilibria: only the unloaded case f = 0 is supported");
    }
    const double beta = params.beta();
    const double k = params.k();

    StationarySet out;
    out.n_star = n_star(beta, k);
    out.equilibria.push_back(Equilibrium{0, Sign::zero, 0.0, ModalState::zero(modes)});
    if (beta >= -beta_c(k)) {
        out.classification = Classification::null_only;
        return out;
    }

    const auto pairs = resonant_pairs(k, rel_tol);
    const bool infinite = !pairs.empty() && beta < -pairs.front().mu;
    out.classification = infinite ? Classification::infinite : Classification::finite;

    for (int n = 1; sqrt_eigenvalue(n) < -beta; ++n) {
        if (beta + mu_n(k, n) >= 0.0) continue;
        if (infinite && !is_simple(pairs, n)) continue;
        const double a = buckled_amplitude(n, beta, k);
        const std::size_t size = std::max(modes, static_cast<std::size_t>(n));
        for (Sign sign : {Sign::plus, Sign::minus}) {
            Equilibrium eq{n, sign, sign == Sign::plus ? a : -a, ModalState::zero(size)};
            eq.modal.c[static_cast<std::size_t>(n - 1)] = eq.amplitude / std::numbers::sqrt2;
            out.equilibria.push_back(std::move(eq));
        }
    }
    if (infinite) {
        for (const auto& r : pairs) {
            if (beta + r.mu >= 0.0) continue;
            out.families.push_back(ResonantFamily{r.i, r.j, r.mu, -(beta + r.mu),
                                                  0.5 * sqrt_eigenvalue(r.i), 0.5 * sqrt_eigenvalue(r.j)});
        }
    }
    return out;
}

double static_residual(const ModalState& state, const BeamParams& params) {
    const double stretch = params.beta() + norms(state).h1;
    double sum = 0.0;
    for (std::size_t i = 0; i < state.c.size(); ++i) {
        const int n = static_cast<int>(i + 1);
        const double r = (eigenvalue(n) + stretch * sqrt_eigenvalue(n) + params.k()) * state.c[i] - params.load(i);
        sum += r * r;
    }
    for (std::size_t i = state.c.size(); i < params.f_modes().size(); ++i) sum += params.load(i) * params.load(i);
    return std::sqrt(sum);
}

double static_lyapunov(const ModalState& state, const BeamParams& params) {
    const SquaredNorms nrm = norms(state);
    const double stretch = params.beta() + nrm.h1;
    double work = 0.0;
    for (std::size_t i = 0; i < state.c.size(); ++i) work += params.load(i) * state.c[i];
    return nrm.h2 + 0.5 * stretch * stretch + params.k() * nrm.l2 - 2.0 * work;
}

BranchTable bifurcation_sweep(double k, double beta_min, double beta_max, int steps, double rel_tol) {
    if (!(beta_min < beta_max)) throw std::invalid_argument("bifurcation_sweep: beta_min must be < beta_max");
    if (steps < 1) throw std::invalid_argument("bifurcation_sweep: steps must be positive");
    if (k < 0.0) throw std::invalid_argument("bifurcation_sweep: k must be >= 0");

    const auto pairs = resonant_pairs(k, rel_tol);
    BranchTable table;
    const double h = (beta_max - beta_min) / steps;
    for (int s = 0; s <= steps; ++s) {
        const double beta = (s == steps) ? beta_max : beta_min + h * s;
        table.rows.push_back({beta, 0, 0.0, 0.0});
        for (int n = 1; sqrt_eigenvalue(n) <= -beta; ++n) {
            if (beta + mu_n(k, n) > 0.0 || !is_simple(pairs, n)) continue;
            double a = buckled_amplitude(n, beta, k);
            if (a < kClampAmplitude) a = 0.0;
            table.rows.push_back({beta, n, a, -a});
        }
        for (const auto& r : pairs) {
            if (beta + r.mu > 0.0) continue;
            table.families.push_back({beta, r.i, r.j, -(beta + r.mu)});
        }
    }
    return table;
}

void write_branch_csv(std::ostream& os, const BranchTable& table) {
    os << "beta,n,a_plus,a_minus\n";
    for (const auto& r : table.rows) {
        os << format_real(r.beta) << ',' << r.n << ',' << format_real(r.a_plus) << ',' << format_real(r.a_minus)
           << '\n';
    }
}

void write_family_csv(std::ostream& os, const BranchTable& table) {
    os << "beta,i,j,level\n";
    for (const auto& f : table.families) {
        os << format_real(f.beta) << ',' << f.i << ',' << f.j << ',' << format_real(f.level) << '\n';
    }
}

}  // namespace beam
