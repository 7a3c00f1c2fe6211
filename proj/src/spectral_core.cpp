#include "beam/spectral_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace beam {

double eigenvalue(int n) {
    if (n < 1) throw std::invalid_argument("eigenvalue: mode index must be >= 1");
    const double x = static_cast<double>(n) * n * kPi2;
    return x * x;
}

double sqrt_eigenvalue(int n) {
    if (n < 1) throw std::invalid_argument("sqrt_eigenvalue: mode index must be >= 1");
    return static_cast<double>(n) * n * kPi2;
}

// ---------------------------------------------------------------------------
// BeamParams

BeamParams::BeamParams(double beta, double k, std::vector<double> f_modes)
    : beta_(beta), k_(k), f_modes_(std::move(f_modes)) {
    if (!std::isfinite(beta_)) throw std::invalid_argument("beta must be finite");
    if (!std::isfinite(k_) || k_ < 0.0) throw std::invalid_argument("foundation stiffness k must be finite and >= 0");
    for (double f : f_modes_) {
        if (!std::isfinite(f)) throw std::invalid_argument("load components must be finite");
    }
}

double BeamParams::load_norm_sq() const noexcept {
    double s = 0.0;
    for (double f : f_modes_) s += f * f;
    return s;
}

bool BeamParams::unloaded() const noexcept {
    return std::all_of(f_modes_.begin(), f_modes_.end(), [](double f) { return f == 0.0; });
}

// ---------------------------------------------------------------------------
// MemoryKernel

MemoryKernel MemoryKernel::none() { return MemoryKernel(Kind::none, 0.0, 0.0, 0.0, {}); }

MemoryKernel MemoryKernel::exponential(double delta, double kappa) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("kernel delta must be > 0");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("kernel kappa must be > 0");
    return MemoryKernel(Kind::exponential, delta, kappa, 0.0, {});
}

MemoryKernel MemoryKernel::tabulated(double delta, double kappa, double ds, std::vector<double> samples,
                                     double tol) {
    if (!(delta > 0.0)) throw std::invalid_argument("kernel delta must be > 0");
    if (!(kappa > 0.0)) throw std::invalid_argument("kernel kappa must be > 0");
    if (!(ds > 0.0)) throw std::invalid_argument("kernel table step must be > 0");
    if (samples.size() < 2) throw std::invalid_argument("kernel table needs at least two samples");

    const double scale = std::max(1.0, samples.front());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double mu = samples[i];
        if (!std::isfinite(mu) || mu < 0.0) {
            throw std::invalid_argument("kernel table: sample " + std::to_string(i) + " is negative or not finite");
        }
        if (i + 1 < samples.size()) {
            const double next = samples[i + 1];
            if (next > mu) {
                throw std::invalid_argument("kernel table: not nonincreasing at sample " + std::to_string(i));
            }
            // Any mu with mu' + delta mu <= 0 obeys mu_{i+1} <= mu_i / (1 + delta ds).
            if ((next - mu) / ds + delta * next > tol * scale) {
                throw std::invalid_argument("kernel table: decay condition mu' + delta mu <= 0 violated at sample " +
                                            std::to_string(i));
            }
        }
    }

    double mass = 0.5 * (samples.front() + samples.back());
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) mass += samples[i];
    mass = mass * ds + samples.back() / delta;
    if (std::abs(mass - kappa) > 0.01 * kappa) {
        throw std::invalid_argument("kernel table: mass " + std::to_string(mass) + " differs from kappa " +
                                    std::to_string(kappa) + " by more than 1%");
    }
    return MemoryKernel(Kind::tabulated, delta, kappa, ds, std::move(samples));
}

double MemoryKernel::support_end() const {
    if (kind_ == Kind::tabulated) return ds_ * static_cast<double>(samples_.size() - 1);
    return std::numeric_limits<double>::infinity();
}

double MemoryKernel::value(double s) const {
    switch (kind_) {
        case Kind::none:
            return 0.0;
        case Kind::exponential:
            return kappa_ * delta_ * std::exp(-delta_ * s);
        case Kind::tabulated: {
            const double end = support_end();
            if (s >= end) return samples_.back() * std::exp(-delta_ * (s - end));
            const double x = std::max(s, 0.0) / ds_;
            const auto i = static_cast<std::size_t>(x);
            const double frac = x - static_cast<double>(i);
            return samples_[i] + frac * (samples_[i + 1] - samples_[i]);
        }
    }
    return 0.0;
}

double MemoryKernel::derivative(double s) const {
    switch (kind_) {
        case Kind::none:
            return 0.0;
        case Kind::exponential:
            return -delta_ * value(s);
        case Kind::tabulated: {
            const double end = support_end();
            if (s >= end) return -delta_ * value(s);
            const auto i = static_cast<std::size_t>(std::max(s, 0.0) / ds_);
            return (samples_[i + 1] - samples_[i]) / ds_;
        }
    }
    return 0.0;
}

double MemoryKernel::tail_mass(double s) const {
    switch (kind_) {
        case Kind::none:
            return 0.0;
        case Kind::exponential:
            return kappa_ * std::exp(-delta_ * s);
        case Kind::tabulated: {
            const double end = support_end();
            if (s >= end) return value(s) / delta_;
            // Piecewise-linear interpolant is integrated exactly.
            const double x = std::max(s, 0.0) / ds_;
            const auto i = static_cast<std::size_t>(x);
            double mass = 0.5 * (value(s) + samples_[i + 1]) * (ds_ * static_cast<double>(i + 1) - s);
            for (std::size_t j = i + 1; j + 1 < samples_.size(); ++j) mass += 0.5 * (samples_[j] + samples_[j + 1]) * ds_;
            return mass + samples_.back() / delta_;
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Modal state and norms

ModalState ModalState::zero(std::size_t modes) { return ModalState{std::vector<double>(modes, 0.0), std::vector<double>(modes, 0.0)}; }

ModalState ModalState::resized(std::size_t modes) const {
    ModalState out = *this;
    out.c.resize(modes, 0.0);
    out.cdot.resize(modes, 0.0);
    return out;
}

SquaredNorms norms(std::span<const double> c) {
    SquaredNorms out;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double x = sqrt_eigenvalue(static_cast<int>(i + 1));
        const double c2 = c[i] * c[i];
        out.l2 += c2;
        out.h1 += x * c2;
        out.h2 += x * x * c2;
    }
    return out;
}

double velocity_norm_sq(std::span<const double> cdot) {
    double s = 0.0;
    for (double v : cdot) s += v * v;
    return s;
}

double evaluate_physical(const ModalState& state, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("evaluate_physical: x must lie in [0, 1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    double u = 0.0;
    for (std::size_t i = 0; i < state.c.size(); ++i) {
        u += state.c[i] * std::sin(static_cast<double>(i + 1) * kPi * x);
    }
    return std::numbers::sqrt2 * u;
}

// ---------------------------------------------------------------------------
// History

MomentHistory MomentHistory::zero(std::size_t modes) {
    return MomentHistory{std::vector<double>(modes, 0.0), std::vector<double>(modes, 0.0)};
}

double SampledHistory::s_max() const noexcept {
    if (eta.empty() || eta.front().empty()) return 0.0;
    return ds * static_cast<double>(eta.front().size() - 1);
}

namespace {

void check_sampled(const SampledHistory& h) {
    if (!(h.ds > 0.0)) throw std::invalid_argument("sampled history: ds must be > 0");
    for (const auto& row : h.eta) {
        if (row.size() != h.eta.front().size() || row.empty()) {
            throw std::invalid_argument("sampled history: all modes need the same nonempty grid");
        }
        if (std::abs(row.front()) > 1e-12) throw std::invalid_argument("sampled history: eta(0) must vanish");
    }
}

// Trapezoid weights times a kernel quantity on the history grid, plus the
// contribution of [s_max, inf) using the last sample.
template <typename Weight, typename Tail, typename Integrand>
double sampled_integral(const std::vector<double>& eta, double ds, Weight weight, Tail tail, Integrand g) {
    const std::size_t m = eta.size() - 1;
    double acc = 0.0;
    for (std::size_t j = 0; j <= m; ++j) {
        const double w = (j == 0 || j == m) ? 0.5 : 1.0;
        acc += w * weight(ds * static_cast<double>(j)) * g(eta[j]);
    }
    return acc * ds + tail(ds * static_cast<double>(m)) * g(eta[m]);
}

}  // namespace

MomentHistory moments_of(const SampledHistory& history, const MemoryKernel& kernel) {
    check_sampled(history);
    MomentHistory out = MomentHistory::zero(history.eta.size());
    if (!kernel.has_memory()) return out;
    auto mu = [&](double s) { return kernel.value(s); };
    auto tail = [&](double s) { return kernel.tail_mass(s); };
    for (std::size_t n = 0; n < history.eta.size(); ++n) {
        out.w[n] = sampled_integral(history.eta[n], history.ds, mu, tail, [](double e) { return e; });
        out.m[n] = sampled_integral(history.eta[n], history.ds, mu, tail, [](double e) { return e * e; });
    }
    return out;
}

double memory_norm_sq(const HistoryState& history, const MemoryKernel& kernel) {
    if (!kernel.has_memory()) return 0.0;
    if (const auto* mom = std::get_if<MomentHistory>(&history)) {
        double s = 0.0;
        for (std::size_t n = 0; n < mom->m.size(); ++n) s += eigenvalue(static_cast<int>(n + 1)) * mom->m[n];
        return s;
    }
    const MomentHistory mom = moments_of(std::get<SampledHistory>(history), kernel);
    return memory_norm_sq(mom, kernel);
}

double functional_J(const HistoryState& history, const MemoryKernel& kernel) {
    if (!kernel.has_memory()) return 0.0;
    if (std::holds_alternative<MomentHistory>(history)) {
        if (kernel.kind() != MemoryKernel::Kind::exponential) {
            throw std::invalid_argument("functional_J: moment form requires an exponential kernel");
        }
        return kernel.delta() * memory_norm_sq(history, kernel);
    }
    const auto& sampled = std::get<SampledHistory>(history);
    check_sampled(sampled);
    auto minus_dmu = [&](double s) { return -kernel.derivative(s); };
    // int_{s_max}^inf -mu' = mu(s_max) since mu vanishes at infinity.
    auto tail = [&](double s) { return kernel.value(s); };
    double total = 0.0;
    for (std::size_t n = 0; n < sampled.eta.size(); ++n) {
        total += eigenvalue(static_cast<int>(n + 1)) *
                 sampled_integral(sampled.eta[n], sampled.ds, minus_dmu, tail, [](double e) { return e * e; });
    }
    return total;
}

}  // namespace beam
