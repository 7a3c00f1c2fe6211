#include "beam/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "beam/format.hpp"

namespace beam {

const char* to_string(Backend b) {
    switch (b) {
        case Backend::ode_reduction: return "ode_reduction";
        case Backend::history_quadrature: return "history_quadrature";
    }
    return "?";
}

Backend backend_from_string(std::string_view name) {
    if (name == "ode_reduction") return Backend::ode_reduction;
    if (name == "history_quadrature") return Backend::history_quadrature;
    throw std::invalid_argument("unknown backend '" + std::string(name) + "'");
}

double IntegratorConfig::stability_limit(std::size_t modes, const MemoryKernel& kernel, double k) {
    if (modes == 0) throw std::invalid_argument("at least one mode is required");
    const double omega_sq = eigenvalue(static_cast<int>(modes)) * (1.0 + kernel.kappa()) + k;
    return 2.0 / std::sqrt(omega_sq);
}

void IntegratorConfig::validate(std::size_t modes, const MemoryKernel& kernel, double k) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
    if (!(t_final > 0.0) || !std::isfinite(t_final)) throw std::invalid_argument("t_final must be > 0");
    if (sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
    if (!(s_max_tol > 0.0 && s_max_tol < 1.0)) throw std::invalid_argument("s_max_tol must lie in (0, 1)");
    if (ds < 0.0) throw std::invalid_argument("ds must be >= 0");
    const double limit = stability_limit(modes, kernel, k);
    if (dt > limit) {
        std::ostringstream msg;
        msg << "dt = " << dt << " exceeds the explicit stability bound " << limit << " for N = " << modes
            << " modes";
        throw std::invalid_argument(msg.str());
    }
    if (backend == Backend::ode_reduction && kernel.kind() == MemoryKernel::Kind::tabulated) {
        throw std::invalid_argument("ode_reduction backend requires an exponential kernel");
    }
    if (backend == Backend::history_quadrature) {
        const double ratio = history_step() / dt;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0) {
            throw std::invalid_argument("ds must be a positive integer multiple of dt");
        }
    }
}

NumericalBlowup::NumericalBlowup(double t)
    : std::runtime_error("numerical blowup at t = " + format_real(t)), t_(t) {}

InitialData InitialData::at_rest(std::vector<double> c) {
    InitialData out;
    out.cdot.assign(c.size(), 0.0);
    out.c = std::move(c);
    return out;
}

InitialData InitialData::random(std::size_t modes, double radius, std::uint64_t seed) {
    if (modes == 0) throw std::invalid_argument("InitialData::random: need at least one mode");
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw std::invalid_argument("InitialData::random: bad radius");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit;
    std::vector<double> x(2 * modes);
    double norm = 0.0;
    while (norm == 0.0) {
        norm = 0.0;
        for (auto& v : x) {
            v = gauss(rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
    }
    const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(2 * modes));
    InitialData out;
    out.c.resize(modes);
    out.cdot.resize(modes);
    for (std::size_t i = 0; i < modes; ++i) {
        // H_0 weights: sqrt(lambda_n) on the displacement, 1 on the velocity.
        out.c[i] = r * x[i] / norm / sqrt_eigenvalue(static_cast<int>(i + 1));
        out.cdot[i] = r * x[modes + i] / norm;
    }
    return out;
}

InitialData StateSnapshot::as_initial_data() const {
    InitialData out;
    out.c = c;
    out.cdot = cdot;
    if (const auto* mom = std::get_if<MomentHistory>(&history)) {
        out.moments = *mom;
    } else {
        out.history = std::get<SampledHistory>(history);
    }
    return out;
}

double default_phi_eps(double k) { return 0.5 * std::min(1.0, k); }

// ---------------------------------------------------------------------------
// Functionals

double energy(const SquaredNorms& u, double velocity_sq, double memory_sq) { return u.h2 + velocity_sq + memory_sq; }

namespace {

double load_work(const ModalState& state, const BeamParams& params) {
    double s = 0.0;
    for (std::size_t i = 0; i < state.c.size(); ++i) s += params.load(i) * state.c[i];
    return s;
}

double augmented_energy(const SquaredNorms& nrm, double velocity_sq, double memory_sq, const BeamParams& params) {
    const double stretch = params.beta() + nrm.h1;
    return energy(nrm, velocity_sq, memory_sq) + 0.5 * stretch * stretch + params.k() * nrm.l2;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

double lyapunov(const ModalState& state, double memory_sq, const BeamParams& params) {
    return augmented_energy(norms(state), velocity_norm_sq(state.cdot), memory_sq, params) -
           2.0 * load_work(state, params);
}

double lyapunov(const ModalState& state, const HistoryState& history, const MemoryKernel& kernel,
                const BeamParams& params) {
    return lyapunov(state, memory_norm_sq(history, kernel), params);
}

PhiValue phi(const ModalState& state, double memory_sq, const BeamParams& params, double eps, double energy_bound) {
    const double k = params.k();
    if (!(eps >= 0.0 && eps < 2.0) || (k > 0.0 && !(eps < 2.0 * k))) {
        throw std::invalid_argument("phi: eps must satisfy 0 <= eps < 2 and eps < 2k");
    }
    PhiValue out;
    const double e_aug = augmented_energy(norms(state), velocity_norm_sq(state.cdot), memory_sq, params);
    out.phi = e_aug + eps * dot(state.cdot, state.c);
    // For k = 0 the eps ||u||^2 / 2 penalty is absorbed by ||u||_2^2 via Poincare.
    out.m0 = k > 0.0 ? std::min(1.0 - eps / 2.0, 1.0 - eps / (2.0 * k)) : 1.0 - eps / 2.0;
    out.m1 = 2.0 + (k + eps / 2.0) / kLambda1 + eps / 2.0;
    const double c_bar = std::abs(params.beta()) + energy_bound / kPi2;
    out.m2 = 0.5 * c_bar * c_bar;
    return out;
}

Monitors evaluate_monitors(const ModalState& state, double memory_sq, double j_eta, double dissipated,
                           const BeamParams& params, double phi_eps) {
    const SquaredNorms nrm = norms(state);
    const double vel = velocity_norm_sq(state.cdot);
    Monitors m;
    m.energy = energy(nrm, vel, memory_sq);
    m.augmented = augmented_energy(nrm, vel, memory_sq, params);
    m.lyapunov = m.augmented - 2.0 * load_work(state, params);
    m.phi = m.augmented + phi_eps * dot(state.cdot, state.c);
    m.norm_u = std::sqrt(nrm.l2);
    m.norm_u1 = std::sqrt(nrm.h1);
    m.norm_u2 = std::sqrt(nrm.h2);
    m.norm_ut = std::sqrt(vel);
    m.norm_eta_mu = std::sqrt(std::max(0.0, memory_sq));
    m.J_eta = j_eta;
    m.dissipated = dissipated;
    return m;
}

MomentHistory initial_moments(const InitialData& init, const MemoryKernel& kernel) {
    const std::size_t n = init.modes();
    if (init.moments) {
        if (init.moments->w.size() != n || init.moments->m.size() != n) {
            throw std::invalid_argument("initial moments must have one entry per mode");
        }
        for (double m : init.moments->m) {
            if (m < 0.0) throw std::invalid_argument("initial moments: m_n must be >= 0");
        }
        return *init.moments;
    }
    if (init.history && kernel.has_memory()) {
        if (init.history->eta.size() != n) throw std::invalid_argument("history table must have one row per mode");
        return moments_of(*init.history, kernel);
    }
    return MomentHistory::zero(n);
}

// ---------------------------------------------------------------------------
// Integrators

namespace {

struct ModalCoefficients {
    std::vector<double> lambda;   // n^4 pi^4
    std::vector<double> root;     // n^2 pi^2
    std::vector<double> load;
    double beta = 0.0;
    double k = 0.0;

    ModalCoefficients(const BeamParams& params, std::size_t modes) : lambda(modes), root(modes), load(modes) {
        for (std::size_t i = 0; i < modes; ++i) {
            root[i] = sqrt_eigenvalue(static_cast<int>(i + 1));
            lambda[i] = root[i] * root[i];
            load[i] = params.load(i);
        }
        beta = params.beta();
        k = params.k();
    }

    double stretch(const double* c) const {
        double s = 0.0;
        for (std::size_t i = 0; i < root.size(); ++i) s += root[i] * c[i] * c[i];
        return beta + s;
    }

    // c'' given displacement and memory moment.
    void acceleration(const double* c, const double* w, double* out) const {
        const double b = stretch(c);
        for (std::size_t i = 0; i < root.size(); ++i) {
            out[i] = load[i] - lambda[i] * (c[i] + w[i]) - (b * root[i] + k) * c[i];
        }
    }

    double weighted(const double* m) const {
        double s = 0.0;
        for (std::size_t i = 0; i < lambda.size(); ++i) s += lambda[i] * m[i];
        return s;
    }
};

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x) && std::abs(x) < 1e150; });
}

std::size_t step_count(const IntegratorConfig& cfg) {
    return static_cast<std::size_t>(std::ceil(cfg.t_final / cfg.dt - 1e-9));
}

class Recorder {
public:
    Recorder(const BeamParams& params, const IntegratorConfig& cfg, const SimulationOptions& options)
        : params_(params), cfg_(cfg), options_(options),
          eps_(options.phi_eps >= 0.0 ? options.phi_eps : default_phi_eps(params.k())) {}

    bool due(std::size_t step, std::size_t last) const {
        return step % static_cast<std::size_t>(cfg_.sample_every) == 0 || step == last;
    }

    // Returns true when the stop predicate fired.
    bool record(double t, const double* c, const double* cdot, const double* w, std::size_t n, double memory_sq,
                double j_eta, double dissipated) {
        TrajectorySample s;
        s.t = t;
        s.c.assign(c, c + n);
        s.cdot.assign(cdot, cdot + n);
        s.w.assign(w, w + n);
        s.mon = evaluate_monitors(ModalState{s.c, s.cdot}, memory_sq, j_eta, dissipated, params_, eps_);
        samples.push_back(std::move(s));
        return options_.stop && options_.stop(samples.back());
    }

    std::vector<TrajectorySample> samples;

private:
    const BeamParams& params_;
    const IntegratorConfig& cfg_;
    const SimulationOptions& options_;
    double eps_;
};

// RK4 on y = [c | c' | w | m | D] with D the accumulated dissipation.
Trajectory run_ode_reduction(const BeamParams& params, const MemoryKernel& kernel, const InitialData& init,
                             const IntegratorConfig& cfg, const SimulationOptions& options) {
    const std::size_t n = init.modes();
    const ModalCoefficients coef(params, n);
    const bool memory = kernel.has_memory();
    const double delta = kernel.delta();
    const double kappa = kernel.kappa();

    const MomentHistory mom0 = initial_moments(init, kernel);
    std::vector<double> y(4 * n + 1, 0.0);
    std::copy(init.c.begin(), init.c.end(), y.begin());
    std::copy(init.cdot.begin(), init.cdot.end(), y.begin() + n);
    std::copy(mom0.w.begin(), mom0.w.end(), y.begin() + 2 * n);
    std::copy(mom0.m.begin(), mom0.m.end(), y.begin() + 3 * n);

    auto rhs = [&](const std::vector<double>& in, std::vector<double>& out) {
        const double* c = in.data();
        const double* v = c + n;
        const double* w = v + n;
        const double* m = w + n;
        double* dc = out.data();
        double* dv = dc + n;
        double* dw = dv + n;
        double* dm = dw + n;
        std::copy(v, v + n, dc);
        coef.acceleration(c, w, dv);
        if (memory) {
            for (std::size_t i = 0; i < n; ++i) {
                dw[i] = -delta * w[i] + kappa * v[i];
                dm[i] = -delta * m[i] + 2.0 * v[i] * w[i];
            }
            out[4 * n] = delta * coef.weighted(m);
        } else {
            std::fill(dw, dw + 2 * n, 0.0);
            out[4 * n] = 0.0;
        }
    };

    Recorder rec(params, cfg, options);
    auto record = [&](double t) {
        const double memory_sq = memory ? coef.weighted(y.data() + 3 * n) : 0.0;
        return rec.record(t, y.data(), y.data() + n, y.data() + 2 * n, n, memory_sq, memory ? delta * memory_sq : 0.0,
                          y[4 * n]);
    };

    const std::size_t steps = step_count(cfg);
    const double dt = cfg.dt;
    std::vector<double> k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), tmp(y.size());
    bool stopped = record(0.0);
    double t = 0.0;
    for (std::size_t step = 1; step <= steps && !stopped; ++step) {
        rhs(y, k1);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + dt * k3[i];
        rhs(tmp, k4);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        t = static_cast<double>(step) * dt;
        if (!all_finite(y)) throw NumericalBlowup(t);
        if (rec.due(step, steps)) stopped = record(t);
    }

    Trajectory out;
    out.samples = std::move(rec.samples);
    out.stopped_early = stopped;
    out.final_state.t = out.samples.back().t;
    out.final_state.c.assign(y.begin(), y.begin() + n);
    out.final_state.cdot.assign(y.begin() + n, y.begin() + 2 * n);
    out.final_state.history = MomentHistory{std::vector<double>(y.begin() + 2 * n, y.begin() + 3 * n),
                                            std::vector<double>(y.begin() + 3 * n, y.begin() + 4 * n)};
    return out;
}

// Past displacements and quadrature weights for the sampled history.
class HistoryQuadrature {
public:
    HistoryQuadrature(const MemoryKernel& kernel, const InitialData& init, const IntegratorConfig& cfg)
        : n_(init.modes()), dt_(cfg.dt), c0_(init.c) {
        stride_ = static_cast<std::size_t>(std::llround(cfg.history_step() / cfg.dt));
        const double ds = cfg.history_step();
        if (init.history) {
            if (init.history->eta.size() != n_) throw std::invalid_argument("history table must have one row per mode");
            eta0_ = *init.history;
        }
        if (!kernel.has_memory()) return;

        const double target = cfg.s_max_tol * kernel.kappa();
        std::size_t points = 1;
        while (kernel.tail_mass(ds * static_cast<double>(points)) > target) {
            points *= 2;
            if (points > (std::size_t{1} << 26)) throw std::invalid_argument("kernel tail too heavy for s_max_tol");
        }
        std::size_t lo = points / 2, hi = points;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (kernel.tail_mass(ds * static_cast<double>(mid)) > target ? lo : hi) = mid;
        }
        grid_ = hi;  // s_max = grid_ * ds
        weight_.resize(grid_ + 1);
        dweight_.resize(grid_ + 1);
        for (std::size_t j = 0; j <= grid_; ++j) {
            const double s = ds * static_cast<double>(j);
            const double trap = (j == 0 || j == grid_) ? 0.5 * ds : ds;
            weight_[j] = trap * kernel.value(s);
            dweight_[j] = -trap * kernel.derivative(s);
        }
        const double s_max = ds * static_cast<double>(grid_);
        tail_ = kernel.tail_mass(s_max);
        dtail_ = kernel.value(s_max);
        span_ = grid_ * stride_ + 1;
        ring_.assign(n_ * span_, 0.0);
        eta_.resize(grid_ + 1);
        active_ = true;
    }

    bool active() const noexcept { return active_; }
    double s_max() const noexcept { return static_cast<double>(grid_ * stride_) * dt_; }

    void push(std::size_t step, const double* c) {
        if (!active_) return;
        const std::size_t pos = step % span_;
        for (std::size_t i = 0; i < n_; ++i) ring_[i * span_ + pos] = c[i];
    }

    // eta_n(t_step, s_j) for j = 0..grid_, into eta_.
    void profile(std::size_t step, std::size_t i) {
        const double now = ring_[i * span_ + step % span_];
        const double* row = ring_.data() + i * span_;
        for (std::size_t j = 0; j <= grid_; ++j) {
            const std::size_t back = j * stride_;
            double past;
            if (back <= step) {
                past = row[(step - back) % span_];
            } else {
                past = c0_[i] - initial_eta(i, static_cast<double>(back - step) * dt_);
            }
            eta_[j] = now - past;
        }
    }

    // Memory moment w, second moment m and J-density per mode at `step`.
    void moments(std::size_t step, double* w, double* m, double* j_density) {
        for (std::size_t i = 0; i < n_; ++i) {
            if (!active_) {
                w[i] = m[i] = j_density[i] = 0.0;
                continue;
            }
            profile(step, i);
            double sw = 0.0, sm = 0.0, sj = 0.0;
            for (std::size_t j = 0; j <= grid_; ++j) {
                const double e = eta_[j];
                sw += weight_[j] * e;
                sm += weight_[j] * e * e;
                sj += dweight_[j] * e * e;
            }
            const double last = eta_[grid_];
            w[i] = sw + tail_ * last;
            m[i] = sm + tail_ * last * last;
            j_density[i] = sj + dtail_ * last * last;
        }
    }

    SampledHistory snapshot(std::size_t step) {
        SampledHistory h;
        h.ds = static_cast<double>(stride_) * dt_;
        if (!active_) {
            h.eta.assign(n_, std::vector<double>(1, 0.0));
            return h;
        }
        for (std::size_t i = 0; i < n_; ++i) {
            profile(step, i);
            h.eta.push_back(eta_);
        }
        return h;
    }

private:
    double initial_eta(std::size_t i, double sigma) const {
        if (!eta0_) return 0.0;
        const auto& row = eta0_->eta[i];
        const double x = sigma / eta0_->ds;
        if (x >= static_cast<double>(row.size() - 1)) return row.back();
        const auto j = static_cast<std::size_t>(x);
        const double frac = x - static_cast<double>(j);
        return row[j] + frac * (row[j + 1] - row[j]);
    }

    std::size_t n_;
    double dt_;
    std::vector<double> c0_;
    std::optional<SampledHistory> eta0_;
    std::size_t stride_ = 1;
    std::size_t grid_ = 0;
    std::size_t span_ = 1;
    std::vector<double> weight_, dweight_;
    double tail_ = 0.0, dtail_ = 0.0;
    std::vector<double> ring_;
    std::vector<double> eta_;
    bool active_ = false;
};

Trajectory run_history_quadrature(const BeamParams& params, const MemoryKernel& kernel, const InitialData& init,
                                  const IntegratorConfig& cfg, const SimulationOptions& options) {
    if (init.moments && !init.history) {
        throw std::invalid_argument("history_quadrature backend needs a sampled history, not moments");
    }
    const std::size_t n = init.modes();
    const ModalCoefficients coef(params, n);
    HistoryQuadrature hist(kernel, init, cfg);

    std::vector<double> c = init.c, v = init.cdot, a(n), w(n), m(n), jd(n);
    std::size_t step = 0;
    hist.push(step, c.data());
    hist.moments(step, w.data(), m.data(), jd.data());
    coef.acceleration(c.data(), w.data(), a.data());
    double j_prev = coef.weighted(jd.data());
    double dissipated = 0.0;

    Recorder rec(params, cfg, options);
    auto record = [&](double t) {
        return rec.record(t, c.data(), v.data(), w.data(), n, coef.weighted(m.data()), j_prev, dissipated);
    };

    const std::size_t steps = step_count(cfg);
    const double dt = cfg.dt;
    bool stopped = record(0.0);
    for (step = 1; step <= steps && !stopped; ++step) {
        for (std::size_t i = 0; i < n; ++i) {
            v[i] += 0.5 * dt * a[i];
            c[i] += dt * v[i];
        }
        hist.push(step, c.data());
        hist.moments(step, w.data(), m.data(), jd.data());
        coef.acceleration(c.data(), w.data(), a.data());
        for (std::size_t i = 0; i < n; ++i) v[i] += 0.5 * dt * a[i];
        const double j_now = coef.weighted(jd.data());
        dissipated += 0.5 * dt * (j_prev + j_now);
        j_prev = j_now;
        const double t = static_cast<double>(step) * dt;
        if (!all_finite(c) || !all_finite(v)) throw NumericalBlowup(t);
        if (rec.due(step, steps)) stopped = record(t);
    }
    --step;

    Trajectory out;
    out.samples = std::move(rec.samples);
    out.stopped_early = stopped;
    out.final_state.t = out.samples.back().t;
    out.final_state.c = c;
    out.final_state.cdot = v;
    out.final_state.history = hist.snapshot(step);
    return out;
}

}  // namespace

Trajectory simulate(const BeamParams& params, const MemoryKernel& kernel, const InitialData& init,
                    const IntegratorConfig& cfg, const SimulationOptions& options) {
    const std::size_t n = init.modes();
    if (n == 0) throw std::invalid_argument("simulate: at least one mode is required");
    if (init.cdot.size() != n) throw std::invalid_argument("simulate: c and cdot must have the same length");
    if (params.f_modes().size() > n) throw std::invalid_argument("simulate: load has more modes than the truncation");
    const auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(init.c) || !finite(init.cdot)) throw std::invalid_argument("simulate: initial data must be finite");
    cfg.validate(n, kernel, params.k());
    const double eps = options.phi_eps >= 0.0 ? options.phi_eps : default_phi_eps(params.k());
    if (!(eps < 2.0) || (params.k() > 0.0 && !(eps < 2.0 * params.k()))) {
        throw std::invalid_argument("simulate: phi eps must satisfy 0 <= eps < 2 and eps < 2k");
    }
    if (cfg.backend == Backend::ode_reduction) return run_ode_reduction(params, kernel, init, cfg, options);
    return run_history_quadrature(params, kernel, init, cfg, options);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,E_cal,E_aug,L,Phi,norm_u,norm_u1,norm_u2,norm_ut,norm_eta_mu,J_eta\n";
    for (const auto& s : traj.samples) {
        const Monitors& m = s.mon;
        os << format_real(s.t) << ',' << format_real(m.energy) << ',' << format_real(m.augmented) << ','
           << format_real(m.lyapunov) << ',' << format_real(m.phi) << ',' << format_real(m.norm_u) << ','
           << format_real(m.norm_u1) << ',' << format_real(m.norm_u2) << ',' << format_real(m.norm_ut) << ','
           << format_real(m.norm_eta_mu) << ',' << format_real(m.J_eta) << '\n';
    }
}

}  // namespace beam
