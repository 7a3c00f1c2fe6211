#include "beam/stability.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "beam/format.hpp"
#include "beam/parallel.hpp"

namespace beam {

double beta_bar(double k) {
    if (k < 0.0) throw std::invalid_argument("beta_bar: k must be >= 0");
    return k <= kLambda1 ? beta_c(k) : 2.0 * std::sqrt(k);
}

double nu(double beta, double k) {
    if (k < 0.0) throw std::invalid_argument("nu: k must be >= 0");
    if (beta >= 0.0) return 1.0;
    if (2.0 * k / -beta <= kPi2) return 1.0 + beta / kPi2 + k / kLambda1;
    return 1.0 - beta * beta / (4.0 * k);
}

const char* to_string(Region r) {
    switch (r) {
        case Region::exponential: return "exponential";
        case Region::gap: return "gap";
        case Region::buckled: return "buckled";
        case Region::boundary: return "boundary";
    }
    return "?";
}

StabilityVerdict classify(double beta, double k) {
    StabilityVerdict v;
    v.beta = beta;
    v.k = k;
    v.beta_c = beta_c(k);
    v.beta_bar = beta_bar(k);
    v.nu = nu(beta, k);
    const double scale = std::max({1.0, std::abs(beta), v.beta_bar});
    if (std::abs(beta + v.beta_bar) <= 1e-12 * scale) {
        v.region = Region::boundary;
    } else if (beta > -v.beta_bar) {
        v.region = Region::exponential;
    } else if (beta > -v.beta_c) {
        v.region = Region::gap;
    } else {
        v.region = Region::buckled;
    }
    return v;
}

std::vector<StabilityVerdict> stability_map(double k_min, double k_max, double beta_min, double beta_max, int steps) {
    if (steps < 1) throw std::invalid_argument("stability_map: steps must be positive");
    if (k_min < 0.0 || k_max < k_min) throw std::invalid_argument("stability_map: need 0 <= k_min <= k_max");
    if (beta_max < beta_min) throw std::invalid_argument("stability_map: need beta_min <= beta_max");
    const auto axis = [steps](double lo, double hi, int i) {
        if (steps == 1) return lo;
        return i == steps - 1 ? hi : lo + (hi - lo) * i / (steps - 1);
    };
    const auto cells = static_cast<std::size_t>(steps) * static_cast<std::size_t>(steps);
    std::vector<StabilityVerdict> grid(cells);
    parallel_for(static_cast<std::size_t>(steps), [&](std::size_t row) {
        const double k = axis(k_min, k_max, static_cast<int>(row));
        for (int col = 0; col < steps; ++col) {
            grid[row * static_cast<std::size_t>(steps) + static_cast<std::size_t>(col)] =
                classify(axis(beta_min, beta_max, col), k);
        }
    });
    return grid;
}

void write_stability_csv(std::ostream& os, const std::vector<StabilityVerdict>& grid) {
    os << "k,beta,beta_c,beta_bar,nu,region\n";
    for (const auto& v : grid) {
        os << format_real(v.k) << ',' << format_real(v.beta) << ',' << format_real(v.beta_c) << ','
           << format_real(v.beta_bar) << ',' << format_real(v.nu) << ',' << to_string(v.region) << '\n';
    }
}

double energy_bound(const InitialData& init, const BeamParams& params, const MemoryKernel& kernel) {
    const MomentHistory mom = initial_moments(init, kernel);
    const double l0 = lyapunov(init.state(), memory_norm_sq(mom, kernel), params);
    const double f_sq = params.load_norm_sq();
    if (f_sq == 0.0) return l0;
    return 2.0 * l0 + 4.0 * f_sq / kLambda1;
}

double absorbing_radius(const BeamParams& params, const StationarySet& stationary) {
    double sup = -std::numeric_limits<double>::infinity();
    for (const auto& eq : stationary.equilibria) sup = std::max(sup, static_lyapunov(eq.modal, params));
    // On a family beta + ||u||_1^2 = -mu and ||u||_2^2 + k||u||^2 = mu * level.
    for (const auto& fam : stationary.families) sup = std::max(sup, fam.mu * fam.level + 0.5 * fam.mu * fam.mu);
    if (!std::isfinite(sup)) throw std::invalid_argument("absorbing_radius: empty stationary set");
    const double big_k = 1.0 + sup;
    return 1.0 + std::sqrt(2.0 * big_k + 4.0 * params.load_norm_sq() / kLambda1);
}

namespace {

struct Window {
    std::size_t first = 0;
    std::size_t last = 0;  // inclusive
    double t0 = 0.0;
    double t1 = 0.0;
};

Window select_window(std::span<const double> t, std::span<const double> e, double a, double b) {
    if (t.size() != e.size()) throw std::invalid_argument("decay fit: time and energy lengths differ");
    if (t.size() < 2) throw std::invalid_argument("decay fit: need at least two samples");
    if (!(a >= 0.0 && a < b && b <= 1.0)) throw std::invalid_argument("decay fit: window needs 0 <= a < b <= 1");
    const double span = t.back() - t.front();
    Window w;
    w.t0 = t.front() + a * span;
    w.t1 = t.front() + b * span;
    const double eps = 1e-12 * std::max(1.0, std::abs(span));
    w.first = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), w.t0 - eps) - t.begin());
    w.last = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), w.t1 + eps) - t.begin());
    if (w.last < w.first + 2) throw std::invalid_argument("decay fit: fewer than two samples in the window");
    --w.last;
    return w;
}

}  // namespace

DecayFit estimate_decay_rate(std::span<const double> t, std::span<const double> energy, double a, double b) {
    const Window win = select_window(t, energy, a, b);
    DecayFit fit;
    fit.t0 = win.t0;
    fit.t1 = win.t1;
    for (std::size_t i = win.first; i <= win.last; ++i) {
        if (!(energy[i] > 0.0)) {
            fit.rate = std::numeric_limits<double>::infinity();
            fit.residual = 0.0;
            fit.diagnostic = "energy vanishes at t = " + format_real(t[i]) + "; decay rate unbounded";
            return fit;
        }
    }
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    const auto count = static_cast<double>(win.last - win.first + 1);
    for (std::size_t i = win.first; i <= win.last; ++i) {
        const double y = std::log(energy[i]);
        st += t[i];
        sy += y;
        stt += t[i] * t[i];
        sty += t[i] * y;
    }
    const double tm = st / count, ym = sy / count;
    const double var = stt / count - tm * tm;
    const double slope = (sty / count - tm * ym) / var;
    double ss = 0.0;
    for (std::size_t i = win.first; i <= win.last; ++i) {
        const double r = std::log(energy[i]) - (ym + slope * (t[i] - tm));
        ss += r * r;
    }
    fit.rate = -slope;
    fit.residual = std::sqrt(ss / count);
    return fit;
}

DecayFit estimate_decay_rate(const Trajectory& traj, double a, double b) {
    std::vector<double> t, e;
    t.reserve(traj.samples.size());
    e.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
        t.push_back(s.t);
        e.push_back(s.mon.energy);
    }
    return estimate_decay_rate(t, e, a, b);
}

double log_energy_curvature(std::span<const double> t, std::span<const double> energy, double a, double b) {
    const Window win = select_window(t, energy, a, b);
    // Normal equations of y = c0 + c1 x + c2 x^2 with x centred on the window.
    const double mid = 0.5 * (t[win.first] + t[win.last]);
    std::array<double, 5> sx{};
    std::array<double, 3> sxy{};
    for (std::size_t i = win.first; i <= win.last; ++i) {
        if (!(energy[i] > 0.0)) throw std::invalid_argument("log_energy_curvature: energy must be positive");
        const double x = t[i] - mid;
        const double y = std::log(energy[i]);
        double p = 1.0;
        for (std::size_t d = 0; d < 5; ++d) {
            sx[d] += p;
            if (d < 3) sxy[d] += p * y;
            p *= x;
        }
    }
    std::array<std::array<double, 4>, 3> m{{{sx[0], sx[1], sx[2], sxy[0]},
                                             {sx[1], sx[2], sx[3], sxy[1]},
                                             {sx[2], sx[3], sx[4], sxy[2]}}};
    for (std::size_t col = 0; col < 3; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < 3; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        }
        std::swap(m[col], m[piv]);
        for (std::size_t r = col + 1; r < 3; ++r) {
            const double f = m[r][col] / m[col][col];
            for (std::size_t c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
        }
    }
    std::array<double, 3> coef{};
    for (int r = 2; r >= 0; --r) {
        double s = m[r][3];
        for (int c = r + 1; c < 3; ++c) s -= m[r][c] * coef[c];
        coef[r] = s / m[r][r];
    }
    return coef[2];
}

}  // namespace beam
