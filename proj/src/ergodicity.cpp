#include "bohm/ergodicity.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "bohm/errors.hpp"
#include "bohm/quadrature.hpp"

namespace bohm {
namespace {

constexpr std::size_t kMaxN = 65;

void require(bool ok, const std::string& what) {
    if (!ok) throw ContractViolation(what);
}

struct Basis {
    std::array<double, kMaxN> fx{};
    std::array<double, kMaxN> fy{};
};

Basis basis(const OscillatorSuperposition2D& s, double x, double y) {
    const auto& c = s.constants();
    const double l1 = std::sqrt(c.hbar / (c.mass * s.omega1()));
    const double l2 = std::sqrt(c.hbar / (c.mass * s.omega2()));
    Basis b;
    std::array<double, kMaxN> dx{};
    std::array<double, kMaxN> dy{};
    const auto n1 = static_cast<std::size_t>(s.max_n1()) + 1;
    const auto n2 = static_cast<std::size_t>(s.max_n2()) + 1;
    hermite_functions(s.max_n1(), x, l1, std::span(b.fx.data(), n1), std::span(dx.data(), n1));
    hermite_functions(s.max_n2(), y, l2, std::span(b.fy.data(), n2), std::span(dy.data(), n2));
    return b;
}

/// Real part of c_j conj(c_k) times the time average of exp(-i w t) over [0, T],
/// for every pair j < k, in row-major pair order.
std::vector<double> cross_weights(const OscillatorSuperposition2D& s, double T) {
    require(std::isfinite(T) && T > 0.0, "horizon T must be positive");
    const auto& terms = s.terms();
    const double hbar = s.constants().hbar;
    std::vector<double> w;
    for (std::size_t j = 0; j < terms.size(); ++j) {
        for (std::size_t k = j + 1; k < terms.size(); ++k) {
            const double ej = s.energy(terms[j]);
            const double ek = s.energy(terms[k]);
            if (std::abs(ej - ek) <= 1e-12 * std::max(std::abs(ej), std::abs(ek))) {
                throw DegenerateFrequencies("terms (" + std::to_string(terms[j].n1) + "," +
                                            std::to_string(terms[j].n2) + ") and (" + std::to_string(terms[k].n1) +
                                            "," + std::to_string(terms[k].n2) + ") share an energy");
            }
            const double theta = (ej - ek) / hbar * T;
            // (1 - e^{-i theta}) / (i theta)
            const double half = std::sin(0.5 * theta);
            const complex avg(std::sin(theta) / theta, -2.0 * half * half / theta);
            w.push_back(2.0 * (terms[j].coeff * std::conj(terms[k].coeff) * avg).real());
        }
    }
    return w;
}

double cross_part(const OscillatorSuperposition2D& s, const std::vector<double>& w, double x, double y) {
    const Basis b = basis(s, x, y);
    const auto& terms = s.terms();
    double total = 0.0;
    std::size_t p = 0;
    for (std::size_t j = 0; j < terms.size(); ++j) {
        const double pj = b.fx[static_cast<std::size_t>(terms[j].n1)] * b.fy[static_cast<std::size_t>(terms[j].n2)];
        for (std::size_t k = j + 1; k < terms.size(); ++k, ++p) {
            const double pk =
                b.fx[static_cast<std::size_t>(terms[k].n1)] * b.fy[static_cast<std::size_t>(terms[k].n2)];
            total += w[p] * pj * pk;
        }
    }
    return total;
}

double diagonal_part(const OscillatorSuperposition2D& s, double x, double y) {
    const Basis b = basis(s, x, y);
    double total = 0.0;
    for (const auto& t : s.terms()) {
        const double p = b.fx[static_cast<std::size_t>(t.n1)] * b.fy[static_cast<std::size_t>(t.n2)];
        total += std::norm(t.coeff) * p * p;
    }
    return total;
}

std::size_t cell_of(double g, std::size_t n) {
    const auto c = static_cast<std::ptrdiff_t>(std::floor(g));
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(c, 0, static_cast<std::ptrdiff_t>(n) - 1));
}

}  // namespace

double time_averaged_density(const OscillatorSuperposition2D& s, std::span<const double> q, double T) {
    require(q.size() == 2, "oscillator configurations have two coordinates");
    const auto w = cross_weights(s, T);
    return diagonal_part(s, q[0], q[1]) + cross_part(s, w, q[0], q[1]);
}

double time_averaged_density(const OscillatorSuperposition2D& s, const Configuration& q, double T) {
    return time_averaged_density(s, q.coords(), T);
}

double diagonal_density(const OscillatorSuperposition2D& s, std::span<const double> q) {
    require(q.size() == 2, "oscillator configurations have two coordinates");
    return diagonal_part(s, q[0], q[1]);
}

Rect default_bounds(const OscillatorSuperposition2D& s) {
    double e_max = 0.0;
    for (const auto& t : s.terms()) e_max = std::max(e_max, s.energy(t));
    const double w = std::min(s.omega1(), s.omega2());
    const double L = 1.2 * std::sqrt(2.0 * e_max / (s.constants().mass * w * w));
    return {-L, L, -L, L};
}

double cross_term_residual(const OscillatorSuperposition2D& s, double T, const Rect& bounds) {
    const auto w = cross_weights(s, T);
    const double sq = integrate_tensor(
        [&](double x, double y) {
            const double c = cross_part(s, w, x, y);
            return c * c;
        },
        bounds.x_lo, bounds.x_hi, bounds.y_lo, bounds.y_hi, 32, 8);
    return std::sqrt(std::max(sq, 0.0));
}

double cross_term_residual(const OscillatorSuperposition2D& s, double T) {
    return cross_term_residual(s, T, default_bounds(s));
}

CoverageGrid::CoverageGrid(const Rect& bounds, std::size_t resolution, std::vector<char> accessible)
    : bounds_(bounds), n_(resolution), accessible_(std::move(accessible)) {
    require(resolution >= 8, "coverage grid needs at least 8 cells per axis");
    require(bounds.x_lo < bounds.x_hi && bounds.y_lo < bounds.y_hi, "coverage bounds must have positive extent");
    require(accessible_.size() == n_ * n_, "accessible mask size must be resolution^2");
    hx_ = (bounds.x_hi - bounds.x_lo) / static_cast<double>(n_);
    hy_ = (bounds.y_hi - bounds.y_lo) / static_cast<double>(n_);
    visited_.assign(n_ * n_, 0);
}

CoverageGrid CoverageGrid::for_superposition(const OscillatorSuperposition2D& s, double T, std::size_t resolution,
                                             double relative_threshold) {
    require(relative_threshold >= 0.0, "access threshold must be nonnegative");
    const Rect b = default_bounds(s);
    require(resolution >= 8, "coverage grid needs at least 8 cells per axis");
    const auto w = cross_weights(s, T);
    const double hx = (b.x_hi - b.x_lo) / static_cast<double>(resolution);
    const double hy = (b.y_hi - b.y_lo) / static_cast<double>(resolution);
    std::vector<double> rho(resolution * resolution);
    for (std::size_t j = 0; j < resolution; ++j) {
        for (std::size_t i = 0; i < resolution; ++i) {
            const double x = b.x_lo + (static_cast<double>(i) + 0.5) * hx;
            const double y = b.y_lo + (static_cast<double>(j) + 0.5) * hy;
            rho[j * resolution + i] = diagonal_part(s, x, y) + cross_part(s, w, x, y);
        }
    }
    const double peak = *std::max_element(rho.begin(), rho.end());
    std::vector<char> acc(rho.size());
    for (std::size_t c = 0; c < rho.size(); ++c) acc[c] = rho[c] > relative_threshold * peak ? 1 : 0;
    return {b, resolution, std::move(acc)};
}

std::size_t CoverageGrid::accessible_count() const noexcept {
    return static_cast<std::size_t>(std::count(accessible_.begin(), accessible_.end(), 1));
}

std::size_t CoverageGrid::visited_count() const noexcept {
    return static_cast<std::size_t>(std::count(visited_.begin(), visited_.end(), 1));
}

double CoverageGrid::coverage_fraction() const noexcept {
    std::size_t acc = 0;
    std::size_t hit = 0;
    for (std::size_t c = 0; c < visited_.size(); ++c) {
        if (accessible_[c]) {
            ++acc;
            if (visited_[c]) ++hit;
        }
    }
    return acc == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(acc);
}

Rect CoverageGrid::cell_rect(std::size_t cell) const {
    const double i = static_cast<double>(cell % n_);
    const double j = static_cast<double>(cell / n_);
    return {bounds_.x_lo + i * hx_, bounds_.x_lo + (i + 1.0) * hx_, bounds_.y_lo + j * hy_,
            bounds_.y_lo + (j + 1.0) * hy_};
}

void CoverageGrid::mark_point(double gx, double gy) { visited_[index(cell_of(gx, n_), cell_of(gy, n_))] = 1; }

void CoverageGrid::mark_segment(double ax, double ay, double bx, double by) {
    // Liang-Barsky clip to [0, n]^2 in grid units.
    const double n = static_cast<double>(n_);
    const double dx = bx - ax;
    const double dy = by - ay;
    double t0 = 0.0;
    double t1 = 1.0;
    const std::array<double, 4> p{-dx, dx, -dy, dy};
    const std::array<double, 4> q{ax, n - ax, ay, n - ay};
    for (std::size_t k = 0; k < 4; ++k) {
        if (p[k] == 0.0) {
            if (q[k] < 0.0) return;
            continue;
        }
        const double r = q[k] / p[k];
        if (p[k] < 0.0) {
            t0 = std::max(t0, r);
        } else {
            t1 = std::min(t1, r);
        }
        if (t0 > t1) return;
    }
    const double x0 = ax + t0 * dx;
    const double y0 = ay + t0 * dy;
    const double x1 = ax + t1 * dx;
    const double y1 = ay + t1 * dy;

    // Amanatides-Woo traversal of the cells crossed by the clipped segment.
    auto i = static_cast<std::ptrdiff_t>(cell_of(x0, n_));
    auto j = static_cast<std::ptrdiff_t>(cell_of(y0, n_));
    const auto i_end = static_cast<std::ptrdiff_t>(cell_of(x1, n_));
    const auto j_end = static_cast<std::ptrdiff_t>(cell_of(y1, n_));
    const double sx = x1 - x0;
    const double sy = y1 - y0;
    const std::ptrdiff_t step_i = sx > 0 ? 1 : -1;
    const std::ptrdiff_t step_j = sy > 0 ? 1 : -1;
    const double inf = std::numeric_limits<double>::infinity();
    const double delta_x = sx != 0.0 ? std::abs(1.0 / sx) : inf;
    const double delta_y = sy != 0.0 ? std::abs(1.0 / sy) : inf;
    double next_x = sx != 0.0 ? ((sx > 0 ? static_cast<double>(i + 1) : static_cast<double>(i)) - x0) / sx : inf;
    double next_y = sy != 0.0 ? ((sy > 0 ? static_cast<double>(j + 1) : static_cast<double>(j)) - y0) / sy : inf;
    const auto max_cells = static_cast<std::ptrdiff_t>(2 * n_ + 2);
    visited_[index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))] = 1;
    for (std::ptrdiff_t guard = 0; (i != i_end || j != j_end) && guard < max_cells; ++guard) {
        if (next_x < next_y) {
            i += step_i;
            next_x += delta_x;
        } else {
            j += step_j;
            next_y += delta_y;
        }
        if (i < 0 || j < 0 || i >= static_cast<std::ptrdiff_t>(n_) || j >= static_cast<std::ptrdiff_t>(n_)) break;
        visited_[index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))] = 1;
    }
}

std::size_t CoverageGrid::mark_samples(const Trajectory& trajectory, std::size_t begin, std::size_t end) {
    require(trajectory.empty() || trajectory.configs.front().size() == 2, "coverage needs 2-coordinate trajectories");
    end = std::min(end, trajectory.size());
    std::size_t outside = 0;
    const auto gx = [&](std::size_t k) { return (trajectory.configs[k][0] - bounds_.x_lo) / hx_; };
    const auto gy = [&](std::size_t k) { return (trajectory.configs[k][1] - bounds_.y_lo) / hy_; };
    const double n = static_cast<double>(n_);
    for (std::size_t k = begin; k < end; ++k) {
        const double x = gx(k);
        const double y = gy(k);
        if (x >= 0.0 && x <= n && y >= 0.0 && y <= n) {
            mark_point(x, y);
        } else {
            ++outside;
        }
        if (k > 0) mark_segment(gx(k - 1), gy(k - 1), x, y);
    }
    return outside;
}

std::size_t CoverageGrid::mark(const Trajectory& trajectory, double t_stop) {
    const auto end = static_cast<std::size_t>(
        std::upper_bound(trajectory.times.begin(), trajectory.times.end(), t_stop) - trajectory.times.begin());
    return mark_samples(trajectory, 0, end);
}

void CoverageGrid::merge(const CoverageGrid& other) {
    require(other.n_ == n_ && other.bounds_.x_lo == bounds_.x_lo && other.bounds_.x_hi == bounds_.x_hi &&
                other.bounds_.y_lo == bounds_.y_lo && other.bounds_.y_hi == bounds_.y_hi,
            "merged coverage grids must share geometry");
    for (std::size_t c = 0; c < visited_.size(); ++c) visited_[c] = static_cast<char>(visited_[c] | other.visited_[c]);
}

void CoverageGrid::clear_visits() { std::fill(visited_.begin(), visited_.end(), 0); }

CoverageResult coverage_fraction(const Trajectory& trajectory, const CoverageGrid& grid) {
    CoverageGrid g = grid;
    g.clear_visits();
    CoverageResult r;
    r.outside_samples = g.mark(trajectory);
    r.fraction = g.coverage_fraction();
    r.accessible = g.accessible_count();
    for (std::size_t c = 0; c < g.resolution() * g.resolution(); ++c) {
        if (g.accessible(c) && g.visited(c)) ++r.visited;
    }
    return r;
}

std::vector<double> coverage_curve(std::span<const Trajectory> trajectories, const CoverageGrid& grid,
                                   std::span<const double> checkpoints) {
    require(std::is_sorted(checkpoints.begin(), checkpoints.end()), "checkpoints must be increasing");
    CoverageGrid g = grid;
    g.clear_visits();
    std::vector<std::size_t> cursor(trajectories.size(), 0);
    std::vector<double> out;
    out.reserve(checkpoints.size());
    for (const double c : checkpoints) {
        for (std::size_t k = 0; k < trajectories.size(); ++k) {
            const auto& tr = trajectories[k];
            const auto end = static_cast<std::size_t>(std::upper_bound(tr.times.begin(), tr.times.end(), c) -
                                                      tr.times.begin());
            if (end > cursor[k]) {
                g.mark_samples(tr, cursor[k], end);
                cursor[k] = end;
            }
        }
        out.push_back(g.coverage_fraction());
    }
    return out;
}

double recurrence_metric(const Trajectory& trajectory, double period) {
    require(period > 0.0, "period must be positive");
    require(trajectory.size() >= 2, "recurrence needs at least two samples");
    const auto& ts = trajectory.times;
    require(ts.back() - ts.front() >= 2.0 * period, "trajectory must span at least two periods");
    const std::size_t dim = trajectory.configs.front().size();
    double worst = 0.0;
    std::size_t hi = 1;
    for (std::size_t i = 0; i < ts.size() && ts[i] + period <= ts.back(); ++i) {
        const double target = ts[i] + period;
        while (hi + 1 < ts.size() && ts[hi] < target) ++hi;
        const std::size_t lo = hi - 1;
        const double f = (target - ts[lo]) / (ts[hi] - ts[lo]);
        double d2 = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double a = trajectory.configs[lo][c];
            const double b = trajectory.configs[hi][c];
            const double diff = a + f * (b - a) - trajectory.configs[i][c];
            d2 += diff * diff;
        }
        worst = std::max(worst, std::sqrt(d2));
    }
    return worst;
}

double trajectory_time_average(std::span<const Trajectory> trajectories, const ConfigFunction& f) {
    require(!trajectories.empty(), "need at least one trajectory");
    double total = 0.0;
    for (const auto& tr : trajectories) {
        require(tr.size() >= 2, "time average needs at least two samples");
        double acc = 0.0;
        double prev = f(tr.configs[0].coords());
        for (std::size_t k = 1; k < tr.size(); ++k) {
            const double cur = f(tr.configs[k].coords());
            acc += 0.5 * (prev + cur) * (tr.times[k] - tr.times[k - 1]);
            prev = cur;
        }
        total += acc / (tr.times.back() - tr.times.front());
    }
    return total / static_cast<double>(trajectories.size());
}

double invariant_average(const OscillatorSuperposition2D& s, const ConfigFunction& f, double T, const Rect& bounds,
                         std::size_t panels) {
    const auto w = cross_weights(s, T);
    return integrate_tensor(
        [&](double x, double y) {
            const double q[2] = {x, y};
            return f(std::span<const double>(q, 2)) * (diagonal_part(s, x, y) + cross_part(s, w, x, y));
        },
        bounds.x_lo, bounds.x_hi, bounds.y_lo, bounds.y_hi, panels, 8);
}

ErgodicReport ergodic_report(const OscillatorSuperposition2D& s, std::span<const Trajectory> trajectories,
                             const ConfigFunction& f, const CoverageGrid& grid) {
    require(!trajectories.empty() && trajectories.front().size() >= 2, "need a recorded trajectory");
    ErgodicReport r;
    r.horizon = trajectories.front().times.back() - trajectories.front().times.front();
    r.time_avg = trajectory_time_average(trajectories, f);
    // Integrate over a box wide enough for the whole density, not just the grid.
    const Box box = support_box(s, 0.0);
    r.space_avg = invariant_average(s, f, r.horizon, {box.lo[0], box.hi[0], box.lo[1], box.hi[1]});
    r.discrepancy = std::abs(r.time_avg - r.space_avg);
    CoverageGrid g = grid;
    g.clear_visits();
    for (const auto& tr : trajectories) g.mark(tr);
    r.coverage_fraction = g.coverage_fraction();
    r.cross_term_residual = cross_term_residual(s, r.horizon, grid.bounds());
    return r;
}

}  // namespace bohm
