#include "bohm/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>

#include "bohm/errors.hpp"
#include "bohm/parallel.hpp"

namespace bohm {
namespace {

// Dormand-Prince 5(4) tableau (Hairer, Norsett, Wanner; DOPRI5).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension of order 4.
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr std::size_t kMaxDim = 4;
using Vec = std::array<double, kMaxDim>;

enum class StageFailure { none, node, speed };

}  // namespace

void IntegratorConfig::validate() const {
    const auto fail = [](const char* what) { throw ContractViolation(what); };
    if (!(std::isfinite(t0) && std::isfinite(t_end) && t_end > t0)) fail("integrator needs t_end > t0");
    if (!(rel_tol > 0.0 && abs_tol > 0.0)) fail("integrator tolerances must be positive");
    if (!(output_stride > 0.0)) fail("output_stride must be positive");
    if (!(v_cap > 0.0)) fail("v_cap must be positive");
    if (!(node_eps >= 0.0)) fail("node_eps must be non-negative");
    if (!(dt_init >= 0.0)) fail("dt_init must be non-negative");
}

std::vector<double> Trajectory::coordinate(std::size_t i) const {
    std::vector<double> out;
    out.reserve(configs.size());
    for (const auto& c : configs) out.push_back(c[i]);
    return out;
}

VelocityField guidance_field(const WaveModel& model, double node_eps) {
    return [&model, node_eps](double t, std::span<const double> q, std::span<double> v) {
        velocity(model, q, t, v, node_eps);
    };
}

std::vector<double> output_grid(const IntegratorConfig& cfg) {
    cfg.validate();
    const double span = cfg.t_end - cfg.t0;
    const auto n = static_cast<std::size_t>(std::floor(span / cfg.output_stride * (1.0 + 1e-12)));
    std::vector<double> grid;
    grid.reserve(n + 2);
    for (std::size_t k = 0; k <= n; ++k) grid.push_back(cfg.t0 + static_cast<double>(k) * cfg.output_stride);
    if (grid.back() > cfg.t_end) grid.back() = cfg.t_end;
    if (cfg.t_end - grid.back() > 1e-12 * span) grid.push_back(cfg.t_end);
    return grid;
}

Trajectory integrate_field(const VelocityField& field, const Configuration& initial, const IntegratorConfig& cfg,
                           IntegrationStats* stats) {
    cfg.validate();
    const std::size_t n = initial.size();
    if (n == 0 || n > kMaxDim) throw ContractViolation("integrator supports 1..4 coordinates");
    const auto grid = output_grid(cfg);
    const double span = cfg.t_end - cfg.t0;
    const double h_min = 1e-14 * span;

    IntegrationStats local;
    Trajectory traj;
    traj.times.reserve(grid.size());
    traj.configs.reserve(grid.size());

    Vec y{};
    std::copy(initial.coords().begin(), initial.coords().end(), y.begin());
    Vec k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, ys{}, y1{};

    const auto eval = [&](double t, const Vec& q, Vec& out) {
        field(t, std::span<const double>(q.data(), n), std::span<double>(out.data(), n));
        ++local.evaluations;
    };
    const auto record = [&](double t, const Vec& q) {
        traj.times.push_back(t);
        traj.configs.emplace_back(std::vector<double>(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(n)),
                                  initial.n_particles(), initial.dims());
    };

    double t = cfg.t0;
    eval(t, y, k1);  // NodeProximity here is the precondition failure
    record(t, y);
    std::size_t next_out = 1;

    double h = cfg.dt_init > 0.0 ? cfg.dt_init : 1e-3 * span;
    h = std::min(h, span);
    StageFailure last_failure = StageFailure::none;
    std::size_t attempts = 0;

    while (next_out < grid.size()) {
        if (++attempts > cfg.max_steps) {
            throw StepCollapse("step budget exhausted at t=" + std::to_string(t));
        }
        if (h < h_min) {
            if (last_failure == StageFailure::node) {
                throw NodeProximity("trajectory reached |psi| <= node_eps near t=" + std::to_string(t));
            }
            throw StepCollapse("step size fell below " + std::to_string(h_min) + " at t=" + std::to_string(t));
        }
        const bool last = t + h >= cfg.t_end;
        if (last) h = cfg.t_end - t;

        StageFailure failure = StageFailure::none;
        try {
            for (std::size_t i = 0; i < n; ++i) ys[i] = y[i] + h * a21 * k1[i];
            eval(t + c2 * h, ys, k2);
            for (std::size_t i = 0; i < n; ++i) ys[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            eval(t + c3 * h, ys, k3);
            for (std::size_t i = 0; i < n; ++i) ys[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            eval(t + c4 * h, ys, k4);
            for (std::size_t i = 0; i < n; ++i) {
                ys[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            }
            eval(t + c5 * h, ys, k5);
            for (std::size_t i = 0; i < n; ++i) {
                ys[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            }
            eval(last ? cfg.t_end : t + h, ys, k6);
            for (std::size_t i = 0; i < n; ++i) {
                y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            }
            eval(last ? cfg.t_end : t + h, y1, k7);
            for (const Vec* k : {&k2, &k3, &k4, &k5, &k6, &k7}) {
                for (std::size_t i = 0; i < n; ++i) {
                    if (!(std::abs((*k)[i]) <= cfg.v_cap)) failure = StageFailure::speed;
                }
            }
        } catch (const NodeProximity&) {
            failure = StageFailure::node;
        }
        if (failure != StageFailure::none) {
            last_failure = failure;
            ++local.rejected;
            h *= 0.5;
            continue;
        }

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / static_cast<double>(n));
        if (!std::isfinite(err)) {
            last_failure = StageFailure::speed;
            ++local.rejected;
            h *= 0.5;
            continue;
        }
        const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-300), -0.2), 0.2, 5.0);
        if (err > 1.0) {
            last_failure = StageFailure::none;
            ++local.rejected;
            h *= std::min(fac, 1.0);
            continue;
        }

        // Accepted: emit every output time inside (t, t + h] from the dense polynomial.
        const double t_new = last ? cfg.t_end : t + h;
        while (next_out < grid.size() && grid[next_out] <= t_new) {
            const double theta = (grid[next_out] - t) / h;
            const double theta1 = 1.0 - theta;
            Vec q{};
            for (std::size_t i = 0; i < n; ++i) {
                const double ydiff = y1[i] - y[i];
                const double bspl = h * k1[i] - ydiff;
                const double r4 = ydiff - h * k7[i] - bspl;
                const double r5 =
                    h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
                q[i] = y[i] + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5)));
            }
            if (grid[next_out] == t_new) q = y1;
            record(grid[next_out], q);
            ++next_out;
        }
        ++local.accepted;
        t = t_new;
        y = y1;
        k1 = k7;
        last_failure = StageFailure::none;
        h *= std::min(fac, 5.0);
    }
    if (stats) *stats = local;
    return traj;
}

Trajectory integrate_trajectory(const WaveModel& model, const Configuration& initial, const IntegratorConfig& cfg,
                                IntegrationStats* stats) {
    if (initial.size() != n_coords(model)) {
        throw ContractViolation("initial configuration does not match model " + model_tag(model));
    }
    return integrate_field(guidance_field(model, cfg.node_eps), initial, cfg, stats);
}

EnsembleResult flow_ensemble(const VelocityField& field, std::span<const Configuration> initials,
                             const IntegratorConfig& cfg, std::size_t threads) {
    cfg.validate();
    EnsembleResult result;
    result.trajectories.resize(initials.size());
    std::vector<std::string> errors(initials.size());
    parallel_for(initials.size(), threads, [&](std::size_t i) {
        try {
            result.trajectories[i] = integrate_field(field, initials[i], cfg);
        } catch (const Error& e) {
            result.trajectories[i] = {};
            errors[i] = e.what();
            if (errors[i].empty()) errors[i] = "integration failed";
        }
    });
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i].empty()) result.failures.push_back({i, errors[i]});
    }
    return result;
}

EnsembleResult flow_ensemble(const WaveModel& model, std::span<const Configuration> initials,
                             const IntegratorConfig& cfg, std::size_t threads) {
    return flow_ensemble(guidance_field(model, cfg.node_eps), initials, cfg, threads);
}

}  // namespace bohm
