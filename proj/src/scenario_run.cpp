#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "bohm/equilibrium.hpp"
#include "bohm/parallel.hpp"
#include "bohm/errors.hpp"
#include "bohm/scenarios.hpp"
#include "bohm/statistics.hpp"

namespace bohm {
namespace {

constexpr std::size_t kHistogramBins = 40;
constexpr double kKsAlpha = 0.01;

// Bins spanning the observed values.
Histogram data_histogram(std::span<const double> ys) {
    if (ys.empty()) return make_histogram(ys, 0.0, 1.0, kHistogramBins);
    const auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
    const double pad = *hi > *lo ? 0.0 : 0.5;
    return make_histogram(ys, *lo - pad, *hi + pad, kHistogramBins);
}

struct Run {
    const ScenarioConfig& cfg;
    std::size_t threads;
    WaveModel model;
    RunResult result;

    void stat(std::string name, double value, std::size_t n = 0, double tolerance = 0.0) {
        result.summary.statistics.push_back({std::move(name), value, n, tolerance});
    }
    void flag(std::string name, bool value) { result.summary.flags.emplace_back(std::move(name), value); }

    [[nodiscard]] double t0() const { return cfg.integrator.t0; }
    [[nodiscard]] double t_end() const { return cfg.integrator.t_end; }
    // Trials draw from a stream next to the one used for plotted trajectories.
    [[nodiscard]] std::uint64_t trial_seed() const { return *cfg.seed + 1; }

    // Plotted trajectories: stream `seed`, indices 0..n_trajectories-1.
    void fan(TrialSampling sampling = TrialSampling::equilibrium) {
        if (cfg.n_trajectories == 0) return;
        const EquilibriumSampler sampler(model, t0());
        std::vector<Configuration> starts(cfg.n_trajectories);
        for (std::size_t k = 0; k < starts.size(); ++k) starts[k] = trial_configuration(sampler, sampling, *cfg.seed, k);
        auto ens = flow_ensemble(model, starts, cfg.integrator, threads);
        result.summary.n_failed += ens.failures.size();
        for (auto& tr : ens.trajectories) {
            if (!tr.empty()) result.artifacts.trajectories.push_back(std::move(tr));
        }
    }

    // Endpoints of n equilibrium samples flowed over the whole run.
    std::vector<Configuration> flow_samples(std::size_t n) {
        const auto set = sample_initial(model, t0(), n, trial_seed(), threads);
        IntegratorConfig ends = cfg.integrator;
        ends.output_stride = t_end() - t0();
        const auto ens = flow_ensemble(model, set.samples, ends, threads);
        result.summary.n_failed += ens.failures.size();
        std::vector<Configuration> finals;
        finals.reserve(n);
        for (const auto& tr : ens.trajectories) {
            if (!tr.empty()) finals.push_back(tr.configs.back());
        }
        if (finals.empty()) throw AllTrialsFailed("every sample failed to integrate");
        return finals;
    }

    void equivariance_and_histogram(std::size_t coord) {
        if (cfg.n_trials == 0) return;
        const auto finals = flow_samples(cfg.n_trials);
        const auto rep = distribution_distance(model, finals, t_end());
        const double crit = 1.5 * ks_critical_value(rep.n_used, kKsAlpha);
        stat("equivariance_ks", rep.statistic, rep.n_used, crit);
        flag("equivariance_ok", rep.statistic < crit);
        std::vector<double> ys(finals.size());
        for (std::size_t i = 0; i < finals.size(); ++i) ys[i] = finals[i][coord];
        result.artifacts.histogram = data_histogram(ys);
    }

    [[nodiscard]] DetectionSetup scaled_setup() const {
        DetectionSetup s = cfg.detection->setup;
        if (cfg.detection->units == DetectorUnits::beam_width) {
            const double w = beam_width(model, s.t_detect);
            for (Detector* d : {&s.d1, &s.d2}) {
                d->lo *= w;
                d->hi *= w;
            }
        }
        return s;
    }

    void record_average(const std::string& prefix, const AverageReport& r) {
        stat(prefix + "_space_avg", r.space_avg, 0, default_average_quadrature().abs_tol);
        stat(prefix + "_time_avg", r.time_avg, r.n_trials, 5.0 * r.std_error);
        stat(prefix + "_std_error", r.std_error, r.n_trials, 0.0);
        result.summary.n_failed += r.n_failed;
        flag(prefix + "_ergodic_discrepancy", r.ergodic_discrepancy);
    }

    void single_particle() {
        equivariance_and_histogram(0);
        if (cfg.detection && cfg.n_trials > 0) {
            const DetectionSetup s = scaled_setup();
            IntegratorConfig ic = cfg.integrator;
            ic.t_end = s.t_detect;
            const auto obs = Observable::window_indicator(0, s.d1, s.t_detect);
            record_average("window", compare_averages(model, obs, cfg.n_trials, trial_seed(), ic,
                                                      TrialSampling::equilibrium, threads));
        }
        fan();
    }

    void two_particle_slit() {
        const DetectionSetup s = scaled_setup();
        const TrialSampling sampling = cfg.detection->sampling;
        const auto obs = Observable::joint(s);
        IntegratorConfig ic = cfg.integrator;
        ic.t_end = s.t_detect;
        std::vector<Configuration> finals;
        AverageReport r = time_average_trials(model, obs, cfg.n_trials, trial_seed(), ic, sampling, threads, &finals);
        r.space_avg = space_average(model, obs);
        r.ergodic_discrepancy = std::abs(r.space_avg - r.time_avg) > 5.0 * r.std_error;
        stat("P_bar_12", r.space_avg, 0, default_average_quadrature().abs_tol);
        stat("P_star_12", r.time_avg, r.n_trials, 5.0 * r.std_error);
        stat("std_error", r.std_error, r.n_trials, 0.0);
        result.summary.n_failed += r.n_failed;
        flag("ergodic_discrepancy", r.ergodic_discrepancy);

        std::vector<double> ys(finals.size());
        double worst_sum = 0.0;
        for (std::size_t i = 0; i < finals.size(); ++i) {
            ys[i] = finals[i][0];
            worst_sum = std::max(worst_sum, std::abs(finals[i][0] + finals[i][1]));
        }
        stat("max_abs_sum_at_detection", worst_sum, finals.size(), 0.0);
        result.artifacts.histogram = data_histogram(ys);
        fan(sampling);
    }

    void spreading_law() {
        const auto& g = cfg.geometry;
        const Configuration start(g.initial, 2);
        const Trajectory tr = integrate_trajectory(model, start, cfg.integrator);
        const double y0 = g.initial[0] + g.initial[1];
        const auto& c = cfg.constants;
        double worst_rel = 0.0;
        double worst_abs = 0.0;
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const double predicted = y0 * spreading_factor(g.sigma0, c, tr.times[i] - t0());
            const double err = std::abs(tr.configs[i][0] + tr.configs[i][1] - predicted);
            worst_abs = std::max(worst_abs, err);
            if (y0 != 0.0) worst_rel = std::max(worst_rel, err / std::abs(predicted));
        }
        const double s = c.hbar * (t_end() - t0()) / (2.0 * c.mass * g.sigma0 * g.sigma0);
        if (y0 != 0.0) {
            stat("spreading_max_rel_error", worst_rel, tr.size(), 1e-6);
            const auto& last = tr.configs.back();
            stat("width_ratio_end", (last[0] + last[1]) / y0, 0, 1e-6);
        }
        stat("spreading_max_abs_error", worst_abs, tr.size(), 0.0);
        stat("smallness_parameter", s * s);
        flag("smallness_condition", s * s < 0.1);
        result.artifacts.trajectories.push_back(tr);
    }

    [[nodiscard]] const OscillatorSuperposition2D& oscillator() const {
        return std::get<OscillatorSuperposition2D>(model);
    }

    void heatmap(const std::function<double(double, double)>& value, const Rect& r) {
        const std::size_t n = cfg.ergodicity.grid_resolution;
        auto& a = result.artifacts;
        a.heatmap_resolution = n;
        a.heatmap_bounds = r;
        a.heatmap.assign(n * n, 0.0);
        const double hx = (r.x_hi - r.x_lo) / static_cast<double>(n);
        const double hy = (r.y_hi - r.y_lo) / static_cast<double>(n);
        parallel_for(n, threads, [&](std::size_t j) {
            for (std::size_t i = 0; i < n; ++i) {
                a.heatmap[j * n + i] = value(r.x_lo + (static_cast<double>(i) + 0.5) * hx,
                                             r.y_lo + (static_cast<double>(j) + 0.5) * hy);
            }
        });
    }

    void ergodicity_qm() {
        const auto& s = oscillator();
        const double T = t_end() - t0();
        const Rect bounds = default_bounds(s);
        const double r1 = cross_term_residual(s, T, bounds);
        const double r4 = cross_term_residual(s, 4.0 * T, bounds);
        stat("cross_term_residual_T", r1);
        stat("cross_term_residual_4T", r4);
        const double ratio = r1 > 0.0 ? r4 / r1 : 0.0;
        stat("residual_ratio", ratio, 0, 3.0 / 8.0);
        flag("residual_ratio_in_band", r1 > 0.0 && ratio >= 1.0 / 6.0 && ratio <= 3.0 / 8.0);
        heatmap([&](double x, double y) { return time_averaged_density(s, std::array{x, y}, T); }, bounds);
        if (cfg.n_trajectories > 0) fan();
    }

    void pendulum() {
        const auto& s = oscillator();
        const double T = t_end() - t0();
        fan();
        auto& trs = result.artifacts.trajectories;
        if (trs.empty()) throw AllTrialsFailed("every trajectory failed to integrate");
        CoverageGrid grid =
            CoverageGrid::for_superposition(s, T, cfg.ergodicity.grid_resolution, cfg.ergodicity.access_threshold);
        const std::array checkpoints{t0() + 0.5 * T, t_end()};
        const auto curve = coverage_curve(trs, grid, checkpoints);
        const std::size_t n_tr = trs.size();
        stat("coverage_half", curve[0], n_tr);
        stat("coverage_final", curve[1], n_tr);
        stat("coverage_growth_final_half", curve[1] - curve[0], n_tr, 0.01);
        flag("coverage_saturated", curve[1] - curve[0] < 0.01);

        for (const auto& tr : trs) grid.mark(tr);
        stat("accessible_cells", static_cast<double>(grid.accessible_count()));
        stat("visited_cells", static_cast<double>(grid.visited_count()));

        const double period = cfg.ergodicity.recurrence_period > 0.0
                                  ? cfg.ergodicity.recurrence_period
                                  : 2.0 * std::numbers::pi / std::min(s.omega1(), s.omega2());
        if (T >= 2.0 * period) {
            double worst = 0.0;
            for (const auto& tr : trs) worst = std::max(worst, recurrence_metric(tr, period));
            stat("recurrence_metric", worst, n_tr);
        }

        // Witness: the unvisited accessible cell with the most invariant probability.
        const std::size_t cells = grid.resolution() * grid.resolution();
        std::vector<double> prob(cells, 0.0);
        parallel_for(cells, threads, [&](std::size_t c) {
            if (grid.accessible(c) && !grid.visited(c)) {
                prob[c] = invariant_average(s, [](std::span<const double>) { return 1.0; }, T, grid.cell_rect(c), 1);
            }
        });
        const auto best = std::max_element(prob.begin(), prob.end());
        const double thr = cfg.ergodicity.access_threshold;
        if (*best > 0.0) {
            const Rect cell = grid.cell_rect(static_cast<std::size_t>(best - prob.begin()));
            const auto indicator = [cell](std::span<const double> q) {
                return q[0] >= cell.x_lo && q[0] < cell.x_hi && q[1] >= cell.y_lo && q[1] < cell.y_hi ? 1.0 : 0.0;
            };
            stat("witness_space_avg", *best, 0, thr);
            stat("witness_time_avg", trajectory_time_average(trs, indicator), n_tr);
        }
        flag("witness_found", *best > thr);

        const auto energy_like = [](std::span<const double> q) { return q[0] * q[0]; };
        const auto rep = ergodic_report(s, trs, energy_like, grid);
        stat("x_squared_time_avg", rep.time_avg, n_tr);
        stat("x_squared_space_avg", rep.space_avg);
        stat("cross_term_residual", rep.cross_term_residual);

        result.artifacts.coverage = grid;
    }
};

}  // namespace

const Statistic& RunSummary::stat(const std::string& name) const {
    for (const auto& s : statistics) {
        if (s.name == name) return s;
    }
    throw ContractViolation("no statistic named " + name);
}

bool RunSummary::flag(const std::string& name) const {
    for (const auto& [k, v] : flags) {
        if (k == name) return v;
    }
    throw ContractViolation("no flag named " + name);
}

Histogram make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
    if (!(hi > lo) || bins == 0) throw ContractViolation("histogram needs hi > lo and at least one bin");
    Histogram h;
    h.edges.resize(bins + 1);
    const double w = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + static_cast<double>(i) * w;
    h.edges.back() = hi;
    h.counts.assign(bins, 0);
    for (const double v : values) {
        if (!(v >= lo && v <= hi)) continue;
        auto k = static_cast<std::size_t>((v - lo) / w);
        h.counts[std::min(k, bins - 1)] += 1;
    }
    return h;
}

RunResult run_scenario(const ScenarioConfig& cfg, std::size_t threads) {
    validate(cfg);
    const auto start = std::chrono::steady_clock::now();
    Run run{cfg, std::max<std::size_t>(threads, 1), build_model(cfg), {}};
    run.result.summary.config = cfg;
    const auto& name = cfg.scenario;
    if (name == "single_slit" || name == "double_slit") {
        run.single_particle();
    } else if (name == "two_particle_slit") {
        run.two_particle_slit();
    } else if (name == "spreading_law") {
        run.spreading_law();
    } else if (name == "ergodicity_qm") {
        run.ergodicity_qm();
    } else {
        run.pendulum();
    }
    run.result.summary.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return std::move(run.result);
}

}  // namespace bohm
