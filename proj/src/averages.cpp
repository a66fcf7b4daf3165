#include "bohm/averages.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bohm/equilibrium.hpp"
#include "bohm/errors.hpp"
#include "bohm/parallel.hpp"
#include "bohm/statistics.hpp"

namespace bohm {
namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ContractViolation(what);
}

struct Interval {
    double lo;
    double hi;
    [[nodiscard]] bool empty() const { return !(lo < hi); }
};

Interval clip(const Detector& d, double lo, double hi) { return {std::max(d.lo, lo), std::min(d.hi, hi)}; }

Interval intersect(const Interval& a, const Interval& b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

double integrate_rect(const WaveModel& model, double t, const std::function<double(double, double)>& weight,
                      Interval x, Interval y, const QuadratureSpec& spec) {
    if (x.empty() || y.empty()) return 0.0;
    const auto f = [&](double a, double b) {
        const double q[2] = {a, b};
        return weight(a, b) * density(model, std::span<const double>(q, 2), t);
    };
    return integrate_2d(f, x.lo, x.hi, y.lo, y.hi, spec).value;
}

}  // namespace

void Detector::validate() const {
    require(!std::isnan(lo) && !std::isnan(hi), "detector bounds must not be NaN");
    require(lo < hi, "detector needs lo < hi");
}

void DetectionSetup::validate() const {
    d1.validate();
    d2.validate();
    require(std::isfinite(t_detect) && t_detect > 0.0, "t_detect must be positive");
}

const char* to_string(ObservableKind kind) {
    switch (kind) {
        case ObservableKind::joint_indicator: return "joint_indicator";
        case ObservableKind::window_indicator: return "window_indicator";
        case ObservableKind::coordinate: return "coordinate";
        case ObservableKind::coordinate_squared: return "coordinate_squared";
        case ObservableKind::sum_coordinates: return "sum_coordinates";
        case ObservableKind::difference_squared: return "difference_squared";
    }
    return "?";
}

ObservableKind observable_kind_from_string(const std::string& name) {
    for (const auto k : {ObservableKind::joint_indicator, ObservableKind::window_indicator, ObservableKind::coordinate,
                         ObservableKind::coordinate_squared, ObservableKind::sum_coordinates,
                         ObservableKind::difference_squared}) {
        if (name == to_string(k)) return k;
    }
    throw ContractViolation("unknown observable kind '" + name + "'");
}

const char* to_string(TrialSampling s) { return s == TrialSampling::equilibrium ? "equilibrium" : "point_slit"; }

TrialSampling trial_sampling_from_string(const std::string& name) {
    if (name == "equilibrium") return TrialSampling::equilibrium;
    if (name == "point_slit") return TrialSampling::point_slit;
    throw ContractViolation("unknown trial sampling '" + name + "'");
}

Observable Observable::joint(const DetectionSetup& setup) {
    Observable o;
    o.kind = ObservableKind::joint_indicator;
    o.setup = setup;
    o.t = setup.t_detect;
    return o;
}

Observable Observable::window_indicator(std::size_t i, const Detector& window, double t) {
    Observable o;
    o.kind = ObservableKind::window_indicator;
    o.index = i;
    o.window = window;
    o.t = t;
    return o;
}

Observable Observable::coordinate(std::size_t i, double t) {
    Observable o;
    o.kind = ObservableKind::coordinate;
    o.index = i;
    o.t = t;
    return o;
}

Observable Observable::coordinate_squared(std::size_t i, double t) {
    Observable o = coordinate(i, t);
    o.kind = ObservableKind::coordinate_squared;
    return o;
}

Observable Observable::sum_coordinates(double t) {
    Observable o;
    o.kind = ObservableKind::sum_coordinates;
    o.t = t;
    return o;
}

Observable Observable::difference_squared(double t) {
    Observable o = sum_coordinates(t);
    o.kind = ObservableKind::difference_squared;
    return o;
}

void Observable::validate(const WaveModel& model) const {
    require(std::isfinite(t), "observable time must be finite");
    const std::size_t n = n_coords(model);
    switch (kind) {
        case ObservableKind::joint_indicator:
            setup.validate();
            require(n_particles(model) == 2, "joint detection needs a two-particle state");
            require(t == setup.t_detect, "joint detection is evaluated at t_detect");
            break;
        case ObservableKind::window_indicator:
            window.validate();
            [[fallthrough]];
        case ObservableKind::coordinate:
        case ObservableKind::coordinate_squared:
            require(index < n, "coordinate index out of range");
            break;
        case ObservableKind::sum_coordinates:
        case ObservableKind::difference_squared:
            require(n == 2, "sum and difference need two coordinates");
            break;
    }
}

double Observable::operator()(std::span<const double> q) const {
    switch (kind) {
        case ObservableKind::joint_indicator: {
            const bool direct = setup.d1.contains(q[0]) && setup.d2.contains(q[1]);
            const bool swapped = setup.d2.contains(q[0]) && setup.d1.contains(q[1]);
            return direct || swapped ? 1.0 : 0.0;
        }
        case ObservableKind::window_indicator: return window.contains(q[index]) ? 1.0 : 0.0;
        case ObservableKind::coordinate: return q[index];
        case ObservableKind::coordinate_squared: return q[index] * q[index];
        case ObservableKind::sum_coordinates: return q[0] + q[1];
        case ObservableKind::difference_squared: return (q[0] - q[1]) * (q[0] - q[1]);
    }
    return 0.0;
}

QuadratureSpec default_average_quadrature() {
    QuadratureSpec spec;
    spec.abs_tol = 1e-8;
    spec.rel_tol = 1e-10;
    return spec;
}

double space_average(const WaveModel& model, const Observable& obs, const QuadratureSpec& spec) {
    obs.validate(model);
    const double t = obs.t;
    const Box box = support_box(model, t);

    if (n_coords(model) == 1) {
        Interval x{box.lo[0], box.hi[0]};
        if (obs.kind == ObservableKind::window_indicator) x = clip(obs.window, x.lo, x.hi);
        if (x.empty()) return 0.0;
        const auto f = [&](double y) {
            const double q[1] = {y};
            const std::span<const double> s(q, 1);
            const double w = obs.kind == ObservableKind::window_indicator ? 1.0 : obs(s);
            return w * density(model, s, t);
        };
        return integrate(f, x.lo, x.hi, spec).value;
    }

    const Interval bx{box.lo[0], box.hi[0]};
    const Interval by{box.lo[1], box.hi[1]};
    const auto one = [](double, double) { return 1.0; };
    switch (obs.kind) {
        case ObservableKind::joint_indicator: {
            // P(A or B) = P(A) + P(B) - P(A and B) for the two particle assignments.
            const auto& s = obs.setup;
            const Interval both{std::max(s.d1.lo, s.d2.lo), std::min(s.d1.hi, s.d2.hi)};
            double p = integrate_rect(model, t, one, clip(s.d1, bx.lo, bx.hi), clip(s.d2, by.lo, by.hi), spec);
            p += integrate_rect(model, t, one, clip(s.d2, bx.lo, bx.hi), clip(s.d1, by.lo, by.hi), spec);
            if (!both.empty()) p -= integrate_rect(model, t, one, intersect(both, bx), intersect(both, by), spec);
            return p;
        }
        case ObservableKind::window_indicator: {
            const Interval w = obs.index == 0 ? clip(obs.window, bx.lo, bx.hi) : clip(obs.window, by.lo, by.hi);
            return obs.index == 0 ? integrate_rect(model, t, one, w, by, spec)
                                  : integrate_rect(model, t, one, bx, w, spec);
        }
        default: {
            const auto w = [&](double a, double b) {
                const double q[2] = {a, b};
                return obs(std::span<const double>(q, 2));
            };
            return integrate_rect(model, t, w, bx, by, spec);
        }
    }
}

Configuration trial_configuration(const EquilibriumSampler& sampler, TrialSampling sampling, std::uint64_t seed,
                                  std::uint64_t index) {
    Configuration start = sampler.draw(seed, index);
    if (sampling == TrialSampling::point_slit) {
        require(start.size() == 2, "point-slit sampling needs a two-particle state");
        // Half the relative coordinate, mirrored, keeps y1 + y2 = 0 exactly.
        const double h = 0.5 * (start[0] - start[1]);
        start = Configuration({h, -h}, 2);
    }
    return start;
}

AverageReport time_average_trials(const WaveModel& model, const Observable& obs, std::size_t n_trials,
                                  std::uint64_t seed, const IntegratorConfig& cfg, TrialSampling sampling,
                                  std::size_t threads, std::vector<Configuration>* finals) {
    obs.validate(model);
    require(n_trials >= 1, "need at least one trial");
    require(obs.t >= cfg.t0, "observable time precedes the trial start");
    require(sampling == TrialSampling::equilibrium || std::holds_alternative<TwoParticleEntangledState>(model),
            "point-slit sampling needs a two-particle state");

    IntegratorConfig run = cfg;
    run.t_end = obs.t;
    run.output_stride = obs.t - cfg.t0;
    const bool flow = obs.t > cfg.t0;
    if (flow) run.validate();

    const EquilibriumSampler sampler(model, cfg.t0);
    const VelocityField field = guidance_field(model, cfg.node_eps);
    std::vector<double> values(n_trials, 0.0);
    std::vector<char> failed(n_trials, 0);
    std::vector<Configuration> ends(finals != nullptr ? n_trials : 0);
    parallel_for(n_trials, threads, [&](std::size_t k) {
        const Configuration start = trial_configuration(sampler, sampling, seed, k);
        try {
            Configuration end = flow ? integrate_field(field, start, run).configs.back() : start;
            values[k] = obs(end.coords());
            if (finals != nullptr) ends[k] = std::move(end);
        } catch (const NodeProximity&) {
            failed[k] = 1;
        } catch (const StepCollapse&) {
            failed[k] = 1;
        }
    });

    std::vector<double> kept;
    kept.reserve(n_trials);
    if (finals != nullptr) finals->clear();
    for (std::size_t k = 0; k < n_trials; ++k) {
        if (failed[k]) continue;
        kept.push_back(values[k]);
        if (finals != nullptr) finals->push_back(std::move(ends[k]));
    }
    if (kept.empty()) throw AllTrialsFailed("all " + std::to_string(n_trials) + " trials failed to integrate");
    const MeanEstimate m = mean_estimate(kept);
    AverageReport rep;
    rep.time_avg = m.mean;
    rep.std_error = m.std_error;
    rep.n_trials = n_trials;
    rep.n_failed = n_trials - kept.size();
    return rep;
}

AverageReport compare_averages(const WaveModel& model, const Observable& obs, std::size_t n_trials,
                               std::uint64_t seed, const IntegratorConfig& cfg, TrialSampling sampling,
                               std::size_t threads, const QuadratureSpec& spec) {
    AverageReport rep = time_average_trials(model, obs, n_trials, seed, cfg, sampling, threads);
    rep.space_avg = space_average(model, obs, spec);
    rep.ergodic_discrepancy = std::abs(rep.space_avg - rep.time_avg) > 5.0 * rep.std_error;
    return rep;
}

}  // namespace bohm
