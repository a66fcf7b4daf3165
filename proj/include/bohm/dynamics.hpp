#pragma once

// Guidance-equation integration: dq/dt = v(q, t) with an embedded
// Dormand-Prince 5(4) pair, recorded on a uniform output grid through the
// pair's continuous extension.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bohm/wavemodels.hpp"

namespace bohm {

struct IntegratorConfig {
    double t0 = 0.0;
    double t_end = 1.0;
    /// First trial step; zero picks 1e-3 of the span.
    double dt_init = 0.0;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    /// Stages with any |v| above this are rejected and the step halved.
    double v_cap = 1e6;
    double node_eps = kDefaultNodeEps;
    double output_stride = 0.1;
    /// Hard cap on attempted steps per trajectory.
    std::size_t max_steps = 5'000'000;

    void validate() const;
    friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Configuration> configs;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] bool empty() const noexcept { return times.empty(); }
    /// Coordinate `i` of every recorded configuration.
    [[nodiscard]] std::vector<double> coordinate(std::size_t i) const;
};

/// Right-hand side of the guidance ODE; writes v(q, t) into the last argument.
using VelocityField = std::function<void(double, std::span<const double>, std::span<double>)>;

/// Guidance field of `model` with the configured node threshold.
[[nodiscard]] VelocityField guidance_field(const WaveModel& model, double node_eps = kDefaultNodeEps);

/// Output grid t0, t0 + stride, ..., closed with t_end.
[[nodiscard]] std::vector<double> output_grid(const IntegratorConfig& cfg);

struct IntegrationStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
};

/// Throws NodeProximity or StepCollapse on failure.
[[nodiscard]] Trajectory integrate_field(const VelocityField& field, const Configuration& initial,
                                         const IntegratorConfig& cfg, IntegrationStats* stats = nullptr);

[[nodiscard]] Trajectory integrate_trajectory(const WaveModel& model, const Configuration& initial,
                                              const IntegratorConfig& cfg, IntegrationStats* stats = nullptr);

struct EnsembleFailure {
    std::size_t index;
    std::string message;
};

struct EnsembleResult {
    /// Same order as the inputs; failed entries are empty trajectories.
    std::vector<Trajectory> trajectories;
    std::vector<EnsembleFailure> failures;

    [[nodiscard]] bool ok(std::size_t i) const noexcept { return !trajectories[i].empty(); }
};

/// Integrates every initial configuration independently. Per-trajectory
/// errors are collected, never fatal. Output is identical for any `threads`.
[[nodiscard]] EnsembleResult flow_ensemble(const WaveModel& model, std::span<const Configuration> initials,
                                           const IntegratorConfig& cfg, std::size_t threads = 1);
[[nodiscard]] EnsembleResult flow_ensemble(const VelocityField& field, std::span<const Configuration> initials,
                                           const IntegratorConfig& cfg, std::size_t threads = 1);

}  // namespace bohm
