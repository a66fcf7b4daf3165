#pragma once
// Ensemble (space) averages by quadrature and time averages over repeated
// single-configuration trials, where only the actual configuration can fire
// a detector.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bohm/dynamics.hpp"
#include "bohm/equilibrium.hpp"
#include "bohm/quadrature.hpp"
#include "bohm/wavemodels.hpp"

namespace bohm {

/// Sharp detection window [lo, hi]. Infinite bounds are allowed.
struct Detector {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    void validate() const;
    [[nodiscard]] bool contains(double y) const noexcept { return y >= lo && y <= hi; }
    friend bool operator==(const Detector&, const Detector&) = default;
};

struct DetectionSetup {
    Detector d1;
    Detector d2;
    double t_detect = 1.0;

    void validate() const;
    friend bool operator==(const DetectionSetup&, const DetectionSetup&) = default;
};

enum class ObservableKind {
    joint_indicator,
    window_indicator,
    coordinate,
    coordinate_squared,
    sum_coordinates,
    difference_squared,
};

[[nodiscard]] const char* to_string(ObservableKind kind);
/// Inverse of to_string; ContractViolation for unknown names.
[[nodiscard]] ObservableKind observable_kind_from_string(const std::string& name);

/// Function of the configuration evaluated at time `t`. Coordinate indices
/// are zero-based positions in the configuration vector.
struct Observable {
    ObservableKind kind = ObservableKind::coordinate;
    std::size_t index = 0;
    Detector window;        // window_indicator
    DetectionSetup setup;   // joint_indicator
    double t = 0.0;

    /// Coincidence of the two particles in d1 and d2, counted under either
    /// particle assignment. Evaluated at setup.t_detect.
    static Observable joint(const DetectionSetup& setup);
    static Observable window_indicator(std::size_t i, const Detector& window, double t);
    static Observable coordinate(std::size_t i, double t);
    static Observable coordinate_squared(std::size_t i, double t);
    static Observable sum_coordinates(double t);
    static Observable difference_squared(double t);

    /// Throws ContractViolation if the observable does not fit the model.
    void validate(const WaveModel& model) const;
    [[nodiscard]] double operator()(std::span<const double> q) const;
};

/// How each trial picks its single initial configuration.
enum class TrialSampling {
    /// One draw from |psi(., t0)|^2.
    equilibrium,
    /// Pair states only: the relative coordinate is drawn from equilibrium and
    /// the pair is started on y1 + y2 = 0, the point-slit limit.
    point_slit,
};

[[nodiscard]] const char* to_string(TrialSampling s);
[[nodiscard]] TrialSampling trial_sampling_from_string(const std::string& name);

/// Starting configuration of trial `index` under the given sampling mode.
[[nodiscard]] Configuration trial_configuration(const EquilibriumSampler& sampler, TrialSampling sampling,
                                                std::uint64_t seed, std::uint64_t index);

struct AverageReport {
    double space_avg = 0.0;
    double time_avg = 0.0;
    double std_error = 0.0;
    std::size_t n_trials = 0;
    std::size_t n_failed = 0;
    /// |space_avg - time_avg| > 5 std_error.
    bool ergodic_discrepancy = false;
};

/// Default spec for space averages: absolute tolerance 1e-8.
[[nodiscard]] QuadratureSpec default_average_quadrature();

/// Integral of obs * density(., obs.t) over configuration space.
[[nodiscard]] double space_average(const WaveModel& model, const Observable& obs,
                                   const QuadratureSpec& spec = default_average_quadrature());

/// Each trial k draws one configuration with seed stream (seed, k), flows it
/// from cfg.t0 to obs.t and evaluates obs on it. Failed trials are counted and
/// excluded; AllTrialsFailed if none survive. space_avg is left at zero.
/// When `finals` is given it receives the configuration of every surviving
/// trial at obs.t, in trial order.
[[nodiscard]] AverageReport time_average_trials(const WaveModel& model, const Observable& obs, std::size_t n_trials,
                                                std::uint64_t seed, const IntegratorConfig& cfg,
                                                TrialSampling sampling = TrialSampling::equilibrium,
                                                std::size_t threads = 1,
                                                std::vector<Configuration>* finals = nullptr);

/// Both averages in one report with the discrepancy flag set.
[[nodiscard]] AverageReport compare_averages(const WaveModel& model, const Observable& obs, std::size_t n_trials,
                                             std::uint64_t seed, const IntegratorConfig& cfg,
                                             TrialSampling sampling = TrialSampling::equilibrium,
                                             std::size_t threads = 1,
                                             const QuadratureSpec& spec = default_average_quadrature());

}  // namespace bohm
