#pragma once
// Config-driven scenario runner and result emission.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bohm/averages.hpp"
#include "bohm/dynamics.hpp"
#include "bohm/ergodicity.hpp"
#include "bohm/wavemodels.hpp"

namespace bohm {

inline constexpr const char* kVersion = "bohm-ergo 0.1.0";

[[nodiscard]] const std::vector<std::string>& scenario_names();

struct GeometrySpec {
    double d = 1.0;
    double sigma0 = 0.2;
    double phase = 0.0;
    double center0 = 0.0;
    double drift = 0.0;
    double omega1 = 1.0;
    double omega2 = 2.0;
    /// Empty means the default two-term superposition.
    std::vector<OscillatorTerm> terms;
    /// Explicit starting configuration (spreading_law).
    std::vector<double> initial;

    friend bool operator==(const GeometrySpec&, const GeometrySpec&) = default;
};

enum class DetectorUnits { absolute, beam_width };

struct DetectionSpec {
    DetectionSetup setup;
    /// beam_width: window bounds are multiples of the beam width at t_detect.
    DetectorUnits units = DetectorUnits::absolute;
    TrialSampling sampling = TrialSampling::equilibrium;

    friend bool operator==(const DetectionSpec&, const DetectionSpec&) = default;
};

/// Oscillator scenarios take their horizon T from integrator.t_end - t0.
struct ErgodicitySpec {
    std::size_t grid_resolution = 64;
    double access_threshold = kDefaultAccessThreshold;
    /// Zero picks one period of the lower frequency.
    double recurrence_period = 0.0;

    friend bool operator==(const ErgodicitySpec&, const ErgodicitySpec&) = default;
};

struct ScenarioConfig {
    std::string scenario;
    PhysicalConstants constants;
    GeometrySpec geometry;
    std::optional<DetectionSpec> detection;
    std::size_t n_trials = 0;
    std::size_t n_trajectories = 0;
    std::optional<std::uint64_t> seed;
    IntegratorConfig integrator;
    ErgodicitySpec ergodicity;
    std::vector<std::string> outputs;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Default configuration of a built-in scenario; SchemaError for unknown names.
[[nodiscard]] ScenarioConfig default_config(const std::string& scenario);

/// Strict parse: unknown keys are rejected, missing keys take the scenario
/// defaults. ParseError (with line and column) for malformed JSON,
/// SchemaError naming the key otherwise.
[[nodiscard]] ScenarioConfig parse_config(const std::string& text);
/// Full JSON form of a config, every field present.
[[nodiscard]] std::string serialize(const ScenarioConfig& cfg);
/// Throws SchemaError if the config is inconsistent.
void validate(const ScenarioConfig& cfg);

/// The model a scenario runs on.
[[nodiscard]] WaveModel build_model(const ScenarioConfig& cfg);

struct Statistic {
    std::string name;
    double value = 0.0;
    /// Sample count behind the value; 0 for deterministic quantities.
    std::size_t n = 0;
    /// Tolerance or critical value the number is judged against.
    double tolerance = 0.0;
};

struct RunSummary {
    ScenarioConfig config;
    std::vector<Statistic> statistics;
    std::vector<std::pair<std::string, bool>> flags;
    std::size_t n_failed = 0;
    double wall_time = 0.0;

    [[nodiscard]] const Statistic& stat(const std::string& name) const;
    [[nodiscard]] bool flag(const std::string& name) const;
};

struct Histogram {
    std::vector<double> edges;
    std::vector<std::size_t> counts;
};

/// Equal-width bins over [lo, hi]; values outside are dropped.
[[nodiscard]] Histogram make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins);

struct RunArtifacts {
    std::vector<Trajectory> trajectories;
    std::optional<Histogram> histogram;
    std::optional<CoverageGrid> coverage;
    /// Cell values for a density heatmap over heatmap_bounds (row-major, y outer).
    std::vector<double> heatmap;
    std::size_t heatmap_resolution = 0;
    Rect heatmap_bounds;
};

struct RunResult {
    RunSummary summary;
    RunArtifacts artifacts;
};

/// Deterministic for a given config, independent of `threads`.
[[nodiscard]] RunResult run_scenario(const ScenarioConfig& cfg, std::size_t threads = 1);

/// JSON text of a summary. SerializationError for non-finite statistics.
[[nodiscard]] std::string summary_json(const RunSummary& summary, bool include_wall_time = true);
/// Failure summary for a run that raised an error.
[[nodiscard]] std::string failure_json(const ScenarioConfig& cfg, const std::string& error_kind,
                                       const std::string& message);
[[nodiscard]] std::string trajectory_csv(const Trajectory& trajectory);
[[nodiscard]] std::string histogram_csv(const Histogram& histogram);
[[nodiscard]] std::string trajectories_svg(std::span<const Trajectory> trajectories);
[[nodiscard]] std::string histogram_svg(const Histogram& histogram);
[[nodiscard]] std::string coverage_svg(const CoverageGrid& grid);
[[nodiscard]] std::string heatmap_svg(std::span<const double> values, std::size_t resolution, const Rect& bounds);

/// Writes the outputs requested by the config into `dir` and returns the
/// paths written. IoError with the path on failure.
std::vector<std::filesystem::path> write_outputs(const RunResult& result, const std::filesystem::path& dir);

}  // namespace bohm
