#pragma once

// Seeded draws from |psi(., t0)|^2 and the equivariance check that flowed
// draws stay |psi(., t)|^2-distributed.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bohm/dynamics.hpp"
#include "bohm/random.hpp"
#include "bohm/wavemodels.hpp"

namespace bohm {

struct SampleSet {
    double t0 = 0.0;
    std::vector<Configuration> samples;
    std::uint64_t seed = 0;
    std::string model_tag;
};

/// Draws configurations distributed as density(model, ., t0).
///
/// Single Gaussians are drawn exactly. Slit superpositions use rejection
/// against the mixture of their branch densities, whose bound
/// |sum_k g_k|^2 <= K sum_k |g_k|^2 holds exactly. Oscillator superpositions
/// use a widened product Gaussian whose bound is found by a grid scan of the
/// density ratio with a 1.5x margin.
class EquilibriumSampler {
public:
    EquilibriumSampler(const WaveModel& model, double t0);
    ~EquilibriumSampler();
    EquilibriumSampler(EquilibriumSampler&&) noexcept;
    EquilibriumSampler& operator=(EquilibriumSampler&&) noexcept;

    [[nodiscard]] Configuration draw(Engine& engine) const;
    /// Sample `index` of the stream identified by `seed`.
    [[nodiscard]] Configuration draw(std::uint64_t seed, std::uint64_t index) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Throws EnvelopeFailure when the acceptance rate of any draw falls below 1e-4.
[[nodiscard]] SampleSet sample_initial(const WaveModel& model, double t0, std::size_t n, std::uint64_t seed,
                                       std::size_t threads = 1);

/// Linear coordinate functionals used for marginal comparisons.
enum class Projection { coord0, coord1, sum, difference };

[[nodiscard]] const char* to_string(Projection p);
[[nodiscard]] double project(std::span<const double> q, Projection p);

/// Marginal density of project(q, p) under density(model, ., t), by quadrature.
[[nodiscard]] double marginal_density(const WaveModel& model, double t, Projection p, double u);

/// Range of the projected coordinate covered by the support box.
[[nodiscard]] std::pair<double, double> projection_range(const WaveModel& model, double t, Projection p);

struct EquivarianceReport {
    /// Largest KS statistic over the compared projections.
    double statistic = 0.0;
    std::vector<std::pair<Projection, double>> per_projection;
    std::size_t n_used = 0;
    std::size_t n_failed = 0;
};

/// KS statistic(s) of `values` projected along the model's comparison axes
/// against quadrature CDFs of density(., t).
[[nodiscard]] EquivarianceReport distribution_distance(const WaveModel& model, std::span<const Configuration> configs,
                                                       double t);

/// Flows every sample to t1 and compares with density(., t1). One-coordinate
/// models use a single KS statistic; two-coordinate models take the max over
/// both coordinates plus the sum and difference coordinates.
[[nodiscard]] EquivarianceReport equivariance_distance(const WaveModel& model, const SampleSet& samples, double t1,
                                                       const IntegratorConfig& cfg, std::size_t threads = 1);

/// As above but flowing with an arbitrary field (negative controls).
[[nodiscard]] EquivarianceReport equivariance_distance(const WaveModel& model, const VelocityField& field,
                                                       const SampleSet& samples, double t1,
                                                       const IntegratorConfig& cfg, std::size_t threads = 1);

}  // namespace bohm
