#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bohm {

/// Cumulative distribution tabulated from a density on [lo, hi].
///
/// Cell masses come from Gauss-Legendre quadrature; between edges the CDF is
/// a cubic Hermite interpolant using the density as its derivative.
class TabulatedCdf {
public:
    TabulatedCdf(const std::function<double(double)>& density, double lo, double hi, std::size_t cells = 2000,
                 std::size_t order = 6);

    [[nodiscard]] double operator()(double x) const;
    [[nodiscard]] double total_mass() const noexcept { return cdf_.back(); }
    [[nodiscard]] double lo() const noexcept { return lo_; }
    [[nodiscard]] double hi() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
    double h_;
    std::vector<double> cdf_;
    std::vector<double> pdf_;
};

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|. `samples` need not be sorted.
[[nodiscard]] double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Asymptotic critical value sqrt(-ln(alpha/2) / 2) / sqrt(n).
[[nodiscard]] double ks_critical_value(std::size_t n, double alpha);

struct MeanEstimate {
    double mean = 0.0;
    /// Sample standard deviation over sqrt(n); zero when n < 2.
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Two-pass mean and standard error, summed in index order.
[[nodiscard]] MeanEstimate mean_estimate(std::span<const double> values);

}  // namespace bohm
