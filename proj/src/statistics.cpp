#include "bohm/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "bohm/errors.hpp"
#include "bohm/quadrature.hpp"

namespace bohm {

TabulatedCdf::TabulatedCdf(const std::function<double(double)>& density, double lo, double hi, std::size_t cells,
                           std::size_t order)
    : lo_(lo), hi_(hi), h_((hi - lo) / static_cast<double>(cells)), cdf_(cells + 1, 0.0), pdf_(cells + 1, 0.0) {
    if (!(hi > lo) || cells == 0) {
        throw ContractViolation("TabulatedCdf needs hi > lo and at least one cell");
    }
    const auto& gl = gauss_legendre(order);
    for (std::size_t i = 0; i <= cells; ++i) {
        pdf_[i] = density(lo_ + h_ * static_cast<double>(i));
    }
    for (std::size_t i = 0; i < cells; ++i) {
        const double a = lo_ + h_ * static_cast<double>(i);
        double mass = 0.0;
        for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
            mass += gl.weights[k] * density(a + 0.5 * h_ * (gl.nodes[k] + 1.0));
        }
        cdf_[i + 1] = cdf_[i] + 0.5 * h_ * mass;
    }
}

double TabulatedCdf::operator()(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return std::min(cdf_.back(), 1.0);
    const double u = (x - lo_) / h_;
    const auto i = std::min(static_cast<std::size_t>(u), cdf_.size() - 2);
    const double s = u - static_cast<double>(i);
    // Cubic Hermite basis on [0, 1] with slopes scaled by the cell width.
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    const double v = h00 * cdf_[i] + h10 * h_ * pdf_[i] + h01 * cdf_[i + 1] + h11 * h_ * pdf_[i + 1];
    return std::clamp(v, 0.0, 1.0);
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) return 0.0;
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_critical_value(std::size_t n, double alpha) {
    if (n == 0 || !(alpha > 0.0 && alpha < 1.0)) {
        throw ContractViolation("ks_critical_value needs n > 0 and alpha in (0, 1)");
    }
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

MeanEstimate mean_estimate(std::span<const double> values) {
    MeanEstimate est;
    est.n = values.size();
    if (values.empty()) return est;
    double sum = 0.0;
    for (double v : values) sum += v;
    est.mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) return est;
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    const double var = ss / static_cast<double>(values.size() - 1);
    est.std_error = std::sqrt(var / static_cast<double>(values.size()));
    return est;
}

}  // namespace bohm
