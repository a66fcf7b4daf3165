#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bohm {

struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    /// Maximum number of 15-point panels per one-dimensional integral.
    std::size_t max_panels = 20000;
    /// Uniform subdivisions made before adaptive refinement starts.
    std::size_t initial_panels = 8;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
};

/// Adaptive Gauss-Kronrod (7/15) integration of f over [lo, hi].
/// Throws QuadratureNonConvergence when the panel budget is exhausted.
[[nodiscard]] QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                                         const QuadratureSpec& spec = {});

/// Iterated adaptive integration of f(x, y) over [x_lo, x_hi] x [y_lo, y_hi].
/// The inner integral runs at a tolerance tightened by the outer width.
[[nodiscard]] QuadratureResult integrate_2d(const std::function<double(double, double)>& f, double x_lo,
                                            double x_hi, double y_lo, double y_hi,
                                            const QuadratureSpec& spec = {});

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1] (n <= 64).
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
[[nodiscard]] const GaussLegendre& gauss_legendre(std::size_t n);

/// Composite tensor Gauss-Legendre over a rectangle: `panels` per axis, `order` nodes per panel.
[[nodiscard]] double integrate_tensor(const std::function<double(double, double)>& f, double x_lo, double x_hi,
                                      double y_lo, double y_hi, std::size_t panels, std::size_t order = 8);

}  // namespace bohm
