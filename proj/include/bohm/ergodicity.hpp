#pragma once
// Ergodicity diagnostics for oscillator superpositions: exact time-averaged
// densities, decay of their interference (cross) terms, configuration-space
// coverage of Bohmian trajectories and a recurrence metric.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "bohm/dynamics.hpp"
#include "bohm/wavemodels.hpp"

namespace bohm {

struct Rect {
    double x_lo = -1.0;
    double x_hi = 1.0;
    double y_lo = -1.0;
    double y_hi = 1.0;
};

/// (1/T) * integral over [0, T] of |psi(q, t)|^2, evaluated term by term in
/// closed form. Throws DegenerateFrequencies when two distinct terms share
/// an energy.
[[nodiscard]] double time_averaged_density(const OscillatorSuperposition2D& s, std::span<const double> q, double T);
[[nodiscard]] double time_averaged_density(const OscillatorSuperposition2D& s, const Configuration& q, double T);

/// sum_n |c_n|^2 |phi_n(q)|^2, the T -> infinity limit of the above.
[[nodiscard]] double diagonal_density(const OscillatorSuperposition2D& s, std::span<const double> q);

/// Square [-L, L]^2 with L = 1.2 times the classical turning radius of the
/// highest-energy term along the softer axis.
[[nodiscard]] Rect default_bounds(const OscillatorSuperposition2D& s);

/// L2 norm over `bounds` of time_averaged_density(., T) - diagonal_density.
[[nodiscard]] double cross_term_residual(const OscillatorSuperposition2D& s, double T, const Rect& bounds);
[[nodiscard]] double cross_term_residual(const OscillatorSuperposition2D& s, double T);

inline constexpr double kDefaultAccessThreshold = 1e-4;

/// Square grid of cells over a rectangle with a visited mask and an
/// accessible mask. Cell (i, j) is column i along x, row j along y.
class CoverageGrid {
public:
    CoverageGrid(const Rect& bounds, std::size_t resolution, std::vector<char> accessible);

    /// Accessible cells are those whose center has time-averaged density
    /// (horizon T) above relative_threshold times the largest center value.
    static CoverageGrid for_superposition(const OscillatorSuperposition2D& s, double T, std::size_t resolution = 64,
                                          double relative_threshold = kDefaultAccessThreshold);

    [[nodiscard]] const Rect& bounds() const noexcept { return bounds_; }
    [[nodiscard]] std::size_t resolution() const noexcept { return n_; }
    [[nodiscard]] double cell_width() const noexcept { return hx_; }
    [[nodiscard]] double cell_height() const noexcept { return hy_; }
    [[nodiscard]] std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * n_ + i; }
    [[nodiscard]] bool accessible(std::size_t cell) const { return accessible_[cell] != 0; }
    [[nodiscard]] bool visited(std::size_t cell) const { return visited_[cell] != 0; }
    [[nodiscard]] std::size_t accessible_count() const noexcept;
    [[nodiscard]] std::size_t visited_count() const noexcept;
    /// Visited cells that are accessible, over accessible cells.
    [[nodiscard]] double coverage_fraction() const noexcept;
    [[nodiscard]] Rect cell_rect(std::size_t cell) const;

    /// Marks every cell the polyline through the recorded points enters,
    /// considering samples with time <= t_stop. Returns the number of
    /// samples that lie outside the bounds.
    std::size_t mark(const Trajectory& trajectory, double t_stop = std::numeric_limits<double>::infinity());
    /// Marks samples [begin, end) and the segments leading into them.
    std::size_t mark_samples(const Trajectory& trajectory, std::size_t begin, std::size_t end);
    /// Union of visited masks; grids must share geometry.
    void merge(const CoverageGrid& other);
    void clear_visits();

private:
    void mark_point(double gx, double gy);
    void mark_segment(double ax, double ay, double bx, double by);

    Rect bounds_;
    std::size_t n_;
    double hx_;
    double hy_;
    std::vector<char> accessible_;
    std::vector<char> visited_;
};

struct CoverageResult {
    double fraction = 0.0;
    std::size_t visited = 0;
    std::size_t accessible = 0;
    std::size_t outside_samples = 0;
};

/// Coverage of one trajectory on a fresh copy of `grid`.
[[nodiscard]] CoverageResult coverage_fraction(const Trajectory& trajectory, const CoverageGrid& grid);

/// Coverage of the merged trajectories after each checkpoint time.
[[nodiscard]] std::vector<double> coverage_curve(std::span<const Trajectory> trajectories, const CoverageGrid& grid,
                                                 std::span<const double> checkpoints);

/// Largest distance between q(t) and q(t + period) over recorded t with
/// t + period inside the run; q(t + period) is linearly interpolated.
[[nodiscard]] double recurrence_metric(const Trajectory& trajectory, double period);

struct ErgodicReport {
    double time_avg = 0.0;
    double space_avg = 0.0;
    double discrepancy = 0.0;
    double coverage_fraction = 0.0;
    double cross_term_residual = 0.0;
    double horizon = 0.0;
};

using ConfigFunction = std::function<double(std::span<const double>)>;

/// Trapezoidal time average of f along the trajectories (mean over them).
[[nodiscard]] double trajectory_time_average(std::span<const Trajectory> trajectories, const ConfigFunction& f);

/// Integral of f against the time-averaged density with horizon T over
/// `bounds`, by tensor Gauss-Legendre with `panels` per axis.
[[nodiscard]] double invariant_average(const OscillatorSuperposition2D& s, const ConfigFunction& f, double T,
                                       const Rect& bounds, std::size_t panels = 32);

/// Time average along the trajectories against the space average of f,
/// plus coverage and cross-term residual at the trajectories' horizon.
[[nodiscard]] ErgodicReport ergodic_report(const OscillatorSuperposition2D& s,
                                           std::span<const Trajectory> trajectories, const ConfigFunction& f,
                                           const CoverageGrid& grid);

}  // namespace bohm
