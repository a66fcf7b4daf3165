#pragma once

// Closed-form wavefunction models and their guidance fields.
//
// All models are immutable after construction; every operation is a pure
// function of (model, configuration, time). Coordinates are transverse only:
// one coordinate per particle for the slit models, (x, y) normal-mode
// coordinates for the oscillator.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace bohm {

using complex = std::complex<double>;

inline constexpr double kDefaultNodeEps = 1e-12;

struct PhysicalConstants {
    double hbar = 1.0;
    double mass = 1.0;

    void validate() const;
    friend bool operator==(const PhysicalConstants&, const PhysicalConstants&) = default;
};

/// Positions of all particles, flattened particle-major.
class Configuration {
public:
    Configuration() = default;
    Configuration(std::vector<double> coords, std::size_t n_particles, std::size_t dims = 1);

    [[nodiscard]] std::span<const double> coords() const noexcept { return coords_; }
    [[nodiscard]] std::size_t n_particles() const noexcept { return n_particles_; }
    [[nodiscard]] std::size_t dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t size() const noexcept { return coords_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return coords_[i]; }

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    std::vector<double> coords_;
    std::size_t n_particles_ = 0;
    std::size_t dims_ = 1;
};

/// Free Gaussian packet with drift. Its density width follows
/// sigma(t) = sigma0 * sqrt(1 + (hbar t / (2 m sigma0^2))^2).
class GaussianPacket1D {
public:
    GaussianPacket1D(double center0, double drift, double sigma0, PhysicalConstants constants = {});

    [[nodiscard]] double center0() const noexcept { return center0_; }
    [[nodiscard]] double drift() const noexcept { return drift_; }
    [[nodiscard]] double sigma0() const noexcept { return sigma0_; }
    [[nodiscard]] const PhysicalConstants& constants() const noexcept { return constants_; }

private:
    double center0_;
    double drift_;
    double sigma0_;
    PhysicalConstants constants_;
};

/// One particle behind two Gaussian slits centered at +d and -d.
class DoubleSlitState {
public:
    DoubleSlitState(double half_separation, double sigma0, double relative_phase = 0.0,
                    PhysicalConstants constants = {});

    [[nodiscard]] double half_separation() const noexcept { return half_separation_; }
    [[nodiscard]] double sigma0() const noexcept { return sigma0_; }
    [[nodiscard]] double relative_phase() const noexcept { return relative_phase_; }
    [[nodiscard]] const PhysicalConstants& constants() const noexcept { return constants_; }
    /// 1 / sqrt(<psi|psi>) of the unnormalized branch sum.
    [[nodiscard]] double norm_factor() const noexcept { return norm_; }

private:
    double half_separation_;
    double sigma0_;
    double relative_phase_;
    PhysicalConstants constants_;
    double norm_;
};

/// Pair emitted with one particle through each slit:
/// N [g+(y1) g-(y2) + sign * g-(y1) g+(y2)].
///
/// Internally evaluated in sum/difference coordinates Y = y1 + y2 and
/// r = y1 - y2, where the state factorizes into a free Gaussian in Y times
/// a two-branch superposition in r.
class TwoParticleEntangledState {
public:
    TwoParticleEntangledState(double half_separation, double sigma0, PhysicalConstants constants = {},
                              int symmetrization_sign = +1);

    [[nodiscard]] double half_separation() const noexcept { return half_separation_; }
    [[nodiscard]] double sigma0() const noexcept { return sigma0_; }
    [[nodiscard]] int symmetrization_sign() const noexcept { return sign_; }
    [[nodiscard]] const PhysicalConstants& constants() const noexcept { return constants_; }
    [[nodiscard]] double norm_factor() const noexcept { return norm_; }

private:
    double half_separation_;
    double sigma0_;
    PhysicalConstants constants_;
    int sign_;
    double norm_;
};

struct OscillatorTerm {
    int n1 = 0;
    int n2 = 0;
    complex coeff{1.0, 0.0};

    friend bool operator==(const OscillatorTerm&, const OscillatorTerm&) = default;
};

/// Superposition of 2-D harmonic oscillator eigenstates in normal-mode
/// coordinates, each term phased by exp(-i E t / hbar) with
/// E = hbar w1 (n1 + 1/2) + hbar w2 (n2 + 1/2).
class OscillatorSuperposition2D {
public:
    OscillatorSuperposition2D(double omega1, double omega2, std::vector<OscillatorTerm> terms,
                              PhysicalConstants constants = {});

    /// phi_0(x)phi_0(y) + phi_1(x)phi_0(y) + phi_0(x)phi_1(y), equal weights.
    static OscillatorSuperposition2D three_term(double omega1, double omega2,
                                                PhysicalConstants constants = {});
    /// phi_0(x)phi_1(y) + phi_1(x)phi_0(y), equal weights.
    static OscillatorSuperposition2D two_term(double omega1, double omega2,
                                              PhysicalConstants constants = {});
    /// Same as two_term.
    static OscillatorSuperposition2D default_superposition(double omega1, double omega2,
                                                           PhysicalConstants constants = {});

    [[nodiscard]] double omega1() const noexcept { return omega1_; }
    [[nodiscard]] double omega2() const noexcept { return omega2_; }
    [[nodiscard]] const std::vector<OscillatorTerm>& terms() const noexcept { return terms_; }
    [[nodiscard]] const PhysicalConstants& constants() const noexcept { return constants_; }
    [[nodiscard]] double energy(const OscillatorTerm& term) const noexcept;
    [[nodiscard]] int max_n1() const noexcept;
    [[nodiscard]] int max_n2() const noexcept;

private:
    double omega1_;
    double omega2_;
    std::vector<OscillatorTerm> terms_;
    PhysicalConstants constants_;
};

using WaveModel =
    std::variant<GaussianPacket1D, DoubleSlitState, TwoParticleEntangledState, OscillatorSuperposition2D>;

/// Short identifier of the model kind, e.g. "gaussian_packet".
[[nodiscard]] std::string model_tag(const WaveModel& model);
[[nodiscard]] std::size_t n_particles(const WaveModel& model);
/// Length of a configuration vector accepted by the model.
[[nodiscard]] std::size_t n_coords(const WaveModel& model);
[[nodiscard]] const PhysicalConstants& constants_of(const WaveModel& model);

[[nodiscard]] complex amplitude(const WaveModel& model, std::span<const double> q, double t);
[[nodiscard]] complex amplitude(const WaveModel& model, const Configuration& config, double t);

[[nodiscard]] double density(const WaveModel& model, std::span<const double> q, double t);
[[nodiscard]] double density(const WaveModel& model, const Configuration& config, double t);

/// Guidance velocity (hbar/m) Im(grad psi / psi), written into `out`.
/// Throws NodeProximity when |psi| <= node_eps.
void velocity(const WaveModel& model, std::span<const double> q, double t, std::span<double> out,
              double node_eps = kDefaultNodeEps);
[[nodiscard]] std::vector<double> velocity(const WaveModel& model, const Configuration& config, double t,
                                           double node_eps = kDefaultNodeEps);

/// sqrt(1 + (hbar t / (2 m sigma0^2))^2).
[[nodiscard]] double spreading_factor(double sigma0, const PhysicalConstants& constants, double t);
[[nodiscard]] double width(const GaussianPacket1D& packet, double t);

/// Width of a single slit branch at time t (sigma0 times the spreading factor).
/// Defined for the Gaussian-based models; ContractViolation for the oscillator.
[[nodiscard]] double beam_width(const WaveModel& model, double t);

/// Axis-aligned box outside which the density is negligible (below ~1e-30 of its peak).
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;
};
[[nodiscard]] Box support_box(const WaveModel& model, double t);

/// Normalized Hermite function phi_n for oscillator length `ell`, and its derivative.
[[nodiscard]] double hermite_function(int n, double x, double ell);
void hermite_functions(int n_max, double x, double ell, std::span<double> values, std::span<double> derivs);

}  // namespace bohm
