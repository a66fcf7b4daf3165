#include "bohm/wavemodels.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <set>
#include <utility>

#include "bohm/errors.hpp"

namespace bohm {
namespace {

constexpr complex kI{0.0, 1.0};
constexpr int kMaxQuantum = 64;

void require(bool ok, const char* what) {
    if (!ok) {
        throw ContractViolation(what);
    }
}

void check_coords(const WaveModel& model, std::span<const double> q) {
    if (q.size() != n_coords(model)) {
        throw ContractViolation("configuration has " + std::to_string(q.size()) + " coordinates, model " +
                                model_tag(model) + " expects " + std::to_string(n_coords(model)));
    }
}

// log psi and d(log psi)/dq for each coordinate.
struct LogEval {
    complex log_psi;
    complex dlog[2];
};

double tau_of(double sigma0, const PhysicalConstants& c, double t) {
    return c.hbar * t / (2.0 * c.mass * sigma0 * sigma0);
}

// log(e^a + e^b) without overflow or underflow of the moduli.
complex log_sum_exp(complex a, complex b, complex& wa, complex& wb) {
    const double m = std::max(a.real(), b.real());
    if (!std::isfinite(m)) {
        wa = wb = 0.0;
        return {-std::numeric_limits<double>::infinity(), 0.0};
    }
    const complex ea = std::exp(a - m);
    const complex eb = std::exp(b - m);
    const complex s = ea + eb;
    wa = ea / s;
    wb = eb / s;
    return m + std::log(s);
}

LogEval eval_gaussian(const GaussianPacket1D& g, std::span<const double> q, double t) {
    const auto& c = g.constants();
    const double s0 = g.sigma0();
    const double tau = tau_of(s0, c, t);
    const complex cw = 1.0 + kI * tau;
    const double k0 = c.mass * g.drift() / c.hbar;
    const double dy = q[0] - g.center0() - g.drift() * t;
    const complex inv = 1.0 / (4.0 * s0 * s0 * cw);
    LogEval e{};
    e.log_psi = -0.25 * std::log(2.0 * std::numbers::pi * s0 * s0) - 0.5 * std::log(cw) - dy * dy * inv +
                kI * (k0 * (q[0] - g.center0()) - c.hbar * k0 * k0 * t / (2.0 * c.mass));
    e.dlog[0] = -2.0 * dy * inv + kI * k0;
    return e;
}

LogEval eval_double_slit(const DoubleSlitState& s, std::span<const double> q, double t) {
    const auto& c = s.constants();
    const double s0 = s.sigma0();
    const double d = s.half_separation();
    const complex cw = 1.0 + kI * tau_of(s0, c, t);
    const complex inv = 1.0 / (4.0 * s0 * s0 * cw);
    const double y = q[0];
    const double dp = y - d;
    const double dm = y + d;
    const complex a = -dp * dp * inv;
    const complex b = -dm * dm * inv + kI * s.relative_phase();
    complex wa;
    complex wb;
    const complex lse = log_sum_exp(a, b, wa, wb);
    LogEval e{};
    e.log_psi = std::log(s.norm_factor()) - 0.25 * std::log(2.0 * std::numbers::pi * s0 * s0) -
                0.5 * std::log(cw) + lse;
    e.dlog[0] = -2.0 * inv * (dp * wa + dm * wb);
    return e;
}

LogEval eval_two_particle(const TwoParticleEntangledState& s, std::span<const double> q, double t) {
    const auto& c = s.constants();
    const double s0 = s.sigma0();
    const double two_d = 2.0 * s.half_separation();
    const complex cw = 1.0 + kI * tau_of(s0, c, t);
    const complex inv = 1.0 / (8.0 * s0 * s0 * cw);
    const double sum = q[0] + q[1];
    const double rel = q[0] - q[1];
    const double rm = rel - two_d;
    const double rp = rel + two_d;
    const complex a = -rm * rm * inv;
    complex b = -rp * rp * inv;
    if (s.symmetrization_sign() < 0) {
        b += kI * std::numbers::pi;
    }
    complex wa;
    complex wb;
    const complex lse = log_sum_exp(a, b, wa, wb);
    LogEval e{};
    e.log_psi = std::log(s.norm_factor()) - 0.5 * std::log(2.0 * std::numbers::pi * s0 * s0) - std::log(cw) -
                sum * sum * inv + lse;
    const complex d_sum = -2.0 * sum * inv;
    const complex d_rel = -2.0 * inv * (rm * wa + rp * wb);
    e.dlog[0] = d_sum + d_rel;
    e.dlog[1] = d_sum - d_rel;
    return e;
}

struct OscEval {
    complex psi;
    complex grad[2];
};

OscEval eval_oscillator(const OscillatorSuperposition2D& s, std::span<const double> q, double t) {
    const auto& c = s.constants();
    const double ell1 = std::sqrt(c.hbar / (c.mass * s.omega1()));
    const double ell2 = std::sqrt(c.hbar / (c.mass * s.omega2()));
    const int n1 = s.max_n1();
    const int n2 = s.max_n2();
    std::array<double, kMaxQuantum + 1> fx{};
    std::array<double, kMaxQuantum + 1> dfx{};
    std::array<double, kMaxQuantum + 1> fy{};
    std::array<double, kMaxQuantum + 1> dfy{};
    hermite_functions(n1, q[0], ell1, fx, dfx);
    hermite_functions(n2, q[1], ell2, fy, dfy);
    OscEval e{};
    for (const auto& term : s.terms()) {
        const complex ph = term.coeff * std::exp(-kI * (s.energy(term) * t / c.hbar));
        const auto i = static_cast<std::size_t>(term.n1);
        const auto j = static_cast<std::size_t>(term.n2);
        e.psi += ph * (fx[i] * fy[j]);
        e.grad[0] += ph * (dfx[i] * fy[j]);
        e.grad[1] += ph * (fx[i] * dfy[j]);
    }
    return e;
}

}  // namespace

// ---------------------------------------------------------------------------

void PhysicalConstants::validate() const {
    require(std::isfinite(hbar) && hbar > 0.0, "hbar must be positive and finite");
    require(std::isfinite(mass) && mass > 0.0, "mass must be positive and finite");
}

Configuration::Configuration(std::vector<double> coords, std::size_t n_particles, std::size_t dims)
    : coords_(std::move(coords)), n_particles_(n_particles), dims_(dims) {
    require(dims_ >= 1, "configuration dims must be >= 1");
    require(coords_.size() == n_particles_ * dims_, "configuration length must equal n_particles * dims");
    require(std::all_of(coords_.begin(), coords_.end(), [](double x) { return std::isfinite(x); }),
            "configuration coordinates must be finite");
}

GaussianPacket1D::GaussianPacket1D(double center0, double drift, double sigma0, PhysicalConstants constants)
    : center0_(center0), drift_(drift), sigma0_(sigma0), constants_(constants) {
    constants_.validate();
    require(std::isfinite(center0) && std::isfinite(drift), "packet center and drift must be finite");
    require(std::isfinite(sigma0) && sigma0 > 0.0, "sigma0 must be positive");
}

DoubleSlitState::DoubleSlitState(double half_separation, double sigma0, double relative_phase,
                                 PhysicalConstants constants)
    : half_separation_(half_separation), sigma0_(sigma0), relative_phase_(relative_phase), constants_(constants) {
    constants_.validate();
    require(std::isfinite(half_separation) && half_separation > 0.0, "half_separation must be positive");
    require(std::isfinite(sigma0) && sigma0 > 0.0, "sigma0 must be positive");
    require(std::isfinite(relative_phase), "relative_phase must be finite");
    // <g+|g-> = exp(-d^2 / (2 s0^2)), real and conserved by the free evolution.
    const double overlap = std::exp(-half_separation * half_separation / (2.0 * sigma0 * sigma0));
    const double norm2 = 2.0 * (1.0 + std::cos(relative_phase) * overlap);
    require(norm2 > 0.0, "double slit branches cancel exactly");
    norm_ = 1.0 / std::sqrt(norm2);
}

TwoParticleEntangledState::TwoParticleEntangledState(double half_separation, double sigma0,
                                                     PhysicalConstants constants, int symmetrization_sign)
    : half_separation_(half_separation), sigma0_(sigma0), constants_(constants), sign_(symmetrization_sign) {
    constants_.validate();
    require(std::isfinite(half_separation) && half_separation > 0.0, "half_separation must be positive");
    require(std::isfinite(sigma0) && sigma0 > 0.0, "sigma0 must be positive");
    require(sign_ == 1 || sign_ == -1, "symmetrization_sign must be +1 or -1");
    const double overlap2 = std::exp(-half_separation * half_separation / (sigma0 * sigma0));
    norm_ = 1.0 / std::sqrt(2.0 * (1.0 + sign_ * overlap2));
}

OscillatorSuperposition2D::OscillatorSuperposition2D(double omega1, double omega2, std::vector<OscillatorTerm> terms,
                                                     PhysicalConstants constants)
    : omega1_(omega1), omega2_(omega2), terms_(std::move(terms)), constants_(constants) {
    constants_.validate();
    require(std::isfinite(omega1) && omega1 > 0.0 && std::isfinite(omega2) && omega2 > 0.0,
            "oscillator frequencies must be positive");
    require(!terms_.empty(), "superposition needs at least one term");
    std::set<std::pair<int, int>> seen;
    double norm2 = 0.0;
    for (const auto& t : terms_) {
        require(t.n1 >= 0 && t.n2 >= 0, "quantum numbers must be non-negative");
        require(t.n1 <= kMaxQuantum && t.n2 <= kMaxQuantum, "quantum numbers above 64 are not supported");
        require(seen.emplace(t.n1, t.n2).second, "superposition terms must have distinct (n1, n2)");
        norm2 += std::norm(t.coeff);
    }
    require(std::abs(norm2 - 1.0) <= 1e-9, "superposition coefficients must satisfy sum |c|^2 = 1");
}

OscillatorSuperposition2D OscillatorSuperposition2D::three_term(double omega1, double omega2,
                                                                PhysicalConstants constants) {
    const double c = 1.0 / std::sqrt(3.0);
    return {omega1, omega2, {{0, 0, c}, {1, 0, c}, {0, 1, c}}, constants};
}

OscillatorSuperposition2D OscillatorSuperposition2D::two_term(double omega1, double omega2,
                                                              PhysicalConstants constants) {
    const double c = std::numbers::sqrt2 / 2.0;
    return {omega1, omega2, {{0, 1, c}, {1, 0, c}}, constants};
}

OscillatorSuperposition2D OscillatorSuperposition2D::default_superposition(double omega1, double omega2,
                                                                           PhysicalConstants constants) {
    return two_term(omega1, omega2, constants);
}

double OscillatorSuperposition2D::energy(const OscillatorTerm& term) const noexcept {
    return constants_.hbar * (omega1_ * (term.n1 + 0.5) + omega2_ * (term.n2 + 0.5));
}

int OscillatorSuperposition2D::max_n1() const noexcept {
    int m = 0;
    for (const auto& t : terms_) m = std::max(m, t.n1);
    return m;
}

int OscillatorSuperposition2D::max_n2() const noexcept {
    int m = 0;
    for (const auto& t : terms_) m = std::max(m, t.n2);
    return m;
}

// ---------------------------------------------------------------------------

std::string model_tag(const WaveModel& model) {
    struct {
        std::string operator()(const GaussianPacket1D&) const { return "gaussian_packet"; }
        std::string operator()(const DoubleSlitState&) const { return "double_slit"; }
        std::string operator()(const TwoParticleEntangledState&) const { return "two_particle_entangled"; }
        std::string operator()(const OscillatorSuperposition2D&) const { return "oscillator_2d"; }
    } v;
    return std::visit(v, model);
}

std::size_t n_particles(const WaveModel& model) {
    return std::holds_alternative<TwoParticleEntangledState>(model) ? 2 : 1;
}

std::size_t n_coords(const WaveModel& model) {
    return std::holds_alternative<TwoParticleEntangledState>(model) ||
                   std::holds_alternative<OscillatorSuperposition2D>(model)
               ? 2
               : 1;
}

const PhysicalConstants& constants_of(const WaveModel& model) {
    return std::visit([](const auto& m) -> const PhysicalConstants& { return m.constants(); }, model);
}

namespace {

// Either a log-form evaluation (Gaussian models) or a direct one (oscillator).
struct Evaluated {
    bool log_form = true;
    LogEval log{};
    OscEval direct{};
};

Evaluated evaluate(const WaveModel& model, std::span<const double> q, double t) {
    check_coords(model, q);
    Evaluated out;
    if (const auto* g = std::get_if<GaussianPacket1D>(&model)) {
        out.log = eval_gaussian(*g, q, t);
    } else if (const auto* s = std::get_if<DoubleSlitState>(&model)) {
        out.log = eval_double_slit(*s, q, t);
    } else if (const auto* p = std::get_if<TwoParticleEntangledState>(&model)) {
        out.log = eval_two_particle(*p, q, t);
    } else {
        out.log_form = false;
        out.direct = eval_oscillator(std::get<OscillatorSuperposition2D>(model), q, t);
    }
    return out;
}

}  // namespace

complex amplitude(const WaveModel& model, std::span<const double> q, double t) {
    const Evaluated e = evaluate(model, q, t);
    return e.log_form ? std::exp(e.log.log_psi) : e.direct.psi;
}

complex amplitude(const WaveModel& model, const Configuration& config, double t) {
    return amplitude(model, config.coords(), t);
}

double density(const WaveModel& model, std::span<const double> q, double t) {
    const Evaluated e = evaluate(model, q, t);
    return e.log_form ? std::exp(2.0 * e.log.log_psi.real()) : std::norm(e.direct.psi);
}

double density(const WaveModel& model, const Configuration& config, double t) {
    return density(model, config.coords(), t);
}

void velocity(const WaveModel& model, std::span<const double> q, double t, std::span<double> out,
              double node_eps) {
    const Evaluated e = evaluate(model, q, t);
    const std::size_t n = q.size();
    if (out.size() != n) {
        throw ContractViolation("velocity output span has wrong length");
    }
    const auto& c = constants_of(model);
    const double scale = c.hbar / c.mass;
    if (e.log_form) {
        if (!(e.log.log_psi.real() > std::log(node_eps))) {
            throw NodeProximity("|psi| <= node_eps at t=" + std::to_string(t));
        }
        for (std::size_t i = 0; i < n; ++i) out[i] = scale * e.log.dlog[i].imag();
    } else {
        if (!(std::abs(e.direct.psi) > node_eps)) {
            throw NodeProximity("|psi| <= node_eps at t=" + std::to_string(t));
        }
        const double inv_norm = 1.0 / std::norm(e.direct.psi);
        for (std::size_t i = 0; i < n; ++i) {
            // Im(grad / psi) = Im(grad * conj(psi)) / |psi|^2
            out[i] = scale * (e.direct.grad[i] * std::conj(e.direct.psi)).imag() * inv_norm;
        }
    }
}

std::vector<double> velocity(const WaveModel& model, const Configuration& config, double t, double node_eps) {
    std::vector<double> v(config.size());
    velocity(model, config.coords(), t, v, node_eps);
    return v;
}

double spreading_factor(double sigma0, const PhysicalConstants& constants, double t) {
    const double tau = tau_of(sigma0, constants, t);
    return std::sqrt(1.0 + tau * tau);
}

double width(const GaussianPacket1D& packet, double t) {
    return packet.sigma0() * spreading_factor(packet.sigma0(), packet.constants(), t);
}

double beam_width(const WaveModel& model, double t) {
    if (const auto* g = std::get_if<GaussianPacket1D>(&model)) return width(*g, t);
    if (const auto* s = std::get_if<DoubleSlitState>(&model)) {
        return s->sigma0() * spreading_factor(s->sigma0(), s->constants(), t);
    }
    if (const auto* p = std::get_if<TwoParticleEntangledState>(&model)) {
        return p->sigma0() * spreading_factor(p->sigma0(), p->constants(), t);
    }
    throw ContractViolation("beam_width is defined for Gaussian slit models only");
}

Box support_box(const WaveModel& model, double t) {
    constexpr double kSigmas = 12.0;
    if (const auto* g = std::get_if<GaussianPacket1D>(&model)) {
        const double c = g->center0() + g->drift() * t;
        const double w = kSigmas * width(*g, t);
        return {{c - w}, {c + w}};
    }
    if (std::holds_alternative<DoubleSlitState>(model)) {
        const auto& s = std::get<DoubleSlitState>(model);
        const double w = s.half_separation() + kSigmas * beam_width(model, t);
        return {{-w}, {w}};
    }
    if (std::holds_alternative<TwoParticleEntangledState>(model)) {
        const auto& s = std::get<TwoParticleEntangledState>(model);
        // Y and r each have spread sqrt(2) sigma(t); y = (Y +- r) / 2.
        const double w = s.half_separation() + kSigmas * beam_width(model, t);
        return {{-w, -w}, {w, w}};
    }
    const auto& o = std::get<OscillatorSuperposition2D>(model);
    const auto& c = o.constants();
    const double l1 = std::sqrt(c.hbar / (c.mass * o.omega1()));
    const double l2 = std::sqrt(c.hbar / (c.mass * o.omega2()));
    const double w1 = (std::sqrt(2.0 * o.max_n1() + 1.0) + 9.0) * l1;
    const double w2 = (std::sqrt(2.0 * o.max_n2() + 1.0) + 9.0) * l2;
    return {{-w1, -w2}, {w1, w2}};
}

double hermite_function(int n, double x, double ell) {
    std::vector<double> v(static_cast<std::size_t>(n) + 1);
    std::vector<double> d(v.size());
    hermite_functions(n, x, ell, v, d);
    return v.back();
}

void hermite_functions(int n_max, double x, double ell, std::span<double> values, std::span<double> derivs) {
    require(n_max >= 0 && values.size() > static_cast<std::size_t>(n_max) &&
                derivs.size() > static_cast<std::size_t>(n_max),
            "hermite_functions: buffers too small");
    const double xi = x / ell;
    const double h0 = std::exp(-0.5 * xi * xi) / (std::pow(std::numbers::pi, 0.25) * std::sqrt(ell));
    // Normalized recurrence: h_{n+1} = sqrt(2/(n+1)) xi h_n - sqrt(n/(n+1)) h_{n-1}.
    double prev = 0.0;
    double cur = h0;
    values[0] = h0;
    double next = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        next = std::sqrt(2.0 / (n + 1)) * xi * cur - std::sqrt(static_cast<double>(n) / (n + 1)) * prev;
        if (n + 1 <= n_max) values[static_cast<std::size_t>(n) + 1] = next;
        // phi_n' = (sqrt(n/2) phi_{n-1} - sqrt((n+1)/2) phi_{n+1}) / ell
        derivs[static_cast<std::size_t>(n)] = (std::sqrt(n / 2.0) * prev - std::sqrt((n + 1) / 2.0) * next) / ell;
        prev = cur;
        cur = next;
    }
}

}  // namespace bohm
