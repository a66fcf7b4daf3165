#include "bohm/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bohm/errors.hpp"
#include "bohm/parallel.hpp"
#include "bohm/quadrature.hpp"
#include "bohm/statistics.hpp"

namespace bohm {
namespace {

constexpr double kMinAcceptance = 1e-4;
// A draw failing this many proposals in a row has acceptance below the floor
// by a factor of ten; give up on the envelope.
constexpr std::size_t kMaxProposals = static_cast<std::size_t>(10.0 / kMinAcceptance);

double normal_pdf(double x, double mu, double s) {
    const double z = (x - mu) / s;
    return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

struct EquilibriumSampler::Impl {
    WaveModel model;
    double t0;
    // Envelope: equal-weight mixture of axis-aligned Gaussians.
    std::vector<std::vector<double>> centers;
    std::vector<double> sigmas;  // per coordinate, shared by components
    double bound = 1.0;          // density <= bound * envelope
    bool exact = false;

    Impl(const WaveModel& m, double t) : model(m), t0(t) {}

    [[nodiscard]] double envelope(std::span<const double> q) const {
        double total = 0.0;
        for (const auto& c : centers) {
            double p = 1.0;
            for (std::size_t i = 0; i < q.size(); ++i) p *= normal_pdf(q[i], c[i], sigmas[i]);
            total += p;
        }
        return total / static_cast<double>(centers.size());
    }

    void propose(Engine& eng, std::vector<double>& q) const {
        std::uniform_int_distribution<std::size_t> pick(0, centers.size() - 1);
        std::normal_distribution<double> normal(0.0, 1.0);
        const auto& c = centers.size() == 1 ? centers[0] : centers[pick(eng)];
        for (std::size_t i = 0; i < q.size(); ++i) q[i] = c[i] + sigmas[i] * normal(eng);
    }
};

EquilibriumSampler::EquilibriumSampler(const WaveModel& model, double t0)
    : impl_(std::make_unique<Impl>(model, t0)) {
    auto& im = *impl_;
    if (const auto* g = std::get_if<GaussianPacket1D>(&model)) {
        im.exact = true;
        im.centers = {{g->center0() + g->drift() * t0}};
        im.sigmas = {width(*g, t0)};
        return;
    }
    if (const auto* s = std::get_if<DoubleSlitState>(&model)) {
        const double d = s->half_separation();
        im.centers = {{d}, {-d}};
        im.sigmas = {beam_width(model, t0)};
        // |g+ + e^{i phi} g-|^2 <= 2(|g+|^2 + |g-|^2) = 4 * mixture
        im.bound = 4.0 * s->norm_factor() * s->norm_factor();
        return;
    }
    if (const auto* p = std::get_if<TwoParticleEntangledState>(&model)) {
        const double d = p->half_separation();
        const double w = beam_width(model, t0);
        im.centers = {{d, -d}, {-d, d}};
        im.sigmas = {w, w};
        im.bound = 4.0 * p->norm_factor() * p->norm_factor();
        return;
    }
    const auto& o = std::get<OscillatorSuperposition2D>(model);
    const auto& c = o.constants();
    const double l1 = std::sqrt(c.hbar / (c.mass * o.omega1()));
    const double l2 = std::sqrt(c.hbar / (c.mass * o.omega2()));
    im.centers = {{0.0, 0.0}};
    im.sigmas = {l1 * std::sqrt(o.max_n1() + 1.0), l2 * std::sqrt(o.max_n2() + 1.0)};
    // Density/envelope decays in the tails, so its maximum sits inside this box.
    const double r1 = (std::sqrt(2.0 * o.max_n1() + 1.0) + 6.0) * l1;
    const double r2 = (std::sqrt(2.0 * o.max_n2() + 1.0) + 6.0) * l2;
    constexpr int kScan = 256;
    double worst = 0.0;
    for (int i = 0; i <= kScan; ++i) {
        for (int j = 0; j <= kScan; ++j) {
            const std::array<double, 2> q{-r1 + 2.0 * r1 * i / kScan, -r2 + 2.0 * r2 * j / kScan};
            worst = std::max(worst, density(model, q, t0) / im.envelope(q));
        }
    }
    im.bound = 1.5 * worst;
}

EquilibriumSampler::~EquilibriumSampler() = default;
EquilibriumSampler::EquilibriumSampler(EquilibriumSampler&&) noexcept = default;
EquilibriumSampler& EquilibriumSampler::operator=(EquilibriumSampler&&) noexcept = default;

Configuration EquilibriumSampler::draw(Engine& engine) const {
    const auto& im = *impl_;
    const std::size_t n = n_coords(im.model);
    std::vector<double> q(n);
    if (im.exact) {
        im.propose(engine, q);
        return {std::move(q), n_particles(im.model), n / n_particles(im.model)};
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t attempt = 0; attempt < kMaxProposals; ++attempt) {
        im.propose(engine, q);
        const double env = im.envelope(q);
        const double rho = density(im.model, q, im.t0);
        const double ratio = rho / (im.bound * env);
        if (ratio > 1.0 + 1e-9) {
            throw EnvelopeFailure("rejection envelope does not dominate the density of " + model_tag(im.model));
        }
        if (rho > 1e-300 && unif(engine) < ratio) {
            return {std::move(q), n_particles(im.model), n / n_particles(im.model)};
        }
    }
    throw EnvelopeFailure("acceptance rate below 1e-4 for " + model_tag(im.model));
}

Configuration EquilibriumSampler::draw(std::uint64_t seed, std::uint64_t index) const {
    Engine eng = make_engine(seed, index);
    return draw(eng);
}

SampleSet sample_initial(const WaveModel& model, double t0, std::size_t n, std::uint64_t seed, std::size_t threads) {
    SampleSet set;
    set.t0 = t0;
    set.seed = seed;
    set.model_tag = model_tag(model);
    if (n == 0) return set;
    const EquilibriumSampler sampler(model, t0);
    set.samples.resize(n);
    parallel_for(n, threads, [&](std::size_t i) { set.samples[i] = sampler.draw(seed, i); });
    return set;
}

const char* to_string(Projection p) {
    switch (p) {
        case Projection::coord0: return "coord0";
        case Projection::coord1: return "coord1";
        case Projection::sum: return "sum";
        case Projection::difference: return "difference";
    }
    return "?";
}

double project(std::span<const double> q, Projection p) {
    switch (p) {
        case Projection::coord0: return q[0];
        case Projection::coord1: return q[1];
        case Projection::sum: return q[0] + q[1];
        case Projection::difference: return q[0] - q[1];
    }
    return 0.0;
}

std::pair<double, double> projection_range(const WaveModel& model, double t, Projection p) {
    const Box box = support_box(model, t);
    switch (p) {
        case Projection::coord0: return {box.lo[0], box.hi[0]};
        case Projection::coord1: return {box.lo.at(1), box.hi.at(1)};
        case Projection::sum: return {box.lo.at(0) + box.lo.at(1), box.hi.at(0) + box.hi.at(1)};
        case Projection::difference: return {box.lo.at(0) - box.hi.at(1), box.hi.at(0) - box.lo.at(1)};
    }
    return {0.0, 0.0};
}

double marginal_density(const WaveModel& model, double t, Projection p, double u) {
    if (n_coords(model) == 1) {
        if (p != Projection::coord0) throw ContractViolation("one-coordinate models only have coord0");
        const std::array<double, 1> q{u};
        return density(model, q, t);
    }
    const Box box = support_box(model, t);
    QuadratureSpec spec;
    spec.abs_tol = 1e-13;
    spec.rel_tol = 1e-11;
    spec.initial_panels = 16;
    std::array<double, 2> q{};
    switch (p) {
        case Projection::coord0:
            return integrate([&](double y) { q = {u, y}; return density(model, q, t); }, box.lo[1], box.hi[1], spec)
                .value;
        case Projection::coord1:
            return integrate([&](double x) { q = {x, u}; return density(model, q, t); }, box.lo[0], box.hi[0], spec)
                .value;
        case Projection::sum:
        case Projection::difference: {
            // (u, w) = (sum, difference) or swapped; dq0 dq1 = du dw / 2.
            const auto [wlo, whi] =
                projection_range(model, t, p == Projection::sum ? Projection::difference : Projection::sum);
            const bool is_sum = p == Projection::sum;
            return 0.5 * integrate(
                             [&](double w) {
                                 q = is_sum ? std::array<double, 2>{0.5 * (u + w), 0.5 * (u - w)}
                                            : std::array<double, 2>{0.5 * (w + u), 0.5 * (w - u)};
                                 return density(model, q, t);
                             },
                             wlo, whi, spec)
                             .value;
        }
    }
    return 0.0;
}

EquivarianceReport distribution_distance(const WaveModel& model, std::span<const Configuration> configs, double t) {
    EquivarianceReport report;
    report.n_used = configs.size();
    std::vector<Projection> axes{Projection::coord0};
    if (n_coords(model) == 2) {
        axes = {Projection::coord0, Projection::coord1, Projection::sum, Projection::difference};
    }
    for (const Projection p : axes) {
        std::vector<double> values;
        values.reserve(configs.size());
        for (const auto& c : configs) values.push_back(project(c.coords(), p));
        const auto [lo, hi] = projection_range(model, t, p);
        const std::size_t cells = n_coords(model) == 1 ? 4000 : 1200;
        const TabulatedCdf cdf([&](double u) { return marginal_density(model, t, p, u); }, lo, hi, cells, 4);
        const double d = ks_statistic(std::move(values), [&](double x) { return cdf(x); });
        report.per_projection.emplace_back(p, d);
        report.statistic = std::max(report.statistic, d);
    }
    return report;
}

EquivarianceReport equivariance_distance(const WaveModel& model, const VelocityField& field, const SampleSet& samples,
                                         double t1, const IntegratorConfig& cfg, std::size_t threads) {
    if (!(t1 >= samples.t0)) throw ContractViolation("equivariance_distance needs t1 >= samples.t0");
    if (t1 == samples.t0) return distribution_distance(model, samples.samples, t1);
    IntegratorConfig run = cfg;
    run.t0 = samples.t0;
    run.t_end = t1;
    run.output_stride = t1 - samples.t0;
    const EnsembleResult flowed = flow_ensemble(field, samples.samples, run, threads);
    std::vector<Configuration> finals;
    finals.reserve(samples.samples.size());
    for (const auto& tr : flowed.trajectories) {
        if (!tr.empty()) finals.push_back(tr.configs.back());
    }
    EquivarianceReport report = distribution_distance(model, finals, t1);
    report.n_failed = flowed.failures.size();
    return report;
}

EquivarianceReport equivariance_distance(const WaveModel& model, const SampleSet& samples, double t1,
                                         const IntegratorConfig& cfg, std::size_t threads) {
    return equivariance_distance(model, guidance_field(model, cfg.node_eps), samples, t1, cfg, threads);
}

}  // namespace bohm
