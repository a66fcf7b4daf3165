#include <doctest.h>

#include <cmath>
#include <thread>

#include "bohm/equilibrium.hpp"
#include "bohm/errors.hpp"
#include "bohm/statistics.hpp"

using namespace bohm;

namespace {

std::size_t workers() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

double ks_bound(std::size_t n) { return 1.5 * ks_critical_value(n, 0.01); }

}  // namespace

TEST_CASE("empty sample set") {
    const auto s = sample_initial(GaussianPacket1D(0.0, 0.0, 1.0), 0.0, 0, 1);
    CHECK(s.samples.empty());
    CHECK(s.model_tag == "gaussian_packet");
}

TEST_CASE("packet samples have the right mean") {
    const auto s = sample_initial(GaussianPacket1D(2.0, 0.0, 1.0), 0.0, 100000, 17);
    std::vector<double> y;
    for (const auto& c : s.samples) y.push_back(c[0]);
    const auto m = mean_estimate(y);
    CHECK(std::abs(m.mean - 2.0) < 3.0 / std::sqrt(1e5) * 3.0);
    CHECK(m.std_error == doctest::Approx(1.0 / std::sqrt(1e5)).epsilon(0.02));
}

TEST_CASE("double-slit samples match the quadrature CDF") {
    const WaveModel slit = DoubleSlitState(1.0, 0.2);
    const auto s = sample_initial(slit, 0.0, 100000, 5, workers());
    const auto rep = distribution_distance(slit, s.samples, 0.0);
    CHECK(rep.statistic < 1.95 / std::sqrt(1e5) * 1.5);
    CHECK(rep.n_used == 100000);
}

TEST_CASE("tabulated CDF of a unit normal") {
    const TabulatedCdf cdf([](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }, -12.0, 12.0);
    CHECK(cdf.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    for (const double x : {-2.0, -0.3, 0.0, 1.1, 3.0}) {
        CHECK(std::abs(cdf(x) - 0.5 * std::erfc(-x / std::sqrt(2.0))) < 1e-10);
    }
    CHECK(cdf(-20.0) == 0.0);
    CHECK(cdf(20.0) == doctest::Approx(1.0));
    CHECK(ks_critical_value(50000, 0.01) == doctest::Approx(1.6276 / std::sqrt(50000.0)).epsilon(1e-4));
}

TEST_CASE("ks statistic of a known set") {
    const auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
    CHECK(ks_statistic({0.5}, uniform) == doctest::Approx(0.5));
    CHECK(ks_statistic({0.25, 0.75}, uniform) == doctest::Approx(0.25));
    CHECK(ks_statistic({0.9, 0.1, 0.5}, uniform) == doctest::Approx(0.9 - 2.0 / 3.0));
}

TEST_CASE("seed determinism, thread independence and support") {
    const std::vector<WaveModel> models = {
        GaussianPacket1D(0.0, 1.0, 0.5), DoubleSlitState(1.0, 0.2, 0.7), TwoParticleEntangledState(1.0, 0.2),
        OscillatorSuperposition2D::three_term(1.0, 2.0)};
    for (const auto& m : models) {
        const auto a = sample_initial(m, 0.3, 2000, 42, 1);
        const auto b = sample_initial(m, 0.3, 2000, 42, 4);
        const auto c = sample_initial(m, 0.3, 2000, 43, 1);
        CHECK(a.samples == b.samples);
        CHECK(a.samples != c.samples);
        for (const auto& q : a.samples) CHECK(density(m, q, 0.3) > 1e-300);
        const EquilibriumSampler sampler(m, 0.3);
        CHECK(sampler.draw(42, 17) == a.samples[17]);
    }
}

TEST_CASE("identity flow reproduces the sampling-time statistic") {
    const WaveModel pair = TwoParticleEntangledState(1.0, 0.2);
    const auto s = sample_initial(pair, 0.0, 5000, 3);
    const auto flowed = equivariance_distance(pair, s, 0.0, IntegratorConfig{});
    CHECK(flowed.statistic == distribution_distance(pair, s.samples, 0.0).statistic);
    CHECK(flowed.per_projection.size() == 4);
}

TEST_CASE("flowed packet samples stay in equilibrium") {
    const WaveModel g = GaussianPacket1D(0.0, 0.5, 0.7);
    const auto s = sample_initial(g, 0.0, 50000, 11, workers());
    IntegratorConfig cfg;
    cfg.t_end = 1.0;
    cfg.output_stride = 1.0;
    const auto rep = equivariance_distance(g, s, 1.0, cfg, workers());
    CHECK(rep.statistic < 0.012);
    CHECK(rep.n_failed == 0);
}

TEST_CASE("equivariance holds for every model and horizon") {
    const std::vector<WaveModel> models = {GaussianPacket1D(0.0, 0.5, 0.7), DoubleSlitState(1.0, 0.2),
                                           TwoParticleEntangledState(1.0, 0.2),
                                           OscillatorSuperposition2D::three_term(1.0, 2.0)};
    for (const auto& m : models) {
        const auto s = sample_initial(m, 0.0, 50000, 23, workers());
        for (const double t1 : {0.5, 1.0, 2.0}) {
            IntegratorConfig cfg;
            cfg.t_end = t1;
            cfg.output_stride = t1;
            const auto rep = equivariance_distance(m, s, t1, cfg, workers());
            INFO(model_tag(m), " t1=", t1, " stat=", rep.statistic);
            CHECK(rep.statistic < ks_bound(rep.n_used));
            CHECK(rep.n_failed == 0);
        }
    }
}

TEST_CASE("a corrupted flow is detected") {
    const WaveModel g = GaussianPacket1D(0.0, 0.5, 0.7);
    const auto s = sample_initial(g, 0.0, 50000, 11, workers());
    const auto base = guidance_field(g);
    const VelocityField doubled = [&](double t, std::span<const double> q, std::span<double> v) {
        base(t, q, v);
        v[0] *= 2.0;
    };
    IntegratorConfig cfg;
    cfg.t_end = 1.0;
    cfg.output_stride = 1.0;
    CHECK(equivariance_distance(g, doubled, s, 1.0, cfg, workers()).statistic > 0.05);
}

TEST_CASE("equivariance rejects t1 before t0") {
    const WaveModel g = GaussianPacket1D(0.0, 0.0, 1.0);
    const auto s = sample_initial(g, 1.0, 10, 1);
    CHECK_THROWS_AS((void)equivariance_distance(g, s, 0.5, IntegratorConfig{}), ContractViolation);
}
