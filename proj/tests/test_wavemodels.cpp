#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bohm/errors.hpp"
#include "bohm/quadrature.hpp"
#include "bohm/wavemodels.hpp"
#include "oracles.hpp"

using namespace bohm;

namespace {

std::vector<WaveModel> test_models() {
    return {GaussianPacket1D(0.3, 0.7, 1.0), DoubleSlitState(1.0, 0.2), DoubleSlitState(1.0, 0.3, 0.8),
            TwoParticleEntangledState(1.0, 0.2), TwoParticleEntangledState(1.0, 1.0),
            OscillatorSuperposition2D::three_term(1.0, 2.0),
            OscillatorSuperposition2D::two_term(1.0, (1.0 + std::sqrt(5.0)) / 2.0)};
}

double norm_by_quadrature(const WaveModel& m, double t) {
    const Box b = support_box(m, t);
    QuadratureSpec spec;
    spec.abs_tol = 1e-11;
    spec.initial_panels = 16;
    if (n_coords(m) == 1) {
        return integrate([&](double y) { return density(m, std::array<double, 1>{y}, t); }, b.lo[0], b.hi[0], spec)
            .value;
    }
    return integrate_2d([&](double x, double y) { return density(m, std::array<double, 2>{x, y}, t); }, b.lo[0],
                        b.hi[0], b.lo[1], b.hi[1], spec)
        .value;
}

// Phase gradient by centered differences of arg(psi(q + h) / psi(q - h)).
std::vector<double> fd_velocity(const WaveModel& m, std::vector<double> q, double t, double h) {
    const auto& c = constants_of(m);
    std::vector<double> v(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        auto qp = q;
        auto qm = q;
        qp[i] += h;
        qm[i] -= h;
        v[i] = c.hbar / c.mass * std::arg(amplitude(m, qp, t) / amplitude(m, qm, t)) / (2.0 * h);
    }
    return v;
}

// Local potential of each model (nonzero only for the oscillator).
double potential(const WaveModel& m, std::span<const double> q) {
    if (const auto* o = std::get_if<OscillatorSuperposition2D>(&m)) {
        const double mass = o->constants().mass;
        return 0.5 * mass * (o->omega1() * o->omega1() * q[0] * q[0] + o->omega2() * o->omega2() * q[1] * q[1]);
    }
    return 0.0;
}

}  // namespace

TEST_CASE("gaussian packet amplitude at its center is the normalization constant") {
    const WaveModel g = GaussianPacket1D(0.0, 0.0, 1.0);
    const complex a = amplitude(g, std::array<double, 1>{0.0}, 0.0);
    CHECK(std::abs(a) == doctest::Approx(std::pow(2.0 * std::numbers::pi, -0.25)).epsilon(1e-15));
    CHECK(std::abs(a.imag()) < 1e-16);
}

TEST_CASE("gaussian packet matches a Crank-Nicolson solution of the free equation") {
    // Richardson-extrapolated CN at two resolutions; both errors are O(h^2).
    const auto coarse = oracle::crank_nicolson_unit_gaussian(20.0, 0.01, 1.0, 0.5);
    const auto fine = oracle::crank_nicolson_unit_gaussian(20.0, 0.005, 1.0, 0.5);
    const auto extrapolated = (4.0 * fine - coarse) / 3.0;
    const WaveModel g = GaussianPacket1D(0.0, 0.0, 1.0);
    const complex a = amplitude(g, std::array<double, 1>{0.5}, 1.0);
    CHECK(std::abs(a - extrapolated) < 1e-6);
    CHECK(std::abs(a - oracle::free_gaussian(0.5, 0.0, 1.0, 1.0)) < 1e-14);
}

TEST_CASE("density is |amplitude|^2") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0.0, 1.0);
    for (const auto& m : test_models()) {
        for (int k = 0; k < 20; ++k) {
            std::vector<double> q(n_coords(m));
            for (auto& x : q) x = n(rng);
            const double t = std::abs(n(rng));
            CHECK(density(m, q, t) == doctest::Approx(std::norm(amplitude(m, q, t))).epsilon(1e-13));
        }
    }
}

TEST_CASE("every model stays normalized") {
    for (const auto& m : test_models()) {
        for (const double t : {0.0, 1.0, 3.0, 5.0}) {
            INFO(model_tag(m), " t=", t);
            CHECK(std::abs(norm_by_quadrature(m, t) - 1.0) < 1e-8);
        }
    }
}

TEST_CASE("two-particle density agrees with the plain symmetrized product") {
    const WaveModel p = TwoParticleEntangledState(1.0, 0.2);
    for (const double t : {0.0, 0.4, 2.0}) {
        const double direct = std::norm(oracle::symmetrized_pair(0.9, -1.1, 1.0, 0.2, t));
        CHECK(density(p, std::array<double, 2>{0.9, -1.1}, t) == doctest::Approx(direct).epsilon(1e-12));
        const auto a = amplitude(p, std::array<double, 2>{0.35, 0.8}, t);
        CHECK(std::abs(a - oracle::symmetrized_pair(0.35, 0.8, 1.0, 0.2, t)) < 1e-12);
    }
}

TEST_CASE("guidance velocity closed-form cases") {
    const WaveModel g = GaussianPacket1D(0.0, 0.7, 1.0);
    for (const double t : {0.0, 0.5, 3.0}) {
        CHECK(velocity(g, Configuration({0.7 * t}, 1), t)[0] == doctest::Approx(0.7).epsilon(1e-14));
    }
    const WaveModel still = GaussianPacket1D(0.4, 0.0, 0.6);
    for (const double y : {-2.0, 0.1, 1.7}) CHECK(velocity(still, Configuration({y}, 1), 0.0)[0] == 0.0);
}

TEST_CASE("guidance velocity matches finite differences of the phase") {
    const WaveModel p = TwoParticleEntangledState(1.0, 0.2);
    const auto v = velocity(p, Configuration({0.3, -0.3}, 2), 0.5);
    const auto fd = fd_velocity(p, {0.3, -0.3}, 0.5, 1e-5);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(v[i] - fd[i]) <= 1e-6 * std::abs(fd[i]));

    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 0.8);
    for (const auto& m : test_models()) {
        for (int k = 0; k < 25; ++k) {
            std::vector<double> q(n_coords(m));
            for (auto& x : q) x = n(rng);
            const double t = 0.1 + std::abs(n(rng));
            if (density(m, q, t) < 1e-8) continue;
            const auto va = velocity(m, Configuration(q, n_particles(m), q.size() / n_particles(m)), t);
            const auto vf = fd_velocity(m, q, t, 1e-5);
            for (std::size_t i = 0; i < q.size(); ++i) {
                INFO(model_tag(m));
                CHECK(std::abs(va[i] - vf[i]) <= 1e-6 * std::max(1.0, std::abs(vf[i])));
            }
        }
    }
}

TEST_CASE("Schroedinger residual is small at random points") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> ut(0.0, 3.0);
    const double h = 1e-4;
    for (const auto& m : test_models()) {
        const auto& c = constants_of(m);
        const Box box = support_box(m, 0.0);
        int checked = 0;
        while (checked < 100) {
            std::vector<double> q(n_coords(m));
            const double t = ut(rng);
            const double bw = std::holds_alternative<OscillatorSuperposition2D>(m) ? 1.0 : beam_width(m, t);
            for (auto& x : q) x = bw * n(rng) + (n(rng) > 0 ? 0.5 : -0.5) * (box.hi[0] - box.lo[0]) * 0.02;
            const complex psi = amplitude(m, q, t);
            // Stay inside the bulk; far tails carry local energies the 1e-4 time stencil cannot resolve.
            if (std::norm(psi) < 1e-3) continue;
            const complex dt = (amplitude(m, q, t + h) - amplitude(m, q, t - h)) / (2.0 * h);
            complex lap = 0.0;
            for (std::size_t i = 0; i < q.size(); ++i) {
                auto qp = q;
                auto qm = q;
                qp[i] += h;
                qm[i] -= h;
                lap += (amplitude(m, qp, t) - 2.0 * psi + amplitude(m, qm, t)) / (h * h);
            }
            const complex hpsi = -c.hbar * c.hbar / (2.0 * c.mass) * lap + potential(m, q) * psi;
            const complex lhs = complex(0.0, c.hbar) * dt;
            // Where H psi nearly cancels, the FD roundoff (~1e-8 |psi|) swamps any relative bound.
            if (std::abs(hpsi) < 1e-2 * std::abs(psi) / (bw * bw)) continue;
            INFO(model_tag(m), " t=", t, " q0=", q[0], " psi=", std::abs(psi), " hpsi=", std::abs(hpsi));
            CHECK(std::abs(lhs - hpsi) < 1e-5 * (std::abs(hpsi) + 1e-12));
            ++checked;
        }
    }
}

TEST_CASE("parity and exchange symmetry of the slit fields") {
    const WaveModel slit = DoubleSlitState(1.0, 0.2);
    const WaveModel pair = TwoParticleEntangledState(1.0, 0.2);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.2);
    for (int k = 0; k < 50; ++k) {
        const double t = std::abs(n(rng));
        const double y = n(rng);
        CHECK(std::abs(amplitude(slit, std::array<double, 1>{y}, t)) ==
              doctest::Approx(std::abs(amplitude(slit, std::array<double, 1>{-y}, t))).epsilon(1e-13));
        CHECK(velocity(slit, Configuration({-y}, 1), t)[0] == -velocity(slit, Configuration({y}, 1), t)[0]);

        const double a = n(rng);
        const double b = n(rng);
        const auto v = velocity(pair, Configuration({a, b}, 2), t);
        const auto vm = velocity(pair, Configuration({-a, -b}, 2), t);
        const auto vx = velocity(pair, Configuration({b, a}, 2), t);
        CHECK(vm[0] == doctest::Approx(-v[0]).epsilon(1e-12));
        CHECK(vm[1] == doctest::Approx(-v[1]).epsilon(1e-12));
        CHECK(vx[1] == doctest::Approx(v[0]).epsilon(1e-12));
        CHECK(std::abs(amplitude(pair, std::array<double, 2>{a, b}, t) -
                       amplitude(pair, std::array<double, 2>{b, a}, t)) < 1e-14);
    }
    // Mirror configurations keep the sum velocity exactly zero.
    const auto v = velocity(pair, Configuration({0.37, -0.37}, 2), 1.3);
    CHECK(v[0] + v[1] == 0.0);
}

TEST_CASE("width follows the spreading law") {
    const GaussianPacket1D g(0.0, 0.0, 1.0);
    CHECK(width(g, 0.0) == 1.0);
    CHECK(width(g, 4.0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
    const GaussianPacket1D narrow(0.0, 0.0, 0.5, {1.0, 2.0});
    const double t_unit = 2.0 * 2.0 * 0.25 / 1.0;  // hbar t / (2 m s0^2) = 1
    CHECK(width(narrow, t_unit) == doctest::Approx(0.5 * std::sqrt(2.0)).epsilon(1e-15));
    const GaussianPacket1D moved(5.0, -3.0, 0.5, {1.0, 2.0});
    for (const double t : {-3.0, 0.2, 1.0, 10.0}) {
        CHECK(width(moved, t) / width(moved, 0.0) == width(narrow, t) / width(narrow, 0.0));
        CHECK(width(narrow, std::abs(t) + 0.5) >= width(narrow, t));
    }
}

TEST_CASE("contract violations and node proximity") {
    const WaveModel g = GaussianPacket1D(0.0, 0.0, 1.0);
    CHECK_THROWS_AS((void)amplitude(g, std::array<double, 2>{0.0, 1.0}, 0.0), ContractViolation);
    CHECK_THROWS_AS(GaussianPacket1D(0.0, 0.0, -1.0), ContractViolation);
    CHECK_THROWS_AS(Configuration({1.0, 2.0, 3.0}, 2), ContractViolation);
    CHECK_THROWS_AS(OscillatorSuperposition2D(1.0, 1.0, {{0, 0, 0.5}, {0, 0, 0.5}}), ContractViolation);
    CHECK_THROWS_AS(OscillatorSuperposition2D(1.0, 1.0, {{0, 0, 0.5}, {1, 0, 0.5}}), ContractViolation);
    // Far outside the packet |psi| underflows below node_eps.
    CHECK_THROWS_AS((void)velocity(g, Configuration({60.0}, 1), 0.0), NodeProximity);
    // The antisymmetric pair has an exact node on the diagonal.
    const WaveModel anti = TwoParticleEntangledState(1.0, 0.4, {}, -1);
    CHECK_THROWS_AS((void)velocity(anti, Configuration({0.2, 0.2}, 2), 0.3), NodeProximity);
    const WaveModel osc = OscillatorSuperposition2D::two_term(1.0, 2.0);
    CHECK_THROWS_AS((void)velocity(osc, Configuration({0.0, 0.0}, 1, 2), 0.0), NodeProximity);
}

TEST_CASE("oscillator eigenstates are stationary with zero velocity") {
    const WaveModel single = OscillatorSuperposition2D(1.0, 2.0, {{1, 2, complex(0.0, 1.0)}});
    const auto v = velocity(single, Configuration({0.3, 0.4}, 1, 2), 2.5);
    CHECK(std::abs(v[0]) < 1e-15);
    CHECK(std::abs(v[1]) < 1e-15);
    // Hermite functions are orthonormal.
    for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 5; ++b) {
            const double ip =
                integrate([&](double x) { return hermite_function(a, x, 0.7) * hermite_function(b, x, 0.7); }, -12,
                          12)
                    .value;
            CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) < 1e-10);
        }
    }
}
