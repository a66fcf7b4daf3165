#include "bohm/quadrature.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <string>

#include "bohm/errors.hpp"

namespace bohm {
namespace {

// Kronrod 15-point abscissae (positive half) and weights; Gauss 7-point weights
// live on the odd Kronrod nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double lo;
    double hi;
    double value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<double(double)>& f, double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    const double fc = f(c);
    double kron = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double s = f(c - dx) + f(c + dx);
        kron += kWgk[j] * s;
        if (j % 2 == 1) gauss += kWg[j / 2] * s;
    }
    return {lo, hi, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureSpec& spec) {
    QuadratureResult out;
    if (!(hi > lo)) {
        return out;
    }
    std::priority_queue<Panel> heap;
    double total = 0.0;
    double err = 0.0;
    const std::size_t n0 = std::max<std::size_t>(spec.initial_panels, 1);
    for (std::size_t i = 0; i < n0; ++i) {
        const double a = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n0);
        const double b = i + 1 == n0 ? hi : lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(n0);
        Panel p = gk15(f, a, b);
        total += p.value;
        err += p.error;
        heap.push(p);
    }
    std::size_t panels = n0;
    while (err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
        if (panels + 1 > spec.max_panels) {
            throw QuadratureNonConvergence("adaptive quadrature exhausted " + std::to_string(spec.max_panels) +
                                           " panels on [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                           "], error estimate " + std::to_string(err));
        }
        const Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        const Panel left = gk15(f, worst.lo, mid);
        const Panel right = gk15(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++panels;
    }
    // Re-sum to shed the drift of the incremental updates.
    total = 0.0;
    err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    out.value = total;
    out.error = err;
    out.evaluations = (n0 + 2 * (panels - n0)) * 15;
    return out;
}

QuadratureResult integrate_2d(const std::function<double(double, double)>& f, double x_lo, double x_hi,
                              double y_lo, double y_hi, const QuadratureSpec& spec) {
    QuadratureSpec inner = spec;
    const double span = std::max(x_hi - x_lo, 1e-300);
    inner.abs_tol = 0.1 * spec.abs_tol / span;
    std::size_t evals = 0;
    const auto outer = [&](double x) {
        const auto r = integrate([&](double y) { return f(x, y); }, y_lo, y_hi, inner);
        evals += r.evaluations;
        return r.value;
    };
    QuadratureResult res = integrate(outer, x_lo, x_hi, spec);
    res.evaluations = evals;
    return res;
}

const GaussLegendre& gauss_legendre(std::size_t n) {
    static std::mutex mu;
    static std::map<std::size_t, GaussLegendre> cache;
    if (n == 0 || n > 64) {
        throw ContractViolation("gauss_legendre supports 1..64 nodes");
    }
    const std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        gl.nodes[i] = -x;
        gl.nodes[n - 1 - i] = x;
        gl.weights[i] = w;
        gl.weights[n - 1 - i] = w;
    }
    if (n == 1) {
        gl.nodes[0] = 0.0;
        gl.weights[0] = 2.0;
    }
    return cache.emplace(n, std::move(gl)).first->second;
}

double integrate_tensor(const std::function<double(double, double)>& f, double x_lo, double x_hi, double y_lo,
                        double y_hi, std::size_t panels, std::size_t order) {
    const auto& gl = gauss_legendre(order);
    const double hx = (x_hi - x_lo) / static_cast<double>(panels);
    const double hy = (y_hi - y_lo) / static_cast<double>(panels);
    std::vector<double> xs;
    std::vector<double> wx;
    std::vector<double> ys;
    std::vector<double> wy;
    for (std::size_t p = 0; p < panels; ++p) {
        for (std::size_t k = 0; k < order; ++k) {
            xs.push_back(x_lo + hx * (static_cast<double>(p) + 0.5 * (gl.nodes[k] + 1.0)));
            wx.push_back(0.5 * hx * gl.weights[k]);
            ys.push_back(y_lo + hy * (static_cast<double>(p) + 0.5 * (gl.nodes[k] + 1.0)));
            wy.push_back(0.5 * hy * gl.weights[k]);
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < ys.size(); ++j) row += wy[j] * f(xs[i], ys[j]);
        total += wx[i] * row;
    }
    return total;
}

}  // namespace bohm
