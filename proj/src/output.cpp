#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "bohm/errors.hpp"
#include "bohm/scenarios.hpp"

namespace bohm {
namespace {

using ojson = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Short form for SVG coordinates; plots need no round-trip precision.
std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

bool wants(const ScenarioConfig& c, const char* output) {
    return std::find(c.outputs.begin(), c.outputs.end(), output) != c.outputs.end();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot open " + p.string() + " for writing");
    out << text;
    out.close();
    if (!out) throw IoError("write failed: " + p.string());
}

constexpr double kW = 640.0;
constexpr double kH = 480.0;
constexpr double kPad = 40.0;

struct Frame {
    double x_lo, x_hi, y_lo, y_hi;
    [[nodiscard]] double x(double v) const { return kPad + (v - x_lo) / (x_hi - x_lo) * (kW - 2 * kPad); }
    [[nodiscard]] double y(double v) const { return kH - kPad - (v - y_lo) / (y_hi - y_lo) * (kH - 2 * kPad); }
};

std::string svg_open(const std::string& title) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kW) + "\" height=\"" + px(kH) +
           "\" viewBox=\"0 0 " + px(kW) + " " + px(kH) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
           "<text x=\"" + px(kPad) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";
}

std::string axes(const Frame& f) {
    std::string s = "<rect x=\"" + px(kPad) + "\" y=\"" + px(kPad) + "\" width=\"" + px(kW - 2 * kPad) +
                    "\" height=\"" + px(kH - 2 * kPad) + "\" fill=\"none\" stroke=\"black\"/>\n";
    const auto label = [](double x, double y, const std::string& t, const char* anchor) {
        return "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"" +
               anchor + "\">" + t + "</text>\n";
    };
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", f.x_lo);
    s += label(kPad, kH - kPad + 14, b, "start");
    std::snprintf(b, sizeof b, "%.3g", f.x_hi);
    s += label(kW - kPad, kH - kPad + 14, b, "end");
    std::snprintf(b, sizeof b, "%.3g", f.y_lo);
    s += label(kPad - 4, kH - kPad, b, "end");
    std::snprintf(b, sizeof b, "%.3g", f.y_hi);
    s += label(kPad - 4, kPad + 8, b, "end");
    return s;
}

// Blue-to-yellow ramp.
std::string ramp(double u) {
    u = std::clamp(u, 0.0, 1.0);
    const auto c = [u](double a, double b) { return static_cast<int>(std::lround(a + (b - a) * u)); };
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c(20, 250), c(30, 220), c(90, 40));
    return buf;
}

std::string cells_svg(const std::string& title, const Rect& r, std::size_t n,
                      const std::function<std::string(std::size_t)>& fill) {
    const Frame f{r.x_lo, r.x_hi, r.y_lo, r.y_hi};
    std::string s = svg_open(title);
    const double w = (kW - 2 * kPad) / static_cast<double>(n);
    const double h = (kH - 2 * kPad) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::string c = fill(j * n + i);
            if (c.empty()) continue;
            s += "<rect x=\"" + px(kPad + static_cast<double>(i) * w) + "\" y=\"" +
                 px(kH - kPad - static_cast<double>(j + 1) * h) + "\" width=\"" + px(w) + "\" height=\"" + px(h) +
                 "\" fill=\"" + c + "\"/>\n";
        }
    }
    return s + axes(f) + "</svg>\n";
}

void check_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) throw SerializationError("refusing to serialize non-finite value for " + what);
}

}  // namespace

std::string summary_json(const RunSummary& summary, bool include_wall_time) {
    ojson j;
    j["version"] = kVersion;
    j["scenario"] = summary.config.scenario;
    j["seed"] = summary.config.seed ? ojson(*summary.config.seed) : ojson(nullptr);
    ojson stats = ojson::object();
    for (const auto& s : summary.statistics) {
        check_finite(s.value, s.name);
        check_finite(s.tolerance, s.name + " tolerance");
        stats[s.name] = {{"value", s.value}, {"n", s.n}, {"tolerance", s.tolerance}};
    }
    j["statistics"] = stats;
    ojson flags = ojson::object();
    for (const auto& [k, v] : summary.flags) flags[k] = v;
    j["flags"] = flags;
    j["n_failed"] = summary.n_failed;
    j["config"] = ojson::parse(serialize(summary.config));
    if (include_wall_time) {
        check_finite(summary.wall_time, "wall_time");
        j["wall_time"] = summary.wall_time;
    }
    return j.dump(2) + "\n";
}

std::string failure_json(const ScenarioConfig& cfg, const std::string& error_kind, const std::string& message) {
    ojson j;
    j["version"] = kVersion;
    j["scenario"] = cfg.scenario;
    j["seed"] = cfg.seed ? ojson(*cfg.seed) : ojson(nullptr);
    j["error"] = {{"kind", error_kind}, {"message", message}};
    j["config"] = ojson::parse(serialize(cfg));
    return j.dump(2) + "\n";
}

std::string trajectory_csv(const Trajectory& tr) {
    const std::size_t dim = tr.empty() ? 1 : tr.configs.front().size();
    std::string out = "t";
    for (std::size_t c = 0; c < dim; ++c) out += ",y" + std::to_string(c + 1);
    out += "\n";
    for (std::size_t i = 0; i < tr.size(); ++i) {
        out += fmt(tr.times[i]);
        for (std::size_t c = 0; c < dim; ++c) out += "," + fmt(tr.configs[i][c]);
        out += "\n";
    }
    return out;
}

std::string histogram_csv(const Histogram& h) {
    std::string out = "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        out += fmt(h.edges[i]) + "," + fmt(h.edges[i + 1]) + "," + std::to_string(h.counts[i]) + "\n";
    }
    return out;
}

std::string trajectories_svg(std::span<const Trajectory> trajectories) {
    Frame f{0.0, 1.0, -1.0, 1.0};
    bool first = true;
    const bool planar = !trajectories.empty() && !trajectories.front().empty() &&
                        trajectories.front().configs.front().size() == 2 &&
                        trajectories.front().times.back() - trajectories.front().times.front() > 50.0;
    // Long two-coordinate runs are drawn in the plane, everything else against time.
    for (const auto& tr : trajectories) {
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const double xv = planar ? tr.configs[i][0] : tr.times[i];
            for (std::size_t c = planar ? 1 : 0; c < (planar ? 2 : tr.configs[i].size()); ++c) {
                const double yv = tr.configs[i][c];
                if (first) {
                    f = {xv, xv, yv, yv};
                    first = false;
                }
                f.x_lo = std::min(f.x_lo, xv);
                f.x_hi = std::max(f.x_hi, xv);
                f.y_lo = std::min(f.y_lo, yv);
                f.y_hi = std::max(f.y_hi, yv);
            }
        }
    }
    if (f.x_hi <= f.x_lo) f.x_hi = f.x_lo + 1.0;
    if (f.y_hi <= f.y_lo) {
        f.y_lo -= 1.0;
        f.y_hi += 1.0;
    }
    std::string s = svg_open(planar ? "trajectories (y2 vs y1)" : "trajectories");
    static const char* colors[] = {"#1f77b4", "#d62728"};
    for (const auto& tr : trajectories) {
        if (tr.empty()) continue;
        const std::size_t dim = tr.configs.front().size();
        const std::size_t lines = planar ? 1 : dim;
        for (std::size_t c = 0; c < lines; ++c) {
            s += "<polyline fill=\"none\" stroke=\"" + std::string(colors[c % 2]) +
                 "\" stroke-width=\"0.6\" stroke-opacity=\"0.7\" points=\"";
            // Thin very long runs to keep files small.
            const std::size_t step = std::max<std::size_t>(1, tr.size() / 4000);
            for (std::size_t i = 0; i < tr.size(); i += step) {
                const double xv = planar ? tr.configs[i][0] : tr.times[i];
                const double yv = planar ? tr.configs[i][1] : tr.configs[i][c];
                s += px(f.x(xv)) + "," + px(f.y(yv)) + " ";
            }
            s += "\"/>\n";
        }
    }
    return s + axes(f) + "</svg>\n";
}

std::string histogram_svg(const Histogram& h) {
    const std::size_t top = h.counts.empty() ? 1 : std::max<std::size_t>(1, *std::max_element(h.counts.begin(), h.counts.end()));
    const Frame f{h.edges.empty() ? 0.0 : h.edges.front(), h.edges.empty() ? 1.0 : h.edges.back(), 0.0,
                  static_cast<double>(top)};
    std::string s = svg_open("detection histogram");
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const double x0 = f.x(h.edges[i]);
        const double x1 = f.x(h.edges[i + 1]);
        const double y1 = f.y(static_cast<double>(h.counts[i]));
        s += "<rect x=\"" + px(x0) + "\" y=\"" + px(y1) + "\" width=\"" + px(x1 - x0) + "\" height=\"" +
             px(f.y(0.0) - y1) + "\" fill=\"#4c72b0\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
    }
    return s + axes(f) + "</svg>\n";
}

std::string coverage_svg(const CoverageGrid& grid) {
    return cells_svg("coverage (yellow visited, blue accessible and unvisited)", grid.bounds(), grid.resolution(),
                     [&](std::size_t c) -> std::string {
                         if (grid.visited(c)) return ramp(1.0);
                         if (grid.accessible(c)) return ramp(0.0);
                         return "";
                     });
}

std::string heatmap_svg(std::span<const double> values, std::size_t resolution, const Rect& bounds) {
    if (values.size() != resolution * resolution) throw ContractViolation("heatmap size does not match resolution");
    double top = 0.0;
    for (const double v : values) top = std::max(top, v);
    return cells_svg("time-averaged density", bounds, resolution, [&](std::size_t c) {
        return ramp(top > 0.0 ? values[c] / top : 0.0);
    });
}

std::vector<std::filesystem::path> write_outputs(const RunResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const auto& cfg = result.summary.config;
    const auto& a = result.artifacts;
    std::vector<std::filesystem::path> written;
    const auto put = [&](const std::string& name, const std::string& text) {
        const auto p = dir / name;
        write_file(p, text);
        written.push_back(p);
    };
    // Serialize first so a NaN leaves no partial output behind.
    const std::string summary = summary_json(result.summary);
    if (wants(cfg, "trajectories_csv")) {
        for (std::size_t k = 0; k < a.trajectories.size(); ++k) {
            char name[32];
            std::snprintf(name, sizeof name, "trajectory_%03zu.csv", k);
            put(name, trajectory_csv(a.trajectories[k]));
        }
    }
    if (wants(cfg, "histogram_csv") && a.histogram) put("histogram.csv", histogram_csv(*a.histogram));
    if (wants(cfg, "plot_svg")) {
        if (!a.trajectories.empty()) put("trajectories.svg", trajectories_svg(a.trajectories));
        if (a.histogram) put("histogram.svg", histogram_svg(*a.histogram));
        if (a.coverage) put("coverage.svg", coverage_svg(*a.coverage));
        if (!a.heatmap.empty()) put("density.svg", heatmap_svg(a.heatmap, a.heatmap_resolution, a.heatmap_bounds));
    }
    if (wants(cfg, "summary_json")) put("summary.json", summary);
    return written;
}

}  // namespace bohm
