#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <json.hpp>

#include "bohm/errors.hpp"
#include "bohm/scenarios.hpp"

namespace bohm {
namespace {

using ojson = nlohmann::ordered_json;

const std::vector<std::string> kOutputs = {"trajectories_csv", "summary_json", "histogram_csv", "plot_svg"};

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Reads keys of one JSON object, remembering which were consumed so that
// leftovers can be rejected.
class Reader {
public:
    Reader(const ojson& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw SchemaError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    [[nodiscard]] const ojson* find(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const char* key, double& out) {
        if (const auto* v = find(key)) out = as_number(*v, join(path_, key));
    }

    void count(const char* key, std::size_t& out) {
        if (const auto* v = find(key)) out = static_cast<std::size_t>(as_unsigned(*v, join(path_, key)));
    }

    void text(const char* key, std::string& out) {
        if (const auto* v = find(key)) {
            if (!v->is_string()) throw SchemaError(join(path_, key), "expected a string");
            out = v->get<std::string>();
        }
    }

    [[nodiscard]] std::string path(const char* key) const { return join(path_, key); }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.contains(k)) throw SchemaError(join(path_, k), "unknown key");
        }
    }

    static double as_number(const ojson& v, const std::string& where) {
        if (!v.is_number()) throw SchemaError(where, "expected a number");
        return v.get<double>();
    }

    static std::uint64_t as_unsigned(const ojson& v, const std::string& where) {
        if (!v.is_number_unsigned()) throw SchemaError(where, "expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }

private:
    const ojson& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// Window bound; null stands for an unbounded side.
double read_bound(const ojson& v, const std::string& where, double unbounded) {
    if (v.is_null()) return unbounded;
    return Reader::as_number(v, where);
}

Detector read_detector(const ojson& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) throw SchemaError(where, "expected [lo, hi]");
    const double inf = std::numeric_limits<double>::infinity();
    return {read_bound(v[0], where, -inf), read_bound(v[1], where, inf)};
}

ojson write_bound(double b) { return std::isfinite(b) ? ojson(b) : ojson(nullptr); }

ojson write_detector(const Detector& d) { return ojson::array({write_bound(d.lo), write_bound(d.hi)}); }

void read_constants(const ojson& j, PhysicalConstants& c) {
    Reader r(j, "constants");
    r.number("hbar", c.hbar);
    r.number("mass", c.mass);
    r.finish();
}

void read_geometry(const ojson& j, GeometrySpec& g) {
    Reader r(j, "geometry");
    r.number("d", g.d);
    r.number("sigma0", g.sigma0);
    r.number("phase", g.phase);
    r.number("center0", g.center0);
    r.number("drift", g.drift);
    r.number("omega1", g.omega1);
    r.number("omega2", g.omega2);
    if (const auto* v = r.find("terms")) {
        if (!v->is_array()) throw SchemaError("geometry.terms", "expected an array");
        g.terms.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
            const std::string where = "geometry.terms[" + std::to_string(i) + "]";
            Reader t((*v)[i], where);
            std::size_t n1 = 0;
            std::size_t n2 = 0;
            double re = 0.0;
            double im = 0.0;
            t.count("n1", n1);
            t.count("n2", n2);
            t.number("re", re);
            t.number("im", im);
            t.finish();
            if (n1 > 64 || n2 > 64) throw SchemaError(where, "quantum numbers above 64 are not supported");
            g.terms.push_back({static_cast<int>(n1), static_cast<int>(n2), {re, im}});
        }
    }
    if (const auto* v = r.find("initial")) {
        if (!v->is_array()) throw SchemaError("geometry.initial", "expected an array");
        g.initial.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
            g.initial.push_back(Reader::as_number((*v)[i], "geometry.initial[" + std::to_string(i) + "]"));
        }
    }
    r.finish();
}

void read_detection(const ojson& j, std::optional<DetectionSpec>& out) {
    if (j.is_null()) {
        out.reset();
        return;
    }
    DetectionSpec d = out.value_or(DetectionSpec{});
    Reader r(j, "detection");
    if (const auto* v = r.find("d1")) d.setup.d1 = read_detector(*v, "detection.d1");
    if (const auto* v = r.find("d2")) d.setup.d2 = read_detector(*v, "detection.d2");
    r.number("t_detect", d.setup.t_detect);
    std::string units = d.units == DetectorUnits::absolute ? "absolute" : "beam_width";
    r.text("units", units);
    if (units == "absolute") {
        d.units = DetectorUnits::absolute;
    } else if (units == "beam_width") {
        d.units = DetectorUnits::beam_width;
    } else {
        throw SchemaError("detection.units", "expected \"absolute\" or \"beam_width\"");
    }
    std::string sampling = to_string(d.sampling);
    r.text("sampling", sampling);
    try {
        d.sampling = trial_sampling_from_string(sampling);
    } catch (const ContractViolation&) {
        throw SchemaError("detection.sampling", "expected \"equilibrium\" or \"point_slit\"");
    }
    r.finish();
    out = d;
}

void read_integrator(const ojson& j, IntegratorConfig& c) {
    Reader r(j, "integrator");
    r.number("t0", c.t0);
    r.number("t_end", c.t_end);
    r.number("dt_init", c.dt_init);
    r.number("rel_tol", c.rel_tol);
    r.number("abs_tol", c.abs_tol);
    r.number("v_cap", c.v_cap);
    r.number("node_eps", c.node_eps);
    r.number("output_stride", c.output_stride);
    r.count("max_steps", c.max_steps);
    r.finish();
}

void read_ergodicity(const ojson& j, ErgodicitySpec& e) {
    Reader r(j, "ergodicity");
    r.count("grid_resolution", e.grid_resolution);
    r.number("access_threshold", e.access_threshold);
    r.number("recurrence_period", e.recurrence_period);
    r.finish();
}

bool samples_equilibrium(const ScenarioConfig& c) {
    if (c.scenario == "spreading_law") return false;
    return c.n_trials > 0 || c.n_trajectories > 0;
}

template <class F>
void as_schema(const std::string& key, F&& f) {
    try {
        f();
    } catch (const ContractViolation& e) {
        throw SchemaError(key, e.what());
    }
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    // nlohmann reports the position one past the offending character.
    return {line, col > 1 ? col - 1 : col};
}

}  // namespace

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {"single_slit",   "double_slit",   "two_particle_slit",
                                                   "spreading_law", "ergodicity_qm", "pendulum"};
    return names;
}

ScenarioConfig default_config(const std::string& scenario) {
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), scenario) == names.end()) {
        throw SchemaError("scenario", "unknown scenario '" + scenario + "'");
    }
    constexpr double two_pi = 2.0 * std::numbers::pi;
    ScenarioConfig c;
    c.scenario = scenario;
    c.outputs = kOutputs;
    if (scenario == "single_slit") {
        c.geometry.sigma0 = 0.5;
        c.geometry.drift = 0.5;
        c.n_trials = 2000;
        c.n_trajectories = 20;
        c.seed = 1;
        c.integrator.t_end = 5.0;
        c.integrator.output_stride = 0.05;
    } else if (scenario == "double_slit") {
        c.geometry.sigma0 = 0.2;
        c.n_trials = 2000;
        c.n_trajectories = 40;
        c.seed = 1;
        c.integrator.t_end = 4.0;
        c.integrator.output_stride = 0.02;
    } else if (scenario == "two_particle_slit") {
        c.geometry.sigma0 = 0.01;
        DetectionSpec d;
        d.setup = {{0.5, 1.5}, {0.5, 1.5}, 2.0};
        d.units = DetectorUnits::beam_width;
        d.sampling = TrialSampling::point_slit;
        c.detection = d;
        c.n_trials = 10000;
        c.n_trajectories = 20;
        c.seed = 1;
        c.integrator.t_end = 2.0;
        c.integrator.output_stride = 0.02;
    } else if (scenario == "spreading_law") {
        c.geometry.sigma0 = 1.0;
        c.geometry.initial = {1.15, -0.85};
        c.integrator.t_end = 5.0;
        c.integrator.output_stride = 0.05;
        c.outputs = {"trajectories_csv", "summary_json", "plot_svg"};
    } else if (scenario == "ergodicity_qm") {
        c.geometry.omega2 = std::numbers::sqrt2;
        c.integrator.t_end = 20.0 * two_pi;
        c.outputs = {"summary_json", "plot_svg"};
    } else {
        c.n_trajectories = 8;
        c.seed = 2024;
        c.integrator.t_end = 200.0 * two_pi;
        c.integrator.output_stride = 0.05;
        c.outputs = {"trajectories_csv", "summary_json", "plot_svg"};
    }
    return c;
}

WaveModel build_model(const ScenarioConfig& c) {
    const auto& g = c.geometry;
    if (c.scenario == "single_slit") return GaussianPacket1D(g.center0, g.drift, g.sigma0, c.constants);
    if (c.scenario == "double_slit") return DoubleSlitState(g.d, g.sigma0, g.phase, c.constants);
    if (c.scenario == "two_particle_slit" || c.scenario == "spreading_law") {
        return TwoParticleEntangledState(g.d, g.sigma0, c.constants);
    }
    if (g.terms.empty()) return OscillatorSuperposition2D::default_superposition(g.omega1, g.omega2, c.constants);
    return OscillatorSuperposition2D(g.omega1, g.omega2, g.terms, c.constants);
}

void validate(const ScenarioConfig& c) {
    (void)default_config(c.scenario);
    as_schema("constants", [&] { c.constants.validate(); });
    as_schema("integrator", [&] { c.integrator.validate(); });
    as_schema("geometry", [&] { (void)build_model(c); });
    if (c.detection) {
        as_schema("detection", [&] { c.detection->setup.validate(); });
        if (c.detection->sampling == TrialSampling::point_slit && c.scenario != "two_particle_slit") {
            throw SchemaError("detection.sampling", "point_slit sampling needs the two_particle_slit scenario");
        }
        if (c.scenario == "spreading_law" || c.scenario == "ergodicity_qm" || c.scenario == "pendulum") {
            throw SchemaError("detection", "not used by scenario " + c.scenario);
        }
        if (c.detection->setup.t_detect < c.integrator.t0) {
            throw SchemaError("detection.t_detect", "must not precede integrator.t0");
        }
    }
    if (c.scenario == "two_particle_slit" && !c.detection) throw SchemaError("detection", "required");
    if (c.scenario == "two_particle_slit" && c.n_trials == 0) throw SchemaError("n_trials", "must be positive");
    if (c.scenario == "spreading_law" && c.geometry.initial.size() != 2) {
        throw SchemaError("geometry.initial", "expected two coordinates");
    }
    if (c.scenario != "spreading_law" && !c.geometry.initial.empty()) {
        throw SchemaError("geometry.initial", "only used by spreading_law");
    }
    if (samples_equilibrium(c) && !c.seed) throw SchemaError("seed", "required when the scenario samples");
    if (c.ergodicity.grid_resolution < 8) throw SchemaError("ergodicity.grid_resolution", "must be at least 8");
    if (!(c.ergodicity.access_threshold >= 0.0) || !std::isfinite(c.ergodicity.access_threshold)) {
        throw SchemaError("ergodicity.access_threshold", "must be a nonnegative number");
    }
    if (!(c.ergodicity.recurrence_period >= 0.0) || !std::isfinite(c.ergodicity.recurrence_period)) {
        throw SchemaError("ergodicity.recurrence_period", "must be a nonnegative number");
    }
    std::set<std::string> seen;
    for (const auto& o : c.outputs) {
        if (std::find(kOutputs.begin(), kOutputs.end(), o) == kOutputs.end()) {
            throw SchemaError("outputs", "unknown output '" + o + "'");
        }
        if (!seen.insert(o).second) throw SchemaError("outputs", "duplicate output '" + o + "'");
    }
}

ScenarioConfig parse_config(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        throw ParseError(e.what(), line, col);
    }
    Reader root(j, "");
    std::string scenario;
    const auto* s = root.find("scenario");
    if (s == nullptr) throw SchemaError("scenario", "required");
    if (!s->is_string()) throw SchemaError("scenario", "expected a string");
    ScenarioConfig c = default_config(s->get<std::string>());

    if (const auto* v = root.find("constants")) read_constants(*v, c.constants);
    if (const auto* v = root.find("geometry")) read_geometry(*v, c.geometry);
    if (const auto* v = root.find("detection")) read_detection(*v, c.detection);
    root.count("n_trials", c.n_trials);
    root.count("n_trajectories", c.n_trajectories);
    if (const auto* v = root.find("seed")) {
        if (v->is_null()) {
            c.seed.reset();
        } else {
            c.seed = Reader::as_unsigned(*v, "seed");
        }
    }
    if (const auto* v = root.find("integrator")) read_integrator(*v, c.integrator);
    if (const auto* v = root.find("ergodicity")) read_ergodicity(*v, c.ergodicity);
    if (const auto* v = root.find("outputs")) {
        if (!v->is_array()) throw SchemaError("outputs", "expected an array of strings");
        c.outputs.clear();
        for (const auto& o : *v) {
            if (!o.is_string()) throw SchemaError("outputs", "expected an array of strings");
            c.outputs.push_back(o.get<std::string>());
        }
    }
    root.finish();
    validate(c);
    return c;
}

std::string serialize(const ScenarioConfig& c) {
    ojson j;
    j["scenario"] = c.scenario;
    j["constants"] = {{"hbar", c.constants.hbar}, {"mass", c.constants.mass}};
    const auto& g = c.geometry;
    ojson terms = ojson::array();
    for (const auto& t : g.terms) {
        terms.push_back({{"n1", t.n1}, {"n2", t.n2}, {"re", t.coeff.real()}, {"im", t.coeff.imag()}});
    }
    j["geometry"] = {{"d", g.d},           {"sigma0", g.sigma0}, {"phase", g.phase},   {"center0", g.center0},
                     {"drift", g.drift},   {"omega1", g.omega1}, {"omega2", g.omega2}, {"terms", terms},
                     {"initial", g.initial}};
    if (c.detection) {
        const auto& d = *c.detection;
        j["detection"] = {{"d1", write_detector(d.setup.d1)},
                          {"d2", write_detector(d.setup.d2)},
                          {"t_detect", d.setup.t_detect},
                          {"units", d.units == DetectorUnits::absolute ? "absolute" : "beam_width"},
                          {"sampling", to_string(d.sampling)}};
    } else {
        j["detection"] = nullptr;
    }
    j["n_trials"] = c.n_trials;
    j["n_trajectories"] = c.n_trajectories;
    j["seed"] = c.seed ? ojson(*c.seed) : ojson(nullptr);
    const auto& i = c.integrator;
    j["integrator"] = {{"t0", i.t0},         {"t_end", i.t_end},       {"dt_init", i.dt_init},
                       {"rel_tol", i.rel_tol}, {"abs_tol", i.abs_tol},   {"v_cap", i.v_cap},
                       {"node_eps", i.node_eps}, {"output_stride", i.output_stride}, {"max_steps", i.max_steps}};
    j["ergodicity"] = {{"grid_resolution", c.ergodicity.grid_resolution},
                       {"access_threshold", c.ergodicity.access_threshold},
                       {"recurrence_period", c.ergodicity.recurrence_period}};
    j["outputs"] = c.outputs;
    return j.dump(2);
}

}  // namespace bohm
