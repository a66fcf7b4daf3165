// bohm-ergo command line driver.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bohm/errors.hpp"
#include "bohm/parallel.hpp"
#include "bohm/scenarios.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericFailure = 3;

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw bohm::IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Parse errors and schema errors share exit code 2.
int load(const std::string& path, bohm::ScenarioConfig& out) {
    try {
        out = bohm::parse_config(read_text(path));
        return kOk;
    } catch (const bohm::ParseError& e) {
        std::cerr << path << ":" << e.line() << ":" << e.column() << ": parse error: " << e.what() << "\n";
    } catch (const bohm::SchemaError& e) {
        std::cerr << path << ": schema error at '" << e.key() << "': " << e.what() << "\n";
    } catch (const bohm::IoError& e) {
        std::cerr << e.what() << "\n";
    }
    return kConfigError;
}

const char* error_kind(const std::exception& e) {
    if (dynamic_cast<const bohm::NodeProximity*>(&e)) return "NodeProximity";
    if (dynamic_cast<const bohm::StepCollapse*>(&e)) return "StepCollapse";
    if (dynamic_cast<const bohm::EnvelopeFailure*>(&e)) return "EnvelopeFailure";
    if (dynamic_cast<const bohm::QuadratureNonConvergence*>(&e)) return "QuadratureNonConvergence";
    if (dynamic_cast<const bohm::DegenerateFrequencies*>(&e)) return "DegenerateFrequencies";
    if (dynamic_cast<const bohm::AllTrialsFailed*>(&e)) return "AllTrialsFailed";
    if (dynamic_cast<const bohm::SerializationError*>(&e)) return "SerializationError";
    if (dynamic_cast<const bohm::IoError*>(&e)) return "IoError";
    if (dynamic_cast<const bohm::ContractViolation*>(&e)) return "ContractViolation";
    return "Error";
}

int run(const std::string& path, const std::string& out_dir, const std::optional<std::uint64_t>& seed, int threads) {
    bohm::ScenarioConfig cfg;
    if (const int rc = load(path, cfg); rc != kOk) return rc;
    if (seed) {
        cfg.seed = *seed;
    }
    try {
        bohm::validate(cfg);
    } catch (const bohm::SchemaError& e) {
        std::cerr << "schema error at '" << e.key() << "': " << e.what() << "\n";
        return kConfigError;
    }
    try {
        const auto result = bohm::run_scenario(cfg, bohm::resolve_threads(threads));
        const auto written = bohm::write_outputs(result, out_dir);
        for (const auto& p : written) std::cout << p.string() << "\n";
        if (result.summary.n_failed > 0) {
            std::cerr << result.summary.n_failed << " trajectories failed and were excluded\n";
        }
        return kOk;
    } catch (const bohm::Error& e) {
        std::cerr << error_kind(e) << ": " << e.what() << "\n";
        // Best effort: leave a structured record of the failure behind.
        try {
            std::filesystem::create_directories(out_dir);
            std::ofstream(std::filesystem::path(out_dir) / "summary.json")
                << bohm::failure_json(cfg, error_kind(e), e.what());
        } catch (...) {
        }
        return kNumericFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bohmian trajectory and ergodicity lab"};
    app.set_version_flag("--version", bohm::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "bohm-out";
    std::optional<std::uint64_t> seed;
    int threads = 0;

    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its outputs");
    run_cmd->add_option("config", config_path, "Scenario config (JSON)")->required();
    run_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run_cmd->add_option("--seed", seed, "Override the config seed");
    run_cmd->add_option("--threads", threads, "Worker threads (default: BOHM_ERGO_THREADS or 1)")
        ->check(CLI::NonNegativeNumber);

    auto* validate_cmd = app.add_subcommand("validate", "Check a scenario config and print it with defaults");
    validate_cmd->add_option("config", config_path, "Scenario config (JSON)")->required();

    auto* list_cmd = app.add_subcommand("scenarios", "List built-in scenarios with their default configs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }

    if (run_cmd->parsed()) return run(config_path, out_dir, seed, threads);
    if (validate_cmd->parsed()) {
        bohm::ScenarioConfig cfg;
        if (const int rc = load(config_path, cfg); rc != kOk) return rc;
        std::cout << bohm::serialize(cfg) << "\n";
        return kOk;
    }
    if (list_cmd->parsed()) {
        for (const auto& name : bohm::scenario_names()) {
            std::cout << "# " << name << "\n" << bohm::serialize(bohm::default_config(name)) << "\n";
        }
    }
    return kOk;
}
