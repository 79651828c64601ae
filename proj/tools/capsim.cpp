#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "capsim/errors.hpp"
#include "capsim/io/config.hpp"
#include "capsim/io/experiment.hpp"
#include "capsim/io/series.hpp"

namespace fs = std::filesystem;
using namespace capsim;
using namespace capsim::io;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
}

std::vector<ConfigOverride> seed_override(const std::optional<std::uint64_t>& seed) {
    if (!seed) return {};
    return {{"trials.base_seed", std::to_string(*seed)}};
}

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;

    std::string weights;
    std::string rule;
    std::size_t trials = 10000;
    std::optional<double> tau_env;
    double onset_epsilon = kDefaultOnsetEpsilon;
    std::optional<double> energy_spread;

    std::string key;
    std::vector<std::string> values;
};

int cmd_run(const Options& o, EmitMode mode) {
    const RunConfig config = load_config(o.config, seed_override(o.seed));
    const auto manifest = run_experiment(config, o.out, o.threads, mode);
    std::cout << "wrote " << manifest.files.size() + 1 << " files to " << o.out << "\n";
    for (const auto& f : manifest.files) {
        if (f.name == "claims.txt") std::cout << read_file((fs::path(o.out) / f.name).string());
    }
    return 0;
}

int cmd_calibrate(const Options& o) {
    const RunConfig config = load_config(o.config);
    const auto result = calibrate_strength(config.scenario, config.make_grid(), config.calibration.target,
                                           config.calibration.tolerance, config.calibration.max_iter);
    auto doc = calibration_json(result);
    doc["target"] = config.calibration.target;
    doc["tolerance"] = config.calibration.tolerance;
    const std::string text = doc.dump(2) + "\n";
    if (!o.out.empty()) write_file(fs::path(o.out) / "calibration.json", text);
    std::cout << text;
    return 0;
}

int cmd_mc(const Options& o) {
    const WeightsFile file = read_weights_csv(o.weights);
    const auto& w = file.weights;
    if (w.empty()) throw ValidationError("weights file has no samples");

    ReductionRule rule = ReductionRule::current_jump(o.onset_epsilon);
    switch (rule_kind_from_string(o.rule)) {
        case RuleKind::PenroseEnv:
            rule = ReductionRule::penrose_env(o.tau_env.value_or(kDefaultTauEnv), o.onset_epsilon);
            break;
        case RuleKind::PenroseSpread: rule = ReductionRule::penrose_spread(o.onset_epsilon); break;
        case RuleKind::CurrentJump: break;
    }

    EnergyMoments moments;
    if (o.energy_spread) {
        moments.energy_spread = *o.energy_spread;
    } else if (const auto it = file.metadata.find("energy_spread"); it != file.metadata.end()) {
        moments.energy_spread = std::stod(it->second);
    } else if (rule.kind() == RuleKind::PenroseSpread) {
        throw ValidationError("penrose_spread needs --energy-spread (weights file has no energy_spread metadata)");
    }

    const WindowReport window = detect_zero_current_window(w);
    TrialContext ctx{rule, window.interval()};
    const auto records = run_trials(w, moments, ctx, o.seed.value_or(1), o.trials, o.threads);
    const auto summary = summarize_batch(records, w, window);

    std::ostringstream csv;
    write_trials_csv(csv, records);
    if (o.out.empty()) {
        std::cout << csv.str();
    } else {
        write_file(o.out, csv.str());
    }
    std::cerr << "rule=" << to_string(rule.kind()) << " trials=" << summary.n_trials
              << " capture_fraction=" << summary.capture_fraction;
    if (summary.ks_distance) std::cerr << " ks_distance=" << *summary.ks_distance;
    for (const auto& [flag, count] : summary.flag_counts) std::cerr << " " << flag << "=" << count;
    std::cerr << "\n";
    return 0;
}

int cmd_sweep(const Options& o) {
    const std::string text = read_file(o.config);
    const auto overrides = seed_override(o.seed);
    const RunConfig config = parse_config(text, overrides);
    std::string key = o.key;
    std::vector<std::string> values = o.values;
    if (config.sweep) {
        if (key.empty()) key = config.sweep->key;
        if (values.empty()) values = config.sweep->values;
    }
    if (key.empty()) throw ValidationError("sweep: no --key given and the config has no [sweep] section");
    const std::string out = o.out.empty() ? config.output.directory : o.out;
    const auto rows = run_sweep(text, overrides, key, values, out, o.threads);
    std::cout << read_file((fs::path(out) / "sweep.csv").string());
    return rows.empty() ? kExitValidation : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-pulse capture simulator and reduction-rule Monte Carlo"};
    app.set_version_flag("--version", CAPSIM_VERSION);
    app.require_subcommand(1);
    Options o;

    auto* run = app.add_subcommand("run", "calibrate, evolve, reduce, analyze and write all outputs");
    run->add_option("--config", o.config, "config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", o.out, "output directory")->required();
    run->add_option("--seed", o.seed, "override trials.base_seed");
    run->add_option("--threads", o.threads, "worker threads for trial batches")->check(CLI::PositiveNumber);

    auto* calibrate = app.add_subcommand("calibrate", "find the detector strength for the target capture");
    calibrate->add_option("--config", o.config, "config file")->required()->check(CLI::ExistingFile);
    calibrate->add_option("--out", o.out, "directory for calibration.json");

    auto* mc = app.add_subcommand("mc", "run reduction trials on an existing weights record");
    mc->add_option("--weights", o.weights, "weights CSV")->required()->check(CLI::ExistingFile);
    mc->add_option("--rule", o.rule, "penrose_env, penrose_spread or current_jump")->required();
    mc->add_option("--trials", o.trials, "number of trials")->required();
    mc->add_option("--seed", o.seed, "base seed (default 1)");
    mc->add_option("--threads", o.threads)->check(CLI::PositiveNumber);
    mc->add_option("--tau-env", o.tau_env, "penrose_env deadline");
    mc->add_option("--onset-epsilon", o.onset_epsilon, "capture weight counted as onset");
    mc->add_option("--energy-spread", o.energy_spread, "Delta E (default: weights metadata)");
    mc->add_option("--out", o.out, "trials CSV path (default stdout)");

    auto* claims = app.add_subcommand("claims", "write only the claim report");
    claims->add_option("--config", o.config, "config file")->required()->check(CLI::ExistingFile);
    claims->add_option("--out", o.out, "output directory")->required();
    claims->add_option("--seed", o.seed, "override trials.base_seed");
    claims->add_option("--threads", o.threads)->check(CLI::PositiveNumber);

    auto* sweep = app.add_subcommand("sweep", "repeat the run over values of one config key");
    sweep->add_option("--config", o.config, "config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--key", o.key, "section.field to vary (default: [sweep] key)");
    sweep->add_option("--values", o.values, "comma-separated values")->delimiter(',');
    sweep->add_option("--out", o.out, "output directory (default: output.directory)");
    sweep->add_option("--seed", o.seed, "override trials.base_seed");
    sweep->add_option("--threads", o.threads)->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*run) return cmd_run(o, EmitMode::Full);
        if (*calibrate) return cmd_calibrate(o);
        if (*mc) return cmd_mc(o);
        if (*claims) return cmd_run(o, EmitMode::ClaimsOnly);
        if (*sweep) return cmd_sweep(o);
    } catch (const NumericalGuardError& e) {
        std::cerr << "numerical guard: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input:\n" << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}
