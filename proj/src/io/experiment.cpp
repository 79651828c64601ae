#include "capsim/io/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/crc.hpp>

#include "capsim/errors.hpp"
#include "capsim/io/format.hpp"
#include "capsim/io/series.hpp"
#include "capsim/io/svg.hpp"

namespace capsim::io {
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double fraction(std::size_t count, std::size_t total) {
    return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
}

std::size_t flag_count(const BatchSummary& s, TrialFlag flag) {
    const auto it = s.flag_counts.find(flags_to_string(flag));
    return it == s.flag_counts.end() ? 0 : it->second;
}

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

}  // namespace

const RuleBatch* ExperimentResult::batch(RuleKind kind) const {
    for (const auto& b : batches) {
        if (b.rule.kind() == kind) return &b;
    }
    return nullptr;
}

ExperimentResult execute_experiment(const RunConfig& config, unsigned threads) {
    RunConfig as_run = config;
    const Grid1D grid = config.make_grid();
    validate_scenario(config.scenario, grid);

    PhaseTimes times;
    auto start = Clock::now();
    std::optional<CalibrationResult> calibration;
    if (config.calibration.enabled) {
        calibration = calibrate_strength(config.scenario, grid, config.calibration.target,
                                         config.calibration.tolerance, config.calibration.max_iter);
        as_run.scenario.detector.strength = calibration->strength;
    }
    times.calibrate = seconds_since(start);

    const ScenarioSpec& spec = as_run.scenario;
    start = Clock::now();
    const WaveFunction initial = build_initial_state(spec, grid);
    const EnergyMoments moments = energy_moments(initial);
    EvolutionOptions options;
    options.sample_every = spec.sample_every;
    options.snapshot_stride = config.output.snapshot_stride;
    ExperimentResult result{.config = as_run,
                            .calibration = calibration,
                            .moments = moments,
                            .evolution = run_evolution(initial, spec.detector, spec.t_final, spec.dt, options)};
    times.evolve = seconds_since(start);
    result.times = times;

    const ComponentWeights& w = result.evolution.weights;
    const double peak = w.peak_current();
    if (spec.detector.strength > 0.0 && peak > 0.0 && w.current.back() >= kTransitCompleteRatio * peak) {
        std::ostringstream msg;
        msg << "capture current has not decayed by t_final = " << format_double(spec.t_final)
            << " (J/peak = " << format_double(w.current.back() / peak) << "); increase scenario.t_final";
        throw NumericalGuardError(msg.str());
    }

    start = Clock::now();
    result.window = detect_zero_current_window(w, config.analysis.threshold_ratio);
    result.active_interval = active_current_interval(w, config.analysis.threshold_ratio);
    result.capture_onset = capture_onset(w, kDefaultOnsetEpsilon);
    for (const auto idx : find_current_peaks(w.current)) result.peak_times.push_back(refine_peak_time(w, idx));
    std::sort(result.peak_times.begin(), result.peak_times.end());
    result.times.analyze = seconds_since(start);

    start = Clock::now();
    TrialContext ctx;
    ctx.zero_current_window = result.window.interval();
    for (const auto& rule : config.rules) {
        RuleBatch batch{rule, std::nullopt, {}, {}};
        if (rule.kind() == RuleKind::PenroseEnv) batch.deterministic_collapse = collapse_time_env(w, rule);
        if (rule.kind() == RuleKind::PenroseSpread) {
            batch.deterministic_collapse = collapse_time_spread(w, result.moments, rule);
        }
        ctx.rule = rule;
        batch.records = run_trials(w, result.moments, ctx, config.trials.base_seed, config.trials.n_trials, threads);
        batch.summary = summarize_batch(batch.records, w, result.window, config.analysis.histogram_bins);
        result.batches.push_back(std::move(batch));
    }
    result.times.reduce = seconds_since(start);

    start = Clock::now();
    result.claims = evaluate_claims(result);
    result.times.analyze += seconds_since(start);
    return result;
}

std::vector<Claim> evaluate_claims(const ExperimentResult& result) {
    std::vector<Claim> claims;
    const ComponentWeights& w = result.evolution.weights;
    const ScenarioSpec& spec = result.config.scenario;
    const bool absorbing = spec.detector.strength > 0.0;
    const bool two_pulse = spec.kind == ScenarioKind::TwoPulse;

    {
        double worst = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            worst = std::max(worst, std::abs(w.p_no_capture[i] + w.p_capture[i] - 1.0));
        }
        claims.push_back({"weights_sum_to_one", "P0(t) + P1(t) = 1 at every sample", worst < kAccountingTolerance,
                          true, {{"max_deviation", worst}}});
    }
    {
        double worst_drop = 0.0;
        for (std::size_t i = 1; i < w.size(); ++i) {
            worst_drop = std::max(worst_drop, w.p_capture[i - 1] - w.p_capture[i]);
        }
        const double first = w.p_capture.front();
        claims.push_back({"capture_branch_starts_empty",
                          "the capture component is zero at t0 and increases in time",
                          first < kDefaultOnsetEpsilon && worst_drop <= kMonotoneTolerance, true,
                          {{"p_capture_first", first}, {"max_decrease", worst_drop}}});
    }
    if (absorbing) {
        const auto integral = integrated_current(w);
        double worst = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            worst = std::max(worst, std::abs(integral[i] - w.p_capture[i]));
        }
        claims.push_back({"current_matches_capture", "integral of J equals P1 at every sample",
                          worst < kCurrentConsistencyTolerance, true, {{"max_deviation", worst}}});

        const double target = result.config.calibration.enabled ? result.config.calibration.target : 0.999;
        const double total = w.p_capture.back();
        claims.push_back({"capture_probability_one", "the particle is captured with probability 1",
                          total >= target, true, {{"p_capture_final", total}, {"target", target}}});
    }

    if (const auto* b = result.batch(RuleKind::PenroseEnv)) {
        const auto n = b->summary.n_trials;
        const double frac = fraction(flag_count(b->summary, kZeroWeightCollapse), n);
        double worst_weight = 0.0;
        for (const auto& r : b->records) worst_weight = std::max(worst_weight, r.p_capture_at_collapse);
        claims.push_back({"env_collapse_at_zero_weight",
                          "penrose_env reduces while the capture component is still zero", n > 0 && frac == 1.0,
                          true,
                          {{"zero_weight_fraction", frac},
                           {"max_p_capture_at_collapse", worst_weight},
                           {"collapse_time", b->deterministic_collapse.value_or(NAN)}}});
    }
    if (const auto* b = result.batch(RuleKind::CurrentJump); b && absorbing) {
        const auto n = b->summary.n_trials;
        const double p = w.p_capture.back();
        const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(std::max<std::size_t>(n, 1)));
        const double deviation = std::abs(b->summary.capture_fraction - p);
        const double ks = b->summary.ks_distance.value_or(NAN);
        // A deviation of exactly zero passes even when sigma underflows to zero.
        const bool binomial_ok = deviation <= 3.0 * sigma || deviation == 0.0;
        claims.push_back({"jump_follows_born_rule",
                          "current_jump capture times follow P1(t) and capture fraction matches P1(t_final)",
                          ks < kKsThreshold && binomial_ok, true,
                          {{"ks_distance", ks},
                           {"capture_fraction", b->summary.capture_fraction},
                           {"p_capture_final", p},
                           {"binomial_sigma", sigma}}});
    }

    if (two_pulse) {
        const auto& win = result.window;
        claims.push_back({"zero_current_window_exists", "no current flows between the two pulses", win.exists, true,
                          {{"window_start", win.window_start},
                           {"window_end", win.window_end},
                           {"window_max_over_peak",
                            win.peak_current > 0.0 ? win.window_max_current / win.peak_current : NAN}}});
        if (const auto* b = result.batch(RuleKind::PenroseSpread)) {
            const auto n = b->summary.n_trials;
            const double between = fraction(flag_count(b->summary, kBetweenPulses), n);
            const double zero_current = fraction(flag_count(b->summary, kZeroCurrentCollapse), n);
            claims.push_back({"spread_collapses_between_pulses",
                              "penrose_spread reduces inside the zero-current window", n > 0 && between == 1.0, true,
                              {{"between_pulses_fraction", between},
                               {"zero_current_fraction", zero_current},
                               {"collapse_time", b->deterministic_collapse.value_or(NAN)},
                               {"inverse_energy_spread", 1.0 / result.moments.energy_spread}}});

            const double trailing = result.peak_times.size() >= 2 ? result.peak_times.back() : NAN;
            const double deadline = b->deterministic_collapse.value_or(NAN);
            claims.push_back({"spread_deadline_precedes_trailing_pulse",
                              "penrose_spread reduces before the trailing pulse reaches the detector",
                              deadline < trailing && (!win.exists || deadline < win.window_end), true,
                              {{"collapse_time", deadline}, {"trailing_peak_time", trailing}}});
        }
        if (const auto* b = result.batch(RuleKind::CurrentJump)) {
            const double between = fraction(flag_count(b->summary, kBetweenPulses), b->summary.n_trials);
            claims.push_back({"jump_collapses_between_pulses",
                              "current_jump reduces inside the zero-current window",
                              between >= kBetweenPulsesJumpLimit, false, {{"between_pulses_fraction", between}}});
        }
    } else if (const auto* b = result.batch(RuleKind::PenroseSpread); b && absorbing) {
        const auto t = b->deterministic_collapse;
        const auto& active = result.active_interval;
        std::size_t flagged = 0;
        for (const auto& r : b->records) flagged += r.flags != 0 ? 1 : 0;
        const double transit = 2.0 * current_time_spread(w);
        claims.push_back({"spread_collapse_in_active_current",
                          "penrose_spread reduces while the packet is crossing the detector",
                          t && active && active->contains(*t) && flagged == 0, true,
                          {{"collapse_time", t.value_or(NAN)},
                           {"active_start", active ? active->start : NAN},
                           {"active_end", active ? active->end : NAN},
                           {"flagged_fraction", fraction(flagged, b->records.size())},
                           {"transit_time", transit},
                           {"inverse_energy_spread", 1.0 / result.moments.energy_spread}}});
    }
    return claims;
}

nlohmann::ordered_json calibration_json(const CalibrationResult& c) {
    nlohmann::ordered_json j;
    j["strength"] = c.strength;
    j["achieved_capture"] = c.achieved_capture;
    j["iterations"] = c.iterations;
    j["bracket"] = {c.bracket.first, c.bracket.second};
    return j;
}

nlohmann::ordered_json summary_json(const ExperimentResult& r) {
    const auto& w = r.evolution.weights;
    nlohmann::ordered_json j;
    j["format_version"] = kFormatVersion;
    j["scenario"] = to_string(r.config.scenario.kind);
    j["detector_strength"] = r.config.scenario.detector.strength;
    j["calibration"] = r.calibration ? calibration_json(*r.calibration) : nlohmann::ordered_json(nullptr);
    j["mean_energy"] = r.moments.mean_energy;
    j["energy_spread"] = r.moments.energy_spread;
    j["n_samples"] = w.size();
    j["step_size"] = r.evolution.step_size;
    j["p_capture_final"] = w.p_capture.back();
    j["peak_current"] = w.peak_current();
    j["current_time_spread"] = current_time_spread(w);
    j["capture_onset"] = optional_number(r.capture_onset);
    j["peak_times"] = r.peak_times;
    if (r.active_interval) {
        j["active_interval"] = {r.active_interval->start, r.active_interval->end};
    } else {
        j["active_interval"] = nullptr;
    }
    auto& win = j["zero_current_window"];
    win["exists"] = r.window.exists;
    win["window_start"] = r.window.window_start;
    win["window_end"] = r.window.window_end;
    win["peak_current"] = r.window.peak_current;
    win["window_max_current"] = r.window.window_max_current;

    auto& batches = j["batches"] = nlohmann::ordered_json::array();
    for (const auto& b : r.batches) {
        nlohmann::ordered_json e;
        e["rule"] = to_string(b.rule.kind());
        e["tau_env"] = optional_number(b.rule.tau_env());
        e["onset_epsilon"] = b.rule.onset_epsilon();
        e["deterministic_collapse"] = optional_number(b.deterministic_collapse);
        e["n_trials"] = b.summary.n_trials;
        e["capture_fraction"] = b.summary.capture_fraction;
        e["ks_distance"] = optional_number(b.summary.ks_distance);
        e["flag_counts"] = b.summary.flag_counts;
        auto& hist = e["collapse_time_histogram"] = nlohmann::ordered_json::array();
        for (const auto& bin : b.summary.collapse_time_histogram) {
            hist.push_back({bin.bin_start, bin.bin_end, bin.count});
        }
        batches.push_back(std::move(e));
    }
    return j;
}

nlohmann::ordered_json manifest_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["format_version"] = kFormatVersion;
    j["code_version"] = m.code_version;
    j["config"] = m.config_text;
    j["calibration"] = m.calibration ? calibration_json(*m.calibration) : nlohmann::ordered_json(nullptr);
    auto& t = j["wall_times"];
    t["calibrate"] = m.wall_times.calibrate;
    t["evolve"] = m.wall_times.evolve;
    t["reduce"] = m.wall_times.reduce;
    t["analyze"] = m.wall_times.analyze;
    t["emit"] = m.wall_times.emit;
    auto& files = j["files"] = nlohmann::ordered_json::array();
    for (const auto& f : m.files) {
        char crc[16];
        std::snprintf(crc, sizeof(crc), "%08x", f.crc32);
        files.push_back({{"name", f.name}, {"crc32", crc}, {"bytes", f.bytes}});
    }
    return j;
}

namespace {

// Writes whole files and remembers them so a failed run can be rolled back.
class FileSink {
public:
    explicit FileSink(fs::path dir) : dir_(std::move(dir)) {
        if (!fs::exists(dir_)) {
            fs::create_directories(dir_);
            created_dir_ = true;
        }
    }

    FileRecord write(const std::string& name, const std::string& content) {
        const fs::path path = dir_ / name;
        written_.push_back(path);
        std::ofstream out(path, std::ios::binary);
        out << content;
        out.close();
        if (!out) throw ValidationError("cannot write " + path.string());
        boost::crc_32_type crc;
        crc.process_bytes(content.data(), content.size());
        return {name, crc.checksum(), content.size()};
    }

    void rollback() noexcept {
        std::error_code ec;
        for (const auto& p : written_) fs::remove(p, ec);
        if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
    }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool created_dir_ = false;
};

RunManifest emit(const ExperimentResult& r, FileSink& sink, EmitMode mode) {
    const auto start = Clock::now();
    RunManifest manifest;
    manifest.config_text = serialize_config(r.config);
    manifest.calibration = r.calibration;
    manifest.code_version = CAPSIM_VERSION;
    const auto& out_cfg = r.config.output;
    const auto& w = r.evolution.weights;
    auto put = [&](const std::string& name, const std::string& content) {
        manifest.files.push_back(sink.write(name, content));
    };

    if (mode == EmitMode::Full) {
        if (out_cfg.wants("csv")) {
            std::ostringstream s;
            write_weights_csv(s, w,
                              {{"scenario", to_string(r.config.scenario.kind)},
                               {"mean_energy", format_double(r.moments.mean_energy)},
                               {"energy_spread", format_double(r.moments.energy_spread)},
                               {"detector_strength", format_double(r.config.scenario.detector.strength)}});
            put("weights.csv", s.str());
            for (const auto& b : r.batches) {
                std::ostringstream t;
                write_trials_csv(t, b.records);
                put("trials_" + to_string(b.rule.kind()) + ".csv", t.str());
            }
            if (!r.evolution.snapshots.empty()) {
                std::ostringstream sn;
                write_snapshots_csv(sn, r.evolution.final_state.grid(), r.evolution.snapshots);
                put("snapshots.csv", sn.str());
            }
        }
        if (out_cfg.wants("json")) put("summary.json", summary_json(r).dump(2) + "\n");
        if (out_cfg.wants("svg")) {
            std::ostringstream s;
            write_weights_plot(s, w);
            put("weights.svg", s.str());
            for (const auto& b : r.batches) {
                std::ostringstream h;
                write_histogram(h, "Collapse times: " + to_string(b.rule.kind()), b.summary.collapse_time_histogram);
                put("hist_" + to_string(b.rule.kind()) + ".svg", h.str());
            }
        }
    }
    if (out_cfg.wants("json")) put("claims.json", claims_json(r.claims).dump(2) + "\n");
    put("claims.txt", claims_text(r.claims));

    manifest.wall_times = r.times;
    manifest.wall_times.emit = seconds_since(start);
    sink.write("manifest.json", manifest_json(manifest).dump(2) + "\n");
    return manifest;
}

}  // namespace

RunManifest run_experiment(const RunConfig& config, const std::string& out_dir, unsigned threads, EmitMode mode) {
    const ExperimentResult result = execute_experiment(config, threads);
    FileSink sink(out_dir);
    try {
        return emit(result, sink, mode);
    } catch (...) {
        sink.rollback();
        throw;
    }
}

std::vector<SweepRow> run_sweep(const std::string& config_text, const std::vector<ConfigOverride>& base_overrides,
                                const std::string& key, const std::vector<std::string>& values,
                                const std::string& out_dir, unsigned threads) {
    if (values.empty()) throw ValidationError("sweep: no values given");
    std::vector<SweepRow> rows;
    for (const auto& value : values) {
        auto overrides = base_overrides;
        overrides.push_back({key, value});
        const RunConfig config = parse_config(config_text, overrides);
        const ExperimentResult result = execute_experiment(config, threads);
        FileSink sink(fs::path(out_dir) / (key + "=" + value));
        try {
            emit(result, sink, EmitMode::Full);
        } catch (...) {
            sink.rollback();
            throw;
        }
        SweepRow row;
        row.value = value;
        row.energy_spread = result.moments.energy_spread;
        row.total_capture = result.evolution.weights.p_capture.back();
        if (result.peak_times.size() >= 2) row.peak_separation = result.peak_times.back() - result.peak_times.front();
        row.window = result.window;
        rows.push_back(row);
    }

    std::ostringstream s;
    s << "# format_version=" << kFormatVersion << "\n# key=" << key << "\n";
    s << "value,energy_spread,total_capture,peak_separation,window_exists,window_start,window_end\n";
    for (const auto& r : rows) {
        s << r.value << ',' << format_double(r.energy_spread) << ',' << format_double(r.total_capture) << ','
          << (r.peak_separation ? format_double(*r.peak_separation) : "none") << ','
          << (r.window.exists ? "true" : "false") << ',' << format_double(r.window.window_start) << ','
          << format_double(r.window.window_end) << '\n';
    }
    FileSink sink(out_dir);
    sink.write("sweep.csv", s.str());
    return rows;
}

}  // namespace capsim::io
