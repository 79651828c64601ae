#include "capsim/io/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "capsim/io/format.hpp"

namespace capsim::io {
namespace {

const std::vector<std::string> kKnownFormats{"csv", "json", "svg"};

struct Entry {
    std::string value;
    std::size_t line = 0;
    bool used = false;
};

struct Document {
    std::map<std::string, std::map<std::string, Entry>> sections;
};

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '.';
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Comments start with '#' or ';' at line start or after whitespace.
std::string_view strip_comment(std::string_view line) {
    for (std::size_t i = 0; i < line.size(); ++i) {
        if ((line[i] == '#' || line[i] == ';') &&
            (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
            return line.substr(0, i);
        }
    }
    return line;
}

Document tokenize(const std::string& text) {
    Document doc;
    doc.sections[""];
    std::string section;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string_view body = strip_comment(raw);
        const auto first = body.find_first_not_of(" \t");
        if (first == std::string_view::npos) continue;
        const std::size_t col = first + 1;

        if (body[first] == '[') {
            const auto close = body.find(']', first);
            if (close == std::string_view::npos) {
                throw ConfigSyntaxError("unterminated section header", line_no, body.size() + 1);
            }
            const auto name = body.substr(first + 1, close - first - 1);
            if (name.empty()) throw ConfigSyntaxError("empty section name", line_no, col + 1);
            for (std::size_t i = 0; i < name.size(); ++i) {
                if (!is_name_char(name[i])) {
                    throw ConfigSyntaxError("invalid character in section name", line_no, first + 2 + i);
                }
            }
            const auto rest = trim(body.substr(close + 1));
            if (!rest.empty()) {
                throw ConfigSyntaxError("unexpected text after section header", line_no,
                                        body.find(rest, close + 1) + 1);
            }
            section = std::string(name);
            if (doc.sections.count(section) != 0 && !section.empty()) {
                throw ConfigSyntaxError("duplicate section [" + section + "]", line_no, col);
            }
            doc.sections[section];
            continue;
        }

        const auto eq = body.find('=', first);
        if (eq == std::string_view::npos) {
            throw ConfigSyntaxError("expected 'key = value'", line_no, body.size() + 1);
        }
        const auto key = trim(body.substr(first, eq - first));
        if (key.empty()) throw ConfigSyntaxError("missing key before '='", line_no, eq + 1);
        for (std::size_t i = 0; i < key.size(); ++i) {
            if (!is_name_char(key[i]) || key[i] == '.') {
                throw ConfigSyntaxError("invalid character in key", line_no, first + 1 + i);
            }
        }
        const auto value = trim(body.substr(eq + 1));
        if (value.empty()) throw ConfigSyntaxError("missing value after '='", line_no, eq + 2);
        auto& entries = doc.sections[section];
        if (entries.count(std::string(key)) != 0) {
            throw ConfigSyntaxError("duplicate key '" + std::string(key) + "'", line_no, col);
        }
        entries[std::string(key)] = Entry{std::string(value), line_no, false};
    }
    return doc;
}

void apply_overrides(Document& doc, const std::vector<ConfigOverride>& overrides) {
    for (const auto& o : overrides) {
        const auto dot = o.key.rfind('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == o.key.size()) {
            throw ValidationError("override key '" + o.key + "' must have the form section.field");
        }
        doc.sections[o.key.substr(0, dot)][o.key.substr(dot + 1)] = Entry{o.value, 0, false};
    }
}

std::string path_of(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
}

class Reader {
public:
    explicit Reader(Document& doc) : doc_(doc) {}

    std::vector<FieldIssue> issues;

    bool has_section(const std::string& section) const { return doc_.sections.count(section) != 0; }

    void issue(const std::string& field, const std::string& message) { issues.push_back({field, message}); }

    const Entry* find(const std::string& section, const std::string& key) {
        auto s = doc_.sections.find(section);
        if (s == doc_.sections.end()) return nullptr;
        auto e = s->second.find(key);
        if (e == s->second.end()) return nullptr;
        e->second.used = true;
        return &e->second;
    }

    std::string where(const Entry& e) const {
        return e.line > 0 ? " (line " + std::to_string(e.line) + ")" : " (override)";
    }

    void number(const std::string& section, const std::string& key, double& out, bool required = false) {
        const auto* e = find(section, key);
        if (e == nullptr) {
            if (required) issue(path_of(section, key), "required field is missing");
            return;
        }
        const auto v = parse_double(e->value);
        if (!v || !std::isfinite(*v)) {
            issue(path_of(section, key), "'" + e->value + "' is not a finite number" + where(*e));
            return;
        }
        out = *v;
    }

    template <typename Int>
    void integer(const std::string& section, const std::string& key, Int& out) {
        const auto* e = find(section, key);
        if (e == nullptr) return;
        const auto v = parse_integer<Int>(e->value);
        if (!v) {
            issue(path_of(section, key), "'" + e->value + "' is not a valid integer" + where(*e));
            return;
        }
        out = *v;
    }

    void boolean(const std::string& section, const std::string& key, bool& out) {
        const auto* e = find(section, key);
        if (e == nullptr) return;
        if (e->value == "true") out = true;
        else if (e->value == "false") out = false;
        else issue(path_of(section, key), "expected true or false" + where(*e));
    }

    void text(const std::string& section, const std::string& key, std::string& out) {
        const auto* e = find(section, key);
        if (e != nullptr) out = e->value;
    }

    void list(const std::string& section, const std::string& key, std::vector<std::string>& out) {
        const auto* e = find(section, key);
        if (e == nullptr) return;
        out.clear();
        std::string_view rest = e->value;
        while (true) {
            const auto comma = rest.find(',');
            const auto item = trim(rest.substr(0, comma));
            if (item.empty()) {
                issue(path_of(section, key), "empty list element" + where(*e));
                return;
            }
            out.emplace_back(item);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
    }

    void report_unknown(const std::set<std::string>& known_sections) {
        for (const auto& [section, entries] : doc_.sections) {
            if (known_sections.count(section) == 0) {
                issue(section, "unknown section");
                continue;
            }
            for (const auto& [key, entry] : entries) {
                if (!entry.used) issue(path_of(section, key), "unknown key" + where(entry));
            }
        }
    }

private:
    Document& doc_;
};

const std::vector<RuleKind> kRuleOrder{RuleKind::PenroseEnv, RuleKind::PenroseSpread, RuleKind::CurrentJump};

RunConfig build(Document& doc) {
    Reader r(doc);
    RunConfig c;

    r.integer("", "format_version", c.format_version);
    if (c.format_version != kFormatVersion) {
        r.issue("format_version", "unsupported version " + std::to_string(c.format_version));
    }

    r.integer("grid", "n_points", c.grid.n_points);
    r.number("grid", "length", c.grid.length, true);
    c.grid.origin = -0.5 * c.grid.length;
    r.number("grid", "origin", c.grid.origin);
    bool grid_ok = true;
    if (c.grid.n_points < 2 || (c.grid.n_points & (c.grid.n_points - 1)) != 0) {
        r.issue("grid.n_points", std::to_string(c.grid.n_points) + " is not a power of two");
        grid_ok = false;
    }
    if (!(c.grid.length > 0.0)) {
        r.issue("grid.length", "must be positive");
        grid_ok = false;
    }

    auto& s = c.scenario;
    r.number("packet", "center", s.packet.center, true);
    r.number("packet", "width", s.packet.width, true);
    r.number("packet", "momentum", s.packet.momentum, true);

    std::string kind = "single_pulse";
    r.text("scenario", "kind", kind);
    if (kind == "single_pulse") s.kind = ScenarioKind::SinglePulse;
    else if (kind == "two_pulse") s.kind = ScenarioKind::TwoPulse;
    else r.issue("scenario.kind", "expected single_pulse or two_pulse, got '" + kind + "'");
    r.number("scenario", "pulse_gap", s.pulse_gap);
    r.number("scenario", "t_final", s.t_final, true);
    r.number("scenario", "dt", s.dt, true);
    r.integer("scenario", "sample_every", s.sample_every);
    if (s.kind == ScenarioKind::SinglePulse && s.pulse_gap != 0.0) {
        r.issue("scenario.pulse_gap", "only meaningful for two_pulse");
    }

    r.number("detector", "center", s.detector.center, true);
    r.number("detector", "half_width", s.detector.half_width, true);
    r.number("detector", "strength", s.detector.strength);
    std::string window = "cos2";
    r.text("detector", "window", window);
    if (window != "cos2") r.issue("detector.window", "only the cos2 profile is supported");

    r.boolean("calibration", "enabled", c.calibration.enabled);
    r.number("calibration", "target", c.calibration.target);
    r.number("calibration", "tolerance", c.calibration.tolerance);
    r.integer("calibration", "max_iter", c.calibration.max_iter);
    if (!(c.calibration.target >= 0.0 && c.calibration.target < 1.0)) {
        r.issue("calibration.target", "must lie in [0, 1)");
    }
    if (!(c.calibration.tolerance > 0.0)) r.issue("calibration.tolerance", "must be positive");
    if (c.calibration.max_iter <= 0) r.issue("calibration.max_iter", "must be positive");

    bool any_rule = false;
    for (auto kind_id : kRuleOrder) {
        const std::string section = "rule." + to_string(kind_id);
        if (r.has_section(section)) any_rule = true;
    }
    for (auto kind_id : kRuleOrder) {
        const std::string section = "rule." + to_string(kind_id);
        if (any_rule && !r.has_section(section)) continue;
        double onset = kDefaultOnsetEpsilon;
        double tau = kDefaultTauEnv;
        r.number(section, "onset_epsilon", onset);
        if (kind_id == RuleKind::PenroseEnv) r.number(section, "tau_env", tau);
        if (!(onset > 0.0)) {
            r.issue(section + ".onset_epsilon", "must be positive");
            continue;
        }
        if (!(tau > 0.0)) {
            r.issue(section + ".tau_env", "must be positive");
            continue;
        }
        switch (kind_id) {
            case RuleKind::PenroseEnv: c.rules.push_back(ReductionRule::penrose_env(tau, onset)); break;
            case RuleKind::PenroseSpread: c.rules.push_back(ReductionRule::penrose_spread(onset)); break;
            case RuleKind::CurrentJump: c.rules.push_back(ReductionRule::current_jump(onset)); break;
        }
    }

    r.integer("trials", "n_trials", c.trials.n_trials);
    r.integer("trials", "base_seed", c.trials.base_seed);
    if (c.trials.n_trials == 0) r.issue("trials.n_trials", "must be positive");

    r.number("analysis", "threshold_ratio", c.analysis.threshold_ratio);
    r.integer("analysis", "histogram_bins", c.analysis.histogram_bins);
    if (!(c.analysis.threshold_ratio > 0.0 && c.analysis.threshold_ratio <= 1.0)) {
        r.issue("analysis.threshold_ratio", "must lie in (0, 1]");
    }
    if (c.analysis.histogram_bins == 0) r.issue("analysis.histogram_bins", "must be positive");

    r.text("output", "directory", c.output.directory);
    r.integer("output", "snapshot_stride", c.output.snapshot_stride);
    r.list("output", "formats", c.output.formats);
    if (c.output.formats.empty()) r.issue("output.formats", "at least one format is required");
    for (const auto& f : c.output.formats) {
        if (std::find(kKnownFormats.begin(), kKnownFormats.end(), f) == kKnownFormats.end()) {
            r.issue("output.formats", "unknown format '" + f + "' (expected csv, json, svg)");
        }
    }

    if (r.has_section("sweep")) {
        SweepConfig sweep;
        r.text("sweep", "key", sweep.key);
        r.list("sweep", "values", sweep.values);
        if (sweep.key.empty()) r.issue("sweep.key", "required field is missing");
        if (sweep.values.empty()) r.issue("sweep.values", "required field is missing");
        c.sweep = sweep;
    }

    std::set<std::string> known{"", "grid", "packet", "scenario", "detector", "calibration",
                                "trials", "analysis", "output", "sweep"};
    for (auto kind_id : kRuleOrder) known.insert("rule." + to_string(kind_id));
    r.report_unknown(known);

    // Cross-field checks need a valid grid.
    if (grid_ok && r.issues.empty()) {
        const Grid1D grid(c.grid.n_points, c.grid.length, c.grid.origin);
        for (auto& issue : check_scenario(s, grid)) r.issues.push_back(std::move(issue));
        if (s.dt > 0.0 && !(s.dt * max_kinetic_energy(grid) < 0.5)) {
            std::ostringstream msg;
            msg << "dt * max kinetic energy = " << s.dt * max_kinetic_energy(grid)
                << " violates the accuracy guard (< 0.5)";
            r.issue("scenario.dt", msg.str());
        }
    }

    if (!r.issues.empty()) throw ConfigError(std::move(r.issues));
    return c;
}

}  // namespace

bool OutputConfig::wants(const std::string& format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

ConfigSyntaxError::ConfigSyntaxError(const std::string& message, std::size_t line, std::size_t column)
    : ValidationError("syntax error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                      ": " + message),
      line_(line),
      column_(column) {}

RunConfig parse_config(const std::string& text, const std::vector<ConfigOverride>& overrides) {
    Document doc = tokenize(text);
    apply_overrides(doc, overrides);
    return build(doc);
}

RunConfig load_config(const std::string& path, const std::vector<ConfigOverride>& overrides) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides);
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    auto num = [](double v) { return format_double(v); };
    out << "format_version = " << c.format_version << "\n\n";
    out << "[grid]\n"
        << "n_points = " << c.grid.n_points << "\n"
        << "length = " << num(c.grid.length) << "\n"
        << "origin = " << num(c.grid.origin) << "\n\n";
    const auto& s = c.scenario;
    out << "[packet]\n"
        << "center = " << num(s.packet.center) << "\n"
        << "width = " << num(s.packet.width) << "\n"
        << "momentum = " << num(s.packet.momentum) << "\n\n";
    out << "[scenario]\n"
        << "kind = " << to_string(s.kind) << "\n";
    if (s.kind == ScenarioKind::TwoPulse) out << "pulse_gap = " << num(s.pulse_gap) << "\n";
    out << "t_final = " << num(s.t_final) << "\n"
        << "dt = " << num(s.dt) << "\n"
        << "sample_every = " << s.sample_every << "\n\n";
    out << "[detector]\n"
        << "center = " << num(s.detector.center) << "\n"
        << "half_width = " << num(s.detector.half_width) << "\n"
        << "strength = " << num(s.detector.strength) << "\n"
        << "window = cos2\n\n";
    out << "[calibration]\n"
        << "enabled = " << (c.calibration.enabled ? "true" : "false") << "\n"
        << "target = " << num(c.calibration.target) << "\n"
        << "tolerance = " << num(c.calibration.tolerance) << "\n"
        << "max_iter = " << c.calibration.max_iter << "\n\n";
    for (const auto& rule : c.rules) {
        out << "[rule." << to_string(rule.kind()) << "]\n";
        if (rule.tau_env()) out << "tau_env = " << num(*rule.tau_env()) << "\n";
        out << "onset_epsilon = " << num(rule.onset_epsilon()) << "\n\n";
    }
    out << "[trials]\n"
        << "n_trials = " << c.trials.n_trials << "\n"
        << "base_seed = " << c.trials.base_seed << "\n\n";
    out << "[analysis]\n"
        << "threshold_ratio = " << num(c.analysis.threshold_ratio) << "\n"
        << "histogram_bins = " << c.analysis.histogram_bins << "\n\n";
    out << "[output]\n"
        << "directory = " << c.output.directory << "\n"
        << "snapshot_stride = " << c.output.snapshot_stride << "\n";
    out << "formats = ";
    for (std::size_t i = 0; i < c.output.formats.size(); ++i) {
        out << (i ? "," : "") << c.output.formats[i];
    }
    out << "\n";
    if (c.sweep) {
        out << "\n[sweep]\n"
            << "key = " << c.sweep->key << "\n"
            << "values = ";
        for (std::size_t i = 0; i < c.sweep->values.size(); ++i) {
            out << (i ? "," : "") << c.sweep->values[i];
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace capsim::io
