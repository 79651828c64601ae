#include "capsim/io/series.hpp"

#include <fstream>
#include <sstream>

#include "capsim/errors.hpp"
#include "capsim/io/config.hpp"
#include "capsim/io/format.hpp"

namespace capsim::io {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(sep, pos);
        out.push_back(line.substr(pos, next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

double field_number(const std::string& text, std::size_t line, const char* column) {
    const auto v = parse_double(text);
    if (!v) {
        throw ValidationError("line " + std::to_string(line) + ": bad value '" + text + "' in column " + column);
    }
    return *v;
}

// Consumes "# key=value" metadata lines and the header; returns the data lines.
std::vector<std::pair<std::size_t, std::string>> read_table(const std::string& text, const char* header,
                                                            Metadata& metadata) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<std::pair<std::size_t, std::string>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!have_header && line.front() == '#') {
            const auto body = line.substr(1);
            const auto eq = body.find('=');
            if (eq == std::string::npos) continue;
            auto key = body.substr(0, eq);
            while (!key.empty() && key.front() == ' ') key.erase(0, 1);
            metadata[key] = body.substr(eq + 1);
            continue;
        }
        if (!have_header) {
            if (line != header) {
                throw ValidationError("line " + std::to_string(line_no) + ": expected header '" + header + "'");
            }
            have_header = true;
            continue;
        }
        rows.emplace_back(line_no, line);
    }
    if (!have_header) throw ValidationError("missing CSV header '" + std::string(header) + "'");
    const auto version = metadata.find("format_version");
    if (version == metadata.end() || version->second != std::to_string(kFormatVersion)) {
        throw ValidationError("unsupported or missing format_version");
    }
    return rows;
}

}  // namespace

void write_weights_csv(std::ostream& out, const ComponentWeights& weights, const Metadata& metadata) {
    out << "# format_version=" << kFormatVersion << "\n";
    for (const auto& [key, value] : metadata) {
        if (key != "format_version") out << "# " << key << "=" << value << "\n";
    }
    out << kWeightsHeader << "\n";
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out << format_double(weights.times[i]) << ',' << format_double(weights.p_no_capture[i]) << ','
            << format_double(weights.p_capture[i]) << ',' << format_double(weights.current[i]) << '\n';
    }
}

WeightsFile parse_weights_csv(const std::string& text) {
    WeightsFile file;
    auto& w = file.weights;
    for (const auto& [line_no, line] : read_table(text, kWeightsHeader, file.metadata)) {
        const auto cols = split(line, ',');
        if (cols.size() != 4) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected 4 columns");
        }
        w.times.push_back(field_number(cols[0], line_no, "time"));
        w.p_no_capture.push_back(field_number(cols[1], line_no, "p_no_capture"));
        w.p_capture.push_back(field_number(cols[2], line_no, "p_capture"));
        w.current.push_back(field_number(cols[3], line_no, "current"));
    }
    return file;
}

WeightsFile read_weights_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read weights file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_weights_csv(buf.str());
}

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records) {
    out << "# format_version=" << kFormatVersion << "\n";
    out << kTrialsHeader << "\n";
    for (const auto& r : records) {
        out << r.seed << ',' << to_string(r.rule) << ','
            << (r.collapse_time ? format_double(*r.collapse_time) : std::string("none")) << ','
            << to_string(r.chosen) << ',' << format_double(r.p_capture_at_collapse) << ','
            << format_double(r.current_at_collapse) << ',' << flags_to_string(r.flags) << '\n';
    }
}

std::vector<TrialRecord> parse_trials_csv(const std::string& text) {
    Metadata metadata;
    std::vector<TrialRecord> records;
    for (const auto& [line_no, line] : read_table(text, kTrialsHeader, metadata)) {
        const auto cols = split(line, ',');
        if (cols.size() != 7) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected 7 columns");
        }
        TrialRecord r;
        const auto seed = parse_integer<std::uint64_t>(cols[0]);
        if (!seed) throw ValidationError("line " + std::to_string(line_no) + ": bad seed");
        r.seed = *seed;
        r.rule = rule_kind_from_string(cols[1]);
        if (cols[2] != "none") r.collapse_time = field_number(cols[2], line_no, "collapse_time");
        if (cols[3] == "capture") r.chosen = Component::Capture;
        else if (cols[3] == "no_capture") r.chosen = Component::NoCapture;
        else throw ValidationError("line " + std::to_string(line_no) + ": bad chosen component");
        r.p_capture_at_collapse = field_number(cols[4], line_no, "p_capture_at_collapse");
        r.current_at_collapse = field_number(cols[5], line_no, "current_at_collapse");
        r.flags = flags_from_string(cols[6]);
        records.push_back(r);
    }
    return records;
}

void write_snapshots_csv(std::ostream& out, const Grid1D& grid, std::span<const Snapshot> snapshots) {
    out << "# format_version=" << kFormatVersion << "\n";
    out << "time,x,density\n";
    for (const auto& snap : snapshots) {
        const auto t = format_double(snap.time);
        for (std::size_t i = 0; i < snap.density.size(); ++i) {
            out << t << ',' << format_double(grid.x(i)) << ',' << format_double(snap.density[i]) << '\n';
        }
    }
}

}  // namespace capsim::io
