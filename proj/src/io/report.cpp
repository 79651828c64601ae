#include "capsim/io/report.hpp"

#include <sstream>

#include "capsim/io/config.hpp"
#include "capsim/io/format.hpp"

namespace capsim::io {

std::string claims_text(const std::vector<Claim>& claims) {
    std::ostringstream out;
    for (const auto& c : claims) {
        out << (c.holds ? "PASS" : "FAIL") << "  " << c.id << "  (expected " << (c.expected ? "PASS" : "FAIL")
            << ", " << (c.as_expected() ? "as expected" : "UNEXPECTED") << ")";
        for (const auto& [name, value] : c.measured) out << "  " << name << "=" << format_double(value);
        out << "\n";
    }
    return out.str();
}

nlohmann::ordered_json claims_json(const std::vector<Claim>& claims) {
    nlohmann::ordered_json doc;
    doc["format_version"] = kFormatVersion;
    auto& list = doc["claims"] = nlohmann::ordered_json::array();
    for (const auto& c : claims) {
        nlohmann::ordered_json entry;
        entry["id"] = c.id;
        entry["statement"] = c.statement;
        entry["status"] = c.holds ? "PASS" : "FAIL";
        entry["expected"] = c.expected ? "PASS" : "FAIL";
        entry["as_expected"] = c.as_expected();
        auto& measured = entry["measured"] = nlohmann::ordered_json::object();
        for (const auto& [name, value] : c.measured) measured[name] = value;
        list.push_back(std::move(entry));
    }
    return doc;
}

}  // namespace capsim::io
