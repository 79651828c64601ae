#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace capsim::io {

/// One checkable statement about a run. `holds` is what the run measured;
/// `expected` is the outcome the argument predicts (some claims are expected
/// to fail, e.g. a Hamiltonian-faithful rule collapsing between pulses).
struct Claim {
    std::string id;
    std::string statement;
    bool holds = false;
    bool expected = true;
    std::vector<std::pair<std::string, double>> measured;

    bool as_expected() const { return holds == expected; }
};

/// One line per claim: "PASS|FAIL  id  (expected X, as expected|UNEXPECTED)  k=v ...".
std::string claims_text(const std::vector<Claim>& claims);

nlohmann::ordered_json claims_json(const std::vector<Claim>& claims);

}  // namespace capsim::io
