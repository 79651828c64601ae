#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace capsim {

/// Invalid input: bad parameters, malformed config, violated preconditions.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A run-time numerical guard tripped (accuracy bound, boundary wrap-around).
class NumericalGuardError : public std::runtime_error {
public:
    explicit NumericalGuardError(const std::string& what) : std::runtime_error(what) {}
};

/// One violated constraint, addressed by a dotted field path such as "grid.n_points".
struct FieldIssue {
    std::string field;
    std::string message;
};

/// Aggregates every violated field so callers can report them all at once.
class ConfigError : public ValidationError {
public:
    explicit ConfigError(std::vector<FieldIssue> issues)
        : ValidationError(render(issues)), issues_(std::move(issues)) {}

    const std::vector<FieldIssue>& issues() const { return issues_; }

private:
    static std::string render(const std::vector<FieldIssue>& issues) {
        std::string out;
        for (const auto& issue : issues) {
            if (!out.empty()) out += '\n';
            out += issue.field + ": " + issue.message;
        }
        return out;
    }

    std::vector<FieldIssue> issues_;
};

}  // namespace capsim
