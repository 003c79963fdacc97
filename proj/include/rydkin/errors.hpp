#pragma once

#include <stdexcept>
#include <string>

namespace rydkin {

// Config-file / schema violations. CLI exit code 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Request exceeds a hard size limit (e.g. quantum state space). CLI exit code 3.
struct capacity_error : std::runtime_error {
    explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure (integrator tolerance, fit failure). CLI exit code 4.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// A statistic that is undefined on the given sample (e.g. Mandel Q at zero mean).
struct undefined_statistic : std::domain_error {
    explicit undefined_statistic(const std::string& what) : std::domain_error(what) {}
};

} // namespace rydkin
