#pragma once

#include "grds/audits.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace grds {

struct CheckInfo {
    std::string name;
    std::string reference;
    std::function<CheckResult(const AuditConfig&, Stream&)> run;
};

// All audits, sorted by name. Each reference appears exactly once.
const std::vector<CheckInfo>& check_registry();

struct Scorecard {
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;  // sorted by name

    long total_violations() const;
    bool passed() const { return total_violations() == 0; }
    const CheckResult* find(const std::string& name) const;
};

struct VerifyConfig {
    AuditConfig audit;
    // nullopt runs every check; an empty list yields an empty scorecard.
    std::optional<std::vector<std::string>> checks;
    unsigned threads = 1;
};

// Check `name` draws from Stream(seed).substream(check_stream_id(name)), so the scorecard is a
// pure function of (config, seed) and does not depend on the thread count.
std::uint64_t check_stream_id(const std::string& name);

// Throws std::invalid_argument for unknown check names and std::runtime_error naming the check
// when an audit fails to run.
Scorecard run_all(const VerifyConfig& cfg, std::uint64_t seed);

}  // namespace grds
