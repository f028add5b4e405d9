#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "sepmix/config.hpp"

namespace sepmix {

struct RunResult {
    std::string content;
    int status = 0;        // 0 ok, 2 property violation
    std::string message;   // names the violated invariant when status is 2
};

// Builds the output for `module verb` without touching the filesystem.
RunResult execute(const RunConfig& cfg, const std::string& module, const std::string& verb, int threads = 1);

struct RunOptions {
    std::string module;
    std::string verb;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    int threads = 0;
};

// Full CLI run: exit 0 on success, 1 on usage error, 2 on property violation.
int run(const std::string& config_text, const RunOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace sepmix
