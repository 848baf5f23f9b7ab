#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace aniso::tools {

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitUsage = 2 };

struct CommandOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::vector<std::string> only;
    bool json = false;
};

int cmd_norms(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_check_id2(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_limit_study(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_perimeter(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_acceptance(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aniso::tools
