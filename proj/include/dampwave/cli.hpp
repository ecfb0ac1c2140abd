#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dampwave::cli {

const std::vector<std::string>& subcommands();

/// Loads the scenario, runs one subcommand and writes its artifacts under the output directory
/// (`out_dir` if given, else the config's output_dir).
///
/// Exit codes: 0 success, 2 invalid config or precondition, 3 numerical failure. Failures print
/// one line `error code=<CODE> message="<text>"` on `err`.
int run(const std::string& subcommand, const std::string& config_path, const std::optional<std::string>& out_dir,
        const std::vector<std::string>& overrides, std::ostream& err);

}  // namespace dampwave::cli
