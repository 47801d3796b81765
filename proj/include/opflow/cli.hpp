#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "opflow/io.hpp"

namespace opflow {

/// Everything needed to redo one invocation; saved as config.json next to the
/// outputs.
struct RunConfig {
	std::string subcommand;            ///< run | gen | compare | lowerbound | certify
	std::vector<std::string> instances;
	std::string family;                ///< generator family, when no instance file is given
	std::string params;                ///< "k=v,..."
	std::uint64_t seed = 0;
	std::vector<std::string> policies;
	std::optional<Time> tau;           ///< nullopt: earliest argmax of |J(t)|
	std::string out;                   ///< output directory; empty = stdout only
	unsigned jobs = 1;                 ///< worker threads, 0 = hardware concurrency
	std::size_t samples = 10000;       ///< random subsets for the primal check

	bool operator==(const RunConfig&) const = default;
};

Json to_json(const RunConfig& config);
RunConfig run_config_from_json(const Json& j);

/// Runs a config, printing the JSON report to `out`. Throws InputError /
/// InvariantViolation.
void execute(const RunConfig& config, std::ostream& out);

/// Command-line entry point. Exit codes: 0 ok, 1 usage or input error, 2
/// invariant violation (named on `err`).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace opflow
