#pragma once

#include "spheroid/config.hpp"
#include "spheroid/stationary.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace spheroid {

// Subcommand implementations behind the CLI. Each prints its report to `out`
// and returns 0 when every requested check passes, 1 otherwise. Failures to
// run at all are thrown.
int run_check_assumptions(const RunConfig& config, std::ostream& out);
int run_lemma31(const RunConfig& config, std::ostream& out);
int run_stationary(const RunConfig& config, std::ostream& out);
int run_simulate(const RunConfig& config, std::ostream& out);
int run_stability(const RunConfig& config, std::ostream& out);
int run_convergence(const RunConfig& config, std::ostream& out);

const std::vector<std::string>& command_names();
// Throws DomainError for an unknown name.
int run_command(const std::string& name, const RunConfig& config, std::ostream& out);

// Stationary solution for a run: loaded from paths.stationary when set,
// otherwise computed by relaxation.
StationarySolution obtain_stationary(const RunConfig& config);

} // namespace spheroid
