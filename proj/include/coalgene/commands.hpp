#ifndef COALGENE_COMMANDS_HPP
#define COALGENE_COMMANDS_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "coalgene/config.hpp"
#include "coalgene/diagnostics.hpp"

namespace coalgene {

// Exit codes: 0 success / check pass, 2 check fail, 3 indeterminate.
// Errors are reported by throwing; the CLI maps exceptions to exit 1.

int cmd_rates(const std::string& measure, int n,
              const std::optional<std::string>& out);

int cmd_constants(double alpha, double theta, double gamma,
                  const std::optional<std::string>& out);

int cmd_simulate(const RunConfig& cfg, int threads);
int cmd_estimate_cn(const RunConfig& cfg, int threads);
int cmd_transition(const RunConfig& cfg, int threads);

int cmd_pd(double alpha, double theta, double gamma, int N, long long replicates,
           uint64_t seed, const std::optional<std::string>& out, int threads);

int cmd_check(const std::string& check_name, const RunConfig& cfg, int threads);

// Per-N CSV of a check's rows, for external plotting.
int cmd_plotdata(const std::string& check_name, const RunConfig& cfg, int threads);

// Dispatches a named check from a parsed config; shared by cmd_check,
// cmd_plotdata and the python module.
CheckReport run_named_check(const std::string& name, const RunConfig& cfg,
                            int threads);

uint64_t require_seed(const RunConfig& cfg);

} // namespace coalgene

#endif
