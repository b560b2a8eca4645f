#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace corrkit::cli {

// Everything a subcommand needs, resolved from the command line.
struct RunContext {
    nlohmann::json config;     // full parsed config file ({} when none given)
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = 1;
    std::string panel_path;    // empty when not supplied
    std::string criteria_path; // empty when not supplied
    std::string index_path;    // empty when not supplied
};

int run_simulate(const RunContext& ctx);
int run_estimate(const RunContext& ctx);
int run_maxvar(const RunContext& ctx);
int run_epps(const RunContext& ctx);
int run_horizon(const RunContext& ctx);
int run_beta(const RunContext& ctx);
int run_diffusion(const RunContext& ctx);
int run_acceptance(const RunContext& ctx);

} // namespace corrkit::cli
