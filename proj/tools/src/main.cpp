#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "corrkit/errors.hpp"
#include "json.hpp"

namespace {

nlohmann::json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw corrkit::ValidationError("cannot open config file: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw corrkit::ValidationError("config parse error in " + path + ": " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    using corrkit::cli::RunContext;

    CLI::App app{
        "corrkit - correlation-structure toolkit: synthetic markets, spectral estimation,\n"
        "horizon and lag laws, monotone rank factors, reactive betas, and correlation\n"
        "matrix diffusions. Outputs are deterministic functions of (config, seed)."};
    app.require_subcommand(1);

    RunContext ctx;
    std::string config_path;

    auto add_common = [&](CLI::App* cmd, bool config_required) {
        auto* cfg = cmd->add_option("--config", config_path, "JSON config file");
        if (config_required) cfg->required();
        cmd->add_option("--seed", ctx.seed, "RNG seed (default 0)");
        cmd->add_option("--out", ctx.out_dir, "output directory (created if absent)")
            ->required();
        cmd->add_option("--threads", ctx.threads,
                        "worker threads; never changes any computed value")
            ->check(CLI::Range(1, 1024));
    };

    CLI::App* c_sim = app.add_subcommand(
        "simulate", "generate a synthetic return panel and its factor streams");
    add_common(c_sim, true);

    CLI::App* c_est = app.add_subcommand(
        "estimate", "correlation matrix, spectrum, and FCL report from a panel");
    add_common(c_est, true);
    c_est->add_option("--panel", ctx.panel_path, "return panel CSV")->required();

    CLI::App* c_mv = app.add_subcommand(
        "maxvar", "monotone-rank maximum-variance factor portfolio for a criterion");
    add_common(c_mv, true);
    c_mv->add_option("--panel", ctx.panel_path, "return panel CSV")->required();
    c_mv->add_option("--criteria", ctx.criteria_path, "criterion panel CSV")->required();

    CLI::App* c_epps = app.add_subcommand(
        "epps", "eigenvalue scale curves over intraday horizons and the lag-law fit");
    add_common(c_epps, true);
    c_epps->add_option("--panel", ctx.panel_path,
                       "return panel CSV (omit to simulate from the config)");

    CLI::App* c_hor = app.add_subcommand(
        "horizon", "eigenvalue scale curves over daily-and-above horizons");
    add_common(c_hor, true);
    c_hor->add_option("--panel", ctx.panel_path,
                      "daily return panel CSV (omit to simulate from the config)");

    CLI::App* c_beta = app.add_subcommand(
        "beta", "per-asset index betas (ols, reactive, or trimean quantile)");
    add_common(c_beta, true);
    c_beta->add_option("--panel", ctx.panel_path, "return panel CSV")->required();
    c_beta->add_option("--index", ctx.index_path, "index return series CSV")->required();

    CLI::App* c_diff = app.add_subcommand(
        "diffusion", "correlation-matrix diffusion paths and increment spectra");
    add_common(c_diff, true);

    CLI::App* c_acc = app.add_subcommand(
        "acceptance", "run the full acceptance battery and write its report");
    add_common(c_acc, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        ctx.config = config_path.empty() ? nlohmann::json::object() : load_config_file(config_path);
        if (c_sim->parsed()) return corrkit::cli::run_simulate(ctx);
        if (c_est->parsed()) return corrkit::cli::run_estimate(ctx);
        if (c_mv->parsed()) return corrkit::cli::run_maxvar(ctx);
        if (c_epps->parsed()) return corrkit::cli::run_epps(ctx);
        if (c_hor->parsed()) return corrkit::cli::run_horizon(ctx);
        if (c_beta->parsed()) return corrkit::cli::run_beta(ctx);
        if (c_diff->parsed()) return corrkit::cli::run_diffusion(ctx);
        if (c_acc->parsed()) return corrkit::cli::run_acceptance(ctx);
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const corrkit::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const corrkit::NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
