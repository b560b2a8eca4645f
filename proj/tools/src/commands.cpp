#include "commands.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "corrkit/correlation.hpp"
#include "corrkit/csv.hpp"
#include "corrkit/diffusion.hpp"
#include "corrkit/epps.hpp"
#include "corrkit/errors.hpp"
#include "corrkit/horizon.hpp"
#include "corrkit/market_sim.hpp"
#include "corrkit/maxvar.hpp"
#include "corrkit/panel.hpp"
#include "corrkit/parallel.hpp"
#include "corrkit/reactive_beta.hpp"
#include "corrkit/stats.hpp"
#include "corrkit/svg.hpp"
#include "corrkit/validation.hpp"

namespace corrkit::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// --- config access ----------------------------------------------------------

const json& config_section(const json& config, const std::string& name) {
    if (!config.is_object())
        throw ValidationError("config root must be a JSON object");
    auto it = config.find(name);
    if (it == config.end())
        throw ValidationError("config is missing the \"" + name + "\" section");
    if (!it->is_object())
        throw ValidationError("config section \"" + name + "\" must be a JSON object");
    return *it;
}

double get_number(const json& sec, const std::string& key,
                  std::optional<double> fallback = std::nullopt) {
    auto it = sec.find(key);
    if (it == sec.end()) {
        if (fallback) return *fallback;
        throw ValidationError("config field \"" + key + "\" is required");
    }
    if (!it->is_number())
        throw ValidationError("config field \"" + key + "\" must be a number");
    return it->get<double>();
}

long long get_integer(const json& sec, const std::string& key,
                      std::optional<long long> fallback = std::nullopt) {
    auto it = sec.find(key);
    if (it == sec.end()) {
        if (fallback) return *fallback;
        throw ValidationError("config field \"" + key + "\" is required");
    }
    if (!it->is_number_integer())
        throw ValidationError("config field \"" + key + "\" must be an integer");
    return it->get<long long>();
}

std::string get_string(const json& sec, const std::string& key,
                       std::optional<std::string> fallback = std::nullopt) {
    auto it = sec.find(key);
    if (it == sec.end()) {
        if (fallback) return *fallback;
        throw ValidationError("config field \"" + key + "\" is required");
    }
    if (!it->is_string())
        throw ValidationError("config field \"" + key + "\" must be a string");
    return it->get<std::string>();
}

bool get_flag(const json& sec, const std::string& key, bool fallback) {
    auto it = sec.find(key);
    if (it == sec.end()) return fallback;
    if (!it->is_boolean())
        throw ValidationError("config field \"" + key + "\" must be a boolean");
    return it->get<bool>();
}

std::vector<long long> get_integer_list(const json& sec, const std::string& key) {
    auto it = sec.find(key);
    if (it == sec.end())
        throw ValidationError("config field \"" + key + "\" is required");
    if (!it->is_array() || it->empty())
        throw ValidationError("config field \"" + key + "\" must be a non-empty array");
    std::vector<long long> out;
    out.reserve(it->size());
    for (const auto& v : *it) {
        if (!v.is_number_integer())
            throw ValidationError("config field \"" + key + "\" must contain integers");
        out.push_back(v.get<long long>());
    }
    return out;
}

// --- output plumbing --------------------------------------------------------

fs::path out_path(const RunContext& ctx, const std::string& name) {
    return fs::path(ctx.out_dir) / name;
}

void ensure_out_dir(const RunContext& ctx) {
    if (ctx.out_dir.empty()) throw ValidationError("--out directory is required");
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec)
        throw ValidationError("cannot create output directory " + ctx.out_dir + ": " +
                              ec.message());
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path.string());
    out << text;
    if (!out) throw ValidationError("failed while writing " + path.string());
}

void write_json_file(const fs::path& path, const json& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

// Every run ends with a manifest echoing the subcommand, the seed, and the
// fully resolved config sections it consumed (defaults filled in). Thread
// count and paths are deliberately absent: reruns of the same work must be
// byte-identical regardless of --threads or --out.
void write_manifest(const RunContext& ctx, const std::string& subcommand,
                    const json& resolved_config) {
    json manifest;
    manifest["subcommand"] = subcommand;
    manifest["seed"] = ctx.seed;
    manifest["config"] = resolved_config;
    write_json_file(out_path(ctx, "manifest.json"), manifest);
}

// CSV with a leading string column (asset names).
void write_named_csv(const fs::path& path, const std::vector<std::string>& header,
                     const std::vector<std::string>& row_names, const Eigen::MatrixXd& values) {
    if (static_cast<Eigen::Index>(header.size()) != values.cols() + 1 ||
        static_cast<Eigen::Index>(row_names.size()) != values.rows())
        throw ValidationError("named csv shape mismatch for " + path.string());
    std::string text;
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) text += ',';
        text += header[i];
    }
    text += '\n';
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        text += row_names[static_cast<size_t>(r)];
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            text += ',';
            text += format_double(values(r, c));
        }
        text += '\n';
    }
    write_text_file(path, text);
}

// Long-format scale curves: horizon_seconds, k, lambda.
void write_scale_curves_csv(const fs::path& path, const ScaleCurveSet& set) {
    std::vector<long long> key;
    std::vector<double> ks, lambdas;
    for (const auto& curve : set.curves) {
        for (size_t i = 0; i < curve.horizons_seconds.size(); ++i) {
            key.push_back(curve.horizons_seconds[i]);
            ks.push_back(static_cast<double>(curve.eigen_index));
            lambdas.push_back(curve.values[static_cast<Eigen::Index>(i)]);
        }
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(key.size()), 2);
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        values(r, 0) = ks[static_cast<size_t>(r)];
        values(r, 1) = lambdas[static_cast<size_t>(r)];
    }
    write_csv(path.string(), {"horizon_seconds", "k", "lambda"}, key, values);
}

json curves_to_json(const ScaleCurveSet& set) {
    json arr = json::array();
    for (const auto& curve : set.curves) {
        json c;
        c["k"] = curve.eigen_index;
        c["horizons_seconds"] = curve.horizons_seconds;
        c["lambda"] = std::vector<double>(curve.values.begin(), curve.values.end());
        arr.push_back(std::move(c));
    }
    return arr;
}

void plot_scale_curves(const fs::path& path, const ScaleCurveSet& set, const PlotOptions& options,
                       const std::vector<PlotSeries>& extra = {}) {
    std::vector<PlotSeries> series;
    for (const auto& curve : set.curves) {
        PlotSeries s;
        s.name = "lambda_" + std::to_string(curve.eigen_index);
        for (size_t i = 0; i < curve.horizons_seconds.size(); ++i) {
            s.x.push_back(static_cast<double>(curve.horizons_seconds[i]));
            s.y.push_back(curve.values[static_cast<Eigen::Index>(i)]);
        }
        series.push_back(std::move(s));
    }
    series.insert(series.end(), extra.begin(), extra.end());
    write_line_plot_svg(path.string(), series, options);
}

// --- panel / estimator config ------------------------------------------------

MissingPolicy policy_from(const json& sec, json& resolved) {
    const std::string name = get_string(sec, "missing_policy", std::string("drop_asset"));
    resolved["missing_policy"] = name;
    if (name == "drop_asset") return MissingPolicy::drop_asset;
    if (name == "zero_fill") return MissingPolicy::zero_fill;
    throw ValidationError("missing_policy must be \"drop_asset\" or \"zero_fill\"");
}

ReturnPanel require_panel(const RunContext& ctx, MissingPolicy policy) {
    if (ctx.panel_path.empty())
        throw ValidationError("this subcommand requires --panel <csv>");
    return load_return_panel(ctx.panel_path, policy);
}

Estimator estimator_from(const json& sec, json& resolved) {
    const std::string name = get_string(sec, "estimator", std::string("pearson"));
    resolved["estimator"] = name;
    if (name == "pearson") return Estimator::pearson();
    if (name == "ewma") {
        const double halflife = get_number(sec, "halflife_periods", 60.0);
        resolved["halflife_periods"] = halflife;
        return Estimator::ewma(halflife);
    }
    throw ValidationError("estimator must be \"pearson\" or \"ewma\"");
}

// --- synthetic market presets -------------------------------------------------

SyntheticMarketSpec spec_from_config(const json& sec, json& resolved) {
    const std::string preset = get_string(sec, "preset");
    const long long horizon_steps = get_integer(sec, "horizon_steps");
    resolved["preset"] = preset;
    resolved["horizon_steps"] = horizon_steps;

    if (preset == "equicorrelation") {
        const int n = static_cast<int>(get_integer(sec, "n_assets"));
        const double rho = get_number(sec, "rho");
        const long long step = get_integer(sec, "step_seconds", 86400);
        const double vol = get_number(sec, "per_step_vol", 0.01);
        resolved["n_assets"] = n;
        resolved["rho"] = rho;
        resolved["step_seconds"] = step;
        resolved["per_step_vol"] = vol;
        return equicorrelation_spec(n, rho, horizon_steps, step, vol);
    }
    if (preset == "lagged_factor") {
        const int n = static_cast<int>(get_integer(sec, "n_assets"));
        const int k = static_cast<int>(get_integer(sec, "n_factors", 1));
        const double tau = get_number(sec, "tau_seconds");
        const long long step = get_integer(sec, "step_seconds", 10);
        const double vol = get_number(sec, "per_step_vol", 0.001);
        resolved["n_assets"] = n;
        resolved["n_factors"] = k;
        resolved["tau_seconds"] = tau;
        resolved["step_seconds"] = step;
        resolved["per_step_vol"] = vol;
        return lagged_factor_spec(n, k, tau, horizon_steps, step, vol);
    }
    if (preset == "linear_exposure") {
        const int n = static_cast<int>(get_integer(sec, "n_assets"));
        const double spread = get_number(sec, "style_spread", 0.5);
        const double market = get_number(sec, "market_loading", 0.5);
        const long long step = get_integer(sec, "step_seconds", 86400);
        const double vol = get_number(sec, "per_step_vol", 0.01);
        resolved["n_assets"] = n;
        resolved["style_spread"] = spread;
        resolved["market_loading"] = market;
        resolved["step_seconds"] = step;
        resolved["per_step_vol"] = vol;
        return linear_exposure_spec(n, horizon_steps, spread, market, step, vol);
    }
    if (preset == "factor_trend") {
        const int n = static_cast<int>(get_integer(sec, "n_assets"));
        const double rho = get_number(sec, "rho");
        const double relax = get_number(sec, "trend_relaxation_periods");
        const double share = get_number(sec, "trend_variance_share");
        const long long step = get_integer(sec, "step_seconds", 86400);
        const double vol = get_number(sec, "per_step_vol", 0.01);
        resolved["n_assets"] = n;
        resolved["rho"] = rho;
        resolved["trend_relaxation_periods"] = relax;
        resolved["trend_variance_share"] = share;
        resolved["step_seconds"] = step;
        resolved["per_step_vol"] = vol;
        return factor_trend_spec(n, rho, relax, share, horizon_steps, step, vol);
    }
    if (preset == "leverage") {
        const int n = static_cast<int>(get_integer(sec, "n_assets"));
        const int k = static_cast<int>(get_integer(sec, "n_factors", 3));
        LeverageSpec lev;
        lev.systematic_slope = get_number(sec, "systematic_slope", 0.0);
        lev.specific_slope = get_number(sec, "specific_slope", 0.0);
        lev.elasticity_exponent = get_number(sec, "elasticity_exponent", 0.0);
        lev.z_halflife_periods = get_number(sec, "z_halflife_periods", 20.0);
        lev.vol_halflife_periods = get_number(sec, "vol_halflife_periods", 40.0);
        const long long step = get_integer(sec, "step_seconds", 86400);
        const double vol = get_number(sec, "per_step_vol", 0.01);
        resolved["n_assets"] = n;
        resolved["n_factors"] = k;
        resolved["systematic_slope"] = lev.systematic_slope;
        resolved["specific_slope"] = lev.specific_slope;
        resolved["elasticity_exponent"] = lev.elasticity_exponent;
        resolved["z_halflife_periods"] = lev.z_halflife_periods;
        resolved["vol_halflife_periods"] = lev.vol_halflife_periods;
        resolved["step_seconds"] = step;
        resolved["per_step_vol"] = vol;
        return leverage_market_spec(n, k, lev, horizon_steps, step, vol);
    }
    throw ValidationError("unknown simulate preset \"" + preset +
                          "\" (expected equicorrelation, lagged_factor, linear_exposure, "
                          "factor_trend, or leverage)");
}

std::vector<long long> to_long_long(const std::vector<std::int64_t>& v) {
    return std::vector<long long>(v.begin(), v.end());
}

ReactiveParams reactive_params_from(const json& sec, json& resolved) {
    ReactiveParams params;
    json rp;
    if (sec.contains("params")) {
        const json& p = sec.at("params");
        if (!p.is_object())
            throw ValidationError("config field \"params\" must be a JSON object");
        params.systematic_slope = get_number(p, "systematic_slope", 0.0);
        params.specific_slope = get_number(p, "specific_slope", 0.0);
        params.elasticity_exponent = get_number(p, "elasticity_exponent", 0.0);
        params.z_halflife_periods = get_number(p, "z_halflife_periods", 20.0);
        params.vol_halflife_periods = get_number(p, "vol_halflife_periods", 40.0);
    }
    rp["systematic_slope"] = params.systematic_slope;
    rp["specific_slope"] = params.specific_slope;
    rp["elasticity_exponent"] = params.elasticity_exponent;
    rp["z_halflife_periods"] = params.z_halflife_periods;
    rp["vol_halflife_periods"] = params.vol_halflife_periods;
    resolved["params"] = std::move(rp);
    return params;
}

}  // namespace

// --- simulate -----------------------------------------------------------------

int run_simulate(const RunContext& ctx) {
    const json& sec = config_section(ctx.config, "simulate");
    json resolved;
    const SyntheticMarketSpec spec = spec_from_config(sec, resolved);
    const bool want_beta = get_flag(sec, "emit_beta_path", false);
    resolved["emit_beta_path"] = want_beta;

    const MarketSample sample = simulate_market_detailed(spec, ctx.seed, want_beta);

    ensure_out_dir(ctx);
    write_return_panel(sample.panel, out_path(ctx, "panel.csv").string());

    std::vector<std::string> header{"timestamp"};
    for (int k = 0; k < spec.n_factors; ++k) header.push_back("factor_" + std::to_string(k + 1));
    write_csv(out_path(ctx, "factor_returns.csv").string(), header,
              to_long_long(sample.panel.timestamps), sample.factor_returns);

    if (want_beta && sample.beta_path.size() > 0) {
        std::vector<std::string> bheader{"timestamp"};
        for (const auto& a : sample.panel.assets) bheader.push_back(a);
        write_csv(out_path(ctx, "beta_path.csv").string(), bheader,
                  to_long_long(sample.panel.timestamps), sample.beta_path);
    }

    write_manifest(ctx, "simulate", json{{"simulate", resolved}});
    return 0;
}

// --- estimate -------------------------------------------------------------------

int run_estimate(const RunContext& ctx) {
    const json& sec = config_section(ctx.config, "estimate");
    json resolved;
    const ReturnPanel panel = require_panel(ctx, policy_from(sec, resolved));
    const Estimator estimator = estimator_from(sec, resolved);
    const bool clip = get_flag(sec, "mp_clip", false);
    long long k_top = get_integer(sec, "k_top", 10);
    k_top = std::clamp<long long>(k_top, 1, panel.n_assets());
    resolved["mp_clip"] = clip;
    resolved["k_top"] = k_top;

    CorrelationModel model = correlation_matrix(panel, estimator);
    const double q = static_cast<double>(model.sample_T) / static_cast<double>(model.size());
    if (clip) model = mp_clip(model, q);
    const EigenSystem eigen = eigen_decompose(model);

    ensure_out_dir(ctx);
    std::vector<std::string> header{"asset"};
    for (const auto& a : panel.assets) header.push_back(a);
    write_named_csv(out_path(ctx, "correlation.csv"), header, panel.assets, model.matrix);

    std::vector<long long> ks(static_cast<size_t>(model.size()));
    std::iota(ks.begin(), ks.end(), 1);
    write_csv(out_path(ctx, "eigenvalues.csv").string(), {"k", "eigenvalue"}, ks,
              eigen.eigenvalues);

    json report;
    report["n_assets"] = model.size();
    report["sample_periods"] = model.sample_T;
    report["period_seconds"] = model.period_seconds;
    report["estimator"] = resolved["estimator"];
    report["mp_clip"] = clip;
    report["mp_upper_edge"] = (1.0 + 1.0 / std::sqrt(q)) * (1.0 + 1.0 / std::sqrt(q));
    report["top_eigenvalues"] = std::vector<double>(
        eigen.eigenvalues.begin(), eigen.eigenvalues.begin() + static_cast<Eigen::Index>(k_top));
    report["uniform_portfolio_fcl"] =
        fcl(model, Eigen::VectorXd::Ones(model.size()));
    write_json_file(out_path(ctx, "report.json"), report);

    PlotSeries spectrum;
    spectrum.name = "eigenvalue";
    for (Eigen::Index i = 0; i < eigen.eigenvalues.size(); ++i) {
        spectrum.x.push_back(static_cast<double>(i + 1));
        spectrum.y.push_back(eigen.eigenvalues[i]);
    }
    write_line_plot_svg(out_path(ctx, "spectrum.svg").string(), {spectrum},
                        {"correlation spectrum", "rank", "eigenvalue", false});

    write_manifest(ctx, "estimate", json{{"estimate", resolved}});
    return 0;
}

// --- maxvar ---------------------------------------------------------------------

int run_maxvar(const RunContext& ctx) {
    const json& sec = config_section(ctx.config, "maxvar");
    json resolved;
    const ReturnPanel panel = require_panel(ctx, policy_from(sec, resolved));
    if (ctx.criteria_path.empty())
        throw ValidationError("maxvar requires --criteria <csv>");
    const CriterionPanel criteria = load_criteria(ctx.criteria_path);
    if (criteria.assets != panel.assets)
        throw ValidationError("criteria asset list must match the panel asset list");

    const Estimator estimator = estimator_from(sec, resolved);
    const bool clip = get_flag(sec, "mp_clip", false);
    const double quantile = get_number(sec, "quantile", 0.2);
    const int n_knots = static_cast<int>(get_integer(sec, "basis_knots", 5));
    resolved["mp_clip"] = clip;
    resolved["quantile"] = quantile;
    resolved["basis_knots"] = n_knots;

    CorrelationModel model = correlation_matrix(panel, estimator);
    if (clip)
        model = mp_clip(model, static_cast<double>(model.sample_T) /
                                   static_cast<double>(model.size()));

    const Eigen::VectorXd criterion_row = criteria.values.row(criteria.values.rows() - 1);
    const MonotoneRankBasis basis = MonotoneRankBasis::uniform(n_knots);
    FactorPortfolio best = maxvar_optimize(model, criterion_row, Eigen::VectorXd(), {},
                                           basis, criteria.name);
    const Eigen::VectorXd rank_w = rank_weights(criterion_row);
    const Eigen::VectorXd split_w = fama_french_weights(criterion_row, quantile);

    ensure_out_dir(ctx);
    write_named_csv(out_path(ctx, "weights.csv"), {"asset", "weight"}, panel.assets,
                    best.weights);
    Eigen::MatrixXd all(panel.n_assets(), 3);
    all.col(0) = best.weights;
    all.col(1) = rank_w;
    all.col(2) = split_w;
    write_named_csv(out_path(ctx, "portfolios.csv"),
                    {"asset", "maxvar", "rank_linear", "quantile_split"}, panel.assets, all);

    auto portfolio_json = [&](const std::string& name, const Eigen::VectorXd& w,
                              const FactorPortfolio* full) {
        json p;
        p["name"] = name;
        p["fcl"] = fcl(model, w);
        if (full) {
            p["market_neutral"] = full->market_neutral;
            p["beta_neutral"] = full->beta_neutral;
            p["sector_neutral"] = full->sector_neutral;
        }
        return p;
    };
    json report;
    report["criterion"] = criteria.name;
    report["portfolios"] = json::array({
        portfolio_json("maxvar", best.weights, &best),
        portfolio_json("rank_linear", rank_w, nullptr),
        portfolio_json("quantile_split", split_w, nullptr),
    });
    write_json_file(out_path(ctx, "report.json"), report);

    // Weights against rank quantile: is the optimum visually linear?
    const Eigen::VectorXd ranks = average_ranks(criterion_row);
    std::vector<int> order(static_cast<size_t>(panel.n_assets()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return ranks[a] < ranks[b]; });
    PlotSeries s_max{"maxvar", {}, {}}, s_rank{"rank_linear", {}, {}};
    for (int i : order) {
        const double u = (ranks[i] - 0.5) / static_cast<double>(panel.n_assets());
        s_max.x.push_back(u);
        s_max.y.push_back(best.weights[i]);
        s_rank.x.push_back(u);
        s_rank.y.push_back(rank_w[i]);
    }
    write_line_plot_svg(out_path(ctx, "weights.svg").string(), {s_max, s_rank},
                        {"factor weights by rank quantile", "rank quantile", "weight", false});

    write_manifest(ctx, "maxvar", json{{"maxvar", resolved}});
    return 0;
}

// --- epps -----------------------------------------------------------------------

int run_epps(const RunContext& ctx) {
    const json& sec = config_section(ctx.config, "epps");
    json resolved;
    const std::vector<long long> horizons = get_integer_list(sec, "horizons_seconds");
    const int k_max = static_cast<int>(get_integer(sec, "k_max", 1));
    const bool do_fit = get_flag(sec, "fit", true);
    resolved["horizons_seconds"] = horizons;
    resolved["k_max"] = k_max;
    resolved["fit"] = do_fit;

    json manifest_config;
    ReturnPanel panel;
    if (!ctx.panel_path.empty()) {
        panel = load_return_panel(ctx.panel_path, policy_from(sec, resolved));
    } else {
        json resolved_sim;
        const SyntheticMarketSpec spec =
            spec_from_config(config_section(ctx.config, "simulate"), resolved_sim);
        panel = simulate_market(spec, ctx.seed);
        manifest_config["simulate"] = std::move(resolved_sim);
    }
    manifest_config["epps"] = resolved;

    const ScaleCurveSet set = eigenvalue_scale_curve(panel, horizons, k_max);
    if (set.curves.empty() || set.curves.front().horizons_seconds.empty())
        throw ValidationError(
            "every requested horizon was dropped (fewer than 30 aggregated samples each)");

    std::vector<LagLawFit> fits(set.curves.size());
    if (do_fit) {
        parallel_for(static_cast<int>(set.curves.size()), ctx.threads,
                     [&](int i) { fits[static_cast<size_t>(i)] = fit_lag_law(set.curves[i]); });
    }

    ensure_out_dir(ctx);
    write_scale_curves_csv(out_path(ctx, "scale_curves.csv"), set);

    json report;
    report["curves"] = curves_to_json(set);
    report["dropped_horizons"] = set.dropped_horizons;
    if (do_fit) {
        json jfits = json::array();
        for (size_t i = 0; i < fits.size(); ++i) {
            json f;
            f["k"] = set.curves[i].eigen_index;
            f["lambda_inf"] = fits[i].lambda_inf;
            f["tau_c_seconds"] = fits[i].tau_c_seconds;
            f["rms_relative_error"] = fits[i].rms_relative_error;
            jfits.push_back(std::move(f));
        }
        report["lag_law_fits"] = std::move(jfits);
    }
    write_json_file(out_path(ctx, "report.json"), report);

    std::vector<PlotSeries> overlay;
    if (do_fit) {
        PlotSeries f{"lambda_1 fit", {}, {}};
        const double lo = static_cast<double>(set.curves.front().horizons_seconds.front());
        const double hi = static_cast<double>(set.curves.front().horizons_seconds.back());
        for (int i = 0; i <= 64; ++i) {
            const double t = lo * std::pow(hi / lo, i / 64.0);
            f.x.push_back(t);
            f.y.push_back(lag_law(t, fits[0].lambda_inf, fits[0].tau_c_seconds));
        }
        overlay.push_back(std::move(f));
    }
    plot_scale_curves(out_path(ctx, "scale_curves.svg"), set,
                      {"eigenvalue vs aggregation horizon", "horizon (seconds)", "lambda", true},
                      overlay);

    write_manifest(ctx, "epps", manifest_config);
    return 0;
}

// --- horizon --------------------------------------------------------------------

int run_horizon(const RunContext& ctx) {
    const json& sec = config_section(ctx.config, "horizon");
    json resolved;
    const std::vector<long long> days_ll = get_integer_list(sec, "horizons_days");
    const std::vector<int> horizons_days(days_ll.begin(), days_ll.end());
    const int k_max = static_cast<int>(get_integer(sec, "k_max", 1));
    const int max_lag = static_cast<int>(get_integer(sec, "acf_max_lag", 20));
    resolved["horizons_days"] = days_ll;
    resolved["k_max"] = k_max;
    resolved["acf_max_lag"] = max_lag;

    ReturnPanel panel;
    if (!ctx.panel_path.empty()) {
        panel = load_return_panel(ctx.panel_path, policy_from(sec, resolved));
    } else {
        // Self-contained daily market: one equicorrelated factor carrying an
        // OU trend, so lambda_1 grows with the aggregation horizon.
        const int n = static_cast<int>(get_integer(sec, "n_assets"));
        const double rho = get_number(sec, "rho");
        const double relax_days = get_number(sec, "trend_relaxation_days");
        const double share = get_number(sec, "trend_variance_share");
        const long long n_days = get_integer(sec, "n_days");
        resolved["n_assets"] = n;
        resolved["rho"] = rho;
        resolved["trend_relaxation_days"] = relax_days;
        resolved["trend_variance_share"] = share;
        resolved["n_days"] = n_days;
        panel = simulate_market(factor_trend_spec(n, rho, relax_days, share, n_days), ctx.seed);
    }

    const ScaleCurveSet set = horizon_eigen_curve(panel, horizons_days, k_max);
    if (set.curves.empty() || set.curves.front().horizons_seconds.empty())
        throw ValidationError(
            "every requested horizon was dropped (fewer than 30 aggregated samples each)");
    const AcfProfile acf =
        autocorrelation_profile(panel, Eigen::VectorXd::Ones(panel.n_assets()), max_lag);

    ensure_out_dir(ctx);
    write_scale_curves_csv(out_path(ctx, "scale_curves.csv"), set);

    std::vector<long long> lags(acf.lags.begin(), acf.lags.end());
    Eigen::MatrixXd acf_values(static_cast<Eigen::Index>(acf.lags.size()), 2);
    for (size_t i = 0; i < acf.lags.size(); ++i) {
        acf_values(static_cast<Eigen::Index>(i), 0) = acf.acf[i];
        acf_values(static_cast<Eigen::Index>(i), 1) = acf.stderr_bartlett[i];
    }
    write_csv(out_path(ctx, "acf.csv").string(), {"lag", "acf", "bartlett_se"}, lags, acf_values);

    json report;
    report["curves"] = curves_to_json(set);
    report["dropped_horizons"] = set.dropped_horizons;
    for (const auto& curve : set.curves) {
        if (curve.eigen_index == 1 && curve.values.size() >= 2) {
            report["lambda_1_growth"] = curve.values[curve.values.size() - 1] / curve.values[0];
        }
    }
    report["acf_lag_1"] = acf.lags.size() > 1 ? acf.acf[1] : 0.0;
    write_json_file(out_path(ctx, "report.json"), report);

    plot_scale_curves(out_path(ctx, "scale_curves.svg"), set,
                      {"eigenvalue vs horizon", "horizon (seconds)", "lambda", true});
    PlotSeries s_acf{"acf", {}, {}}, s_hi{"+2se", {}, {}}, s_lo{"-2se", {}, {}};
    for (size_t i = 0; i < acf.lags.size(); ++i) {
        const double lag = static_cast<double>(acf.lags[i]);
        s_acf.x.push_back(lag);
        s_acf.y.push_back(acf.acf[i]);
        s_hi.x.push_back(lag);
        s_hi.y.push_back(2.0 * acf.stderr_bartlett[i]);
        s_lo.x.push_back(lag);
        s_lo.y.push_back(-2.0 * acf.stderr_bartlett[i]);
    }
    write_line_plot_svg(out_path(ctx, "acf.svg").string(), {s_acf, s_hi, s_lo},
                        {"uniform-portfolio autocorrelation", "lag (periods)", "acf", false});

    write_manifest(ctx, "horizon", json{{"horizon", resolved}});
    return 0;
}

// --- beta -----------------------------------------------------------------------

namespace {

Eigen::VectorXd load_index_series(const std::string& path, int column) {
    const CsvTable table = read_numeric_csv(path);
    const int n_cols = static_cast<int>(table.header.size());
    if (column < 0 || column >= n_cols)
        throw ValidationError("index_column " + std::to_string(column) +
                              " out of range for " + path + " (" + std::to_string(n_cols) +
                              " columns)");
    Eigen::VectorXd series(static_cast<Eigen::Index>(table.cells.size()));
    for (size_t r = 0; r < table.cells.size(); ++r) {
        const auto& cell = table.cells[r][static_cast<size_t>(column)];
        if (!cell)
            throw ValidationError(path + ": blank cell in index column at data row " +
                                  std::to_string(r + 1));
        series[static_cast<Eigen::Index>(r)] = *cell;
    }
    return series;
}

BetaMethod beta_method_from(const std::string& name) {
    if (name == "ols") return BetaMethod::ols;
    if (name == "reactive") return BetaMethod::reactive;
    if (name == "trimean_quantile") return BetaMethod::trimean_quantile;
    throw ValidationError("beta method must be \"ols\", \"reactive\", or \"trimean_quantile\"");
}

}  // namespace

int run_beta(const RunContext& ctx) {
    const json& sec = config_section(ctx.config, "beta");
    json resolved;
    const ReturnPanel panel = require_panel(ctx, policy_from(sec, resolved));
    if (ctx.index_path.empty())
        throw ValidationError("beta requires --index <csv>");

    const std::string method_name = get_string(sec, "method");
    const BetaMethod method = beta_method_from(method_name);
    const int window = static_cast<int>(get_integer(sec, "window"));
    const int index_column = static_cast<int>(get_integer(sec, "index_column", 1));
    const bool rolling = get_flag(sec, "rolling_path", false);
    const ReactiveParams params = reactive_params_from(sec, resolved);
    resolved["method"] = method_name;
    resolved["window"] = window;
    resolved["index_column"] = index_column;
    resolved["rolling_path"] = rolling;

    const Eigen::VectorXd index = load_index_series(ctx.index_path, index_column);
    if (index.size() != panel.n_periods())
        throw ValidationError("index series has " + std::to_string(index.size()) +
                              " rows but the panel has " + std::to_string(panel.n_periods()));

    const std::vector<BetaEstimate> estimates =
        estimate_beta(panel, index, method, window, params);

    ensure_out_dir(ctx);
    Eigen::MatrixXd betas(panel.n_assets(), 1);
    for (Eigen::Index i = 0; i < panel.n_assets(); ++i)
        betas(i, 0) = estimates[static_cast<size_t>(i)].beta;
    write_named_csv(out_path(ctx, "betas.csv"), {"asset", "beta"}, panel.assets, betas);

    json report;
    report["method"] = method_name;
    report["window"] = window;
    report["params"] = resolved["params"];
    json per_asset = json::array();
    for (Eigen::Index i = 0; i < panel.n_assets(); ++i) {
        per_asset.push_back(json{{"asset", panel.assets[static_cast<size_t>(i)]},
                                 {"beta", betas(i, 0)}});
    }
    report["betas"] = std::move(per_asset);
    report["cross_section_mean"] = betas.col(0).mean();
    write_json_file(out_path(ctx, "report.json"), report);

    if (rolling) {
        const Eigen::MatrixXd path = rolling_beta_path(panel, index, method, window, params);
        std::vector<std::string> header{"timestamp"};
        for (const auto& a : panel.assets) header.push_back(a);
        write_csv(out_path(ctx, "beta_path.csv").string(), header,
                  to_long_long(panel.timestamps), path);
    }

    write_manifest(ctx, "beta", json{{"beta", resolved}});
    return 0;
}

// --- diffusion --------------------------------------------------------------------

int run_diffusion(const RunContext& ctx) {
    const json& sec = config_section(ctx.config, "diffusion");
    json resolved;
    const int n_factors = static_cast<int>(get_integer(sec, "n_factors"));
    const long long n_steps = get_integer(sec, "n_steps");
    const int lag = static_cast<int>(get_integer(sec, "increment_lag", 1));
    const int wishart_dof = static_cast<int>(get_integer(sec, "wishart_dof", 0));
    const double relaxation = get_number(sec, "relaxation_periods");
    const double log_std = get_number(sec, "log_fcl_std");
    const double factor_corr = get_number(sec, "factor_corr", 0.0);
    const bool fit_input = get_flag(sec, "fit_input", false);
    resolved["n_factors"] = n_factors;
    resolved["n_steps"] = n_steps;
    resolved["increment_lag"] = lag;
    resolved["wishart_dof"] = wishart_dof;
    resolved["relaxation_periods"] = relaxation;
    resolved["log_fcl_std"] = log_std;
    resolved["factor_corr"] = factor_corr;
    resolved["fit_input"] = fit_input;

    if (n_factors < 2)
        throw ValidationError("diffusion needs n_factors >= 2");
    Eigen::VectorXd base_fcl(n_factors);
    if (sec.contains("base_fcl")) {
        const auto& arr = sec.at("base_fcl");
        if (!arr.is_array() || static_cast<int>(arr.size()) != n_factors)
            throw ValidationError("base_fcl must be an array of n_factors numbers");
        for (int i = 0; i < n_factors; ++i) {
            if (!arr[static_cast<size_t>(i)].is_number())
                throw ValidationError("base_fcl must contain numbers");
            base_fcl[i] = arr[static_cast<size_t>(i)].get<double>();
        }
    } else {
        for (int i = 0; i < n_factors; ++i)
            base_fcl[i] = 2.0 * (n_factors - i) / (n_factors + 1.0);
    }
    resolved["base_fcl"] = std::vector<double>(base_fcl.begin(), base_fcl.end());

    const std::vector<OuParams> ou(static_cast<size_t>(n_factors),
                                   OuParams{relaxation, log_std, 0.0});
    Eigen::MatrixXd phi = Eigen::MatrixXd::Constant(n_factors, n_factors, factor_corr);
    phi.diagonal().setOnes();

    const CorrPath path = simulate_corr_diffusion(base_fcl, ou, phi, n_steps, ctx.seed);

    Eigen::MatrixXd eigen_path(path.n_steps(), n_factors);
    for (Eigen::Index t = 0; t < path.n_steps(); ++t)
        eigen_path.row(t) = eigen_decompose(path.matrices[static_cast<size_t>(t)])
                                .eigenvalues.transpose();

    // The OU fit can legitimately fail (relaxation too long for the sample):
    // run it before writing outputs so a failed run exits with code 2 early.
    std::vector<OuParams> fitted;
    if (fit_input) fitted = fit_logfcl_ou(eigen_path);

    IncrementSpectrum model_spec, wishart_spec;
    const bool with_wishart = wishart_dof > 0;
    {
        CorrPath wishart_path;
        if (with_wishart)
            wishart_path = baseline_wishart(n_factors, wishart_dof, n_steps,
                                            ctx.seed ^ 0x9e3779b97f4a7c15ULL);
        // Two independent pooled-eigenvalue jobs; results never depend on thread count.
        parallel_for(with_wishart ? 2 : 1, ctx.threads, [&](int job) {
            if (job == 0)
                model_spec = increment_spectrum(path, lag);
            else
                wishart_spec = increment_spectrum(wishart_path, lag);
        });
    }

    ensure_out_dir(ctx);
    std::vector<std::string> eheader{"t"};
    for (int k = 0; k < n_factors; ++k) eheader.push_back("lambda_" + std::to_string(k + 1));
    write_csv(out_path(ctx, "eigen_path.csv").string(), eheader, to_long_long(path.times),
              eigen_path);

    auto write_increments = [&](const std::string& name, const IncrementSpectrum& spec) {
        Eigen::MatrixXd col(static_cast<Eigen::Index>(spec.eigenvalues.size()), 1);
        for (size_t i = 0; i < spec.eigenvalues.size(); ++i)
            col(static_cast<Eigen::Index>(i), 0) = spec.eigenvalues[i];
        write_csv(out_path(ctx, name).string(), {"eigenvalue"}, col);
    };
    write_increments("increments_model.csv", model_spec);
    if (with_wishart) write_increments("increments_wishart.csv", wishart_spec);

    auto spectrum_json = [](const IncrementSpectrum& spec) {
        json j;
        j["lag"] = spec.lag;
        j["n_eigenvalues"] = spec.eigenvalues.size();
        j["std_dev"] = spec.std_dev;
        j["excess_kurtosis"] = spec.excess_kurtosis;
        j["ks_semicircle"] = spec.ks_semicircle;
        j["max_abs_eigen_sum"] = spec.max_abs_eigen_sum;
        return j;
    };
    json report;
    report["model"] = spectrum_json(model_spec);
    if (with_wishart) report["wishart"] = spectrum_json(wishart_spec);
    if (fit_input) {
        json jf = json::array();
        for (size_t k = 0; k < fitted.size(); ++k) {
            jf.push_back(json{{"factor", k + 1},
                              {"relaxation_periods", fitted[k].relaxation_periods},
                              {"stationary_std", fitted[k].stationary_std},
                              {"long_run_mean", fitted[k].long_run_mean}});
        }
        report["log_eigenvalue_ou_fits"] = std::move(jf);
    }
    write_json_file(out_path(ctx, "report.json"), report);

    // Increment eigenvalues against the variance-matched semicircle.
    std::vector<double> overlay_x, overlay_y;
    if (model_spec.std_dev > 0.0) {
        const double radius = 2.0 * model_spec.std_dev;
        for (int i = 0; i <= 100; ++i) {
            const double x = -radius + 2.0 * radius * i / 100.0;
            overlay_x.push_back(x);
            overlay_y.push_back(2.0 / (M_PI * radius * radius) *
                                std::sqrt(std::max(0.0, radius * radius - x * x)));
        }
    }
    write_histogram_svg(out_path(ctx, "increments.svg").string(), model_spec.eigenvalues, 41,
                        {"increment eigenvalue density", "eigenvalue", "density", false},
                        overlay_x, overlay_y);

    write_manifest(ctx, "diffusion", json{{"diffusion", resolved}});
    return 0;
}

// --- acceptance ---------------------------------------------------------------------

int run_acceptance(const RunContext& ctx) {
    ensure_out_dir(ctx);
    const AcceptanceReport report = corrkit::run_acceptance(ctx.threads, &std::cout);

    json jr;
    json criteria = json::array();
    for (const auto& c : report.criteria) {
        criteria.push_back(json{{"index", c.index},
                                {"name", c.name},
                                {"passed", c.passed},
                                {"detail", c.detail},
                                {"seconds", c.seconds}});
    }
    jr["criteria"] = std::move(criteria);
    jr["all_passed"] = report.all_passed;
    jr["total_seconds"] = report.total_seconds;
    write_json_file(out_path(ctx, "report.json"), jr);

    write_manifest(ctx, "acceptance", json::object());
    return report.all_passed ? 0 : 1;
}

}  // namespace corrkit::cli
