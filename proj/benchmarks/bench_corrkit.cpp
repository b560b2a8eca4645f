// Hot-path benchmarks: estimation, spectra, portfolio optimization, synthetic
// generation, and the correlation diffusion. Inputs are built once per
// benchmark from fixed seeds so timings are comparable across runs.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "corrkit/correlation.hpp"
#include "corrkit/diffusion.hpp"
#include "corrkit/epps.hpp"
#include "corrkit/market_sim.hpp"
#include "corrkit/maxvar.hpp"
#include "corrkit/panel.hpp"
#include "corrkit/reactive_beta.hpp"

namespace {

using namespace corrkit;

ReturnPanel make_panel(int n_assets, long n_periods, std::uint64_t seed) {
    return simulate_market(equicorrelation_spec(n_assets, 0.3, n_periods), seed);
}

void BM_correlation_pearson(benchmark::State& state) {
    const ReturnPanel panel = make_panel(static_cast<int>(state.range(0)), 1000, 11);
    for (auto _ : state) {
        benchmark::DoNotOptimize(correlation_matrix(panel, Estimator::pearson()));
    }
}
BENCHMARK(BM_correlation_pearson)->Arg(50)->Arg(100)->Arg(200);

void BM_correlation_ewma(benchmark::State& state) {
    const ReturnPanel panel = make_panel(static_cast<int>(state.range(0)), 1000, 12);
    for (auto _ : state) {
        benchmark::DoNotOptimize(correlation_matrix(panel, Estimator::ewma(60.0)));
    }
}
BENCHMARK(BM_correlation_ewma)->Arg(50)->Arg(100)->Arg(200);

void BM_eigen_decompose(benchmark::State& state) {
    const ReturnPanel panel = make_panel(static_cast<int>(state.range(0)), 1200, 13);
    const CorrelationModel model = correlation_matrix(panel, Estimator::pearson());
    for (auto _ : state) {
        benchmark::DoNotOptimize(eigen_decompose(model));
    }
}
BENCHMARK(BM_eigen_decompose)->Arg(100)->Arg(200)->Arg(400);

void BM_mp_clip(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const ReturnPanel panel = make_panel(n, 3 * n, 14);
    const CorrelationModel model = correlation_matrix(panel, Estimator::pearson());
    for (auto _ : state) {
        benchmark::DoNotOptimize(mp_clip(model, 3.0));
    }
}
BENCHMARK(BM_mp_clip)->Arg(100)->Arg(200);

void BM_fcl(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const ReturnPanel panel = make_panel(n, 2 * n, 15);
    const CorrelationModel model = correlation_matrix(panel, Estimator::pearson());
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fcl(model, w));
    }
}
BENCHMARK(BM_fcl)->Arg(200)->Arg(500);

void BM_constrained_eigen(benchmark::State& state) {
    const int n = 200;
    const int k = static_cast<int>(state.range(0));
    const ReturnPanel panel = make_panel(n, 800, 16);
    const CorrelationModel model = correlation_matrix(panel, Estimator::pearson());
    Eigen::MatrixXd factors = Eigen::MatrixXd::Zero(n, k);
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < n; ++i)
            factors(i, j) = std::cos((j + 1.0) * (i + 0.5) / n) + (j == 0 ? 1.0 : 0.0);
        factors.col(j).normalize();
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(constrained_eigen(model, factors));
    }
}
BENCHMARK(BM_constrained_eigen)->Arg(5)->Arg(25);

void BM_maxvar_optimize(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const ReturnPanel panel = make_panel(n, 4 * n, 17);
    const CorrelationModel model = correlation_matrix(panel, Estimator::pearson());
    Eigen::VectorXd criterion(n);
    for (int i = 0; i < n; ++i) criterion[i] = std::sin(0.37 * i) + 0.01 * i;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            maxvar_optimize(model, criterion, Eigen::VectorXd(), {}));
    }
}
BENCHMARK(BM_maxvar_optimize)->Arg(50)->Arg(100);

void BM_simulate_equicorrelation(benchmark::State& state) {
    const SyntheticMarketSpec spec =
        equicorrelation_spec(static_cast<int>(state.range(0)), 0.3, 2000);
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_market(spec, 21));
    }
}
BENCHMARK(BM_simulate_equicorrelation)->Arg(50)->Arg(200);

void BM_simulate_leverage(benchmark::State& state) {
    LeverageSpec lev;
    lev.systematic_slope = 0.25;
    lev.specific_slope = 0.3;
    lev.elasticity_exponent = 0.5;
    const SyntheticMarketSpec spec =
        leverage_market_spec(static_cast<int>(state.range(0)), 3, lev, 2000);
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_market(spec, 22));
    }
}
BENCHMARK(BM_simulate_leverage)->Arg(50)->Arg(200);

void BM_aggregate_returns(benchmark::State& state) {
    const ReturnPanel panel = make_panel(100, 20000, 23);
    for (auto _ : state) {
        benchmark::DoNotOptimize(aggregate_returns(panel, static_cast<int>(state.range(0))));
    }
}
BENCHMARK(BM_aggregate_returns)->Arg(5)->Arg(60);

void BM_eigenvalue_scale_curve(benchmark::State& state) {
    const ReturnPanel panel =
        simulate_market(lagged_factor_spec(30, 2, 120.0, 6000, 10, 0.001), 24);
    const std::vector<long long> horizons{10, 30, 100, 300, 1000};
    for (auto _ : state) {
        benchmark::DoNotOptimize(eigenvalue_scale_curve(panel, horizons, 2));
    }
}
BENCHMARK(BM_eigenvalue_scale_curve);

void BM_rolling_beta(benchmark::State& state) {
    const ReturnPanel panel = make_panel(50, 2000, 25);
    Eigen::VectorXd index = panel.returns.rowwise().mean();
    const BetaMethod method =
        state.range(0) == 0 ? BetaMethod::ols : BetaMethod::reactive;
    ReactiveParams params;
    params.systematic_slope = 0.25;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rolling_beta_path(panel, index, method, 120, params));
    }
}
BENCHMARK(BM_rolling_beta)->Arg(0)->Arg(1);

void BM_corr_diffusion(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    Eigen::VectorXd base(k);
    for (int i = 0; i < k; ++i) base[i] = 2.0 * (k - i) / (k + 1.0);
    const std::vector<OuParams> ou(static_cast<size_t>(k), OuParams{40.0, 0.3, 0.0});
    Eigen::MatrixXd phi = Eigen::MatrixXd::Constant(k, k, 0.3);
    phi.diagonal().setOnes();
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_corr_diffusion(base, ou, phi, 400, 26));
    }
}
BENCHMARK(BM_corr_diffusion)->Arg(6)->Arg(12);

void BM_increment_spectrum(benchmark::State& state) {
    Eigen::VectorXd base(8);
    for (int i = 0; i < 8; ++i) base[i] = 2.0 * (8 - i) / 9.0;
    const std::vector<OuParams> ou(8, OuParams{40.0, 0.3, 0.0});
    Eigen::MatrixXd phi = Eigen::MatrixXd::Constant(8, 8, 0.3);
    phi.diagonal().setOnes();
    const CorrPath path = simulate_corr_diffusion(base, ou, phi, 400, 27);
    for (auto _ : state) {
        benchmark::DoNotOptimize(increment_spectrum(path, 10));
    }
}
BENCHMARK(BM_increment_spectrum);

}  // namespace

BENCHMARK_MAIN();
