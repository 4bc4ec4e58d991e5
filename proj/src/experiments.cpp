#include "sblue/experiments.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iterator>
#include <limits>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "sblue/errors.hpp"
#include "sblue/rng.hpp"

namespace sblue {

namespace {

constexpr double k_neg_inf = -std::numeric_limits<double>::infinity();

struct SensorData {
    SensorArray arr;
    std::optional<Eigen::VectorXd> readings;
};

SensorData resolve_sensors(const RunConfig& cfg) {
    if (const auto* syn = std::get_if<SyntheticSensors>(&cfg.sensors)) {
        return {deploy_synthetic(*syn, syn->seed.value_or(cfg.seed)), std::nullopt};
    }
    IngestResult in = ingest_sensors(std::get<CsvSensors>(cfg.sensors).path);
    return {std::move(in.arr), std::move(in.readings)};
}

std::filesystem::path ensure_out_dir(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

double uniform_in(std::mt19937_64& eng, double lo, double hi) {
    return lo + uniform01(eng) * (hi - lo);
}

}  // namespace

void run_reconstruct(const RunConfig& cfg) {
    const auto& task = std::get<ReconstructTask>(cfg.task);
    SensorData data = resolve_sensors(cfg);

    Eigen::VectorXd obs;
    if (data.readings) {
        obs = *data.readings;
    } else if (std::holds_alternative<SyntheticSensors>(cfg.sensors)) {
        obs = simulate_observations(cfg.mean, cfg.kernel, data.arr, cfg.seed).obs;
    } else {
        throw ValidationError("reconstruct: sensor table has no reading column");
    }

    const FieldRaster raster = sblue_grid(cfg.mean, cfg.kernel, data.arr, obs, task.grid, cfg.quad);
    std::vector<double> est, mse;
    est.reserve(raster.cells.size());
    mse.reserve(raster.cells.size());
    double mse_sum = 0.0;
    for (const Prediction& p : raster.cells) {
        est.push_back(p.estimate);
        mse.push_back(p.mse);
        mse_sum += p.mse;
    }

    const std::filesystem::path dir = ensure_out_dir(cfg);
    const FileHeader hdr{config_hash(cfg), cfg.seed};
    write_grid_csv((dir / "field.csv").string(), task.grid, est, hdr);
    write_grid_pgm((dir / "field.pgm").string(), task.grid, est, hdr);
    write_grid_csv((dir / "mse.csv").string(), task.grid, mse, hdr);
    write_grid_pgm((dir / "mse.pgm").string(), task.grid, mse, hdr);

    write_summary((dir / "summary.txt").string(),
                  {{"task", "reconstruct"},
                   {"n_sensors", std::to_string(data.arr.size())},
                   {"n_high", std::to_string(data.arr.n_high())},
                   {"n_low", std::to_string(data.arr.n_low())},
                   {"grid_nx", std::to_string(task.grid.nx)},
                   {"grid_ny", std::to_string(task.grid.ny)},
                   {"mean_mse", format_double(mse_sum / static_cast<double>(mse.size()))},
                   {"min_estimate", format_double(*std::min_element(est.begin(), est.end()))},
                   {"max_estimate", format_double(*std::max_element(est.begin(), est.end()))}},
                  hdr);
}

void run_select(const RunConfig& cfg) {
    const auto& task = std::get<SelectTask>(cfg.task);
    SensorData data = resolve_sensors(cfg);
    SelectionProblem problem{task.query, task.qos_var, std::move(data.arr),
                             cfg.mean,   cfg.kernel,   cfg.quad};

    const std::filesystem::path dir = ensure_out_dir(cfg);
    const FileHeader hdr{config_hash(cfg), cfg.seed};
    const std::size_t n = problem.arr.size();

    UtilityEvaluator ev(problem);
    const double full_var = ev.predictive_var(ActivationMask::ones(n));
    if (!(full_var < task.qos_var)) {
        write_mask_csv((dir / "mask.csv").string(), problem.arr, ActivationMask::zeros(n), hdr);
        write_trace_csv((dir / "trace.csv").string(), {}, hdr);
        write_summary((dir / "summary.txt").string(),
                      {{"task", "select"},
                       {"feasible", "no"},
                       {"qos_var", format_double(task.qos_var)},
                       {"full_mask_var", format_double(full_var)}},
                      hdr);
        throw Infeasible("full activation still has predictive variance " +
                         format_double(full_var) + " >= qos_var " + format_double(task.qos_var));
    }

    const CemResult res = cem_select(problem, task.cem);
    const double achieved = ev.predictive_var(res.state.best_mask);
    write_mask_csv((dir / "mask.csv").string(), problem.arr, res.state.best_mask, hdr);
    write_trace_csv((dir / "trace.csv").string(), res.trace, hdr);
    write_summary((dir / "summary.txt").string(),
                  {{"task", "select"},
                   {"feasible", "yes"},
                   {"qos_var", format_double(task.qos_var)},
                   {"iterations", std::to_string(res.state.iter)},
                   {"n_active", std::to_string(res.state.best_mask.count())},
                   {"total_cost", format_double(ev.cost(res.state.best_mask))},
                   {"best_utility", format_double(res.state.best_utility)},
                   {"achieved_var", format_double(achieved)}},
                  hdr);
}

namespace {

void run_mse_vs_counts(const RunConfig& cfg, const SyntheticSensors& syn,
                       const std::filesystem::path& dir, const FileHeader& hdr) {
    constexpr int counts[] = {5, 10, 20, 40};
    constexpr int max_n = 40;
    constexpr int n_reps = 20;
    const GridSpec grid{syn.x_min, syn.x_max, syn.y_min, syn.y_max, 15, 15};
    const std::size_t n_cells = static_cast<std::size_t>(grid.nx) * grid.ny;

    // The sweep reuses one 40+40 deployment per replicate so larger counts
    // are strict supersets; extra sensors then provably never hurt.
    SyntheticSensors big = syn;
    big.n_high = max_n;
    big.n_low = max_n;

    std::vector<std::vector<std::string>> rows;
    for (int rep = 0; rep < n_reps; ++rep) {
        const SensorArray arr =
            deploy_synthetic(big, stream_id(cfg.seed, "experiment/mse/deploy", rep));

        std::vector<Location> locs = arr.locations();
        const std::vector<double> xs = grid_axis(grid.x_min, grid.x_max, grid.nx);
        const std::vector<double> ys = grid_axis(grid.y_min, grid.y_max, grid.ny);
        for (double y : ys) {
            for (double x : xs) locs.push_back({x, y});
        }
        const Eigen::VectorXd f = sample_field(cfg.mean, cfg.kernel, locs,
                                               stream_id(cfg.seed, "experiment/mse/field", rep));

        auto eng = make_engine(cfg.seed, "experiment/mse/noise", rep);
        std::normal_distribution<double> gauss;
        Eigen::VectorXd obs(static_cast<Eigen::Index>(arr.size()));
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const Sensor& s = arr[i];
            const auto k = static_cast<Eigen::Index>(i);
            const double noise = s.noise_std * gauss(eng);
            obs[k] = f[k] >= effective_threshold(s) ? f[k] + noise : noise;
        }
        const Eigen::VectorXd truth = f.tail(static_cast<Eigen::Index>(n_cells));

        auto eval_point = [&](const char* sweep, int nh, int nl) {
            std::vector<int> idx;
            idx.reserve(static_cast<std::size_t>(nh + nl));
            for (int i = 0; i < nh; ++i) idx.push_back(i);
            for (int i = 0; i < nl; ++i) idx.push_back(max_n + i);
            const SensorArray sub = arr.subset(idx);
            Eigen::VectorXd sub_obs(static_cast<Eigen::Index>(idx.size()));
            for (std::size_t i = 0; i < idx.size(); ++i) {
                sub_obs[static_cast<Eigen::Index>(i)] = obs[idx[i]];
            }
            const FieldRaster raster = sblue_grid(cfg.mean, cfg.kernel, sub, sub_obs, grid,
                                                  cfg.quad);
            double var_sum = 0.0, err_sum = 0.0;
            for (std::size_t c = 0; c < raster.cells.size(); ++c) {
                var_sum += raster.cells[c].mse;
                const double d = raster.cells[c].estimate - truth[static_cast<Eigen::Index>(c)];
                err_sum += d * d;
            }
            rows.push_back({sweep, std::to_string(nh), std::to_string(nl), std::to_string(rep),
                            format_double(var_sum / static_cast<double>(n_cells)),
                            format_double(err_sum / static_cast<double>(n_cells))});
        };

        for (int nh : counts) eval_point("high", nh, 10);
        for (int nl : counts) eval_point("low", 5, nl);
    }
    write_table_csv((dir / "mse_vs_counts.csv").string(),
                    {"sweep", "n_high", "n_low", "seed", "mean_predictive_var", "mean_sq_error"},
                    rows, hdr);
}

void run_cem_vs_optimal(const RunConfig& cfg, const SyntheticSensors& syn,
                        const std::filesystem::path& dir, const FileHeader& hdr) {
    constexpr double qos_list[] = {3.4, 3.6, 3.8, 4.0, 4.2, 4.4};
    constexpr int n_instances = 100;
    constexpr int n_iters = 10;
    const Location query{(syn.x_min + syn.x_max) / 2.0, (syn.y_min + syn.y_max) / 2.0};

    std::vector<std::vector<std::string>> rows;
    for (int inst = 0; inst < n_instances; ++inst) {
        const SensorArray arr =
            deploy_synthetic(syn, stream_id(cfg.seed, "experiment/cem/deploy", inst));
        for (std::size_t qi = 0; qi < std::size(qos_list); ++qi) {
            const double qos = qos_list[qi];
            SelectionProblem problem{query, qos, arr, cfg.mean, cfg.kernel, cfg.quad};
            const auto [opt_mask, opt_u] = brute_force_select(problem);

            std::vector<double> per_iter(n_iters, k_neg_inf);
            if (std::isfinite(opt_u)) {
                CemConfig cc;
                cc.max_iters = n_iters;
                cc.seed = stream_id(cfg.seed, "experiment/cem/run",
                                    static_cast<std::uint64_t>(inst) * 16 + qi);
                const CemResult res = cem_select(problem, cc);
                for (int it = 0; it < n_iters; ++it) {
                    per_iter[static_cast<std::size_t>(it)] =
                        static_cast<std::size_t>(it) < res.trace.size()
                            ? res.trace[static_cast<std::size_t>(it)].best_utility
                            : res.state.best_utility;
                }
            }
            for (int it = 1; it <= n_iters; ++it) {
                rows.push_back({format_double(qos), std::to_string(inst), std::to_string(it),
                                format_double(per_iter[static_cast<std::size_t>(it - 1)]),
                                format_double(opt_u)});
            }
        }
    }
    write_table_csv((dir / "cem_vs_optimal.csv").string(),
                    {"qos_var", "seed", "iter", "cem_best_utility", "optimal_utility"}, rows, hdr);
}

}  // namespace

void run_experiment(const RunConfig& cfg) {
    const auto& task = std::get<ExperimentTask>(cfg.task);
    const auto* syn = std::get_if<SyntheticSensors>(&cfg.sensors);
    if (!syn) {
        throw ValidationError("experiment tasks need synthetic sensor parameters");
    }
    const std::filesystem::path dir = ensure_out_dir(cfg);
    const FileHeader hdr{config_hash(cfg), cfg.seed};
    if (task.name == "mse-vs-counts") {
        run_mse_vs_counts(cfg, *syn, dir, hdr);
    } else if (task.name == "cem-vs-optimal") {
        run_cem_vs_optimal(cfg, *syn, dir, hdr);
    } else {
        throw ValidationError("unknown experiment name: " + task.name);
    }
}

bool run_oracle(const RunConfig& cfg) {
    const std::uint64_t seed = cfg.seed;
    bool all_ok = true;
    auto report = [&](const char* name, bool ok, const std::string& detail) {
        std::printf("%s %s (%s)\n", ok ? "PASS" : "FAIL", name, detail.c_str());
        all_ok = all_ok && ok;
    };

    {
        // Closed-form truncated moments against plain Monte Carlo.
        auto eng = make_engine(seed, "oracle/trunc-params");
        double max_z = 0.0;
        for (int r = 0; r < 20; ++r) {
            Gauss1 g{uniform_in(eng, -3.0, 3.0), uniform_in(eng, 0.2, 3.0)};
            const double T = g.mu + uniform_in(eng, -3.0, 3.0) * g.sigma;
            const double closed[] = {trunc_m0(g, T), trunc_m1(g, T), trunc_m2(g, T)};
            const McExpr exprs[] = {McExpr::m0, McExpr::m1, McExpr::m2};
            McParams params;
            params.g = {g.mu, 0.0, g.sigma, 1.0, 0.0};
            params.t1 = T;
            for (int k = 0; k < 3; ++k) {
                const McEstimate mc = mc_oracle(exprs[k], params, 1000000,
                                                stream_id(seed, "oracle/trunc-mc",
                                                          static_cast<std::uint64_t>(r) * 4 + k));
                max_z = std::max(max_z, std::abs(closed[k] - mc.estimate) /
                                            (mc.std_error + 1e-12));
            }
        }
        report("truncated-moments-vs-mc", max_z <= 5.0,
               "20 parameter sets, max |z| = " + format_double(max_z));
    }

    {
        // Quadrature-backed pair moments against Monte Carlo.
        auto eng = make_engine(seed, "oracle/pair-params");
        double max_z = 0.0;
        for (int r = 0; r < 10; ++r) {
            Gauss2 g;
            g.mu1 = uniform_in(eng, -2.0, 2.0);
            g.mu2 = uniform_in(eng, -2.0, 2.0);
            g.sigma1 = uniform_in(eng, 0.3, 2.5);
            g.sigma2 = uniform_in(eng, 0.3, 2.5);
            g.rho = uniform_in(eng, -0.95, 0.95);
            const double t1 = g.mu1 + uniform_in(eng, -2.0, 2.0) * g.sigma1;
            const double t2 = g.mu2 + uniform_in(eng, -2.0, 2.0) * g.sigma2;
            const double closed[] = {bvn_upper(g, t1, t2, cfg.quad),
                                     cens_cross_m11(g, t1, t2, cfg.quad),
                                     cond_linear_cross(g, t2)};
            const McExpr exprs[] = {McExpr::bvn, McExpr::m11, McExpr::cross};
            McParams params{g, t1, t2};
            for (int k = 0; k < 3; ++k) {
                const McEstimate mc = mc_oracle(exprs[k], params, 1000000,
                                                stream_id(seed, "oracle/pair-mc",
                                                          static_cast<std::uint64_t>(r) * 4 + k));
                max_z = std::max(max_z, std::abs(closed[k] - mc.estimate) /
                                            (mc.std_error + 1e-12));
            }
        }
        report("censored-pair-moments-vs-mc", max_z <= 5.0,
               "10 parameter sets, max |z| = " + format_double(max_z));
    }

    {
        // Standard bivariate orthant probability has an exact closed form.
        double max_err = 0.0;
        for (double rho : {-0.999, -0.95, -0.5, 0.0, 0.3, 0.7, 0.95, 0.999}) {
            Gauss2 g;
            g.rho = rho;
            const double got = bvn_upper(g, 0.0, 0.0, cfg.quad);
            const double want = 0.25 + std::asin(rho) / (2.0 * std::acos(-1.0));
            max_err = std::max(max_err, std::abs(got - want));
        }
        report("orthant-probability-identity", max_err <= 2e-7,
               "max abs err = " + format_double(max_err));
    }

    {
        // With no censoring the estimator must reproduce the standard
        // noisy-observation Gaussian posterior, here built with an explicit
        // matrix inverse as an independent path.
        auto eng = make_engine(seed, "oracle/gp-params");
        std::normal_distribution<double> gauss;
        double max_diff = 0.0;
        for (int r = 0; r < 5; ++r) {
            const int n = 5 + static_cast<int>(uniform01(eng) * 16.0);
            MeanSpec mean = MeanSpec::constant(uniform_in(eng, -2.0, 2.0));
            KernelSpec kernel;
            kernel.signal_variance = uniform_in(eng, 0.5, 6.0);
            kernel.lengthscale = uniform_in(eng, 0.5, 5.0);
            std::vector<Sensor> sensors;
            for (int i = 0; i < n; ++i) {
                Sensor s;
                s.id = "H" + std::to_string(i);
                s.loc = {uniform_in(eng, 0.0, 10.0), uniform_in(eng, 0.0, 10.0)};
                s.noise_std = uniform_in(eng, 0.1, 0.5);
                sensors.push_back(std::move(s));
            }
            SensorArray arr(std::move(sensors));
            const Location query{uniform_in(eng, 0.0, 10.0), uniform_in(eng, 0.0, 10.0)};
            Eigen::VectorXd y(n);
            for (int i = 0; i < n; ++i) y[i] = gauss(eng);

            const MomentBundle bundle = moment_bundle(mean, kernel, arr, query, cfg.quad);
            const Prediction pred = sblue_predict(bundle, y, eval_mean(mean, query));

            Eigen::MatrixXd K(n, n);
            Eigen::VectorXd kq(n), mu(n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    K(i, j) = eval_kernel(kernel, arr[static_cast<std::size_t>(i)].loc,
                                          arr[static_cast<std::size_t>(j)].loc);
                }
                K(i, i) += arr[static_cast<std::size_t>(i)].noise_std *
                           arr[static_cast<std::size_t>(i)].noise_std;
                kq[i] = eval_kernel(kernel, query, arr[static_cast<std::size_t>(i)].loc);
                mu[i] = eval_mean(mean, arr[static_cast<std::size_t>(i)].loc);
            }
            const Eigen::MatrixXd K_inv = K.inverse();
            const double est = eval_mean(mean, query) + kq.dot(K_inv * (y - mu));
            const double var = eval_kernel(kernel, query, query) - kq.dot(K_inv * kq);
            max_diff = std::max({max_diff, std::abs(est - pred.estimate),
                                 std::abs(var - pred.mse)});
        }
        report("gp-posterior-reduction", max_diff <= 1e-8,
               "5 configurations, max abs diff = " + format_double(max_diff));
    }

    {
        // On an uncensored array the posterior mean and the linear estimate
        // coincide, so the sampling oracle must agree with the estimator.
        SyntheticSensors syn;
        syn.n_high = 6;
        syn.n_low = 0;
        syn.x_min = 0.0;
        syn.x_max = 20.0;
        syn.y_min = 40.0;
        syn.y_max = 60.0;
        syn.noise_std_high = 0.3;
        syn.cost_high = 1.0;
        const SensorArray arr = deploy_synthetic(syn, stream_id(seed, "oracle/mmse-deploy"));
        const MeanSpec mean = MeanSpec::zero();
        KernelSpec kernel;
        kernel.signal_variance = 5.8;
        kernel.lengthscale = 8.0;
        const Location query{10.0, 50.0};
        const Eigen::VectorXd obs =
            simulate_observations(mean, kernel, arr, stream_id(seed, "oracle/mmse-sim")).obs;
        const MomentBundle bundle = moment_bundle(mean, kernel, arr, query, cfg.quad);
        const Prediction pred = sblue_predict(bundle, obs, 0.0);
        const McEstimate mc = mmse_oracle(mean, kernel, arr, obs, query, 20000,
                                          stream_id(seed, "oracle/mmse-mc"));
        const double z = std::abs(mc.estimate - pred.estimate) / (mc.std_error + 1e-12);
        report("mmse-vs-linear-uncensored", z <= 5.0, "|z| = " + format_double(z));
    }

    {
        // Stochastic search against exhaustive enumeration on small
        // mixed-network instances; infeasible instances match trivially.
        SyntheticSensors syn;
        syn.n_high = 5;
        syn.n_low = 7;
        syn.x_min = 0.0;
        syn.x_max = 20.0;
        syn.y_min = 40.0;
        syn.y_max = 60.0;
        syn.noise_std_high = 0.001;
        syn.noise_std_low = 0.003;
        syn.threshold = 0.0;
        syn.cost_high = 150.0;
        syn.cost_low = 30.0;
        const MeanSpec mean = MeanSpec::zero();
        KernelSpec kernel;
        kernel.signal_variance = 5.8;
        kernel.lengthscale = 8.0;
        const Location query{10.0, 50.0};
        int matched = 0;
        constexpr int n_inst = 5;
        for (int inst = 0; inst < n_inst; ++inst) {
            const SensorArray arr =
                deploy_synthetic(syn, stream_id(seed, "oracle/cem-deploy", inst));
            SelectionProblem problem{query, 4.0, arr, mean, kernel, cfg.quad};
            const auto [opt_mask, opt_u] = brute_force_select(problem);
            if (!std::isfinite(opt_u)) {
                ++matched;
                continue;
            }
            CemConfig cc;
            cc.seed = stream_id(seed, "oracle/cem-run", inst);
            if (cem_select(problem, cc).state.best_utility == opt_u) ++matched;
        }
        report("cem-vs-exhaustive", matched >= 4,
               std::to_string(matched) + "/" + std::to_string(n_inst) + " instances matched");
    }

    return all_ok;
}

}  // namespace sblue
