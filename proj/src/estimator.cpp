#include "sblue/estimator.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <random>

#include "sblue/rng.hpp"

namespace sblue {

void validate(const GridSpec& grid) {
    if (grid.nx < 1 || grid.ny < 1) {
        throw ValidationError("grid nx and ny must be >= 1");
    }
    if (!(grid.x_min <= grid.x_max) || !(grid.y_min <= grid.y_max)) {
        throw ValidationError("grid ranges must be nonempty");
    }
}

std::vector<double> grid_axis(double lo, double hi, int n) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    if (n == 1) {
        xs[0] = 0.5 * (lo + hi);
        return xs;
    }
    const double step = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = lo + step * i;
    return xs;
}

Prediction sblue_predict(const MomentBundle& bundle, const Eigen::VectorXd& obs,
                         double prior_mean_at_query) {
    if (obs.size() != bundle.mean.size() || obs.size() != bundle.cross.size()) {
        throw DimensionMismatch("observation vector does not match bundle dimension");
    }
    Prediction p;
    p.query = bundle.query;
    if (obs.size() == 0) {
        p.estimate = prior_mean_at_query;
        p.mse = bundle.prior_var;
        return p;
    }
    double jitter = 0.0;
    const auto llt = factorize_spd(bundle.cov.m, jitter);
    const Eigen::VectorXd weights = llt.solve(bundle.cross);
    p.estimate = prior_mean_at_query + weights.dot(obs - bundle.mean);
    p.mse = std::max(0.0, bundle.prior_var - weights.dot(bundle.cross));
    return p;
}

FieldRaster sblue_grid(const MeanSpec& mean, const KernelSpec& kernel, const SensorArray& arr,
                       const Eigen::VectorXd& obs, const GridSpec& grid,
                       const Quadrature& quad) {
    validate(grid);
    if (obs.size() != static_cast<Eigen::Index>(arr.size())) {
        throw DimensionMismatch("observation vector does not match sensor count");
    }

    const ArrayMoments base = array_moments(mean, kernel, arr, quad);
    double jitter = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::VectorXd innovation;
    if (!arr.empty()) {
        llt = factorize_spd(base.cov.m, jitter);
        innovation = llt.solve(obs - base.mean);
    }

    const std::vector<double> xs = grid_axis(grid.x_min, grid.x_max, grid.nx);
    const std::vector<double> ys = grid_axis(grid.y_min, grid.y_max, grid.ny);

    FieldRaster raster;
    raster.grid = grid;
    raster.cells.reserve(xs.size() * ys.size());
    for (double y : ys) {
        for (double x : xs) {
            const Location query{x, y};
            Prediction p;
            p.query = query;
            const double mu_q = eval_mean(mean, query);
            const double prior_var = eval_kernel(kernel, query, query);
            if (arr.empty()) {
                p.estimate = mu_q;
                p.mse = prior_var;
            } else {
                const Eigen::VectorXd cross = cross_moments(mean, kernel, arr, query, base.mean);
                p.estimate = mu_q + cross.dot(innovation);
                p.mse = std::max(0.0, prior_var - cross.dot(llt.solve(cross)));
            }
            raster.cells.push_back(p);
        }
    }
    return raster;
}

McEstimate mmse_oracle(const MeanSpec& mean, const KernelSpec& kernel, const SensorArray& arr,
                       const Eigen::VectorXd& obs, const Location& query,
                       std::int64_t n_samples, std::uint64_t seed) {
    if (n_samples < 10000) {
        throw ValidationError("mmse_oracle requires n_samples >= 10000");
    }
    if (obs.size() != static_cast<Eigen::Index>(arr.size())) {
        throw DimensionMismatch("observation vector does not match sensor count");
    }
    validate(mean);
    validate(kernel);

    const Eigen::Index n_high = static_cast<Eigen::Index>(arr.n_high());
    const Eigen::Index n_low = static_cast<Eigen::Index>(arr.n_low());
    for (std::size_t i = arr.n_high(); i < arr.size(); ++i) {
        if (arr[i].noise_std <= 0.0) {
            throw ValidationError("mmse_oracle needs positive low-sensor noise");
        }
    }

    // Joint prior over (query, low sites), then exact Gaussian conditioning
    // on the high-quality readings.
    std::vector<Location> latent_locs{query};
    for (Eigen::Index i = 0; i < n_low; ++i) {
        latent_locs.push_back(arr[static_cast<std::size_t>(n_high + i)].loc);
    }
    std::vector<Location> high_locs;
    for (Eigen::Index i = 0; i < n_high; ++i) {
        high_locs.push_back(arr[static_cast<std::size_t>(i)].loc);
    }

    const Eigen::Index m = static_cast<Eigen::Index>(latent_locs.size());
    Eigen::MatrixXd k_xx(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            k_xx(i, j) = eval_kernel(kernel, latent_locs[static_cast<std::size_t>(i)],
                                     latent_locs[static_cast<std::size_t>(j)]);
        }
    }
    Eigen::VectorXd mu_x = mean_vector(mean, latent_locs);

    Eigen::VectorXd post_mean = mu_x;
    Eigen::MatrixXd post_cov = k_xx;
    if (n_high > 0) {
        Eigen::MatrixXd k_hh(n_high, n_high);
        for (Eigen::Index i = 0; i < n_high; ++i) {
            for (Eigen::Index j = 0; j < n_high; ++j) {
                k_hh(i, j) = eval_kernel(kernel, high_locs[static_cast<std::size_t>(i)],
                                         high_locs[static_cast<std::size_t>(j)]);
            }
            const double sw = arr[static_cast<std::size_t>(i)].noise_std;
            k_hh(i, i) += sw * sw;
        }
        Eigen::MatrixXd k_xh(m, n_high);
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < n_high; ++j) {
                k_xh(i, j) = eval_kernel(kernel, latent_locs[static_cast<std::size_t>(i)],
                                         high_locs[static_cast<std::size_t>(j)]);
            }
        }
        double jitter = 0.0;
        const auto llt = factorize_spd(k_hh, jitter);
        const Eigen::VectorXd mu_h = mean_vector(mean, high_locs);
        post_mean += k_xh * llt.solve(obs.head(n_high) - mu_h);
        post_cov -= k_xh * llt.solve(k_xh.transpose());
        post_cov = 0.5 * (post_cov + post_cov.transpose());
    }

    double jitter = 0.0;
    const auto chol = factorize_spd(post_cov, jitter);
    const Eigen::MatrixXd chol_l = chol.matrixL();

    auto eng = make_engine(seed, "estimator/mmse_oracle");
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<double> log_w(static_cast<std::size_t>(n_samples));
    std::vector<double> f_query(static_cast<std::size_t>(n_samples));
    Eigen::VectorXd z(m), f(m);
    for (std::int64_t s = 0; s < n_samples; ++s) {
        for (Eigen::Index i = 0; i < m; ++i) z[i] = gauss(eng);
        f = post_mean + chol_l * z;
        double lw = 0.0;
        for (Eigen::Index i = 0; i < n_low; ++i) {
            const Sensor& sensor = arr[static_cast<std::size_t>(n_high + i)];
            const double latent = f[1 + i];
            const double signal = latent >= *sensor.threshold ? latent : 0.0;
            const double r = (obs[n_high + i] - signal) / sensor.noise_std;
            lw -= 0.5 * r * r;
        }
        log_w[static_cast<std::size_t>(s)] = lw;
        f_query[static_cast<std::size_t>(s)] = f[0];
    }

    double max_lw = log_w[0];
    for (double lw : log_w) max_lw = std::max(max_lw, lw);
    long double sum_w = 0.0L, sum_w2 = 0.0L, sum_wf = 0.0L;
    for (std::size_t s = 0; s < log_w.size(); ++s) {
        const double w = std::exp(log_w[s] - max_lw);
        sum_w += w;
        sum_w2 += static_cast<long double>(w) * w;
        sum_wf += static_cast<long double>(w) * f_query[s];
    }
    const double ess = static_cast<double>(sum_w * sum_w / sum_w2);
    if (ess < 100.0) {
        throw DegenerateWeights("mmse_oracle effective sample size below 100");
    }
    const double estimate = static_cast<double>(sum_wf / sum_w);
    long double acc = 0.0L;
    for (std::size_t s = 0; s < log_w.size(); ++s) {
        const double w = std::exp(log_w[s] - max_lw) / static_cast<double>(sum_w);
        const double d = f_query[s] - estimate;
        acc += static_cast<long double>(w) * w * d * d;
    }
    return {estimate, std::sqrt(static_cast<double>(acc))};
}

}  // namespace sblue
