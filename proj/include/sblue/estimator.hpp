#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "sblue/sensors.hpp"

namespace sblue {

// Best linear unbiased spatial estimator: the optimal affine function of the
// observation vector, driven entirely by the exact first and second moments
// in a MomentBundle.  Works unchanged for censored observations because the
// bundle already carries their moments.

struct Prediction {
    double estimate = 0.0;  // point estimate of the field at the query
    double mse = 0.0;       // predictive mean squared error
    Location query;
};

struct GridSpec {
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
    int nx = 1, ny = 1;
};

void validate(const GridSpec& grid);

// Cell centers; a single-cell axis collapses to the interval midpoint.
std::vector<double> grid_axis(double lo, double hi, int n);

// estimate = prior_mean_at_query + cross' cov^{-1} (obs - mean)
// mse      = prior_var - cross' cov^{-1} cross
// solved through a jittered Cholesky factorization.
Prediction sblue_predict(const MomentBundle& bundle, const Eigen::VectorXd& obs,
                         double prior_mean_at_query);

// Raster of predictions over a grid, row-major with y as the outer loop.
// The observation covariance is factorized once and shared by all cells.
struct FieldRaster {
    GridSpec grid;
    std::vector<Prediction> cells;
};

FieldRaster sblue_grid(const MeanSpec& mean, const KernelSpec& kernel, const SensorArray& arr,
                       const Eigen::VectorXd& obs, const GridSpec& grid,
                       const Quadrature& quad = {});

// Monte-Carlo estimate of the posterior-mean (MMSE) predictor at the query,
// for comparison against the linear estimator.  Latent fields are proposed
// from the Gaussian posterior given the high-quality readings alone and
// reweighted by the low-quality (censored) likelihood terms.  Throws
// DegenerateWeights when the effective sample size drops below 100.
McEstimate mmse_oracle(const MeanSpec& mean, const KernelSpec& kernel, const SensorArray& arr,
                       const Eigen::VectorXd& obs, const Location& query,
                       std::int64_t n_samples, std::uint64_t seed);

}  // namespace sblue
