#include "sblue/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "sblue/rng.hpp"

namespace sblue {

namespace {

void validate_sensor(const Sensor& s) {
    if (s.id.empty()) {
        throw ValidationError("sensor id must be nonempty");
    }
    if (!is_finite(s.loc)) {
        throw ValidationError("sensor '" + s.id + "': location must be finite");
    }
    if (!(s.noise_std >= 0.0) || !std::isfinite(s.noise_std)) {
        throw ValidationError("sensor '" + s.id + "': noise_std must be finite and >= 0");
    }
    if (!(s.cost >= 0.0) || !std::isfinite(s.cost)) {
        throw ValidationError("sensor '" + s.id + "': cost must be finite and >= 0");
    }
    if (s.network == NetworkClass::High && s.threshold.has_value()) {
        throw ValidationError("sensor '" + s.id + "': high-quality sensors take no threshold");
    }
    if (s.network == NetworkClass::Low && !s.threshold.has_value()) {
        throw ValidationError("sensor '" + s.id + "': low-quality sensors need a threshold");
    }
    if (s.network == NetworkClass::Low && std::isnan(*s.threshold)) {
        throw ValidationError("sensor '" + s.id + "': threshold must not be NaN");
    }
}

}  // namespace

SensorArray::SensorArray(std::vector<Sensor> sensors) : sensors_(std::move(sensors)) {
    std::set<std::string> ids;
    for (const Sensor& s : sensors_) {
        validate_sensor(s);
        if (!ids.insert(s.id).second) {
            throw DuplicateId("duplicate sensor id '" + s.id + "'");
        }
    }
    std::stable_sort(sensors_.begin(), sensors_.end(), [](const Sensor& a, const Sensor& b) {
        if (a.network != b.network) return a.network == NetworkClass::High;
        return a.id < b.id;
    });
    n_high_ = static_cast<std::size_t>(
        std::count_if(sensors_.begin(), sensors_.end(),
                      [](const Sensor& s) { return s.network == NetworkClass::High; }));
}

std::vector<Location> SensorArray::locations() const {
    std::vector<Location> locs;
    locs.reserve(sensors_.size());
    for (const Sensor& s : sensors_) locs.push_back(s.loc);
    return locs;
}

SensorArray SensorArray::subset(const std::vector<int>& indices) const {
    std::vector<Sensor> picked;
    picked.reserve(indices.size());
    for (int i : indices) {
        picked.push_back(sensors_.at(static_cast<std::size_t>(i)));
    }
    return SensorArray(std::move(picked));
}

SimulatedObservations simulate_observations(const MeanSpec& mean, const KernelSpec& kernel,
                                            const SensorArray& arr, std::uint64_t seed) {
    SimulatedObservations out;
    out.field = sample_field(mean, kernel, arr.locations(), seed);
    out.obs.resize(out.field.size());

    auto eng = make_engine(seed, "obs/noise");
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Eigen::Index i = 0; i < out.field.size(); ++i) {
        const Sensor& s = arr[static_cast<std::size_t>(i)];
        const double noise = s.noise_std * gauss(eng);
        const double f = out.field[i];
        out.obs[i] = f >= effective_threshold(s) ? f + noise : noise;
    }
    return out;
}

namespace {

Gauss2 pair_law(double mu_i, double mu_j, double sigma_f, double k_ij) {
    const double rho = std::clamp(k_ij / (sigma_f * sigma_f), -1.0, 1.0);
    return {mu_i, mu_j, sigma_f, sigma_f, rho};
}

// E[Y_i Y_j] for the latent pair (f_i, f_j) with thresholds t_i, t_j; the
// additive noises are independent of everything and drop out off-diagonal.
double raw_cross_moment(const Gauss2& g, double t_i, double t_j, const Quadrature& quad) {
    if (t_i == neg_inf && t_j == neg_inf) {
        return g.mu1 * g.mu2 + g.rho * g.sigma1 * g.sigma2;
    }
    if (t_i == neg_inf) return cond_linear_cross(g, t_j);
    if (t_j == neg_inf) {
        return cond_linear_cross({g.mu2, g.mu1, g.sigma2, g.sigma1, g.rho}, t_i);
    }
    return cens_cross_m11(g, t_i, t_j, quad);
}

}  // namespace

ArrayMoments array_moments(const MeanSpec& mean, const KernelSpec& kernel,
                           const SensorArray& arr, const Quadrature& quad) {
    validate(mean);
    validate(kernel);
    validate(quad);
    const std::size_t n = arr.size();
    const double sigma_f = std::sqrt(kernel.signal_variance);

    ArrayMoments out;
    out.mean.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const Gauss1 marginal{eval_mean(mean, arr[i].loc), sigma_f};
        out.mean[static_cast<Eigen::Index>(i)] = trunc_m1(marginal, effective_threshold(arr[i]));
    }

    out.cov.m.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const Sensor& si = arr[i];
        const double mu_i = eval_mean(mean, si.loc);
        const double t_i = effective_threshold(si);

        // Diagonal: censored second moment of the signal plus the noise
        // floor, which is present in both activation regimes.  Uncensored
        // sensors keep the prior variance exactly; going through m2 - m1^2
        // would throw away bits whenever the prior mean is nonzero.
        const double mean_i = out.mean[static_cast<Eigen::Index>(i)];
        const double var_i = t_i == neg_inf
                                 ? kernel.signal_variance
                                 : trunc_m2({mu_i, sigma_f}, t_i) - mean_i * mean_i;
        out.cov.m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
            var_i + si.noise_std * si.noise_std;

        for (std::size_t j = i + 1; j < n; ++j) {
            const Sensor& sj = arr[j];
            const double k_ij = eval_kernel(kernel, si.loc, sj.loc);
            const double t_j = effective_threshold(sj);
            double cov_ij;
            if (t_i == neg_inf && t_j == neg_inf) {
                cov_ij = k_ij;
            } else {
                const Gauss2 g = pair_law(mu_i, eval_mean(mean, sj.loc), sigma_f, k_ij);
                cov_ij = raw_cross_moment(g, t_i, t_j, quad) -
                         mean_i * out.mean[static_cast<Eigen::Index>(j)];
            }
            out.cov.m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cov_ij;
            out.cov.m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = cov_ij;
            if (si.loc.x == sj.loc.x && si.loc.y == sj.loc.y) {
                out.cov.duplicate_locations.emplace_back(static_cast<int>(i),
                                                         static_cast<int>(j));
            }
        }
    }
    return out;
}

Eigen::VectorXd cross_moments(const MeanSpec& mean, const KernelSpec& kernel,
                              const SensorArray& arr, const Location& query,
                              const Eigen::VectorXd& obs_mean) {
    const double sigma_f = std::sqrt(kernel.signal_variance);
    const double mu_q = eval_mean(mean, query);
    Eigen::VectorXd cross(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const Sensor& s = arr[i];
        const double k_qi = eval_kernel(kernel, query, s.loc);
        const double t_i = effective_threshold(s);
        if (t_i == neg_inf) {
            cross[static_cast<Eigen::Index>(i)] = k_qi;
        } else {
            const Gauss2 g = pair_law(mu_q, eval_mean(mean, s.loc), sigma_f, k_qi);
            cross[static_cast<Eigen::Index>(i)] =
                cond_linear_cross(g, t_i) - mu_q * obs_mean[static_cast<Eigen::Index>(i)];
        }
    }
    return cross;
}

MomentBundle moment_bundle(const MeanSpec& mean, const KernelSpec& kernel,
                           const SensorArray& arr, const Location& query,
                           const Quadrature& quad) {
    if (!is_finite(query)) {
        throw ValidationError("query location must be finite");
    }
    ArrayMoments base = array_moments(mean, kernel, arr, quad);
    MomentBundle bundle;
    bundle.mean = std::move(base.mean);
    bundle.cov = std::move(base.cov);
    bundle.cross = cross_moments(mean, kernel, arr, query, bundle.mean);
    bundle.prior_var = eval_kernel(kernel, query, query);
    bundle.query = query;
    return bundle;
}

}  // namespace sblue
