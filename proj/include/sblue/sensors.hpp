#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sblue/gp.hpp"
#include "sblue/moments.hpp"

namespace sblue {

// Heterogeneous sensor network: high-quality sensors always report
// signal + noise; low-quality sensors report signal + noise only while the
// field exceeds their activation threshold, and pure noise otherwise.

enum class NetworkClass { High, Low };

struct Sensor {
    std::string id;
    Location loc;
    NetworkClass network = NetworkClass::High;
    double noise_std = 0.0;                 // sigma_W (High) or sigma_V (Low)
    std::optional<double> threshold;        // Low only; +/-inf act as always/never
    double cost = 0.0;
};

// Threshold seen by the moment engine: High sensors are the uncensored
// special case.
inline double effective_threshold(const Sensor& s) {
    return s.network == NetworkClass::High ? neg_inf : *s.threshold;
}

// Validated, canonically ordered sensor list: High before Low, each class
// sorted by id.  The ordering fixes matrix layouts everywhere downstream.
class SensorArray {
public:
    SensorArray() = default;
    explicit SensorArray(std::vector<Sensor> sensors);

    std::size_t size() const { return sensors_.size(); }
    std::size_t n_high() const { return n_high_; }
    std::size_t n_low() const { return sensors_.size() - n_high_; }
    bool empty() const { return sensors_.empty(); }

    const Sensor& operator[](std::size_t i) const { return sensors_[i]; }
    const std::vector<Sensor>& sensors() const { return sensors_; }
    std::vector<Location> locations() const;

    // Sub-array of the given (strictly increasing) canonical indices.
    SensorArray subset(const std::vector<int>& indices) const;

private:
    std::vector<Sensor> sensors_;
    std::size_t n_high_ = 0;
};

struct SimulatedObservations {
    Eigen::VectorXd field;  // latent field at the sensor locations
    Eigen::VectorXd obs;    // what the network reports
};

// Forward model draw: field ~ GP prior, then per-sensor observation noise
// and threshold activation.  Deterministic for a given seed.
SimulatedObservations simulate_observations(const MeanSpec& mean, const KernelSpec& kernel,
                                            const SensorArray& arr, std::uint64_t seed);

// Query-independent part of the observation moments.
struct ArrayMoments {
    Eigen::VectorXd mean;  // E[Y]
    CovMatrix cov;         // Cov(Y, Y)
};

// Everything a linear estimator needs for one query location.
struct MomentBundle {
    Eigen::VectorXd mean;   // E[Y]
    CovMatrix cov;          // Cov(Y, Y)
    Eigen::VectorXd cross;  // Cov(f_query, Y)
    double prior_var = 0.0;
    Location query;
};

ArrayMoments array_moments(const MeanSpec& mean, const KernelSpec& kernel,
                           const SensorArray& arr, const Quadrature& quad = {});

// Cov(f_query, Y) for every sensor, plus the prior variance at the query.
Eigen::VectorXd cross_moments(const MeanSpec& mean, const KernelSpec& kernel,
                              const SensorArray& arr, const Location& query,
                              const Eigen::VectorXd& obs_mean);

MomentBundle moment_bundle(const MeanSpec& mean, const KernelSpec& kernel,
                           const SensorArray& arr, const Location& query,
                           const Quadrature& quad = {});

}  // namespace sblue
