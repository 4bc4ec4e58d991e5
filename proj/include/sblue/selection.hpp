#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "sblue/estimator.hpp"
#include "sblue/sensors.hpp"

namespace sblue {

// Minimum-cost sensor activation under a predictive-variance guarantee at a
// single query location, solved with the cross-entropy method over
// independent per-sensor Bernoulli activation probabilities, plus an
// exhaustive oracle for small instances.

struct SelectionProblem {
    Location query;
    double qos_var = 1.0;  // required: predictive variance strictly below this
    SensorArray arr;
    MeanSpec mean;
    KernelSpec kernel;
    Quadrature quad;
};

struct ActivationMask {
    std::vector<std::uint8_t> bits;  // aligned with canonical sensor order

    static ActivationMask zeros(std::size_t n) { return {std::vector<std::uint8_t>(n, 0)}; }
    static ActivationMask ones(std::size_t n) { return {std::vector<std::uint8_t>(n, 1)}; }
    std::size_t size() const { return bits.size(); }
    std::size_t count() const;
    bool operator==(const ActivationMask& other) const { return bits == other.bits; }
};

struct CemConfig {
    int n_samples = 50;           // K, >= 10
    double elite_fraction = 0.1;  // in (0,1) with elite_fraction * K >= 1
    double smoothing = 0.7;       // in (0,1]
    int max_iters = 10;
    double p_init = 0.5;          // in (0,1)
    std::uint64_t seed = 0;
};

void validate(const CemConfig& cfg);

struct CemIterRecord {
    int iter = 0;
    double beta = 0.0;          // elite utility threshold; -inf if nothing was feasible
    double best_utility = 0.0;  // best-ever utility after this iteration
    double p_min = 0.0;
    double p_mean = 0.0;
    double p_max = 0.0;
};

struct CemState {
    Eigen::VectorXd p;
    double beta = 0.0;
    ActivationMask best_mask;
    double best_utility = 0.0;
    int iter = 0;
};

struct CemResult {
    CemState state;
    std::vector<CemIterRecord> trace;
};

// Shares one full-array moment bundle across all mask evaluations; a mask's
// predictive variance only needs the matching sub-blocks.
class UtilityEvaluator {
public:
    explicit UtilityEvaluator(const SelectionProblem& problem);

    double predictive_var(const ActivationMask& mask) const;
    double cost(const ActivationMask& mask) const;
    // -cost when the variance constraint holds strictly, -inf otherwise.
    double utility(const ActivationMask& mask) const;
    double prior_var() const { return bundle_.prior_var; }
    std::size_t size() const { return costs_.size(); }

private:
    MomentBundle bundle_;
    std::vector<double> costs_;
    double qos_var_;
};

double utility(const SelectionProblem& problem, const ActivationMask& mask);

CemResult cem_select(const SelectionProblem& problem, const CemConfig& cfg);

// Exact optimum by 2^N enumeration (N <= 22); ties resolved toward the
// lexicographically smallest bit vector.  Returns utility -inf when no mask
// is feasible.
std::pair<ActivationMask, double> brute_force_select(const SelectionProblem& problem);

// True when even full activation meets the constraint.
bool feasibility_check(const SelectionProblem& problem);

}  // namespace sblue
