#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "sblue/errors.hpp"

namespace sblue {

struct Location {
    double x = 0.0;
    double y = 0.0;
};

bool is_finite(const Location& loc);
double squared_distance(const Location& a, const Location& b);

// Prior mean function: zero everywhere or a constant level.
struct MeanSpec {
    enum class Kind { Zero, Constant };
    Kind kind = Kind::Zero;
    double value = 0.0;

    static MeanSpec zero() { return {Kind::Zero, 0.0}; }
    static MeanSpec constant(double c) { return {Kind::Constant, c}; }
};

// Stationary covariance function.  Only the squared-exponential family is
// implemented; the enum leaves room for more.
struct KernelSpec {
    enum class Family { SquaredExponential };
    Family family = Family::SquaredExponential;
    double signal_variance = 1.0;  // field units^2, > 0
    double lengthscale = 1.0;      // spatial units, > 0
};

void validate(const MeanSpec& spec);
void validate(const KernelSpec& spec);

double eval_mean(const MeanSpec& spec, const Location& loc);
double eval_kernel(const KernelSpec& spec, const Location& a, const Location& b);

// Gram matrix of a kernel over a location set, plus bookkeeping about the
// jitter that was needed to factorize it and any exactly coincident
// locations (which make the matrix rank deficient).
struct CovMatrix {
    Eigen::MatrixXd m;
    double jitter = 0.0;
    std::vector<std::pair<int, int>> duplicate_locations;

    Eigen::Index size() const { return m.rows(); }
    bool has_duplicates() const { return !duplicate_locations.empty(); }
};

CovMatrix gram(const KernelSpec& spec, const std::vector<Location>& locs);

Eigen::VectorXd mean_vector(const MeanSpec& spec, const std::vector<Location>& locs);

// Cholesky of a symmetric PSD matrix with an escalating diagonal jitter:
// plain attempt first, then 1e-10 * max(diag) growing tenfold up to
// 1e-4 * max(diag).  Throws FactorizationError when the ladder is exhausted.
// On success `jitter_used` records the diagonal shift that was applied.
Eigen::LLT<Eigen::MatrixXd> factorize_spd(const Eigen::MatrixXd& m, double& jitter_used);

// One joint draw from N(mean, gram(locs)).  Deterministic for a given seed;
// the stream label keeps it independent of other consumers of the same seed.
Eigen::VectorXd sample_field(const MeanSpec& mean, const KernelSpec& kernel,
                             const std::vector<Location>& locs, std::uint64_t seed);

}  // namespace sblue
