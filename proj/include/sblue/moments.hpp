#pragma once

#include <cstdint>
#include <limits>

#include "sblue/errors.hpp"

namespace sblue {

// Moment calculus for censored Gaussian variables.  A censored reading keeps
// its signal component only above a threshold T; the functions here provide
// the exact first and second moments such observations contribute to a
// linear-estimator covariance structure.
//
// Univariate truncated moments are closed form.  Bivariate censored moments
// reduce, after whitening, to a one-dimensional integral: the second
// coordinate is absorbed analytically through its conditional truncated
// moments, and the remaining axis is integrated with composite
// Gauss-Legendre panels placed to resolve the censoring transition.  A
// doubled-node pass guards every quadrature result.

constexpr double neg_inf = -std::numeric_limits<double>::infinity();
constexpr double pos_inf = std::numeric_limits<double>::infinity();

struct Gauss1 {
    double mu = 0.0;
    double sigma = 1.0;  // >= 0; zero means a point mass
};

struct Gauss2 {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    double rho = 0.0;  // in [-1, 1]

    Gauss1 marginal1() const { return {mu1, sigma1}; }
    Gauss1 marginal2() const { return {mu2, sigma2}; }
};

struct Quadrature {
    int nodes_per_axis = 40;  // >= 8
    double abs_tol = 1e-8;
};

void validate(const Gauss1& g);
void validate(const Gauss2& g);
void validate(const Quadrature& q);

// Standard normal density, CDF and upper tail Q = 1 - CDF.
double std_pdf(double z);
double std_cdf(double z);
double std_q(double z);

// P(f >= T), E[f 1(f >= T)], E[f^2 1(f >= T)] for f ~ N(mu, sigma^2).
// T may be +/- infinity; -inf recovers the untruncated moments.
double trunc_m0(const Gauss1& g, double T);
double trunc_m1(const Gauss1& g, double T);
double trunc_m2(const Gauss1& g, double T);

// P(f1 >= T1, f2 >= T2).  Quadrature-backed for |rho| <= 0.99; beyond that a
// dedicated near-comonotone expansion takes over (the panel integrand
// degenerates as the pair approaches perfect correlation).
double bvn_upper(const Gauss2& g, double T1, double T2, const Quadrature& quad = {});

// E[f1 f2 1(f1 >= T1) 1(f2 >= T2)].
double cens_cross_m11(const Gauss2& g, double T1, double T2, const Quadrature& quad = {});

// E[f1 f2 1(f2 >= T2)], closed form: with E[f1|f2] affine in f2 this is
// a * m1(f2, T2) + b * m2(f2, T2).
double cond_linear_cross(const Gauss2& g, double T2);

// Monte-Carlo estimates of every expression above, for verification.
enum class McExpr { m0, m1, m2, bvn, m11, cross };

struct McParams {
    Gauss2 g;
    double t1 = neg_inf;
    double t2 = neg_inf;  // univariate expressions use (mu1, sigma1, t1) only
};

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

McEstimate mc_oracle(McExpr expr, const McParams& params, std::int64_t n_samples,
                     std::uint64_t seed);

}  // namespace sblue
