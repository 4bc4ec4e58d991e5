#include <doctest.h>

#include <cmath>
#include <random>

#include "sblue/moments.hpp"
#include "sblue/rng.hpp"

using namespace sblue;

namespace {

constexpr double k_phi0 = 0.3989422804014326779;  // pdf at zero

Gauss2 random_pair(std::mt19937_64& eng) {
    Gauss2 g;
    g.mu1 = uniform01(eng) * 6.0 - 3.0;
    g.mu2 = uniform01(eng) * 6.0 - 3.0;
    g.sigma1 = 0.2 + uniform01(eng) * 2.8;
    g.sigma2 = 0.2 + uniform01(eng) * 2.8;
    g.rho = uniform01(eng) * 1.96 - 0.98;
    return g;
}

double random_threshold(std::mt19937_64& eng, double mu, double sigma) {
    return mu + (uniform01(eng) * 5.0 - 2.5) * sigma;
}

}  // namespace

TEST_CASE("standard normal helpers") {
    CHECK(std_cdf(0.0) == 0.5);
    CHECK(std_q(0.0) == 0.5);
    CHECK(std_pdf(0.0) == doctest::Approx(k_phi0).epsilon(1e-15));
    CHECK(std_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
    for (double z = -8.0; z <= 8.0; z += 0.25) {
        CHECK(std::abs(std_cdf(z) + std_q(z) - 1.0) <= 1e-15);
        CHECK(std_cdf(z) == doctest::Approx(std_q(-z)).epsilon(1e-15));
    }
    CHECK(std_cdf(-40.0) == 0.0);
    CHECK(std_cdf(40.0) == 1.0);
}

TEST_CASE("truncated moments at the standard threshold") {
    const Gauss1 g{0.0, 1.0};
    CHECK(trunc_m0(g, 0.0) == 0.5);
    CHECK(trunc_m1(g, 0.0) == doctest::Approx(k_phi0).epsilon(1e-15));
    CHECK(trunc_m2(g, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("truncated moments against direct sampling") {
    const Gauss1 g{1.0, 2.0};
    const double T = 0.5;
    McParams params;
    params.g.mu1 = g.mu;
    params.g.sigma1 = g.sigma;
    params.t1 = T;
    const std::int64_t n = 10000000;
    {
        const McEstimate mc = mc_oracle(McExpr::m0, params, n, 31);
        CHECK(std::abs(trunc_m0(g, T) - mc.estimate) <= 3.0 * mc.std_error);
    }
    {
        const McEstimate mc = mc_oracle(McExpr::m1, params, n, 32);
        CHECK(std::abs(trunc_m1(g, T) - mc.estimate) <= 3.0 * mc.std_error);
    }
    {
        const McEstimate mc = mc_oracle(McExpr::m2, params, n, 33);
        CHECK(std::abs(trunc_m2(g, T) - mc.estimate) <= 3.0 * mc.std_error);
    }
}

TEST_CASE("truncation thresholds at infinity and in the far tails") {
    const Gauss1 g{1.0, 2.0};
    CHECK(trunc_m0(g, neg_inf) == 1.0);
    CHECK(trunc_m1(g, neg_inf) == 1.0);
    CHECK(trunc_m2(g, neg_inf) == 5.0);
    CHECK(trunc_m0(g, pos_inf) == 0.0);
    CHECK(trunc_m1(g, pos_inf) == 0.0);
    CHECK(trunc_m2(g, pos_inf) == 0.0);

    // huge finite thresholds must saturate, not overflow into NaN
    CHECK(trunc_m0(g, -1e10) == 1.0);
    CHECK(trunc_m1(g, -1e10) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(trunc_m2(g, -1e10) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(trunc_m0(g, 1e10) == 0.0);
    CHECK(trunc_m1(g, 1e10) == 0.0);
    CHECK(trunc_m2(g, 1e10) == 0.0);
}

TEST_CASE("degenerate point mass keeps or drops its whole weight") {
    const Gauss1 above{2.0, 0.0};
    CHECK(trunc_m0(above, 1.0) == 1.0);
    CHECK(trunc_m1(above, 1.0) == 2.0);
    CHECK(trunc_m2(above, 1.0) == 4.0);
    CHECK(trunc_m0(above, 2.0) == 1.0);  // threshold is inclusive
    const Gauss1 below{2.0, 0.0};
    CHECK(trunc_m0(below, 3.0) == 0.0);
    CHECK(trunc_m1(below, 3.0) == 0.0);
    CHECK(trunc_m2(below, 3.0) == 0.0);
}

TEST_CASE("truncated mass is monotone in the threshold") {
    const Gauss1 g{-0.5, 1.7};
    double prev = 1.0;
    for (double T = -8.0; T <= 8.0; T += 0.5) {
        const double cur = trunc_m0(g, T);
        CHECK(cur <= prev);
        CHECK(cur >= 0.0);
        prev = cur;
    }
}

TEST_CASE("joint exceedance probability, standard pairs") {
    Gauss2 g;  // standard, rho 0
    CHECK(bvn_upper(g, 0.0, 0.0) == doctest::Approx(0.25).epsilon(1e-12));

    g.rho = 1.0;
    CHECK(bvn_upper(g, 0.0, 0.0) == 0.5);

    g.rho = 0.5;
    CHECK(bvn_upper(g, 0.0, 0.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

    g.rho = -1.0;
    CHECK(bvn_upper(g, 0.0, 0.0) == 0.0);
    // antithetic pair over a genuine interval: P(-1 <= Z <= 0)
    CHECK(bvn_upper(g, -1.0, 0.0) ==
          doctest::Approx(0.5 - std_q(1.0)).epsilon(1e-13));
}

TEST_CASE("joint exceedance matches the arcsine identity across correlations") {
    // P(Z1 >= 0, Z2 >= 0) = 1/4 + asin(rho) / (2 pi), covering both the panel
    // quadrature and the near-comonotone expansion
    Gauss2 g;
    for (double rho : {-0.9999, -0.999, -0.995, -0.95, -0.7, -0.3, 0.0, 0.3, 0.7,
                       0.95, 0.995, 0.999, 0.9999}) {
        g.rho = rho;
        const double expect = 0.25 + std::asin(rho) / (2.0 * M_PI);
        CHECK(std::abs(bvn_upper(g, 0.0, 0.0) - expect) <= 2e-8);
    }
}

TEST_CASE("joint exceedance sentinels and degenerate margins") {
    Gauss2 g;
    g.mu1 = 1.0;
    g.mu2 = -0.5;
    g.sigma1 = 2.0;
    g.sigma2 = 1.5;
    g.rho = 0.4;
    CHECK(bvn_upper(g, pos_inf, 0.0) == 0.0);
    CHECK(bvn_upper(g, 0.0, pos_inf) == 0.0);
    CHECK(bvn_upper(g, neg_inf, 0.3) == trunc_m0(g.marginal2(), 0.3));
    CHECK(bvn_upper(g, 0.3, neg_inf) == trunc_m0(g.marginal1(), 0.3));

    Gauss2 d = g;
    d.sigma1 = 0.0;
    CHECK(bvn_upper(d, 0.5, 0.3) == trunc_m0(g.marginal2(), 0.3));  // mu1 above T1
    CHECK(bvn_upper(d, 1.5, 0.3) == 0.0);                           // mu1 below T1
}

TEST_CASE("joint exceedance respects marginal bounds on random pairs") {
    auto eng = make_engine(3, "test/bvn-bounds");
    for (int i = 0; i < 200; ++i) {
        const Gauss2 g = random_pair(eng);
        const double t1 = random_threshold(eng, g.mu1, g.sigma1);
        const double t2 = random_threshold(eng, g.mu2, g.sigma2);
        const double p = bvn_upper(g, t1, t2);
        const double p1 = trunc_m0(g.marginal1(), t1);
        const double p2 = trunc_m0(g.marginal2(), t2);
        CHECK(p >= std::max(0.0, p1 + p2 - 1.0) - 1e-10);
        CHECK(p <= std::min(p1, p2) + 1e-10);
    }
}

TEST_CASE("independent pairs factorize") {
    auto eng = make_engine(4, "test/rho-zero");
    for (int i = 0; i < 50; ++i) {
        Gauss2 g = random_pair(eng);
        g.rho = 0.0;
        const double t1 = random_threshold(eng, g.mu1, g.sigma1);
        const double t2 = random_threshold(eng, g.mu2, g.sigma2);
        const double p1 = trunc_m0(g.marginal1(), t1);
        const double p2 = trunc_m0(g.marginal2(), t2);
        CHECK(std::abs(bvn_upper(g, t1, t2) - p1 * p2) <= 1e-8);
        const double m1a = trunc_m1(g.marginal1(), t1);
        const double m1b = trunc_m1(g.marginal2(), t2);
        CHECK(std::abs(cens_cross_m11(g, t1, t2) - m1a * m1b) <= 1e-7);
    }
}

TEST_CASE("censored cross moment, hand checked values") {
    Gauss2 g;  // standard, rho 0
    CHECK(cens_cross_m11(g, 0.0, 0.0) ==
          doctest::Approx(k_phi0 * k_phi0).epsilon(1e-9));
    // no censoring at all recovers E[f1 f2] = rho
    g.rho = 0.6;
    CHECK(cens_cross_m11(g, neg_inf, neg_inf) == doctest::Approx(0.6).epsilon(1e-9));
    // comonotone pair censored at zero: E[Z^2 1(Z >= 0)] = 1/2
    g.rho = 1.0;
    CHECK(cens_cross_m11(g, 0.0, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
    g.rho = -1.0;
    CHECK(cens_cross_m11(g, 0.0, 0.0) == 0.0);
}

TEST_CASE("censored cross moment against direct sampling") {
    auto eng = make_engine(5, "test/m11-mc");
    for (int i = 0; i < 8; ++i) {
        McParams params;
        params.g = random_pair(eng);
        params.t1 = random_threshold(eng, params.g.mu1, params.g.sigma1);
        params.t2 = random_threshold(eng, params.g.mu2, params.g.sigma2);
        const double exact = cens_cross_m11(params.g, params.t1, params.t2);
        const McEstimate mc = mc_oracle(McExpr::m11, params, 1000000, 100 + i);
        CHECK(std::abs(exact - mc.estimate) <= 4.0 * mc.std_error + 1e-7);
    }
}

TEST_CASE("censored pairs obey the Cauchy-Schwarz bound") {
    auto eng = make_engine(6, "test/cauchy-schwarz");
    for (int i = 0; i < 200; ++i) {
        const Gauss2 g = random_pair(eng);
        const double t1 = random_threshold(eng, g.mu1, g.sigma1);
        const double t2 = random_threshold(eng, g.mu2, g.sigma2);
        const double m11 = cens_cross_m11(g, t1, t2);
        const double m2a = trunc_m2(g.marginal1(), t1);
        const double m2b = trunc_m2(g.marginal2(), t2);
        CHECK(std::abs(m11) <= std::sqrt(m2a * m2b) + 1e-7);
    }
}

TEST_CASE("one-sided cross moment") {
    Gauss2 g;
    g.mu1 = 2.0;
    g.rho = 0.0;
    // independent: E[f1 f2 1(f2 >= T2)] = mu1 * m1(f2, T2)
    CHECK(cond_linear_cross(g, 0.0) == doctest::Approx(2.0 * k_phi0).epsilon(1e-14));
    // fully correlated standard pair, T2 = 0: reduces to E[Z^2 1(Z >= 0)]
    Gauss2 s;
    s.rho = 1.0;
    CHECK(cond_linear_cross(s, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
    // degenerate f2
    Gauss2 d;
    d.mu1 = 3.0;
    d.mu2 = 1.0;
    d.sigma2 = 0.0;
    CHECK(cond_linear_cross(d, 0.5) == 3.0);
    CHECK(cond_linear_cross(d, 1.5) == 0.0);
}

TEST_CASE("one-sided cross moment agrees with the uncensored-first pair moment") {
    auto eng = make_engine(7, "test/cross-consistency");
    for (int i = 0; i < 30; ++i) {
        const Gauss2 g = random_pair(eng);
        const double t2 = random_threshold(eng, g.mu2, g.sigma2);
        const double closed = cond_linear_cross(g, t2);
        const double quad = cens_cross_m11(g, neg_inf, t2);
        CHECK(std::abs(closed - quad) <= 1e-7);
    }
}

TEST_CASE("one-sided cross moment against direct sampling") {
    auto eng = make_engine(8, "test/cross-mc");
    for (int i = 0; i < 6; ++i) {
        McParams params;
        params.g = random_pair(eng);
        params.t2 = random_threshold(eng, params.g.mu2, params.g.sigma2);
        const double exact = cond_linear_cross(params.g, params.t2);
        const McEstimate mc = mc_oracle(McExpr::cross, params, 1000000, 200 + i);
        CHECK(std::abs(exact - mc.estimate) <= 4.0 * mc.std_error + 1e-7);
    }
}

TEST_CASE("quadrature doubling guard fires on an impossible tolerance") {
    Gauss2 g;
    g.rho = 0.5;
    Quadrature quad;
    quad.nodes_per_axis = 8;
    quad.abs_tol = 1e-300;
    CHECK_THROWS_AS(cens_cross_m11(g, 0.0, 0.0, quad), QuadratureNotConverged);
    // the exceedance probability is contracted never to fail: same call
    // falls back to the expansion route instead of throwing
    CHECK(bvn_upper(g, 0.0, 0.0, quad) == doctest::Approx(1.0 / 3.0).epsilon(1e-5));
}

TEST_CASE("parameter validation") {
    Gauss2 g;
    g.rho = 1.5;
    CHECK_THROWS_AS(bvn_upper(g, 0.0, 0.0), ValidationError);
    g.rho = 1.0 + 1e-10;  // rounding-level excess is tolerated and clamped
    CHECK(bvn_upper(g, 0.0, 0.0) == 0.5);
    Gauss1 bad{0.0, -1.0};
    CHECK_THROWS_AS(validate(bad), ValidationError);
    Quadrature q;
    q.nodes_per_axis = 4;
    CHECK_THROWS_AS(validate(q), ValidationError);
}

TEST_CASE("sampling oracle is deterministic and guards its sample count") {
    McParams params;
    params.g.rho = 0.3;
    params.t1 = 0.2;
    params.t2 = -0.4;
    CHECK_THROWS_AS(mc_oracle(McExpr::bvn, params, 9999, 1), ValidationError);
    const McEstimate a = mc_oracle(McExpr::bvn, params, 20000, 42);
    const McEstimate b = mc_oracle(McExpr::bvn, params, 20000, 42);
    CHECK(a.estimate == b.estimate);
    CHECK(a.std_error == b.std_error);
    const McEstimate c = mc_oracle(McExpr::bvn, params, 20000, 43);
    CHECK(a.estimate != c.estimate);
    CHECK(a.std_error > 0.0);
}
