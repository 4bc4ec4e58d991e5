#include "sblue/moments.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sblue/rng.hpp"

namespace sblue {

namespace {

constexpr double k_inv_sqrt_2pi = 0.3989422804014326779399461;
constexpr double k_sqrt_2pi = 2.5066282746310005024157653;
constexpr double k_inv_sqrt2 = 0.7071067811865475244008444;

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

void validate(const Gauss1& g) {
    if (!std::isfinite(g.mu) || !std::isfinite(g.sigma) || g.sigma < 0.0) {
        throw ValidationError("Gauss1 requires finite mu and sigma >= 0");
    }
}

void validate(const Gauss2& g) {
    if (!std::isfinite(g.mu1) || !std::isfinite(g.mu2) || !std::isfinite(g.sigma1) ||
        !std::isfinite(g.sigma2) || g.sigma1 < 0.0 || g.sigma2 < 0.0) {
        throw ValidationError("Gauss2 requires finite means and sigmas >= 0");
    }
    if (!(std::fabs(g.rho) <= 1.0 + 1e-9)) {
        throw ValidationError("Gauss2 requires |rho| <= 1");
    }
}

void validate(const Quadrature& q) {
    if (q.nodes_per_axis < 8) {
        throw ValidationError("quadrature nodes_per_axis must be >= 8");
    }
    if (!(q.abs_tol > 0.0)) {
        throw ValidationError("quadrature abs_tol must be > 0");
    }
}

double std_pdf(double z) { return k_inv_sqrt_2pi * std::exp(-0.5 * z * z); }

double std_cdf(double z) { return 0.5 * std::erfc(-z * k_inv_sqrt2); }

double std_q(double z) { return 0.5 * std::erfc(z * k_inv_sqrt2); }

double trunc_m0(const Gauss1& g, double T) {
    if (T == neg_inf) return 1.0;
    if (T == pos_inf) return 0.0;
    if (g.sigma == 0.0) return g.mu >= T ? 1.0 : 0.0;
    return std_q((T - g.mu) / g.sigma);
}

double trunc_m1(const Gauss1& g, double T) {
    if (T == neg_inf) return g.mu;
    if (T == pos_inf) return 0.0;
    if (g.sigma == 0.0) return g.mu >= T ? g.mu : 0.0;
    const double alpha = (T - g.mu) / g.sigma;
    return g.mu * std_q(alpha) + g.sigma * std_pdf(alpha);
}

double trunc_m2(const Gauss1& g, double T) {
    if (T == neg_inf) return g.mu * g.mu + g.sigma * g.sigma;
    if (T == pos_inf) return 0.0;
    if (g.sigma == 0.0) return g.mu >= T ? g.mu * g.mu : 0.0;
    const double alpha = (T - g.mu) / g.sigma;
    return (g.mu * g.mu + g.sigma * g.sigma) * std_q(alpha) +
           g.sigma * (g.mu + T) * std_pdf(alpha);
}

namespace {

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes on [-1, 1] by Newton iteration on the Legendre
// recurrence.
struct GaussLegendre {
    std::vector<double> x;
    std::vector<double> w;
};

GaussLegendre gauss_legendre(int n) {
    GaussLegendre rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-15) break;
        }
        rule.x[i] = -z;
        rule.x[n - 1 - i] = z;
        rule.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.w[n - 1 - i] = rule.w[i];
    }
    return rule;
}

template <typename F>
double integrate_panels(const std::vector<double>& breaks, int n, const F& f) {
    const GaussLegendre rule = gauss_legendre(n);
    double total = 0.0;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double mid = 0.5 * (breaks[p + 1] + breaks[p]);
        const double half = 0.5 * (breaks[p + 1] - breaks[p]);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += rule.w[i] * f(mid + half * rule.x[i]);
        }
        total += half * acc;
    }
    return total;
}

// Panel layout for the numeric axis: a coarse ladder over the bulk of the
// standard normal, plus tight panels around the censoring transition of the
// conditional moment (centered at z_t, width scale w_t).
std::vector<double> panel_breaks(double lo, double hi, bool refine, double z_t, double w_t) {
    std::vector<double> b{lo, hi};
    for (double c : {-6.0, -3.0, 0.0, 3.0, 6.0}) {
        if (c > lo && c < hi) b.push_back(c);
    }
    if (refine) {
        const double w = std::min(w_t, 4.0);
        for (double m : {-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0}) {
            const double c = z_t + m * w;
            if (c > lo && c < hi) b.push_back(c);
        }
    }
    std::sort(b.begin(), b.end());
    std::vector<double> out;
    for (double c : b) {
        if (out.empty() || c - out.back() > 1e-13) out.push_back(c);
    }
    return out;
}

// E[f1^j f2^k 1(f1>=T1) 1(f2>=T2)] for (j,k) in {(0,0), (1,1)} on the
// whitened pair: the f2 coordinate is absorbed through its conditional
// truncated moment, the f1 axis is integrated numerically over [a1, inf).
template <int J, int K>
double censored_pair_integral(const Gauss2& g, double T1, double T2, const Quadrature& quad) {
    const double a1 = T1 == neg_inf ? neg_inf : (T1 - g.mu1) / g.sigma1;
    const double lo = std::max(a1, -10.0);
    const double hi = std::max(10.0, lo + 8.0);
    const double sig_c = g.sigma2 * std::sqrt(std::max(0.0, 1.0 - g.rho * g.rho));

    const auto f = [&](double z) {
        const Gauss1 cond{g.mu2 + g.sigma2 * g.rho * z, sig_c};
        const double m = K == 0 ? trunc_m0(cond, T2) : trunc_m1(cond, T2);
        const double lead = J == 0 ? 1.0 : g.mu1 + g.sigma1 * z;
        return std_pdf(z) * lead * m;
    };

    bool refine = false;
    double z_t = 0.0, w_t = 0.0;
    if (g.rho != 0.0 && T2 != neg_inf && T2 != pos_inf) {
        z_t = (T2 - g.mu2) / (g.sigma2 * g.rho);
        w_t = std::max(std::sqrt(std::max(0.0, 1.0 - g.rho * g.rho)) / std::fabs(g.rho), 1e-13);
        refine = true;
    }
    const std::vector<double> breaks = panel_breaks(lo, hi, refine, z_t, w_t);

    const double coarse = integrate_panels(breaks, quad.nodes_per_axis, f);
    const double fine = integrate_panels(breaks, 2 * quad.nodes_per_axis, f);
    if (std::fabs(fine - coarse) > quad.abs_tol) {
        throw QuadratureNotConverged("censored pair integral moved by more than abs_tol when doubling nodes");
    }
    return fine;
}

// Comonotone reductions for |rho| == 1: f2 is an exact affine image of f1,
// so every pair moment collapses to interval moments of f1.
double upper_diff_m0(const Gauss1& g, double t_low, double t_high) {
    return std::max(0.0, trunc_m0(g, t_low) - trunc_m0(g, t_high));
}

double bvn_upper_comonotone(const Gauss2& g, double T1, double T2) {
    const double b = (g.rho > 0 ? 1.0 : -1.0) * g.sigma2 / g.sigma1;
    const double a = g.mu2 - b * g.mu1;
    const Gauss1 f1 = g.marginal1();
    double s;
    if (T2 == neg_inf) {
        s = b > 0 ? neg_inf : pos_inf;
    } else if (T2 == pos_inf) {
        s = b > 0 ? pos_inf : neg_inf;
    } else {
        s = (T2 - a) / b;
    }
    if (b > 0) return trunc_m0(f1, std::max(T1, s));
    if (s <= T1) return 0.0;
    return upper_diff_m0(f1, T1, s);
}

double m11_comonotone(const Gauss2& g, double T1, double T2) {
    const double b = (g.rho > 0 ? 1.0 : -1.0) * g.sigma2 / g.sigma1;
    const double a = g.mu2 - b * g.mu1;
    const Gauss1 f1 = g.marginal1();
    double s;
    if (T2 == neg_inf) {
        s = b > 0 ? neg_inf : pos_inf;
    } else if (T2 == pos_inf) {
        s = b > 0 ? pos_inf : neg_inf;
    } else {
        s = (T2 - a) / b;
    }
    if (b > 0) {
        const double tm = std::max(T1, s);
        return a * trunc_m1(f1, tm) + b * trunc_m2(f1, tm);
    }
    if (s <= T1) return 0.0;
    return a * (trunc_m1(f1, T1) - trunc_m1(f1, s)) + b * (trunc_m2(f1, T1) - trunc_m2(f1, s));
}

// Near-comonotone orthant probability on standardized margins, from the
// correlation-derivative identity: with A = sqrt(1-rho^2) and B = |h-k|,
//
//   P(X>=h, Y>=k; rho) = Q(max(h,k))
//     - 1/(2*pi) * Int_0^A exp(-B^2/(2x^2) - hk/(1+sqrt(1-x^2))) / sqrt(1-x^2) dx
//
// valid for rho > 0; negative rho reduces through P(X>=h) - P(X>=h, -Y>=-k).
// The integral is evaluated with the leading x^0 and x^2 Taylor terms of the
// smooth factor integrated in closed form and the remainder by quadrature.
double exp_tail_integral_0(double A, double B) {
    // Int_0^A exp(-B^2/(2x^2)) dx
    if (B == 0.0) return A;
    return A * std::exp(-B * B / (2.0 * A * A)) - B * k_sqrt_2pi * std_q(B / A);
}

double exp_tail_integral_2(double A, double B, double i0) {
    // Int_0^A exp(-B^2/(2x^2)) x^2 dx
    const double e = std::exp(-B * B / (2.0 * A * A));
    return (A * A * A * e - B * B * i0) / 3.0;
}

double bvn_upper_std_highcorr(double h, double k, double rho) {
    if (rho < 0.0) {
        return std::max(0.0, std_q(h) - bvn_upper_std_highcorr(h, -k, -rho));
    }
    const double A = std::sqrt(std::max(0.0, (1.0 - rho) * (1.0 + rho)));
    if (A == 0.0) return std_q(std::max(h, k));
    const double B = std::fabs(h - k);
    const double hk = h * k;

    const double c0 = std::exp(-0.5 * hk);
    const double c2 = c0 * (4.0 - hk) / 8.0;
    const double i0 = exp_tail_integral_0(A, B);
    const double i2 = exp_tail_integral_2(A, B, i0);

    const auto remainder = [&](double x) {
        const double rs = std::sqrt(1.0 - x * x);
        const double u = std::exp(-hk / (1.0 + rs)) / rs;
        const double smooth = u - c0 - c2 * x * x;
        return std::exp(-B * B / (2.0 * x * x)) * smooth;
    };
    const GaussLegendre rule = gauss_legendre(48);
    double rem = 0.0;
    const double half = 0.5 * A;
    for (int i = 0; i < 48; ++i) {
        rem += rule.w[i] * remainder(half + half * rule.x[i]);
    }
    rem *= half;

    const double correction = (c0 * i0 + c2 * i2 + rem) / (2.0 * M_PI);
    return clamp01(std_q(std::max(h, k)) - correction);
}

}  // namespace

double bvn_upper(const Gauss2& g, double T1, double T2, const Quadrature& quad) {
    validate(g);
    validate(quad);
    if (T1 == pos_inf || T2 == pos_inf) return 0.0;
    if (T1 == neg_inf) return trunc_m0(g.marginal2(), T2);
    if (T2 == neg_inf) return trunc_m0(g.marginal1(), T1);
    if (g.sigma1 == 0.0) return g.mu1 >= T1 ? trunc_m0(g.marginal2(), T2) : 0.0;
    if (g.sigma2 == 0.0) return g.mu2 >= T2 ? trunc_m0(g.marginal1(), T1) : 0.0;
    const double rho = std::clamp(g.rho, -1.0, 1.0);
    if (std::fabs(rho) == 1.0) {
        Gauss2 gc = g;
        gc.rho = rho;
        return clamp01(bvn_upper_comonotone(gc, T1, T2));
    }
    const double h = (T1 - g.mu1) / g.sigma1;
    const double k = (T2 - g.mu2) / g.sigma2;
    if (std::fabs(rho) > 0.99) {
        return bvn_upper_std_highcorr(h, k, rho);
    }
    Gauss2 gc = g;
    gc.rho = rho;
    try {
        return clamp01(censored_pair_integral<0, 0>(gc, T1, T2, quad));
    } catch (const QuadratureNotConverged&) {
        // bvn_upper is contracted never to fail; the expansion route is
        // valid for any |rho| < 1, just less sharp at small correlations.
        return bvn_upper_std_highcorr(h, k, rho);
    }
}

double cens_cross_m11(const Gauss2& g, double T1, double T2, const Quadrature& quad) {
    validate(g);
    validate(quad);
    if (T1 == pos_inf || T2 == pos_inf) return 0.0;
    if (g.sigma1 == 0.0) {
        return g.mu1 >= T1 ? g.mu1 * trunc_m1(g.marginal2(), T2) : 0.0;
    }
    if (g.sigma2 == 0.0) {
        return g.mu2 >= T2 ? g.mu2 * trunc_m1(g.marginal1(), T1) : 0.0;
    }
    const double rho = std::clamp(g.rho, -1.0, 1.0);
    Gauss2 gc = g;
    gc.rho = rho;
    if (std::fabs(rho) == 1.0) {
        return m11_comonotone(gc, T1, T2);
    }
    return censored_pair_integral<1, 1>(gc, T1, T2, quad);
}

double cond_linear_cross(const Gauss2& g, double T2) {
    validate(g);
    if (g.sigma2 == 0.0) {
        return g.mu2 >= T2 ? g.mu1 * g.mu2 : 0.0;
    }
    const double b = std::clamp(g.rho, -1.0, 1.0) * g.sigma1 / g.sigma2;
    const double a = g.mu1 - b * g.mu2;
    const Gauss1 f2 = g.marginal2();
    return a * trunc_m1(f2, T2) + b * trunc_m2(f2, T2);
}

McEstimate mc_oracle(McExpr expr, const McParams& params, std::int64_t n_samples,
                     std::uint64_t seed) {
    validate(params.g);
    if (n_samples < 10000) {
        throw ValidationError("mc_oracle requires n_samples >= 10000");
    }
    const Gauss2& g = params.g;
    const double rho = std::clamp(g.rho, -1.0, 1.0);
    const double tail = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const bool bivariate = expr == McExpr::bvn || expr == McExpr::m11 || expr == McExpr::cross;

    auto eng = make_engine(seed, "moments/mc_oracle");
    std::normal_distribution<double> gauss(0.0, 1.0);

    long double sum = 0.0L, sum_sq = 0.0L;
    for (std::int64_t i = 0; i < n_samples; ++i) {
        const double z1 = gauss(eng);
        const double f1 = g.mu1 + g.sigma1 * z1;
        double v = 0.0;
        if (bivariate) {
            const double z2 = gauss(eng);
            const double f2 = g.mu2 + g.sigma2 * (rho * z1 + tail * z2);
            switch (expr) {
                case McExpr::bvn:
                    v = (f1 >= params.t1 && f2 >= params.t2) ? 1.0 : 0.0;
                    break;
                case McExpr::m11:
                    v = (f1 >= params.t1 && f2 >= params.t2) ? f1 * f2 : 0.0;
                    break;
                default:  // cross
                    v = f2 >= params.t2 ? f1 * f2 : 0.0;
                    break;
            }
        } else {
            if (f1 >= params.t1) {
                switch (expr) {
                    case McExpr::m0: v = 1.0; break;
                    case McExpr::m1: v = f1; break;
                    default: v = f1 * f1; break;  // m2
                }
            }
        }
        sum += v;
        sum_sq += static_cast<long double>(v) * v;
    }
    const double n = static_cast<double>(n_samples);
    const double mean = static_cast<double>(sum / n_samples);
    const double var = std::max(0.0, static_cast<double>((sum_sq - sum * sum / n_samples) /
                                                         (n_samples - 1)));
    return {mean, std::sqrt(var / n)};
}

}  // namespace sblue
