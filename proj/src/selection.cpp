#include "sblue/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>

#include "sblue/errors.hpp"
#include "sblue/rng.hpp"

namespace sblue {

namespace {

constexpr double k_neg_inf = -std::numeric_limits<double>::infinity();

}  // namespace

std::size_t ActivationMask::count() const {
    std::size_t n = 0;
    for (std::uint8_t b : bits) n += b;
    return n;
}

void validate(const CemConfig& cfg) {
    if (cfg.n_samples < 10) {
        throw ValidationError("cem: n_samples must be >= 10");
    }
    if (!(cfg.elite_fraction > 0.0) || !(cfg.elite_fraction < 1.0)) {
        throw ValidationError("cem: elite_fraction must be in (0,1)");
    }
    if (cfg.elite_fraction * cfg.n_samples < 1.0) {
        throw ValidationError("cem: elite_fraction * n_samples must be >= 1");
    }
    if (!(cfg.smoothing > 0.0) || !(cfg.smoothing <= 1.0)) {
        throw ValidationError("cem: smoothing must be in (0,1]");
    }
    if (cfg.max_iters < 1) {
        throw ValidationError("cem: max_iters must be >= 1");
    }
    if (!(cfg.p_init > 0.0) || !(cfg.p_init < 1.0)) {
        throw ValidationError("cem: p_init must be in (0,1)");
    }
}

UtilityEvaluator::UtilityEvaluator(const SelectionProblem& problem) : qos_var_(problem.qos_var) {
    if (!std::isfinite(problem.qos_var) || problem.qos_var <= 0.0) {
        throw ValidationError("qos_var must be finite and > 0");
    }
    bundle_ = moment_bundle(problem.mean, problem.kernel, problem.arr, problem.query, problem.quad);
    costs_.reserve(problem.arr.size());
    for (const Sensor& s : problem.arr.sensors()) costs_.push_back(s.cost);
}

double UtilityEvaluator::predictive_var(const ActivationMask& mask) const {
    if (mask.size() != costs_.size()) {
        throw DimensionMismatch("mask has " + std::to_string(mask.size()) + " bits for " +
                                std::to_string(costs_.size()) + " sensors");
    }
    std::vector<int> active;
    for (std::size_t i = 0; i < mask.bits.size(); ++i) {
        if (mask.bits[i] > 1) {
            throw ValidationError("mask entries must be 0 or 1");
        }
        if (mask.bits[i]) active.push_back(static_cast<int>(i));
    }
    if (active.empty()) return bundle_.prior_var;

    const auto m = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd cov(m, m);
    Eigen::VectorXd cross(m);
    for (Eigen::Index r = 0; r < m; ++r) {
        cross[r] = bundle_.cross[active[r]];
        for (Eigen::Index c = 0; c < m; ++c) {
            cov(r, c) = bundle_.cov.m(active[r], active[c]);
        }
    }
    double jitter = 0.0;
    auto llt = factorize_spd(cov, jitter);
    double var = bundle_.prior_var - cross.dot(llt.solve(cross));
    return std::max(var, 0.0);
}

double UtilityEvaluator::cost(const ActivationMask& mask) const {
    if (mask.size() != costs_.size()) {
        throw DimensionMismatch("mask has " + std::to_string(mask.size()) + " bits for " +
                                std::to_string(costs_.size()) + " sensors");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < costs_.size(); ++i) {
        if (mask.bits[i]) total += costs_[i];
    }
    return total;
}

double UtilityEvaluator::utility(const ActivationMask& mask) const {
    if (!(predictive_var(mask) < qos_var_)) return k_neg_inf;
    return 0.0 - cost(mask);
}

double utility(const SelectionProblem& problem, const ActivationMask& mask) {
    return UtilityEvaluator(problem).utility(mask);
}

CemResult cem_select(const SelectionProblem& problem, const CemConfig& cfg) {
    validate(cfg);
    UtilityEvaluator ev(problem);
    const std::size_t n = ev.size();

    CemResult out;
    out.state.p = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), cfg.p_init);
    out.state.best_mask = ActivationMask::zeros(n);
    out.state.best_utility = k_neg_inf;
    out.state.beta = k_neg_inf;
    out.state.iter = 0;

    // Costs are nonnegative, so a feasible empty mask (utility 0) is already
    // optimal and there is nothing left to search.
    const double empty_u = ev.utility(out.state.best_mask);
    if (std::isfinite(empty_u)) {
        out.state.best_utility = empty_u;
        out.state.beta = empty_u;
        out.state.iter = 1;
        out.trace.push_back({1, empty_u, empty_u, cfg.p_init, cfg.p_init, cfg.p_init});
        return out;
    }

    std::mt19937_64 eng = make_engine(cfg.seed, "selection/cem");
    const int n_elite = static_cast<int>(std::ceil(cfg.elite_fraction * cfg.n_samples));
    std::vector<ActivationMask> samples(static_cast<std::size_t>(cfg.n_samples),
                                        ActivationMask::zeros(n));
    std::vector<double> utilities(static_cast<std::size_t>(cfg.n_samples), k_neg_inf);

    for (int t = 1; t <= cfg.max_iters; ++t) {
        for (int k = 0; k < cfg.n_samples; ++k) {
            ActivationMask& mask = samples[static_cast<std::size_t>(k)];
            for (std::size_t j = 0; j < n; ++j) {
                mask.bits[j] = uniform01(eng) < out.state.p[static_cast<Eigen::Index>(j)] ? 1 : 0;
            }
            const double u = ev.utility(mask);
            utilities[static_cast<std::size_t>(k)] = u;
            if (u > out.state.best_utility) {
                out.state.best_utility = u;
                out.state.best_mask = mask;
            }
        }

        std::vector<double> finite;
        finite.reserve(utilities.size());
        for (double u : utilities) {
            if (std::isfinite(u)) finite.push_back(u);
        }

        double beta = k_neg_inf;
        if (!finite.empty()) {
            const auto ne = std::min<std::size_t>(static_cast<std::size_t>(n_elite), finite.size());
            std::nth_element(finite.begin(), finite.begin() + static_cast<std::ptrdiff_t>(ne - 1),
                             finite.end(), std::greater<>());
            beta = finite[ne - 1];

            // Refit each Bernoulli to the elite bit frequency, blended with
            // the previous parameter for stability.
            Eigen::VectorXd freq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
            int elites = 0;
            for (int k = 0; k < cfg.n_samples; ++k) {
                if (utilities[static_cast<std::size_t>(k)] < beta) continue;
                ++elites;
                const ActivationMask& mask = samples[static_cast<std::size_t>(k)];
                for (std::size_t j = 0; j < n; ++j) {
                    freq[static_cast<Eigen::Index>(j)] += mask.bits[j];
                }
            }
            freq /= static_cast<double>(elites);
            out.state.p = cfg.smoothing * freq + (1.0 - cfg.smoothing) * out.state.p;
        }
        // When every sample was rejected the parameters stay put and the
        // iteration still counts; the next pass just resamples.

        out.state.beta = beta;
        out.state.iter = t;
        CemIterRecord rec;
        rec.iter = t;
        rec.beta = beta;
        rec.best_utility = out.state.best_utility;
        if (n > 0) {
            rec.p_min = out.state.p.minCoeff();
            rec.p_mean = out.state.p.mean();
            rec.p_max = out.state.p.maxCoeff();
        }
        out.trace.push_back(rec);

        bool binary = true;
        for (Eigen::Index j = 0; j < out.state.p.size(); ++j) {
            if (std::min(out.state.p[j], 1.0 - out.state.p[j]) > 1e-3) {
                binary = false;
                break;
            }
        }
        if (binary) break;
    }

    if (!std::isfinite(out.state.best_utility)) {
        // Sampling never found a feasible mask.  Full activation is the last
        // resort: if even that fails the problem itself is infeasible.
        ActivationMask ones = ActivationMask::ones(n);
        const double u = ev.utility(ones);
        if (!std::isfinite(u)) {
            throw Infeasible("predictive variance stays at or above qos_var even with every sensor active");
        }
        out.state.best_mask = std::move(ones);
        out.state.best_utility = u;
    }
    return out;
}

std::pair<ActivationMask, double> brute_force_select(const SelectionProblem& problem) {
    const std::size_t n = problem.arr.size();
    if (n > 22) {
        throw TooLarge("exhaustive search supports at most 22 sensors, got " + std::to_string(n));
    }
    UtilityEvaluator ev(problem);

    ActivationMask best = ActivationMask::zeros(n);
    double best_u = k_neg_inf;
    ActivationMask mask = ActivationMask::zeros(n);
    const std::uint32_t total = 1u << n;
    for (std::uint32_t code = 0; code < total; ++code) {
        for (std::size_t j = 0; j < n; ++j) {
            mask.bits[j] = static_cast<std::uint8_t>((code >> j) & 1u);
        }
        // A mask costing more than the incumbent can neither improve nor tie.
        const double u_cap = 0.0 - ev.cost(mask);
        if (u_cap < best_u) continue;
        const double u = ev.utility(mask);
        if (u > best_u || (u == best_u && std::lexicographical_compare(
                                              mask.bits.begin(), mask.bits.end(),
                                              best.bits.begin(), best.bits.end()))) {
            best_u = u;
            best = mask;
        }
    }
    return {best, best_u};
}

bool feasibility_check(const SelectionProblem& problem) {
    UtilityEvaluator ev(problem);
    return std::isfinite(ev.utility(ActivationMask::ones(problem.arr.size())));
}

}  // namespace sblue
