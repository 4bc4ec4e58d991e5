#include "sblue/gp.hpp"

#include <cmath>
#include <random>

#include "sblue/rng.hpp"

namespace sblue {

bool is_finite(const Location& loc) {
    return std::isfinite(loc.x) && std::isfinite(loc.y);
}

double squared_distance(const Location& a, const Location& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

void validate(const MeanSpec& spec) {
    if (!std::isfinite(spec.value)) {
        throw ValidationError("mean value must be finite");
    }
}

void validate(const KernelSpec& spec) {
    if (!(spec.signal_variance > 0.0) || !std::isfinite(spec.signal_variance)) {
        throw ValidationError("kernel signal_variance must be finite and > 0");
    }
    if (!(spec.lengthscale > 0.0) || !std::isfinite(spec.lengthscale)) {
        throw ValidationError("kernel lengthscale must be finite and > 0");
    }
}

double eval_mean(const MeanSpec& spec, const Location&) {
    return spec.kind == MeanSpec::Kind::Zero ? 0.0 : spec.value;
}

double eval_kernel(const KernelSpec& spec, const Location& a, const Location& b) {
    const double d2 = squared_distance(a, b);
    return spec.signal_variance * std::exp(-d2 / (2.0 * spec.lengthscale * spec.lengthscale));
}

CovMatrix gram(const KernelSpec& spec, const std::vector<Location>& locs) {
    const Eigen::Index n = static_cast<Eigen::Index>(locs.size());
    CovMatrix out;
    out.m.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double k = eval_kernel(spec, locs[i], locs[j]);
            out.m(i, j) = k;
            out.m(j, i) = k;
            if (i != j && locs[i].x == locs[j].x && locs[i].y == locs[j].y) {
                out.duplicate_locations.emplace_back(static_cast<int>(i), static_cast<int>(j));
            }
        }
    }
    return out;
}

Eigen::VectorXd mean_vector(const MeanSpec& spec, const std::vector<Location>& locs) {
    Eigen::VectorXd mu(static_cast<Eigen::Index>(locs.size()));
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        mu[i] = eval_mean(spec, locs[static_cast<std::size_t>(i)]);
    }
    return mu;
}

Eigen::LLT<Eigen::MatrixXd> factorize_spd(const Eigen::MatrixXd& m, double& jitter_used) {
    const double max_diag = m.rows() == 0 ? 0.0 : m.diagonal().maxCoeff();
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) {
        jitter_used = 0.0;
        return llt;
    }
    for (double scale = 1e-10; scale <= 1e-4 * 1.0000001; scale *= 10.0) {
        const double jitter = scale * max_diag;
        Eigen::MatrixXd shifted = m;
        shifted.diagonal().array() += jitter;
        llt.compute(shifted);
        if (llt.info() == Eigen::Success) {
            jitter_used = jitter;
            return llt;
        }
    }
    throw FactorizationError("covariance not factorizable after jitter ladder");
}

Eigen::VectorXd sample_field(const MeanSpec& mean, const KernelSpec& kernel,
                             const std::vector<Location>& locs, std::uint64_t seed) {
    validate(mean);
    validate(kernel);
    CovMatrix k = gram(kernel, locs);
    const auto llt = factorize_spd(k.m, k.jitter);

    auto eng = make_engine(seed, "gp/sample_field");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd z(k.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z[i] = gauss(eng);
    }
    return mean_vector(mean, locs) + llt.matrixL() * z;
}

}  // namespace sblue
