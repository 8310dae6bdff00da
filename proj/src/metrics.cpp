#include "sanova/metrics.hpp"

#include "sanova/draws.hpp"

#include <cmath>

namespace sanova {

AmseResult amse(const Matrix& estimates, const Matrix& truths) {
    if (estimates.rows() != truths.rows() || estimates.cols() != truths.cols()) {
        throw std::invalid_argument("amse: dimension mismatch");
    }
    const auto replicates = estimates.rows();
    if (replicates < 2) throw std::invalid_argument("amse needs >= 2 replicates");
    Vector per_replicate(replicates);
    for (Eigen::Index d = 0; d < replicates; ++d) {
        per_replicate[d] = (estimates.row(d) - truths.row(d)).array().square().mean();
    }
    AmseResult out;
    out.amse = per_replicate.mean();
    const double var =
        (per_replicate.array() - out.amse).square().sum() / (replicates - 1);
    out.mcse = std::sqrt(var / static_cast<double>(replicates));
    return out;
}

MbiasResult mbias(const Matrix& estimates, const Matrix& truths) {
    if (estimates.rows() != truths.rows() || estimates.cols() != truths.cols()) {
        throw std::invalid_argument("mbias: dimension mismatch");
    }
    if (estimates.rows() < 1) throw std::invalid_argument("mbias needs >= 1 replicate");
    const Vector bias = (estimates - truths).colwise().mean();
    MbiasResult out;
    out.p025 = quantile(bias, 0.025);
    out.p50 = quantile(bias, 0.5);
    out.p975 = quantile(bias, 0.975);
    return out;
}

double pi_rate(const Matrix& lower, const Matrix& upper, const Matrix& truths) {
    if (lower.rows() != truths.rows() || lower.cols() != truths.cols() ||
        upper.rows() != truths.rows() || upper.cols() != truths.cols()) {
        throw std::invalid_argument("pi_rate: dimension mismatch");
    }
    long covered = 0;
    for (Eigen::Index d = 0; d < truths.rows(); ++d) {
        for (Eigen::Index c = 0; c < truths.cols(); ++c) {
            if (lower(d, c) > upper(d, c)) {
                throw std::invalid_argument("pi_rate: interval with lower > upper");
            }
            if (lower(d, c) <= truths(d, c) && truths(d, c) <= upper(d, c)) ++covered;
        }
    }
    return static_cast<double>(covered) / static_cast<double>(truths.size());
}

DicResult dic(const Vector& loglik_draws, double loglik_at_posterior_mean) {
    if (loglik_draws.size() < 10) throw std::invalid_argument("dic needs >= 10 draws");
    DicResult out;
    out.dbar = (-2.0 * loglik_draws.array()).mean();
    out.pd = out.dbar - (-2.0 * loglik_at_posterior_mean);
    out.dic = out.dbar + out.pd;
    return out;
}

}  // namespace sanova
