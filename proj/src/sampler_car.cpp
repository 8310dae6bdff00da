#include "sanova/samplers.hpp"

#include "sampler_util.hpp"

#include <cmath>

namespace sanova {

// Univariate disease mapping baseline: counts ~ Poisson(E exp(beta + S_i)),
// S intrinsic CAR with precision tau Q, beta ~ N(0, 1e6), tau ~ Gamma(a, a).
PosteriorDraws fit_univariate_car(const RegionGraph& graph, const Vector& counts,
                                  const Vector& expected, const GammaPrior& tau_prior,
                                  const RunConfig& cfg) {
    const int n_regions = graph.n_regions;
    if (counts.size() != n_regions || expected.size() != n_regions) {
        throw std::invalid_argument("data length mismatch");
    }
    if ((counts.array() < 0).any()) throw std::invalid_argument("counts must be nonnegative");
    if ((expected.array() <= 0).any()) {
        throw std::invalid_argument("expected counts must be positive");
    }
    const auto car = build_car(graph);
    const int rank = car.rank();
    constexpr double kWidePrecision = 1e-6;

    std::vector<std::string> names{"beta"};
    for (int i = 0; i < n_regions; ++i) names.push_back("s[" + std::to_string(i) + "]");
    names.push_back("tau");

    auto chain_fn = [&](int chain, Rng& rng, Matrix& draws, Vector& loglik) {
        double beta =
            std::log((counts.sum() + 0.5) / expected.sum()) + 0.05 * chain * rng.normal();
        Vector s = Vector::Zero(n_regions);
        double tau = 1.0;
        Vector mu = expected.array() * std::exp(beta);
        detail::AdaptiveScale beta_scale, s_scale;

        int kept = 0;
        for (int iter = 0; iter < cfg.n_iter; ++iter) {
            {
                const double total_y = counts.sum();
                const double sd = beta_scale.scale / std::sqrt(total_y + 1.0);
                const double delta = sd * rng.normal();
                const double log_accept = delta * total_y - mu.sum() * std::expm1(delta) -
                                          0.5 * kWidePrecision *
                                              ((beta + delta) * (beta + delta) - beta * beta);
                const bool accept = std::log(rng.uniform()) < log_accept;
                beta_scale.record(accept);
                if (accept) {
                    beta += delta;
                    mu *= std::exp(delta);
                }
            }
            for (int i = 0; i < n_regions; ++i) {
                const double m_i = graph.degree(i);
                double prior_mean = 0.0;
                for (int nb : graph.neighbors[i]) prior_mean += s[nb];
                if (m_i > 0) prior_mean /= m_i;
                const double sd =
                    s_scale.scale / std::sqrt(counts[i] + 0.5 + tau * m_i);
                const double delta = sd * rng.normal();
                const double c_old = s[i] - prior_mean;
                const double c_new = c_old + delta;
                const double log_accept = counts[i] * delta - mu[i] * std::expm1(delta) -
                                          0.5 * tau * m_i * (c_new * c_new - c_old * c_old);
                const bool accept = std::log(rng.uniform()) < log_accept;
                s_scale.record(accept);
                if (accept) {
                    s[i] += delta;
                    mu[i] *= std::exp(delta);
                }
            }
            // Recenter the confounded level into the intercept.
            const double shift = s.mean();
            s.array() -= shift;
            beta += shift;
            // tau | s: conjugate Gamma with the N - G exponent.
            tau = rng.gamma(tau_prior.shape + 0.5 * rank,
                            tau_prior.rate + 0.5 * s.dot(car.Q * s));
            if (iter < cfg.burn_in && (iter + 1) % cfg.adapt_window == 0) {
                beta_scale.adapt();
                s_scale.adapt();
            }
            if ((iter + 1) % 500 == 0) {
                mu = expected.array() * (beta + s.array()).exp();
            }
            if (iter >= cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
                draws(kept, 0) = beta;
                draws.row(kept).segment(1, n_regions) = s.transpose();
                draws(kept, n_regions + 1) = tau;
                double ll = 0.0;
                for (int i = 0; i < n_regions; ++i) ll += poisson_log_pmf(counts[i], mu[i]);
                loglik[kept] = ll;
                ++kept;
            }
        }
    };
    return detail::run_chains(cfg, names, chain_fn);
}

DicResult dic_univariate_car(const PosteriorDraws& draws, const Vector& counts,
                             const Vector& expected) {
    const int n_regions = static_cast<int>(counts.size());
    const Matrix merged = draws.merged();
    double ll_hat = 0.0;
    for (int i = 0; i < n_regions; ++i) {
        const double mu_bar =
            (expected[i] * (merged.col(0) + merged.col(1 + i)).array().exp()).mean();
        ll_hat += poisson_log_pmf(counts[i], mu_bar);
    }
    return dic(draws.merged_loglik(), ll_hat);
}

}  // namespace sanova
