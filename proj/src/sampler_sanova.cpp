#include "sanova/samplers.hpp"

#include "sampler_util.hpp"

#include <cmath>

namespace sanova {

namespace {

constexpr double kWidePrecision = 1e-6;  // N(0, 1e6) fixed-effect prior

std::vector<std::string> sanova_param_names(const SanovaSpec& spec) {
    std::vector<std::string> names;
    for (int k = 0; k < spec.n_model_columns(); ++k) {
        names.push_back("theta[" + std::to_string(k) + "]");
    }
    for (int g = 0; g < spec.n_smoothing_groups(); ++g) {
        names.push_back("tau[" + std::to_string(g) + "]");
    }
    if (spec.likelihood == Likelihood::normal) names.push_back("eta0");
    return names;
}

// Prior precision of theta coordinate k given the smoothing precisions.
// Fixed-effect columns carry 0 (flat) or 1e-6; smoothed columns carry
// tau_g * d_k, where d_k can be zero on extra-island null directions.
struct ThetaPrior {
    const SanovaSpec& spec;
    double coordinate_precision(int k, const Vector& tau) const {
        const int group = spec.design.smoothing_group(k);
        if (group < 0) {
            return spec.fixed_effect_prior == FixedEffectPrior::normal_wide ? kWidePrecision
                                                                            : 0.0;
        }
        const int block = spec.design.smoothed_block_size();
        const int within = (k - spec.design.n_fixed()) % block;
        return tau[group] * spec.design.car.contrast_eigenvalues()[within];
    }
};

// Conjugate Gamma draw for one smoothing precision given its theta block.
double draw_tau(const SanovaSpec& spec, const Vector& theta, int group, Rng& rng) {
    const auto& design = spec.design;
    const int block = design.smoothed_block_size();
    const Vector d_minus = design.car.contrast_eigenvalues();
    double quad = 0.0;
    int rank = 0;
    for (int k = 0; k < block; ++k) {
        if (d_minus[k] <= 0) continue;
        const double t = theta[design.n_fixed() + group * block + k];
        quad += d_minus[k] * t * t;
        ++rank;
    }
    return rng.gamma(spec.tau_prior.shape + 0.5 * rank, spec.tau_prior.rate + 0.5 * quad);
}

}  // namespace

PosteriorDraws gibbs_sanova_normal(const SanovaSpec& spec, const Vector& y,
                                   const RunConfig& cfg) {
    if (spec.likelihood != Likelihood::normal) {
        throw std::invalid_argument("gibbs_sanova_normal needs a normal-likelihood spec");
    }
    const auto& design = spec.design;
    if (y.size() != design.n_cells()) throw std::invalid_argument("data length mismatch");
    if (!y.allFinite()) throw std::invalid_argument("data must be finite");

    const int m = spec.n_model_columns();
    const int n_groups = spec.n_smoothing_groups();
    const auto x_model = design.X.leftCols(m);
    const Vector z = x_model.transpose() * y;  // X'y; X'X = I makes it sufficient
    const double yty = y.squaredNorm();
    const double n_cells = static_cast<double>(design.n_cells());
    const ThetaPrior prior{spec};

    auto chain_fn = [&](int /*chain*/, Rng& rng, Matrix& draws, Vector& loglik) {
        Vector theta = Vector::Zero(m);
        Vector tau = spec.fixed_tau ? *spec.fixed_tau : Vector::Ones(n_groups);
        double eta0 = spec.fixed_eta0 ? *spec.fixed_eta0 : 1.0;
        int kept = 0;
        for (int iter = 0; iter < cfg.n_iter; ++iter) {
            // theta | tau, eta0, y: diagonal conditional precision eta0 + p_k.
            for (int k = 0; k < m; ++k) {
                const double pk = prior.coordinate_precision(k, tau);
                const double cond_prec = eta0 + pk;
                const double mean = eta0 * z[k] / cond_prec;
                theta[k] = mean + rng.normal() / std::sqrt(cond_prec);
            }
            // tau_g | theta.
            if (!spec.fixed_tau) {
                for (int g = 0; g < n_groups; ++g) tau[g] = draw_tau(spec, theta, g, rng);
            }
            // eta0 | theta, y.  ||y - X theta||^2 = y'y - 2 theta'z + theta'theta.
            const double rss = yty - 2.0 * theta.dot(z) + theta.squaredNorm();
            if (!spec.fixed_eta0) {
                eta0 = rng.gamma(spec.eta0_prior.shape + 0.5 * n_cells,
                                 spec.eta0_prior.rate + 0.5 * rss);
            }
            if (iter >= cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
                draws.row(kept).head(m) = theta.transpose();
                draws.row(kept).segment(m, n_groups) = tau.transpose();
                draws(kept, m + n_groups) = eta0;
                loglik[kept] =
                    0.5 * n_cells * (std::log(eta0) - std::log(2.0 * M_PI)) - 0.5 * eta0 * rss;
                ++kept;
            }
        }
    };
    return detail::run_chains(cfg, sanova_param_names(spec), chain_fn);
}

PosteriorDraws mh_sanova_poisson(const SanovaSpec& spec, const Vector& counts,
                                 const Vector& expected, const RunConfig& cfg) {
    if (spec.likelihood != Likelihood::poisson) {
        throw std::invalid_argument("mh_sanova_poisson needs a poisson-likelihood spec");
    }
    const auto& design = spec.design;
    const int cells = design.n_cells();
    if (counts.size() != cells || expected.size() != cells) {
        throw std::invalid_argument("data length mismatch");
    }
    if ((counts.array() < 0).any()) throw std::invalid_argument("counts must be nonnegative");
    if ((expected.array() <= 0).any()) {
        throw std::invalid_argument("expected counts must be positive");
    }

    const int m = spec.n_model_columns();
    const int n_groups = spec.n_smoothing_groups();
    const Matrix x_model = design.X.leftCols(m);
    const ThetaPrior prior{spec};

    // Sufficient statistics for coordinate moves: y'x_k, and an empirical
    // curvature proxy f_k = sum_c x_ck^2 (y_c + 1/2) used to scale proposals.
    const Vector yx = x_model.transpose() * counts;
    const Vector curvature =
        x_model.array().square().matrix().transpose() * (counts.array() + 0.5).matrix();

    // Reasonable starting point: least squares on the empirical log rates.
    const Vector log_rate =
        ((counts.array() + 0.5) / expected.array()).log().matrix();
    const Vector theta_start = x_model.transpose() * log_rate;
    const double total_ll_const = (counts.array() + 1.0).unaryExpr([](double v) {
        return std::lgamma(v);
    }).sum();

    auto chain_fn = [&](int chain, Rng& rng, Matrix& draws, Vector& loglik) {
        Vector theta = theta_start;
        for (int k = 0; k < m; ++k) theta[k] += 0.05 * chain * rng.normal();
        Vector tau = spec.fixed_tau ? *spec.fixed_tau : Vector::Ones(n_groups);
        Vector lp = x_model * theta;
        Vector mu = expected.array() * lp.array().exp();

        // One step-size per block: fixed effects, region main, each interaction
        // group.
        std::vector<detail::AdaptiveScale> scales(1 + n_groups);
        Vector mu_new(cells);

        int kept = 0;
        for (int iter = 0; iter < cfg.n_iter; ++iter) {
            for (int k = 0; k < m; ++k) {
                const int group = design.smoothing_group(k);
                const int block = group < 0 ? 0 : 1 + group;
                const double pk = prior.coordinate_precision(k, tau);
                const double sd =
                    scales[block].scale / std::sqrt(curvature[k] + pk + 1e-12);
                const double delta = sd * rng.normal();
                const auto col = x_model.col(k);
                double diff_mu = 0.0;
                for (int c = 0; c < cells; ++c) {
                    mu_new[c] = mu[c] * std::exp(delta * col[c]);
                    diff_mu += mu_new[c] - mu[c];
                }
                double log_accept = delta * yx[k] - diff_mu;
                const double t_new = theta[k] + delta;
                log_accept -= 0.5 * pk * (t_new * t_new - theta[k] * theta[k]);
                const bool accept = std::log(rng.uniform()) < log_accept;
                scales[block].record(accept);
                if (accept) {
                    theta[k] = t_new;
                    lp += delta * col;
                    mu.swap(mu_new);
                }
            }
            if (!spec.fixed_tau) {
                for (int g = 0; g < n_groups; ++g) tau[g] = draw_tau(spec, theta, g, rng);
            }
            if (iter < cfg.burn_in && (iter + 1) % cfg.adapt_window == 0) {
                for (auto& s : scales) s.adapt();
            }
            if ((iter + 1) % 500 == 0) {
                // Refresh against incremental drift.
                lp = x_model * theta;
                mu = expected.array() * lp.array().exp();
            }
            if (iter >= cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
                draws.row(kept).head(m) = theta.transpose();
                draws.row(kept).segment(m, n_groups) = tau.transpose();
                loglik[kept] = counts.dot((mu.array().log()).matrix()) - mu.sum() -
                               total_ll_const;
                ++kept;
            }
        }
    };
    return detail::run_chains(cfg, sanova_param_names(spec), chain_fn);
}

Matrix cell_draws(const SanovaSpec& spec, const PosteriorDraws& draws) {
    const int m = spec.n_model_columns();
    const Matrix merged = draws.merged();
    return merged.leftCols(m) * spec.design.X.leftCols(m).transpose();
}

DicResult dic_from_fit(const SanovaSpec& spec, const PosteriorDraws& draws,
                       const CellData& data) {
    const Matrix cells = cell_draws(spec, draws);
    double ll_hat = 0.0;
    if (spec.likelihood == Likelihood::poisson) {
        for (Eigen::Index c = 0; c < cells.cols(); ++c) {
            const double mu_bar =
                (data.expected[c] * cells.col(c).array().exp()).mean();
            ll_hat += poisson_log_pmf(data.y[c], mu_bar);
        }
    } else {
        const Vector eta0 = draws.pooled_column(draws.index_of("eta0"));
        const double eta0_bar = eta0.mean();
        for (Eigen::Index c = 0; c < cells.cols(); ++c) {
            ll_hat += normal_log_pdf(data.y[c], cells.col(c).mean(), eta0_bar);
        }
    }
    return dic(draws.merged_loglik(), ll_hat);
}

}  // namespace sanova
