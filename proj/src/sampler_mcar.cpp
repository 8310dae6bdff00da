#include "sanova/samplers.hpp"

#include "sampler_util.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace sanova {

namespace {

std::vector<std::string> mcar_param_names(const McarSpec& spec) {
    std::vector<std::string> names;
    const int n = spec.n_diseases;
    for (int j = 0; j < n; ++j) names.push_back("beta[" + std::to_string(j) + "]");
    for (int i = 0; i < spec.n_regions(); ++i) {
        for (int j = 0; j < n; ++j) {
            names.push_back("s[" + std::to_string(i) + "," + std::to_string(j) + "]");
        }
    }
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            names.push_back("omega[" + std::to_string(a) + "," + std::to_string(b) + "]");
        }
    }
    if (spec.likelihood == Likelihood::normal) names.push_back("eta0");
    return names;
}

void record_mcar_row(const McarSpec& spec, const Vector& beta, const Matrix& s,
                     const Matrix& omega, double eta0, Matrix& draws, int row) {
    const int n = spec.n_diseases;
    int col = 0;
    for (int j = 0; j < n; ++j) draws(row, col++) = beta[j];
    for (int i = 0; i < spec.n_regions(); ++i) {
        for (int j = 0; j < n; ++j) draws(row, col++) = s(i, j);
    }
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) draws(row, col++) = omega(a, b);
    }
    if (spec.likelihood == Likelihood::normal) draws(row, col++) = eta0;
}

// Transfer each S column's mean into the matching intercept.  The improper
// prior is invariant along these directions (Q 1 = 0), and beta_j + S_ij is
// unchanged, so this only pins the identification.
void recenter(Matrix& s, Vector& beta) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
        const double mean = s.col(j).mean();
        s.col(j).array() -= mean;
        beta[j] += mean;
    }
}

Matrix omega_conditional_draw(const McarSpec& spec, const Matrix& s, Rng& rng) {
    return rng.wishart(mcar_omega_conditional_rate(spec, s),
                       mcar_omega_conditional_df(spec));
}

void check_mcar_data(const McarSpec& spec, const Matrix& y) {
    if (y.rows() != spec.n_regions() || y.cols() != spec.n_diseases) {
        throw std::invalid_argument("data must be N x n");
    }
    if (!y.allFinite()) throw std::invalid_argument("data must be finite");
}

}  // namespace

Matrix mcar_omega_conditional_rate(const McarSpec& spec, const Matrix& s) {
    return spec.omega_prior.rate + s.transpose() * spec.car.Q * s;
}

double mcar_omega_conditional_df(const McarSpec& spec) {
    return spec.omega_prior.df + spec.car.rank();
}

PosteriorDraws gibbs_mcar_normal(const McarSpec& spec, const Matrix& y,
                                 const RunConfig& cfg) {
    if (spec.likelihood != Likelihood::normal) {
        throw std::invalid_argument("gibbs_mcar_normal needs a normal-likelihood spec");
    }
    check_mcar_data(spec, y);
    Eigen::LLT<Matrix> rate_check(spec.omega_prior.rate);
    if (rate_check.info() != Eigen::Success) {
        throw std::invalid_argument("wishart rate matrix must be positive definite");
    }

    const int n = spec.n_diseases;
    const int n_regions = spec.n_regions();
    const double n_cells = static_cast<double>(n_regions * n);

    auto chain_fn = [&](int chain, Rng& rng, Matrix& draws, Vector& loglik) {
        Vector beta = y.colwise().mean();
        for (int j = 0; j < n; ++j) beta[j] += 0.1 * chain * rng.normal();
        Matrix s = y - Vector::Ones(n_regions) * beta.transpose();
        recenter(s, beta);
        Matrix omega = Matrix::Identity(n, n);
        double eta0 = 1.0;

        Vector neighbor_sum(n);
        int kept = 0;
        for (int iter = 0; iter < cfg.n_iter; ++iter) {
            // beta_j | s, eta0, y: flat prior.
            for (int j = 0; j < n; ++j) {
                const double mean = (y.col(j) - s.col(j)).mean();
                beta[j] = mean + rng.normal() / std::sqrt(n_cells / n * eta0);
            }
            // Site-wise multivariate normal conditionals for S.
            for (int i = 0; i < n_regions; ++i) {
                neighbor_sum.setZero();
                for (int nb : spec.graph.neighbors[i]) neighbor_sum += s.row(nb).transpose();
                const double m_i = spec.graph.degree(i);
                Matrix cond_prec = m_i * omega;
                cond_prec.diagonal().array() += eta0;
                Vector h = omega * neighbor_sum + eta0 * (y.row(i).transpose() - beta);
                Eigen::LLT<Matrix> llt(cond_prec);
                Vector mean = llt.solve(h);
                // mean + L'^{-1} z gives a draw with precision cond_prec.
                Vector z = rng.normal_vector(n);
                s.row(i) = (mean + llt.matrixU().solve(z)).transpose();
            }
            recenter(s, beta);
            omega = omega_conditional_draw(spec, s, rng);
            // eta0 | beta, s, y.
            double rss = 0.0;
            for (int i = 0; i < n_regions; ++i) {
                for (int j = 0; j < n; ++j) {
                    const double r = y(i, j) - beta[j] - s(i, j);
                    rss += r * r;
                }
            }
            eta0 = rng.gamma(spec.eta0_prior.shape + 0.5 * n_cells,
                             spec.eta0_prior.rate + 0.5 * rss);

            if (iter >= cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
                record_mcar_row(spec, beta, s, omega, eta0, draws, kept);
                loglik[kept] = 0.5 * n_cells * (std::log(eta0) - std::log(2.0 * M_PI)) -
                               0.5 * eta0 * rss;
                ++kept;
            }
        }
    };
    return detail::run_chains(cfg, mcar_param_names(spec), chain_fn);
}

PosteriorDraws mh_mcar_poisson(const McarSpec& spec, const Matrix& counts,
                               const Matrix& expected, const RunConfig& cfg) {
    if (spec.likelihood != Likelihood::poisson) {
        throw std::invalid_argument("mh_mcar_poisson needs a poisson-likelihood spec");
    }
    check_mcar_data(spec, counts);
    check_mcar_data(spec, expected);
    if ((counts.array() < 0).any()) throw std::invalid_argument("counts must be nonnegative");
    if ((expected.array() <= 0).any()) {
        throw std::invalid_argument("expected counts must be positive");
    }

    const int n = spec.n_diseases;
    const int n_regions = spec.n_regions();

    auto chain_fn = [&](int chain, Rng& rng, Matrix& draws, Vector& loglik) {
        Vector beta(n);
        for (int j = 0; j < n; ++j) {
            beta[j] = std::log((counts.col(j).sum() + 0.5) / expected.col(j).sum()) +
                      0.05 * chain * rng.normal();
        }
        Matrix s = Matrix::Zero(n_regions, n);
        Matrix omega = Matrix::Identity(n, n);
        Matrix mu(n_regions, n);
        auto refresh_mu = [&] {
            for (int i = 0; i < n_regions; ++i) {
                for (int j = 0; j < n; ++j) {
                    mu(i, j) = expected(i, j) * std::exp(beta[j] + s(i, j));
                }
            }
        };
        refresh_mu();

        // One adaptive step size per disease for S components plus one per
        // intercept.
        std::vector<detail::AdaptiveScale> s_scales(n), beta_scales(n);

        Vector prior_mean(n), centered(n);
        int kept = 0;
        for (int iter = 0; iter < cfg.n_iter; ++iter) {
            // Intercepts: one-dimensional random walks against column totals.
            for (int j = 0; j < n; ++j) {
                const double col_mu = mu.col(j).sum();
                const double col_y = counts.col(j).sum();
                const double sd = beta_scales[j].scale / std::sqrt(col_y + 1.0);
                const double delta = sd * rng.normal();
                const double log_accept = delta * col_y - col_mu * std::expm1(delta);
                const bool accept = std::log(rng.uniform()) < log_accept;
                beta_scales[j].record(accept);
                if (accept) {
                    beta[j] += delta;
                    mu.col(j) *= std::exp(delta);
                }
            }
            // Component-wise random walk on S with the conditional prior from
            // the neighbors.
            for (int i = 0; i < n_regions; ++i) {
                const double m_i = spec.graph.degree(i);
                prior_mean.setZero();
                for (int nb : spec.graph.neighbors[i]) prior_mean += s.row(nb).transpose();
                if (m_i > 0) prior_mean /= m_i;
                for (int j = 0; j < n; ++j) {
                    const double sd =
                        s_scales[j].scale /
                        std::sqrt(counts(i, j) + 0.5 + m_i * omega(j, j));
                    const double delta = sd * rng.normal();
                    centered = s.row(i).transpose() - prior_mean;
                    double quad_old = 0.0, quad_new = 0.0;
                    if (m_i > 0) {
                        quad_old = centered.dot(omega * centered);
                        centered[j] += delta;
                        quad_new = centered.dot(omega * centered);
                        centered[j] -= delta;
                    }
                    const double log_accept = counts(i, j) * delta -
                                              mu(i, j) * std::expm1(delta) -
                                              0.5 * m_i * (quad_new - quad_old);
                    const bool accept = std::log(rng.uniform()) < log_accept;
                    s_scales[j].record(accept);
                    if (accept) {
                        s(i, j) += delta;
                        mu(i, j) *= std::exp(delta);
                    }
                }
            }
            recenter(s, beta);
            omega = omega_conditional_draw(spec, s, rng);
            if (iter < cfg.burn_in && (iter + 1) % cfg.adapt_window == 0) {
                for (auto& sc : s_scales) sc.adapt();
                for (auto& sc : beta_scales) sc.adapt();
            }
            if ((iter + 1) % 500 == 0) refresh_mu();

            if (iter >= cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
                record_mcar_row(spec, beta, s, omega, 1.0, draws, kept);
                double ll = 0.0;
                for (int i = 0; i < n_regions; ++i) {
                    for (int j = 0; j < n; ++j) {
                        ll += poisson_log_pmf(counts(i, j), mu(i, j));
                    }
                }
                loglik[kept] = ll;
                ++kept;
            }
        }
    };
    return detail::run_chains(cfg, mcar_param_names(spec), chain_fn);
}

Matrix cell_draws(const McarSpec& spec, const PosteriorDraws& draws) {
    const int n = spec.n_diseases;
    const int n_regions = spec.n_regions();
    const Matrix merged = draws.merged();
    Matrix out(merged.rows(), n_regions * n);
    for (int i = 0; i < n_regions; ++i) {
        for (int j = 0; j < n; ++j) {
            out.col(cell_index(i, j, n)) = merged.col(n + cell_index(i, j, n)) +
                                           merged.col(j);
        }
    }
    return out;
}

DicResult dic_from_fit(const McarSpec& spec, const PosteriorDraws& draws,
                       const CellData& data) {
    const Matrix cells = cell_draws(spec, draws);
    double ll_hat = 0.0;
    if (spec.likelihood == Likelihood::poisson) {
        for (Eigen::Index c = 0; c < cells.cols(); ++c) {
            const double mu_bar = (data.expected[c] * cells.col(c).array().exp()).mean();
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
