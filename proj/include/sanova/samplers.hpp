#pragma once

#include "sanova/draws.hpp"
#include "sanova/metrics.hpp"
#include "sanova/models.hpp"

namespace sanova {

// Gibbs sampler for the normal-likelihood model on the orthonormal design.
// Update order per sweep: theta, tau, eta0.  Because X'X = I, theta's full
// conditional has diagonal precision eta0 + tau_g d_k and each coordinate is
// drawn independently.
PosteriorDraws gibbs_sanova_normal(const SanovaSpec& spec, const Vector& y,
                                   const RunConfig& cfg);

// Metropolis-within-Gibbs for the Poisson likelihood: random-walk Metropolis
// on the orthonormal theta basis, one coordinate at a time with a shared
// per-block step size adapted during burn-in to keep acceptance in [0.2, 0.5];
// tau keeps its conjugate Gamma update.
PosteriorDraws mh_sanova_poisson(const SanovaSpec& spec, const Vector& counts,
                                 const Vector& expected, const RunConfig& cfg);

// Gibbs sampler for the separable-prior multivariate model with normal errors:
// beta (flat-prior normal conditional), site-wise S conditionals, recentering
// of each S column with the means transferred to beta, conjugate Wishart
// update for Omega with N - G effective degrees, Gamma update for eta0.
PosteriorDraws gibbs_mcar_normal(const McarSpec& spec, const Matrix& y,
                                 const RunConfig& cfg);

// Poisson counterpart: beta and S move by adaptive random-walk Metropolis
// (component-wise), Omega stays conjugate, recentering as above.
PosteriorDraws mh_mcar_poisson(const McarSpec& spec, const Matrix& counts,
                               const Matrix& expected, const RunConfig& cfg);

// Univariate intrinsic-CAR baseline for a single disease column:
// Poisson counts with intercept + spatial effects, tau ~ Gamma(a, a).
PosteriorDraws fit_univariate_car(const RegionGraph& graph, const Vector& counts,
                                  const Vector& expected, const GammaPrior& tau_prior,
                                  const RunConfig& cfg);

// Parameters of Omega's conjugate full conditional given the spatial effects:
// Wishart with df nu + N - G and rate R + S'QS.
Matrix mcar_omega_conditional_rate(const McarSpec& spec, const Matrix& s);
double mcar_omega_conditional_df(const McarSpec& spec);

// Kept draws of the cell-level fit, pooled across chains: the cell means for
// normal models, the log-relative-risk linear predictor for Poisson models.
// Rows are draws, columns are cells in county-major order.
Matrix cell_draws(const SanovaSpec& spec, const PosteriorDraws& draws);
Matrix cell_draws(const McarSpec& spec, const PosteriorDraws& draws);

// Deviance summaries evaluated at the posterior mean of the cell-level
// likelihood parameter (mu scale), using the stored per-draw log-likelihoods.
DicResult dic_from_fit(const SanovaSpec& spec, const PosteriorDraws& draws,
                       const CellData& data);
DicResult dic_from_fit(const McarSpec& spec, const PosteriorDraws& draws,
                       const CellData& data);
DicResult dic_univariate_car(const PosteriorDraws& draws, const Vector& counts,
                             const Vector& expected);

}  // namespace sanova
