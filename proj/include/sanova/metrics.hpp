#pragma once

#include "sanova/common.hpp"

namespace sanova {

// Average mean squared error over replicates: rows of `estimates`/`truths`
// are replicates, columns are cells.  mcse is sd(per-replicate MSE)/sqrt(L).
struct AmseResult {
    double amse = 0.0;
    double mcse = 0.0;
};
AmseResult amse(const Matrix& estimates, const Matrix& truths);

// Per-cell mean of (estimate - truth) across replicates, then the 2.5th,
// 50th and 97.5th percentiles over cells (type-7 interpolation).
struct MbiasResult {
    double p025 = 0.0, p50 = 0.0, p975 = 0.0;
};
MbiasResult mbias(const Matrix& estimates, const Matrix& truths);

// Fraction of (replicate, cell) pairs whose equal-tailed interval covers the
// truth.  Throws if any lower bound exceeds its upper bound.
double pi_rate(const Matrix& lower, const Matrix& upper, const Matrix& truths);

// Deviance information criterion from per-draw log-likelihoods and the
// log-likelihood at the posterior mean of the cell-level likelihood
// parameter: dbar = mean(-2 ll), pd = dbar - (-2 ll_at_mean), dic = dbar + pd.
struct DicResult {
    double dbar = 0.0, pd = 0.0, dic = 0.0;
};
DicResult dic(const Vector& loglik_draws, double loglik_at_posterior_mean);

}  // namespace sanova
