#pragma once

#include "sanova/common.hpp"

#include <cstdint>

namespace sanova {

struct RunConfig {
    int n_chains = 3;
    int n_iter = 10000;
    int burn_in = 2000;
    int thin = 1;
    std::uint64_t seed = 0;
    int adapt_window = 100;  // Metropolis adaptation cadence during burn-in
    int n_threads = 0;       // 0 = one thread per chain, capped by hardware

    void validate() const;
    int kept_per_chain() const { return (n_iter - burn_in + thin - 1) / thin; }

    static RunConfig paper_preset(std::uint64_t seed);    // 3 x 10000, burn 2000
    static RunConfig reduced_preset(std::uint64_t seed);  // 3 x 4000, burn 1000
};

// Post-burn-in samples: one kept x P matrix per chain plus the per-draw
// log-likelihood (needed for DIC).
struct PosteriorDraws {
    std::vector<std::string> names;
    std::vector<Matrix> chains;
    std::vector<Vector> loglik;

    int n_chains() const { return static_cast<int>(chains.size()); }
    int n_params() const { return static_cast<int>(names.size()); }
    int kept_per_chain() const {
        return chains.empty() ? 0 : static_cast<int>(chains.front().rows());
    }
    int total_kept() const { return n_chains() * kept_per_chain(); }

    int index_of(const std::string& name) const;
    Matrix merged() const;               // pooled chains, (chains * kept) x P
    Vector merged_loglik() const;
    Vector pooled_column(int param) const;
    void check_finite() const;
};

struct ParamSummary {
    std::string name;
    double median = 0.0, q025 = 0.0, q975 = 0.0, rhat = 1.0;
};

// Type-7 quantile (linear interpolation between order statistics).
double quantile(Vector values, double p);

// Gelman-Rubin potential scale reduction per parameter.  Convention:
// sqrt(max(1, Vhat / W)) with Vhat = (k-1)/k W + (1 + 1/m) B/k, so identical
// chains and constant parameters report exactly 1.
Vector gelman_rubin(const PosteriorDraws& draws);

std::vector<ParamSummary> summarize(const PosteriorDraws& draws);

}  // namespace sanova
