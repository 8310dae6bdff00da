#pragma once

#include "sanova/design.hpp"

#include <optional>

namespace sanova {

enum class Likelihood { normal, poisson };

std::string to_string(Likelihood lik);
Likelihood likelihood_from_string(const std::string& s);

struct GammaPrior {
    double shape = 0.1;  // shape-rate: mean shape/rate, variance shape/rate^2
    double rate = 0.1;
    double log_density(double x) const;
};

enum class FixedEffectPrior {
    flat,        // identically-zero log contribution
    normal_wide  // N(0, 1e6)
};

// Wishart in the rate parameterization: density proportional to
// |W|^{(df-p-1)/2} exp(-tr(rate W)/2), E(W) = df * rate^{-1}.  The p = 1 case
// reduces to Gamma(df/2, rate/2).
struct WishartPrior {
    Matrix rate;
    double df = 3.0;
    double log_kernel(const Matrix& omega) const;
};

// Observed cells, county-major.  `expected` is empty for normal models and
// holds the Poisson offsets E_ij otherwise.
struct CellData {
    Vector y;
    Vector expected;
};

struct SanovaSpec {
    Likelihood likelihood = Likelihood::normal;
    SanovaDesign design;
    GammaPrior tau_prior{0.1, 0.1};
    GammaPrior eta0_prior{0.1, 0.1};
    FixedEffectPrior fixed_effect_prior = FixedEffectPrior::flat;
    bool include_interactions = true;

    // Degenerate-prior modes: hold hyperparameters fixed instead of sampling.
    std::optional<Vector> fixed_tau;
    std::optional<double> fixed_eta0;

    // One smoothing precision for the region main block plus one per
    // interaction group.
    int n_smoothing_groups() const {
        return include_interactions ? design.n_diseases() : 1;
    }
    // Model columns: everything, or fixed + region-main when interactions are
    // dropped.
    int n_model_columns() const {
        return include_interactions
                   ? design.n_cells()
                   : design.n_fixed() + design.smoothed_block_size();
    }

    static SanovaSpec normal_model(SanovaDesign design);
    static SanovaSpec poisson_model(SanovaDesign design);
};

struct McarSpec {
    Likelihood likelihood = Likelihood::normal;
    RegionGraph graph;
    CarStructure car;  // built from graph; supplies Q and the island count
    int n_diseases = 3;
    WishartPrior omega_prior;
    GammaPrior eta0_prior{0.1, 0.1};
    FixedEffectPrior beta_prior = FixedEffectPrior::flat;

    int n_regions() const { return car.n_regions(); }

    // R = r * I presets; r in {0.002, 1, 200} in the comparison studies.
    static McarSpec with_identity_rate(Likelihood lik, RegionGraph graph, int n_diseases,
                                       double r, double df = -1.0);
};

struct SanovaState {
    Vector theta;  // model columns (see SanovaSpec::n_model_columns)
    Vector tau;    // smoothing precisions, one per group
    double eta0 = 1.0;
    long iteration = 0;
};

struct McarState {
    Vector beta;   // disease intercepts
    Matrix s;      // N x n spatial effects, recentered so each column sums to 0
    Matrix omega;  // n x n between-disease precision
    double eta0 = 1.0;
    long iteration = 0;
};

void validate_state(const SanovaSpec& spec, const SanovaState& state);
void validate_state(const McarSpec& spec, const McarState& state);

// Exact log-likelihoods (no dropped data-dependent terms; DIC needs them).
double log_likelihood(const SanovaSpec& spec, const SanovaState& state, const CellData& data);
double log_likelihood(const McarSpec& spec, const McarState& state, const CellData& data);

// Prior log-kernels.  Flat components contribute zero; proper components
// contribute their full log density; rank-deficient CAR components use the
// (N - G)/2 exponent on the precision.
double log_prior(const SanovaSpec& spec, const SanovaState& state);
double log_prior(const McarSpec& spec, const McarState& state);

// Poisson and normal cell log-densities shared by samplers and DIC.
double poisson_log_pmf(double count, double mean);
double normal_log_pdf(double x, double mean, double precision);

}  // namespace sanova
