#include "sanova/models.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace sanova {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kWideVariance = 1e6;
}  // namespace

std::string to_string(Likelihood lik) {
    return lik == Likelihood::normal ? "normal" : "poisson";
}

Likelihood likelihood_from_string(const std::string& s) {
    if (s == "normal") return Likelihood::normal;
    if (s == "poisson") return Likelihood::poisson;
    throw std::invalid_argument("unknown likelihood: " + s);
}

double GammaPrior::log_density(double x) const {
    if (x <= 0) throw std::invalid_argument("gamma-distributed value must be positive");
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) -
           rate * x;
}

double WishartPrior::log_kernel(const Matrix& omega) const {
    const auto p = rate.rows();
    Eigen::LLT<Matrix> llt(omega);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("omega must be positive definite");
    }
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
    return 0.5 * (df - static_cast<double>(p) - 1.0) * log_det -
           0.5 * (rate * omega).trace();
}

double poisson_log_pmf(double count, double mean) {
    if (mean <= 0) throw std::invalid_argument("poisson mean must be positive");
    return -mean + count * std::log(mean) - std::lgamma(count + 1.0);
}

double normal_log_pdf(double x, double mean, double precision) {
    const double r = x - mean;
    return 0.5 * (std::log(precision) - kLog2Pi) - 0.5 * precision * r * r;
}

SanovaSpec SanovaSpec::normal_model(SanovaDesign design) {
    SanovaSpec spec;
    spec.likelihood = Likelihood::normal;
    spec.design = std::move(design);
    spec.fixed_effect_prior = FixedEffectPrior::flat;
    return spec;
}

SanovaSpec SanovaSpec::poisson_model(SanovaDesign design) {
    SanovaSpec spec;
    spec.likelihood = Likelihood::poisson;
    spec.design = std::move(design);
    spec.fixed_effect_prior = FixedEffectPrior::normal_wide;
    return spec;
}

McarSpec McarSpec::with_identity_rate(Likelihood lik, RegionGraph graph, int n_diseases,
                                      double r, double df) {
    if (r <= 0) throw std::invalid_argument("wishart rate multiplier must be positive");
    McarSpec spec;
    spec.likelihood = lik;
    spec.car = build_car(graph);
    spec.graph = std::move(graph);
    spec.n_diseases = n_diseases;
    spec.omega_prior.rate = r * Matrix::Identity(n_diseases, n_diseases);
    spec.omega_prior.df = df > 0 ? df : static_cast<double>(n_diseases);
    return spec;
}

void validate_state(const SanovaSpec& spec, const SanovaState& state) {
    if (state.theta.size() != spec.n_model_columns()) {
        throw std::invalid_argument("theta dimension mismatch");
    }
    if (state.tau.size() != spec.n_smoothing_groups()) {
        throw std::invalid_argument("tau dimension mismatch");
    }
    if ((state.tau.array() <= 0).any()) throw std::invalid_argument("tau must be positive");
    if (state.eta0 <= 0) throw std::invalid_argument("eta0 must be positive");
    if (!state.theta.allFinite()) throw std::invalid_argument("theta must be finite");
}

void validate_state(const McarSpec& spec, const McarState& state) {
    const int n = spec.n_diseases;
    if (state.beta.size() != n) throw std::invalid_argument("beta dimension mismatch");
    if (state.s.rows() != spec.n_regions() || state.s.cols() != n) {
        throw std::invalid_argument("S dimension mismatch");
    }
    if (state.eta0 <= 0) throw std::invalid_argument("eta0 must be positive");
    for (int j = 0; j < n; ++j) {
        if (std::abs(state.s.col(j).sum()) > 1e-8) {
            throw std::invalid_argument("S columns must sum to zero");
        }
    }
    Eigen::LLT<Matrix> llt(state.omega);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("omega must be positive definite");
    }
}

namespace {

void check_cell_data(const CellData& data, Likelihood lik, int cells) {
    if (data.y.size() != cells) throw std::invalid_argument("data dimension mismatch");
    if (lik == Likelihood::poisson) {
        if (data.expected.size() != cells) {
            throw std::invalid_argument("poisson data needs expected counts");
        }
        if ((data.expected.array() <= 0).any()) {
            throw std::invalid_argument("expected counts must be positive");
        }
        if ((data.y.array() < 0).any()) {
            throw std::invalid_argument("counts must be nonnegative");
        }
    }
}

}  // namespace

double log_likelihood(const SanovaSpec& spec, const SanovaState& state, const CellData& data) {
    const auto& design = spec.design;
    check_cell_data(data, spec.likelihood, design.n_cells());
    const Vector fit = design.X.leftCols(spec.n_model_columns()) * state.theta;
    double ll = 0.0;
    if (spec.likelihood == Likelihood::normal) {
        for (Eigen::Index c = 0; c < fit.size(); ++c) {
            ll += normal_log_pdf(data.y[c], fit[c], state.eta0);
        }
    } else {
        for (Eigen::Index c = 0; c < fit.size(); ++c) {
            ll += poisson_log_pmf(data.y[c], data.expected[c] * std::exp(fit[c]));
        }
    }
    return ll;
}

double log_likelihood(const McarSpec& spec, const McarState& state, const CellData& data) {
    const int n = spec.n_diseases;
    const int cells = spec.n_regions() * n;
    check_cell_data(data, spec.likelihood, cells);
    double ll = 0.0;
    for (int i = 0; i < spec.n_regions(); ++i) {
        for (int j = 0; j < n; ++j) {
            const int c = cell_index(i, j, n);
            const double lp = state.beta[j] + state.s(i, j);
            if (spec.likelihood == Likelihood::normal) {
                ll += normal_log_pdf(data.y[c], lp, state.eta0);
            } else {
                ll += poisson_log_pmf(data.y[c], data.expected[c] * std::exp(lp));
            }
        }
    }
    return ll;
}

double log_prior(const SanovaSpec& spec, const SanovaState& state) {
    validate_state(spec, state);
    const auto& design = spec.design;
    double lp = 0.0;

    if (spec.fixed_effect_prior == FixedEffectPrior::normal_wide) {
        for (int k = 0; k < design.n_fixed(); ++k) {
            lp += normal_log_pdf(state.theta[k], 0.0, 1.0 / kWideVariance);
        }
    }

    // Smoothed blocks: rank-deficient normal with precision tau_j * D^-.
    const Vector d_minus = design.car.contrast_eigenvalues();
    const int block = design.smoothed_block_size();
    for (int g = 0; g < spec.n_smoothing_groups(); ++g) {
        const double tau = state.tau[g];
        const auto theta_block = state.theta.segment(design.n_fixed() + g * block, block);
        for (int k = 0; k < block; ++k) {
            if (d_minus[k] <= 0) continue;  // extra-island null directions are flat
            const double prec = tau * d_minus[k];
            lp += 0.5 * (std::log(prec) - kLog2Pi) -
                  0.5 * prec * theta_block[k] * theta_block[k];
        }
        if (!spec.fixed_tau) lp += spec.tau_prior.log_density(tau);
    }

    if (spec.likelihood == Likelihood::normal && !spec.fixed_eta0) {
        lp += spec.eta0_prior.log_density(state.eta0);
    }
    return lp;
}

double log_prior(const McarSpec& spec, const McarState& state) {
    validate_state(spec, state);
    double lp = 0.0;

    // Separable MCAR kernel: |Omega|^{(N-G)/2} exp(-tr(Omega S'QS)/2).
    Eigen::LLT<Matrix> llt(state.omega);
    double log_det = 0.0;
    for (int i = 0; i < spec.n_diseases; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
    const Matrix cross = state.s.transpose() * spec.car.Q * state.s;
    lp += 0.5 * spec.car.rank() * log_det - 0.5 * (state.omega * cross).trace();

    lp += spec.omega_prior.log_kernel(state.omega);

    if (spec.beta_prior == FixedEffectPrior::normal_wide) {
        for (Eigen::Index j = 0; j < state.beta.size(); ++j) {
            lp += normal_log_pdf(state.beta[j], 0.0, 1.0 / kWideVariance);
        }
    }
    if (spec.likelihood == Likelihood::normal) {
        lp += spec.eta0_prior.log_density(state.eta0);
    }
    return lp;
}

}  // namespace sanova
