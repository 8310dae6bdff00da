#include "sanova/models.hpp"

#include <doctest.h>

#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace sanova;

namespace {

SanovaSpec toy_normal_spec(int n_regions = 3, int n = 2) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n_regions; ++i) edges.emplace_back(i, i + 1);
    auto car = build_car(build_graph(n_regions, edges));
    return SanovaSpec::normal_model(build_design(car, make_contrasts("helmert", n)));
}

// Textbook Wishart log density in the rate parameterization, written
// independently of WishartPrior::log_kernel (full normalizing constant).
double wishart_log_density(const Matrix& omega, const Matrix& rate, double df) {
    const int p = static_cast<int>(rate.rows());
    const double half_df = 0.5 * df;
    double log_gamma_p = 0.25 * p * (p - 1) * std::log(M_PI);
    for (int i = 0; i < p; ++i) log_gamma_p += std::lgamma(half_df - 0.5 * i);
    const double log_det_rate = std::log(rate.determinant());
    const double log_det_omega = std::log(omega.determinant());
    return half_df * log_det_rate - half_df * p * std::log(2.0) - log_gamma_p +
           0.5 * (df - p - 1.0) * log_det_omega - 0.5 * (rate * omega).trace();
}

}  // namespace

TEST_CASE("normal log likelihood with zero residuals") {
    auto graph = load_adjacency(test_util::data_path("minnesota20.adj"));
    auto spec = SanovaSpec::normal_model(build_design(build_car(graph), make_contrasts("HA1")));
    SanovaState state;
    state.theta = Vector::Zero(60);
    state.tau = Vector::Ones(3);
    state.eta0 = 1.0;
    CellData data;
    data.y = Vector::Zero(60);
    const double ll = log_likelihood(spec, state, data);
    CHECK(ll == doctest::Approx(-30.0 * std::log(2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("poisson log likelihood closed forms") {
    auto spec = toy_normal_spec(2, 2);
    spec.likelihood = Likelihood::poisson;
    spec.fixed_effect_prior = FixedEffectPrior::normal_wide;
    SanovaState state;
    state.theta = Vector::Zero(4);
    state.tau = Vector::Ones(2);

    // Single-cell checks against the closed form -mu + y log mu - log y!.
    CellData data;
    data.y = Vector::Zero(4);
    data.expected = Vector::Ones(4);
    // y = 0, E = 1, linear predictor 0 in every cell: each contributes -1.
    CHECK(log_likelihood(spec, state, data) == doctest::Approx(-4.0).epsilon(1e-12));

    data.y << 3, 0, 0, 0;
    data.expected << 2, 1, 1, 1;
    const double expected_ll = (3.0 * std::log(2.0) - 2.0 - std::log(6.0)) - 3.0;
    CHECK(log_likelihood(spec, state, data) == doctest::Approx(expected_ll).epsilon(1e-12));
}

TEST_CASE("poisson data validation") {
    auto spec = toy_normal_spec(2, 2);
    spec.likelihood = Likelihood::poisson;
    SanovaState state;
    state.theta = Vector::Zero(4);
    state.tau = Vector::Ones(2);
    CellData bad_e;
    bad_e.y = Vector::Zero(4);
    bad_e.expected = Vector::Zero(4);
    CHECK_THROWS_AS(log_likelihood(spec, state, bad_e), std::invalid_argument);
    CellData bad_y;
    bad_y.y = Vector::Constant(4, -1.0);
    bad_y.expected = Vector::Ones(4);
    CHECK_THROWS_AS(log_likelihood(spec, state, bad_y), std::invalid_argument);
}

TEST_CASE("gamma prior closed form at tau = 1") {
    GammaPrior prior;  // 0.1, 0.1
    const double expected = 0.1 * std::log(0.1) - std::lgamma(0.1) - 0.1;
    CHECK(prior.log_density(1.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK_THROWS_AS(prior.log_density(0.0), std::invalid_argument);
}

TEST_CASE("CAR quadratic contribution vanishes at theta = 0") {
    auto spec = toy_normal_spec(4, 2);
    SanovaState state;
    state.theta = Vector::Zero(spec.n_model_columns());
    state.tau = Vector::Constant(2, 3.7);
    state.eta0 = 1.0;
    const double lp = log_prior(spec, state);
    // Quadratic term is exactly zero, so only normalizers and hyperpriors
    // remain: (1/2) sum log(tau d_k) - (rank/2) log 2pi per block + Gamma terms.
    const Vector d = spec.design.car.contrast_eigenvalues();
    double expected = 0.0;
    for (int g = 0; g < 2; ++g) {
        for (int k = 0; k < d.size(); ++k) {
            expected += 0.5 * (std::log(state.tau[g] * d[k]) - std::log(2.0 * M_PI));
        }
        expected += spec.tau_prior.log_density(state.tau[g]);
    }
    expected += spec.eta0_prior.log_density(1.0);
    CHECK(lp == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("wishart kernel matches an independent density routine") {
    WishartPrior prior;
    prior.rate = Matrix::Identity(3, 3);
    prior.df = 3.0;
    const Matrix omega = Matrix::Identity(3, 3);
    // At Omega = I, R = I, nu = n = 3 the kernel is -trace(I)/2 = -3/2.
    CHECK(prior.log_kernel(omega) == doctest::Approx(-1.5).epsilon(1e-12));

    // Kernel differences equal full-density differences (constants cancel).
    std::mt19937_64 rng(11);
    std::normal_distribution<double> norm(0.0, 1.0);
    Matrix a(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = norm(rng);
    const Matrix omega2 = a * a.transpose() + 0.25 * Matrix::Identity(3, 3);
    Matrix r2(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r2(i, j) = norm(rng);
    WishartPrior prior2{r2 * r2.transpose() + Matrix::Identity(3, 3), 5.0};
    const double kernel_diff = prior2.log_kernel(omega2) - prior2.log_kernel(omega);
    const double full_diff = wishart_log_density(omega2, prior2.rate, prior2.df) -
                             wishart_log_density(omega, prior2.rate, prior2.df);
    CHECK(kernel_diff == doctest::Approx(full_diff).epsilon(1e-10));
}

TEST_CASE("n = 1 wishart presets reduce to the published gammas") {
    // With p = 1 the rate-parameterized Wishart(R, 1) is Gamma(1/2, R/2):
    // R in {0.002, 1, 200} gives rates {0.001, 0.5, 100}.
    for (double r : {0.002, 1.0, 200.0}) {
        WishartPrior prior{Matrix::Constant(1, 1, r), 1.0};
        GammaPrior gamma{0.5, r / 2.0};
        const double x1 = 0.7, x2 = 2.9;
        Matrix w1 = Matrix::Constant(1, 1, x1), w2 = Matrix::Constant(1, 1, x2);
        const double kernel_diff = prior.log_kernel(w2) - prior.log_kernel(w1);
        const double gamma_diff = gamma.log_density(x2) - gamma.log_density(x1);
        CHECK(kernel_diff == doctest::Approx(gamma_diff).epsilon(1e-10));
    }
}

TEST_CASE("flat fixed effects make the prior invariant to grand-mean shifts") {
    auto spec = toy_normal_spec(4, 2);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> norm(0.0, 1.0);
    SanovaState state;
    state.theta = Vector::Zero(spec.n_model_columns());
    for (int k = 0; k < state.theta.size(); ++k) state.theta[k] = norm(rng);
    state.tau = Vector::Constant(2, 1.3);
    state.eta0 = 0.8;
    const double before = log_prior(spec, state);
    state.theta[0] += 1234.5;  // grand mean coordinate
    CHECK(log_prior(spec, state) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("MCAR prior exponent on |Omega| is (N - G)/2") {
    // Two 4-region graphs, same quadratic form at S = 0 but different island
    // counts: the prior difference is -(G_a - G_b)/2 * log|Omega|.
    auto spec_a = McarSpec::with_identity_rate(Likelihood::normal,
                                               build_graph(4, {{0, 1}, {2, 3}}), 2, 1.0);
    auto spec_b = McarSpec::with_identity_rate(
        Likelihood::normal, build_graph(4, {{0, 1}, {1, 2}, {2, 3}}), 2, 1.0);
    CHECK(spec_a.car.islands == 2);
    CHECK(spec_b.car.islands == 1);

    McarState state;
    state.beta = Vector::Zero(2);
    state.s = Matrix::Zero(4, 2);
    state.omega = Matrix::Identity(2, 2) * 3.0;  // determinant 9
    state.eta0 = 1.0;
    const double diff = log_prior(spec_a, state) - log_prior(spec_b, state);
    CHECK(diff == doctest::Approx(-0.5 * std::log(9.0)).epsilon(1e-10));
}

TEST_CASE("log prior + log likelihood finite on valid states") {
    auto spec = toy_normal_spec(5, 3);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> norm(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        SanovaState state;
        state.theta = Vector::Zero(spec.n_model_columns());
        for (int k = 0; k < state.theta.size(); ++k) state.theta[k] = 3.0 * norm(rng);
        state.tau = Vector::Constant(3, std::exp(norm(rng)));
        state.eta0 = std::exp(norm(rng));
        CellData data;
        data.y = Vector::Zero(spec.design.n_cells());
        for (int c = 0; c < data.y.size(); ++c) data.y[c] = norm(rng);
        CHECK(std::isfinite(log_prior(spec, state)));
        CHECK(std::isfinite(log_likelihood(spec, state, data)));
    }
}

TEST_CASE("state validation rejects nonpositive precisions") {
    auto spec = toy_normal_spec(3, 2);
    SanovaState state;
    state.theta = Vector::Zero(spec.n_model_columns());
    state.tau = Vector::Constant(2, -1.0);
    state.eta0 = 1.0;
    CHECK_THROWS_AS(log_prior(spec, state), std::invalid_argument);
    state.tau = Vector::Ones(2);
    state.eta0 = 0.0;
    CHECK_THROWS_AS(log_prior(spec, state), std::invalid_argument);

    auto mspec = McarSpec::with_identity_rate(Likelihood::normal,
                                              build_graph(3, {{0, 1}, {1, 2}}), 2, 1.0);
    McarState mstate;
    mstate.beta = Vector::Zero(2);
    mstate.s = Matrix::Ones(3, 2);  // violates the centering constraint
    mstate.omega = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(log_prior(mspec, mstate), std::invalid_argument);
}
