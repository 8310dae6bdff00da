#include "sanova/samplers.hpp"

#include "sanova/rng.hpp"
#include "sanova/run_io.hpp"
#include "sanova/simulation.hpp"

#include <doctest.h>

#include "test_util.hpp"

#include <cmath>
#include <sstream>

using namespace sanova;

namespace {

RunConfig quick_cfg(std::uint64_t seed, int iters = 4000, int burn = 1000) {
    RunConfig cfg;
    cfg.n_iter = iters;
    cfg.burn_in = burn;
    cfg.seed = seed;
    cfg.n_threads = 1;
    return cfg;
}

SanovaSpec path3_spec() {
    auto car = build_car(build_graph(3, {{0, 1}, {1, 2}}));
    return SanovaSpec::normal_model(build_design(car, make_contrasts("helmert", 2)));
}

}  // namespace

TEST_CASE("normal gibbs matches the closed-form posterior with fixed hyperparameters") {
    // With tau and eta0 held fixed the sweep draws theta i.i.d. from the exact
    // Gaussian posterior, so sample moments must match the closed form.
    auto spec = path3_spec();
    spec.fixed_tau = Vector::Constant(2, 2.5);
    spec.fixed_eta0 = 1.7;

    Rng data_rng(99);
    Vector y = data_rng.normal_vector(6, 2.0);

    RunConfig cfg = quick_cfg(2024, 5000, 0);
    auto draws = gibbs_sanova_normal(spec, y, cfg);
    const int total = draws.total_kept();
    CHECK(total == 15000);

    // Closed form: precision eta0 + p_k (diagonal), mean eta0 z / (eta0 + p_k).
    const Vector z = spec.design.X.transpose() * y;
    const Vector d = spec.design.car.contrast_eigenvalues();
    Vector prior_prec = Vector::Zero(6);
    prior_prec[2] = 2.5 * d[0];
    prior_prec[3] = 2.5 * d[1];
    prior_prec[4] = 2.5 * d[0];
    prior_prec[5] = 2.5 * d[1];

    const Matrix merged = draws.merged();
    for (int k = 0; k < 6; ++k) {
        const double cond_prec = 1.7 + prior_prec[k];
        const double mean = 1.7 * z[k] / cond_prec;
        const double sd = 1.0 / std::sqrt(cond_prec);
        const auto col = merged.col(k);
        const double mc_se = sd / std::sqrt(static_cast<double>(total));
        CHECK(std::abs(col.mean() - mean) < 3.0 * mc_se);
        const double sample_var = (col.array() - col.mean()).square().sum() / (total - 1);
        CHECK(sample_var == doctest::Approx(sd * sd).epsilon(0.10));
    }
    // Cross-coordinate posterior correlations are zero; sample ones are small.
    for (int a = 0; a < 6; ++a) {
        for (int b = a + 1; b < 6; ++b) {
            const auto ca = merged.col(a), cb = merged.col(b);
            const double cov =
                ((ca.array() - ca.mean()) * (cb.array() - cb.mean())).sum() / (total - 1);
            const double corr = cov / std::sqrt(((ca.array() - ca.mean()).square().sum() /
                                                 (total - 1)) *
                                                ((cb.array() - cb.mean()).square().sum() /
                                                 (total - 1)));
            CHECK(std::abs(corr) < 0.05);
        }
    }
}

TEST_CASE("huge fixed tau shrinks every smoothed block to zero") {
    auto spec = path3_spec();
    spec.fixed_tau = Vector::Constant(2, 1e8);
    Rng data_rng(7);
    Vector y = data_rng.normal_vector(6, 3.0);
    auto draws = gibbs_sanova_normal(spec, y, quick_cfg(11));
    const Matrix merged = draws.merged();
    for (int k = 2; k < 6; ++k) {
        Vector col = merged.col(k);
        const double med = quantile(col, 0.5);
        const double sd = std::sqrt((col.array() - col.mean()).square().mean());
        CHECK(std::abs(med) < 3.0 * sd + 1e-6);
    }
}

TEST_CASE("vague smoothing prior recovers ordinary least squares") {
    // Large true effects + Gamma(1e-8, 1e-8) smoothing priors: shrinkage is
    // negligible and E[theta | y] matches X'y (exact because X is orthogonal).
    auto spec = path3_spec();
    spec.tau_prior = GammaPrior{1e-8, 1e-8};
    spec.fixed_eta0 = 1.0;
    Rng data_rng(13);
    Vector theta_true(6);
    theta_true << 500.0, -300.0, 800.0, -650.0, 400.0, 700.0;
    Vector y = spec.design.X * theta_true + data_rng.normal_vector(6);
    auto draws = gibbs_sanova_normal(spec, y, quick_cfg(17, 6000, 1000));
    const Vector z = spec.design.X.transpose() * y;
    const Matrix merged = draws.merged();
    for (int k = 0; k < 6; ++k) {
        const double mc_se = 1.0 / std::sqrt(static_cast<double>(draws.total_kept()));
        CHECK(std::abs(merged.col(k).mean() - z[k]) < 5.0 * mc_se + 2e-3 * std::abs(z[k]));
    }
}

TEST_CASE("poisson sampler: counts equal to offsets imply flat fitted risks") {
    auto graph = load_adjacency(test_util::data_path("minnesota20.adj"));
    auto design = build_design(build_car(graph), make_contrasts("HA1"));
    auto spec = SanovaSpec::poisson_model(design);
    spec.fixed_tau = Vector::Constant(3, 1e8);  // strong smoothing
    Vector expected(60);
    Rng rng(3);
    for (int c = 0; c < 60; ++c) expected[c] = 20.0 + 10.0 * rng.uniform();
    Vector counts = expected.array().round();
    auto draws = mh_sanova_poisson(spec, counts, expected, quick_cfg(5));
    const Matrix cells = cell_draws(spec, draws);
    for (int c = 0; c < 60; ++c) {
        Vector col = cells.col(c);
        const double med = quantile(col, 0.5);
        const double sd = std::sqrt((col.array() - col.mean()).square().mean());
        CHECK(std::abs(med) < 3.0 * sd + 0.02);
    }
}

TEST_CASE("single isolated region: poisson posterior matches 1-D quadrature") {
    // One region, no neighbors: recentering folds everything into the
    // intercept, so the model is y ~ Poisson(E exp(beta)) with a N(0, 1e6)
    // prior.  Exact posterior by quadrature on beta.
    auto graph = build_graph(1, {});
    const double y = 30.0, e = 1.3;
    auto draws = fit_univariate_car(graph, Vector::Constant(1, y),
                                    Vector::Constant(1, e), GammaPrior{1.0, 1.0},
                                    quick_cfg(21, 20000, 2000));
    Vector beta = draws.pooled_column(draws.index_of("beta"));
    const double sampler_median = quantile(beta, 0.5);

    // Quadrature for the median of the posterior of beta.
    const double center = std::log(y / e);
    const double half_width = 8.0 / std::sqrt(y);
    const int grid = 20001;
    std::vector<double> cdf(grid), thetas(grid);
    double acc = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double t = center - half_width + 2.0 * half_width * i / (grid - 1);
        thetas[i] = t;
        const double log_post = y * t - e * std::exp(t) - t * t / 2e6;
        acc += std::exp(log_post - (y * center - e * std::exp(center)));
        cdf[i] = acc;
    }
    double quad_median = thetas.back();
    for (int i = 0; i < grid; ++i) {
        if (cdf[i] >= 0.5 * acc) {
            quad_median = thetas[i];
            break;
        }
    }
    CHECK(std::exp(sampler_median) ==
          doctest::Approx(std::exp(quad_median)).epsilon(0.02));
}

TEST_CASE("omega full conditional moments match nu * rate^{-1}") {
    auto spec = McarSpec::with_identity_rate(Likelihood::normal,
                                             build_graph(4, {{0, 1}, {1, 2}, {2, 3}}),
                                             2, 1.0);
    Matrix s(4, 2);
    s << 0.3, -0.1, -0.5, 0.4, 0.4, -0.6, -0.2, 0.3;
    for (int j = 0; j < 2; ++j) s.col(j).array() -= s.col(j).mean();

    const Matrix rate = mcar_omega_conditional_rate(spec, s);
    const double df = mcar_omega_conditional_df(spec);
    CHECK(df == doctest::Approx(2.0 + 3.0));  // nu = n = 2, N - G = 3

    const Matrix target = df * rate.inverse();
    Rng rng(31);
    const int n_draws = 40000;
    Matrix mean = Matrix::Zero(2, 2), second = Matrix::Zero(2, 2);
    for (int k = 0; k < n_draws; ++k) {
        Matrix w = rng.wishart(rate, df);
        mean += w;
        second += w.cwiseProduct(w);
    }
    mean /= n_draws;
    second /= n_draws;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double var = second(a, b) - mean(a, b) * mean(a, b);
            const double mc_se = std::sqrt(var / n_draws);
            CHECK(std::abs(mean(a, b) - target(a, b)) < 3.0 * mc_se);
        }
    }
}

TEST_CASE("mcar normal: centering, positivity, spd omega") {
    auto graph = load_adjacency(test_util::data_path("minnesota20.adj"));
    auto spec = McarSpec::with_identity_rate(Likelihood::normal, graph, 3, 1.0);
    Rng rng(41);
    Matrix y(20, 3);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 3; ++j) y(i, j) = 5.0 + rng.normal();
    auto draws = gibbs_mcar_normal(spec, y, quick_cfg(43, 600, 100));
    const Matrix merged = draws.merged();

    const int s0 = 3;  // s columns start after beta
    for (Eigen::Index r = 0; r < merged.rows(); ++r) {
        for (int j = 0; j < 3; ++j) {
            double colsum = 0.0;
            for (int i = 0; i < 20; ++i) colsum += merged(r, s0 + i * 3 + j);
            CHECK(std::abs(colsum) < 1e-10);
        }
        // omega upper triangle -> full matrix, check SPD via leading minors.
        Matrix omega(3, 3);
        int c = s0 + 60;
        for (int a = 0; a < 3; ++a) {
            for (int b = a; b < 3; ++b) {
                omega(a, b) = merged(r, c);
                omega(b, a) = merged(r, c);
                ++c;
            }
        }
        CHECK(omega(0, 0) > 0);
        CHECK(omega.topLeftCorner(2, 2).determinant() > 0);
        CHECK(omega.determinant() > 0);
        CHECK(merged(r, merged.cols() - 1) > 0);  // eta0
    }
}

TEST_CASE("mcar poisson: zero counts pull every fitted risk below 1") {
    auto graph = load_adjacency(test_util::data_path("minnesota20.adj"));
    auto spec = McarSpec::with_identity_rate(Likelihood::poisson, graph, 3, 1.0);
    Matrix counts = Matrix::Zero(20, 3);
    Matrix expected = Matrix::Ones(20, 3);
    auto draws = mh_mcar_poisson(spec, counts, expected, quick_cfg(47, 2000, 500));
    const Matrix cells = cell_draws(spec, draws);
    for (int c = 0; c < 60; ++c) {
        Vector col = cells.col(c);
        CHECK(std::exp(quantile(col, 0.5)) < 1.0);
    }
}

TEST_CASE("mcar with n = 1 agrees with an independent univariate sampler") {
    // Test-local Gibbs for the univariate normal CAR with tau ~ Gamma(1/2, r/2)
    // (the n = 1 reduction of the rate-parameterized Wishart), compared with
    // gibbs_mcar_normal posterior medians of the cell means.
    auto graph = build_graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
    const double r = 1.0;
    auto spec = McarSpec::with_identity_rate(Likelihood::normal, graph, 1, r, 1.0);
    Rng data_rng(53);
    Matrix y(6, 1);
    for (int i = 0; i < 6; ++i) y(i, 0) = 2.0 + std::sin(i * 1.1) + 0.3 * data_rng.normal();
    auto draws = gibbs_mcar_normal(spec, y, quick_cfg(57, 12000, 2000));
    const Matrix cells = cell_draws(spec, draws);

    // Independent implementation: site-wise Gibbs on the same model.
    auto car = build_car(graph);
    Rng rng(59);
    double beta = y.col(0).mean(), eta0 = 1.0, tau = 1.0;
    Vector s = Vector::Zero(6);
    const int iters = 30000, burn = 5000;
    Matrix fits = Matrix::Zero(iters - burn, 6);
    for (int iter = 0; iter < iters; ++iter) {
        beta = (y.col(0) - s).mean() + rng.normal() / std::sqrt(6.0 * eta0);
        for (int i = 0; i < 6; ++i) {
            double nb_sum = 0.0;
            for (int nb : graph.neighbors[i]) nb_sum += s[nb];
            const double prec = graph.degree(i) * tau + eta0;
            const double mean = (tau * nb_sum + eta0 * (y(i, 0) - beta)) / prec;
            s[i] = mean + rng.normal() / std::sqrt(prec);
        }
        const double shift = s.mean();
        s.array() -= shift;
        beta += shift;
        tau = rng.gamma(0.5 + 0.5 * car.rank(), r / 2.0 + 0.5 * s.dot(car.Q * s));
        double rss = 0.0;
        for (int i = 0; i < 6; ++i) rss += std::pow(y(i, 0) - beta - s[i], 2);
        eta0 = rng.gamma(0.1 + 3.0, 0.1 + 0.5 * rss);
        if (iter >= burn) {
            for (int i = 0; i < 6; ++i) fits(iter - burn, i) = beta + s[i];
        }
    }
    for (int i = 0; i < 6; ++i) {
        Vector a = cells.col(i);
        Vector b = fits.col(i);
        const double med_a = quantile(a, 0.5), med_b = quantile(b, 0.5);
        const double sd = std::sqrt((a.array() - a.mean()).square().mean());
        CHECK(std::abs(med_a - med_b) < 0.1 * sd + 0.02);
    }
}

TEST_CASE("univariate car: stronger gamma prior smooths more") {
    auto graph = load_adjacency(test_util::data_path("minnesota20.adj"));
    Rng rng(61);
    Vector expected(20), counts(20);
    for (int i = 0; i < 20; ++i) {
        expected[i] = 40.0;
        counts[i] = static_cast<double>(rng.poisson(40.0 * std::exp(0.5 * rng.normal())));
    }
    auto loose = fit_univariate_car(graph, counts, expected, GammaPrior{0.001, 0.001},
                                    quick_cfg(67, 3000, 1000));
    auto tight = fit_univariate_car(graph, counts, expected, GammaPrior{1000.0, 1000.0},
                                    quick_cfg(67, 3000, 1000));
    auto mean_sd = [](const PosteriorDraws& d) {
        double total = 0.0;
        for (int i = 0; i < 20; ++i) {
            Vector col = d.pooled_column(i + 1);  // s[i]
            total += std::sqrt((col.array() - col.mean()).square().mean());
        }
        return total / 20.0;
    };
    CHECK(mean_sd(tight) < mean_sd(loose));
}

TEST_CASE("gelman-rubin conventions") {
    PosteriorDraws draws;
    draws.names = {"x"};
    Rng rng(71);
    Matrix chain(200, 1);
    for (int i = 0; i < 200; ++i) chain(i, 0) = rng.normal();
    draws.chains = {chain, chain, chain};  // identical chains
    draws.loglik.assign(3, Vector::Zero(200));
    CHECK(gelman_rubin(draws)[0] == 1.0);

    Matrix shifted = chain.array() + 100.0;
    draws.chains = {chain, shifted};
    draws.loglik.assign(2, Vector::Zero(200));
    CHECK(gelman_rubin(draws)[0] > 5.0);

    draws.chains = {Matrix::Zero(50, 1), Matrix::Zero(50, 1)};  // constant parameter
    draws.loglik.assign(2, Vector::Zero(50));
    CHECK(gelman_rubin(draws)[0] == 1.0);
}

TEST_CASE("normal sanova mixes on Data1-style data") {
    auto graph = load_adjacency(test_util::data_path("minnesota20.adj"));
    auto design = build_design(build_car(graph), make_contrasts("HA1"));
    auto subjects = generate_subjects(101, 1, Likelihood::normal, design.car, 3);
    auto data = make_dataset(subjects[0], DesignCell::by_name("Data1"), design, Vector(), 0);
    auto spec = SanovaSpec::normal_model(design);
    auto draws = gibbs_sanova_normal(spec, data.y, quick_cfg(103));
    const Vector rhat = gelman_rubin(draws);
    for (int p = 0; p < rhat.size(); ++p) CHECK(rhat[p] < 1.1);
}

TEST_CASE("identical seeds give bit-identical draws and files") {
    auto spec = path3_spec();
    Rng data_rng(107);
    Vector y = data_rng.normal_vector(6);
    auto cfg = quick_cfg(109, 500, 100);
    auto a = gibbs_sanova_normal(spec, y, cfg);
    auto b = gibbs_sanova_normal(spec, y, cfg);
    for (int c = 0; c < a.n_chains(); ++c) {
        CHECK((a.chains[c] - b.chains[c]).cwiseAbs().maxCoeff() == 0.0);
    }
    std::ostringstream fa, fb;
    write_draws(fa, a);
    write_draws(fb, b);
    CHECK(fa.str() == fb.str());

    // Different seed changes the stream.
    cfg.seed = 110;
    auto c2 = gibbs_sanova_normal(spec, y, cfg);
    CHECK((a.chains[0] - c2.chains[0]).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("run config validation") {
    RunConfig cfg;
    cfg.n_chains = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = RunConfig{};
    cfg.burn_in = cfg.n_iter;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK(RunConfig::paper_preset(1).kept_per_chain() == 8000);
    CHECK(RunConfig::reduced_preset(1).kept_per_chain() == 3000);
}
