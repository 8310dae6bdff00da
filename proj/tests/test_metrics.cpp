#include "sanova/metrics.hpp"

#include "sanova/draws.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace sanova;

namespace {

// Reference quantile: sort + linear interpolation, written out longhand.
double reference_quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = p * (v.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(h));
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

}  // namespace

TEST_CASE("amse basics") {
    Matrix truths = Matrix::Zero(2, 3);
    CHECK(amse(truths, truths).amse == 0.0);
    CHECK(amse(truths, truths).mcse == 0.0);

    Matrix ones = Matrix::Ones(2, 3);
    auto r = amse(ones, truths);
    CHECK(r.amse == doctest::Approx(1.0));
    CHECK(r.mcse == doctest::Approx(0.0));

    // Per-replicate MSEs 0.1, 0.2, 0.3 by hand.
    Matrix est(3, 1), tru = Matrix::Zero(3, 1);
    est << std::sqrt(0.1), std::sqrt(0.2), std::sqrt(0.3);
    auto h = amse(est, tru);
    CHECK(h.amse == doctest::Approx(0.2).epsilon(1e-12));
    const double sd =
        std::sqrt(((0.1 - 0.2) * (0.1 - 0.2) + 0.0 + (0.3 - 0.2) * (0.3 - 0.2)) / 2.0);
    CHECK(h.mcse == doctest::Approx(sd / std::sqrt(3.0)).epsilon(1e-12));

    CHECK_THROWS_AS(amse(Matrix::Zero(1, 3), Matrix::Zero(1, 3)), std::invalid_argument);
    CHECK_THROWS_AS(amse(Matrix::Zero(2, 3), Matrix::Zero(2, 4)), std::invalid_argument);
}

TEST_CASE("amse is invariant to replicate order") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> norm(0.0, 1.0);
    Matrix est(5, 4), tru(5, 4);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 4; ++j) est(i, j) = norm(rng), tru(i, j) = norm(rng);
    auto base = amse(est, tru);
    Matrix est2 = est, tru2 = tru;
    est2.row(0).swap(est2.row(3));
    tru2.row(0).swap(tru2.row(3));
    est2.row(1).swap(est2.row(4));
    tru2.row(1).swap(tru2.row(4));
    auto permuted = amse(est2, tru2);
    CHECK(base.amse == doctest::Approx(permuted.amse).epsilon(1e-13));
    CHECK(base.mcse == doctest::Approx(permuted.mcse).epsilon(1e-13));
}

TEST_CASE("mbias basics and the percentile oracle") {
    Matrix truths = Matrix::Zero(4, 10);
    auto zero = mbias(truths, truths);
    CHECK(zero.p025 == 0.0);
    CHECK(zero.p50 == 0.0);
    CHECK(zero.p975 == 0.0);

    const double c = 0.37;
    auto constant = mbias(Matrix::Constant(4, 10, c), truths);
    CHECK(constant.p025 == doctest::Approx(c));
    CHECK(constant.p50 == doctest::Approx(c));
    CHECK(constant.p975 == doctest::Approx(c));

    // Biases 1..60 scaled: percentiles must match the reference
    // interpolation oracle.
    Matrix est(1, 60), tru = Matrix::Zero(1, 60);
    std::vector<double> biases;
    for (int k = 0; k < 60; ++k) {
        est(0, k) = 0.01 * (k + 1);
        biases.push_back(est(0, k));
    }
    auto r = mbias(est, tru);
    CHECK(r.p025 == doctest::Approx(reference_quantile(biases, 0.025)).epsilon(1e-12));
    CHECK(r.p50 == doctest::Approx(reference_quantile(biases, 0.5)).epsilon(1e-12));
    CHECK(r.p975 == doctest::Approx(reference_quantile(biases, 0.975)).epsilon(1e-12));
}

TEST_CASE("mbias percentiles are invariant to cell permutation") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> norm(0.0, 1.0);
    Matrix est(3, 7), tru(3, 7);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 7; ++j) est(i, j) = norm(rng), tru(i, j) = norm(rng);
    auto base = mbias(est, tru);
    Matrix est2 = est, tru2 = tru;
    est2.col(0).swap(est2.col(6));
    tru2.col(0).swap(tru2.col(6));
    auto permuted = mbias(est2, tru2);
    CHECK(base.p025 == doctest::Approx(permuted.p025).epsilon(1e-13));
    CHECK(base.p50 == doctest::Approx(permuted.p50).epsilon(1e-13));
    CHECK(base.p975 == doctest::Approx(permuted.p975).epsilon(1e-13));
}

TEST_CASE("pi_rate") {
    Matrix truths = Matrix::Zero(2, 5);
    Matrix wide_lo = Matrix::Constant(2, 5, -1e300);
    Matrix wide_hi = Matrix::Constant(2, 5, 1e300);
    CHECK(pi_rate(wide_lo, wide_hi, truths) == 1.0);

    // Degenerate intervals excluding the truth everywhere.
    Matrix lo = Matrix::Constant(2, 5, 2.0), hi = Matrix::Constant(2, 5, 3.0);
    CHECK(pi_rate(lo, hi, truths) == 0.0);

    // Half covered.
    Matrix half_lo(1, 2), half_hi(1, 2), t(1, 2);
    half_lo << -1.0, 1.0;
    half_hi << 1.0, 2.0;
    t << 0.0, 0.0;
    CHECK(pi_rate(half_lo, half_hi, t) == doctest::Approx(0.5));

    CHECK_THROWS_AS(pi_rate(hi, lo, truths), std::invalid_argument);
}

TEST_CASE("dic identity and edge cases") {
    Vector ll = Vector::Constant(100, -12.5);
    // Point-mass posterior: pd = 0, dic = dbar.
    auto point = dic(ll, -12.5);
    CHECK(point.pd == doctest::Approx(0.0));
    CHECK(point.dic == doctest::Approx(point.dbar));
    CHECK(point.dbar == doctest::Approx(25.0));

    std::mt19937_64 rng(3);
    std::normal_distribution<double> norm(0.0, 1.0);
    Vector noisy(200);
    for (int i = 0; i < 200; ++i) noisy[i] = -30.0 + norm(rng);
    auto r = dic(noisy, -29.0);
    CHECK(r.dic == r.dbar + r.pd);  // exact identity by construction
    CHECK(r.dbar == doctest::Approx((-2.0 * noisy.array()).mean()));

    CHECK_THROWS_AS(dic(Vector::Constant(5, -1.0), -1.0), std::invalid_argument);
}

TEST_CASE("quantile conventions") {
    Vector v(4);
    v << 4.0, 1.0, 3.0, 2.0;
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 1.0) == 4.0);
    CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
    CHECK(quantile(Vector::Constant(1, 7.0), 0.5) == 7.0);
    CHECK_THROWS_AS(quantile(Vector(), 0.5), std::invalid_argument);
    CHECK_THROWS_AS(quantile(v, 1.5), std::invalid_argument);
}
