#pragma once

#include "sanova/common.hpp"

#include <cstdint>
#include <random>

namespace sanova {

// Stream seeds are derived from the master seed with splitmix64 so chains and
// simulation tasks get independent, reproducible generators regardless of
// scheduling.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double normal(double mean = 0.0, double sd = 1.0) {
        return std::normal_distribution<double>(mean, sd)(engine_);
    }
    // Shape-rate parameterization (mean shape/rate).
    double gamma(double shape, double rate) {
        return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
    }
    double chi_squared(double df) { return gamma(0.5 * df, 0.5); }
    long poisson(double mean) { return std::poisson_distribution<long>(mean)(engine_); }

    Vector normal_vector(Eigen::Index n, double sd = 1.0) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(0.0, sd);
        return v;
    }

    // Wishart draw in the rate parameterization used throughout: density
    // proportional to |W|^{(df-p-1)/2} exp(-tr(rate W)/2), so E(W) = df * rate^{-1}.
    // Bartlett construction on the scale matrix rate^{-1}.
    Matrix wishart(const Matrix& rate, double df);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace sanova
