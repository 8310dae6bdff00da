#include "sanova/rng.hpp"

#include <Eigen/Cholesky>

namespace sanova {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t state = master;
    std::uint64_t mixed = splitmix64(state);
    state = mixed ^ (stream + 0x9e3779b97f4a7c15ULL);
    return splitmix64(state);
}

Matrix Rng::wishart(const Matrix& rate, double df) {
    const auto p = rate.rows();
    if (rate.cols() != p) throw std::invalid_argument("wishart rate matrix must be square");
    if (df < static_cast<double>(p)) {
        throw std::invalid_argument("wishart degrees of freedom must be >= dimension");
    }
    Eigen::LLT<Matrix> llt(rate);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("wishart rate matrix must be positive definite");
    }
    // scale = rate^{-1} = (L L')^{-1}; with M = L'^{-1}, scale = M M'.
    Matrix m = llt.matrixL()
                   .transpose()
                   .solve(Matrix::Identity(p, p));
    Matrix bartlett = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        bartlett(i, i) = std::sqrt(chi_squared(df - static_cast<double>(i)));
        for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = normal();
    }
    Matrix half = m * bartlett;
    return half * half.transpose();
}

}  // namespace sanova
