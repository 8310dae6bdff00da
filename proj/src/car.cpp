#include "sanova/car.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace sanova {

Matrix car_precision(const RegionGraph& graph) {
    const int n = graph.n_regions;
    Matrix q = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        q(i, i) = graph.degree(i);
        for (int j : graph.neighbors[i]) q(i, j) = -1.0;
    }
    return q;
}

namespace {

// Force the first entry with |v_i| > tol to be positive.
void fix_sign(Eigen::Ref<Vector> v) {
    const double tol = 1e-12 * v.norm();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > tol) {
            if (v[i] < 0) v = -v;
            return;
        }
    }
}

}  // namespace

CarStructure spectral_car(const Matrix& Q, int islands) {
    const int n = static_cast<int>(Q.rows());
    if (Q.cols() != n) throw std::invalid_argument("Q must be square");
    if (islands < 1 || islands > n) throw std::invalid_argument("island count out of range");
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + Q.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("Q must be symmetric");
    }

    Eigen::SelfAdjointEigenSolver<Matrix> eig(Q);
    if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

    // Ascending from Eigen; flip to descending so zeros land at the end.
    Vector d = eig.eigenvalues().reverse();
    Matrix v = eig.eigenvectors().rowwise().reverse();

    const double zero_tol = 1e-8 * std::max(1e-300, d.cwiseAbs().maxCoeff());
    int nullity = 0;
    for (Eigen::Index k = 0; k < d.size(); ++k) {
        if (std::abs(d[k]) < zero_tol) ++nullity;
    }
    if (nullity != islands) {
        throw std::runtime_error("numeric nullity " + std::to_string(nullity) +
                                 " does not match island count " + std::to_string(islands));
    }
    d.tail(islands).setZero();

    // Install the exact (1/sqrt(N)) 1 vector as the right-most null column and
    // re-orthonormalize the remaining null columns against it.
    const Matrix null_block = v.rightCols(islands);
    std::vector<Vector> basis;
    basis.push_back(Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))));
    for (int k = 0; k < islands && static_cast<int>(basis.size()) < islands; ++k) {
        Vector cand = null_block.col(k);
        for (const Vector& b : basis) cand -= b.dot(cand) * b;
        const double norm = cand.norm();
        if (norm > 1e-8) basis.push_back(cand / norm);
    }
    if (static_cast<int>(basis.size()) != islands) {
        throw std::runtime_error("failed to re-orthonormalize null space");
    }
    for (int k = 0; k < islands; ++k) {
        v.col(n - 1 - k) = basis[static_cast<size_t>(k)];
    }

    for (Eigen::Index k = 0; k < v.cols(); ++k) fix_sign(v.col(k));

    CarStructure car;
    car.Q = Q;
    car.V = std::move(v);
    car.eigenvalues = std::move(d);
    car.islands = islands;
    return car;
}

CarStructure build_car(const RegionGraph& graph) {
    return spectral_car(car_precision(graph), count_islands(graph));
}

double car_log_kernel(const CarStructure& car, const Vector& phi, double tau) {
    if (phi.size() != car.n_regions()) throw std::invalid_argument("phi dimension mismatch");
    if (tau <= 0) throw std::invalid_argument("tau must be positive");
    const double quad = phi.dot(car.Q * phi);
    return 0.5 * car.rank() * std::log(tau) - 0.5 * tau * quad;
}

}  // namespace sanova
