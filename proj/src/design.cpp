#include "sanova/design.hpp"

#include <cmath>

namespace sanova {

Matrix kronecker(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

int SanovaDesign::smoothing_group(int col) const {
    if (col < n_fixed()) return -1;
    return (col - n_fixed()) / smoothed_block_size();
}

SanovaDesign build_design(const CarStructure& car, const ContrastMatrix& contrasts) {
    const int n_regions = car.n_regions();
    const int n = contrasts.n();
    if (n_regions < 2) throw std::invalid_argument("design needs at least 2 regions");
    if (n < 2) throw std::invalid_argument("design needs at least 2 diseases");

    const int cells = n_regions * n;
    const Matrix v_minus = car.contrast_eigenvectors();
    const Vector h0 = contrasts.first_column();  // (1/sqrt(n)) 1 for the standard layout
    const Matrix h_ca = contrasts.contrast_columns();

    // The design is V kron H_plus with columns reordered into ANOVA blocks:
    // grand mean v_N kron h0, disease mains v_N kron h_j, region mains
    // V^- kron h0, interactions V^- kron h_j.  With h0 = (1/sqrt(n)) 1 the
    // first column is the constant (1/sqrt(Nn)) 1; a variant H_plus with no
    // column proportional to 1 simply replaces h0 throughout.
    Matrix x(cells, cells);
    int col = 0;
    const double inv_sqrt_regions = 1.0 / std::sqrt(static_cast<double>(n_regions));
    for (int i = 0; i < n_regions; ++i) {
        x.block(i * n, col, n, 1) = inv_sqrt_regions * h0;
    }
    ++col;

    for (int j = 0; j < n - 1; ++j, ++col) {
        for (int i = 0; i < n_regions; ++i) {
            x.block(i * n, col, n, 1) = inv_sqrt_regions * h_ca.col(j);
        }
    }

    for (int k = 0; k < n_regions - 1; ++k, ++col) {
        for (int i = 0; i < n_regions; ++i) {
            x.block(i * n, col, n, 1) = v_minus(i, k) * h0;
        }
    }

    for (int j = 0; j < n - 1; ++j) {
        for (int k = 0; k < n_regions - 1; ++k, ++col) {
            for (int i = 0; i < n_regions; ++i) {
                x.block(i * n, col, n, 1) = v_minus(i, k) * h_ca.col(j);
            }
        }
    }

    SanovaDesign design;
    design.X = std::move(x);
    design.car = car;
    design.contrasts = contrasts;
    return design;
}

Matrix induced_phi_precision(const CarStructure& car, const ContrastMatrix& contrasts,
                             const Vector& tau) {
    if (tau.size() != contrasts.n()) throw std::invalid_argument("tau must have length n");
    if ((tau.array() <= 0).any()) throw std::invalid_argument("tau entries must be positive");
    const Matrix middle =
        contrasts.h_plus * tau.asDiagonal() * contrasts.h_plus.transpose();
    return kronecker(car.Q, middle);
}

Matrix induced_phi_precision_by_propagation(const SanovaDesign& design, const Vector& tau) {
    const int block = design.smoothed_block_size();
    const int n = design.n_diseases();
    if (tau.size() != n) throw std::invalid_argument("tau must have length n");
    const Matrix k_cols = design.X.rightCols(n * block);
    const Vector d_minus = design.car.contrast_eigenvalues();
    Vector prior_diag(n * block);
    for (int j = 0; j < n; ++j) prior_diag.segment(j * block, block) = tau[j] * d_minus;
    return k_cols * prior_diag.asDiagonal() * k_cols.transpose();
}

}  // namespace sanova
