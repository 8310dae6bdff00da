#pragma once

#include "sanova/car.hpp"
#include "sanova/common.hpp"
#include "sanova/contrasts.hpp"

namespace sanova {

// The orthonormal two-way design for n diseases crossed with N regions,
// partitioned column-wise as
//
//   [ grand mean | disease main (n-1) | region main (N-1) | interactions (N-1)(n-1) ]
//
// Region main columns are V^- kron (1/sqrt(n)) 1_n; interaction group j is
// V^- kron h_j where h_j is the j-th contrast column of H_plus.  The matrix is
// square (Nn x Nn) and orthogonal.
struct SanovaDesign {
    Matrix X;  // Nn x Nn, orthogonal
    CarStructure car;
    ContrastMatrix contrasts;

    int n_regions() const { return car.n_regions(); }
    int n_diseases() const { return contrasts.n(); }
    int n_cells() const { return n_regions() * n_diseases(); }

    // Column offsets of the four blocks.
    int grand_mean_col() const { return 0; }
    int disease_main_col() const { return 1; }
    int region_main_col() const { return n_diseases(); }
    int interaction_col(int j) const {  // group j = 1..n-1
        return n_diseases() + (n_regions() - 1) * j;
    }

    // Width of each smoothed block (region main and each interaction group).
    int smoothed_block_size() const { return n_regions() - 1; }
    int n_fixed() const { return n_diseases(); }  // grand mean + disease mains

    // Smoothing-precision index for column c: -1 for fixed-effect columns,
    // 0 for the region main block, j for interaction group j.
    int smoothing_group(int col) const;
};

Matrix kronecker(const Matrix& a, const Matrix& b);

SanovaDesign build_design(const CarStructure& car, const ContrastMatrix& contrasts);

// Prior precision induced on phi = X * Theta by the smoothing priors
// Theta_block_j ~ N(0, (tau_j D^-)^{-1}):  Q kron (H_plus diag(tau) H_plus').
// tau has length n: tau[0] for the region main block, tau[j] for interaction
// group j.
Matrix induced_phi_precision(const CarStructure& car, const ContrastMatrix& contrasts,
                             const Vector& tau);

// The same matrix assembled the long way, by propagating the block-diagonal
// Theta prior precision through the smoothed design columns:
// K blockdiag(tau_j D^-) K'.  Kept as an independent route for verification.
Matrix induced_phi_precision_by_propagation(const SanovaDesign& design, const Vector& tau);

}  // namespace sanova
