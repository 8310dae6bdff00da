#pragma once

#include "sanova/common.hpp"
#include "sanova/graph.hpp"

namespace sanova {

// Intrinsic CAR structure for a region graph: the precision matrix
// Q (Q_ii = m_i, Q_ij = -1 for neighbors, alpha fixed at 1), its spectral
// factors Q = V diag(d) V', and the island count G.
//
// Eigenvalues are sorted in descending order so the G zero eigenvalues occupy
// the last G positions; the last column of V is exactly (1/sqrt(N)) 1.  Each
// eigenvector has its first nonzero entry forced positive so the Theta
// parameterization is reproducible across runs.
struct CarStructure {
    Matrix Q;
    Matrix V;            // orthogonal, columns are eigenvectors of Q
    Vector eigenvalues;  // descending, last G entries are exact zeros
    int islands = 1;
    double alpha = 1.0;

    int n_regions() const { return static_cast<int>(eigenvalues.size()); }
    int rank() const { return n_regions() - islands; }

    // V without its last column (the scaled 1 vector): N x (N-1).
    Matrix contrast_eigenvectors() const { return V.leftCols(n_regions() - 1); }
    // Eigenvalues matching contrast_eigenvectors(): length N-1.
    Vector contrast_eigenvalues() const { return eigenvalues.head(n_regions() - 1); }
};

// Q from the neighbor structure.  Isolated regions give zero rows.
Matrix car_precision(const RegionGraph& graph);

// Spectral decomposition of a CAR precision matrix with known island count.
// Throws if the numeric nullity of Q disagrees with G.
CarStructure spectral_car(const Matrix& Q, int islands);

// Convenience: car_precision + count_islands + spectral_car.
CarStructure build_car(const RegionGraph& graph);

// Log kernel of the intrinsic CAR density: (N*/2) log tau - (tau/2) phi'Q phi
// with N* = N - G.  Normalizing constants that do not involve tau or phi are
// dropped.
double car_log_kernel(const CarStructure& car, const Vector& phi, double tau);

}  // namespace sanova
