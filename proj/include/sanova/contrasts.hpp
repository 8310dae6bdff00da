#pragma once

#include "sanova/common.hpp"

namespace sanova {

// An n x n orthogonal matrix H_plus whose first column is (1/sqrt(n)) 1 and
// whose remaining columns are between-disease contrasts.  The named 3x3
// variants HA1/HA2 are exactly orthogonal; HAM is a published 2-decimal
// matrix with no column proportional to 1, re-orthonormalized via its polar
// factor before use (max_adjustment records the largest entry change).
struct ContrastMatrix {
    std::string name;
    Matrix h_plus;
    double max_adjustment = 0.0;

    int n() const { return static_cast<int>(h_plus.rows()); }
    Vector first_column() const { return h_plus.col(0); }
    // The contrast columns H_CA: n x (n-1).
    Matrix contrast_columns() const { return h_plus.rightCols(h_plus.cols() - 1); }
};

// Named variants: "HA1", "HA2", "HAM", or "helmert" for any n >= 2.
// Unknown names throw.
ContrastMatrix make_contrasts(const std::string& name, int n = 3);

// The HAM matrix exactly as published (only approximately orthogonal).
Matrix ham_verbatim();

// Nearest orthogonal matrix (polar factor of M).
Matrix polar_orthogonalize(const Matrix& m);

// Load a whitespace-separated square matrix (row per line, # comments) and
// treat it as a user-supplied H_plus; re-orthonormalized like HAM.
ContrastMatrix load_contrasts(const std::string& path);

// Orthonormal Helmert basis with leading (1/sqrt(n)) 1 column.
Matrix helmert_basis(int n);

}  // namespace sanova
