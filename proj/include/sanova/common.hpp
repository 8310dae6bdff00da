#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace sanova {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Cells are stored county-major: cell (i, j) for county i, disease j lives at
// flat index i * n_diseases + j.  All design matrices, data vectors and
// Kronecker products in this library follow that convention.
inline int cell_index(int region, int disease, int n_diseases) {
    return region * n_diseases + disease;
}

}  // namespace sanova
