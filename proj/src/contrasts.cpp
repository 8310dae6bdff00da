#include "sanova/contrasts.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <fstream>
#include <sstream>

namespace sanova {

Matrix helmert_basis(int n) {
    if (n < 2) throw std::invalid_argument("helmert basis needs n >= 2");
    Matrix h = Matrix::Zero(n, n);
    h.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n)));
    for (int j = 1; j < n; ++j) {
        // Column j contrasts the first j levels against level j+1.
        const double norm = std::sqrt(static_cast<double>(j) * (j + 1));
        for (int i = 0; i < j; ++i) h(i, j) = 1.0 / norm;
        h(j, j) = -static_cast<double>(j) / norm;
    }
    return h;
}

Matrix ham_verbatim() {
    Matrix m(3, 3);
    m << 0.56, -0.64, -0.52,
        -0.53, -0.77, 0.36,
        -0.63, 0.07, -0.77;
    return m;
}

Matrix polar_orthogonalize(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

namespace {

Matrix scaled_contrast(std::initializer_list<double> raw) {
    Matrix m(3, 3);
    int k = 0;
    for (double v : raw) m(k / 3, k % 3) = v, ++k;
    const double s3 = 1.0 / std::sqrt(3.0), s6 = 1.0 / std::sqrt(6.0), s2 = 1.0 / std::sqrt(2.0);
    return m * Vector{{s3, s6, s2}}.asDiagonal();
}

}  // namespace

ContrastMatrix make_contrasts(const std::string& name, int n) {
    ContrastMatrix c;
    c.name = name;
    if (name == "HA1") {
        c.h_plus = scaled_contrast({1, -2, 0, 1, 1, -1, 1, 1, 1});
    } else if (name == "HA2") {
        c.h_plus = scaled_contrast({1, 1, 1, 1, -2, 0, 1, 1, -1});
    } else if (name == "HAM") {
        const Matrix raw = ham_verbatim();
        c.h_plus = polar_orthogonalize(raw);
        c.max_adjustment = (c.h_plus - raw).cwiseAbs().maxCoeff();
    } else if (name == "helmert") {
        c.h_plus = helmert_basis(n);
    } else {
        throw std::invalid_argument("unknown contrast matrix: " + name +
                                    " (expected HA1, HA2, HAM or helmert)");
    }
    return c;
}

ContrastMatrix load_contrasts(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open contrast file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (!ls.eof()) throw std::invalid_argument(path + ": malformed matrix row: " + line);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    const auto n = rows.size();
    if (n < 2) throw std::invalid_argument(path + ": contrast matrix needs n >= 2 rows");
    Matrix raw(n, n);
    for (size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) {
            throw std::invalid_argument(path + ": contrast matrix must be square");
        }
        for (size_t j = 0; j < n; ++j) raw(i, j) = rows[i][j];
    }
    ContrastMatrix c;
    c.name = path;
    c.h_plus = polar_orthogonalize(raw);
    c.max_adjustment = (c.h_plus - raw).cwiseAbs().maxCoeff();
    return c;
}

}  // namespace sanova
