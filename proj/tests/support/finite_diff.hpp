#pragma once

// Central finite differences for scalar functions of a dense matrix.

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <random>

namespace support {

inline Eigen::MatrixXd numeric_grad(const std::function<double(const Eigen::MatrixXd&)>& f,
                                    Eigen::MatrixXd x, double h = 1e-5) {
    Eigen::MatrixXd g(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double keep = x.data()[i];
        x.data()[i] = keep + h;
        const double up = f(x);
        x.data()[i] = keep - h;
        const double down = f(x);
        x.data()[i] = keep;
        g.data()[i] = (up - down) / (2 * h);
    }
    return g;
}

/// ||a - b|| / max(||a||, ||b||), or the absolute difference when both are tiny.
inline double rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double scale = std::max(a.norm(), b.norm());
    const double diff = (a - b).norm();
    return scale < 1e-10 ? diff : diff / scale;
}

inline Eigen::MatrixXd randn(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c,
                             double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
}

}  // namespace support
