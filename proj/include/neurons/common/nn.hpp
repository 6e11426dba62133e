#pragma once

// Small dense-math helpers shared by the models. Everything is float64 so
// analytic gradients can be checked against finite differences.

#include <Eigen/Dense>

#include <cmath>

namespace neurons {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

inline double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double silu(double x) { return x * sigmoid(x); }

inline double silu_grad(double x) {
    const double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
}

inline Mat silu(const Mat& x) { return x.unaryExpr([](double v) { return silu(v); }); }
inline Mat silu_grad(const Mat& x) {
    return x.unaryExpr([](double v) { return silu_grad(v); });
}

/// Numerically stable log(sum(exp(row))) for each row.
Vec row_logsumexp(const Mat& x);

/// Row-wise softmax.
Mat row_softmax(const Mat& x);

/// Row-wise L2 normalisation; rows with zero norm are left at zero.
Mat normalize_rows(const Mat& x);

/// Backward of normalize_rows: given input x and dL/dy, returns dL/dx.
Mat normalize_rows_backward(const Mat& x, const Mat& grad_y);

/// Row-major flatten / unflatten of an r x c block into a 1 x (r*c) row.
RowVec flatten_row(const Mat& m);
Mat unflatten_row(const RowVec& v, int rows, int cols);

}  // namespace neurons
