#include "neurons/common/nn.hpp"

namespace neurons {

Vec row_logsumexp(const Mat& x) {
    Vec out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double m = x.row(i).maxCoeff();
        out(i) = m + std::log((x.row(i).array() - m).exp().sum());
    }
    return out;
}

Mat row_softmax(const Mat& x) {
    Mat out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double m = x.row(i).maxCoeff();
        out.row(i) = (x.row(i).array() - m).exp().matrix();
        out.row(i) /= out.row(i).sum();
    }
    return out;
}

Mat normalize_rows(const Mat& x) {
    Mat out = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double n = x.row(i).norm();
        if (n > 0) out.row(i) /= n;
    }
    return out;
}

Mat normalize_rows_backward(const Mat& x, const Mat& grad_y) {
    Mat grad_x = Mat::Zero(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double n = x.row(i).norm();
        if (n == 0) continue;
        const RowVec y = x.row(i) / n;
        grad_x.row(i) = (grad_y.row(i) - grad_y.row(i).dot(y) * y) / n;
    }
    return grad_x;
}

RowVec flatten_row(const Mat& m) {
    RowVec out(m.size());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out(r * m.cols() + c) = m(r, c);
    return out;
}

Mat unflatten_row(const RowVec& v, int rows, int cols) {
    Mat out(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) out(r, c) = v(r * cols + c);
    return out;
}

}  // namespace neurons
