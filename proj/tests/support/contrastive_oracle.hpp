#pragma once

// Loop-level restatements of the contrastive objectives, written without the
// library's matrix helpers.

#include <cmath>
#include <vector>

namespace oracle {

using Rows = std::vector<std::vector<double>>;

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return ab / std::sqrt(aa * bb);
}

inline Rows similarity(const Rows& x, const Rows& y, double tau) {
    Rows s(x.size(), std::vector<double>(y.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) s[i][j] = cosine(x[i], y[j]) / tau;
    return s;
}

// log( exp(s[i][j]) / sum_k exp(s[i][k]) ) and the column counterpart.
inline double log_softmax_row(const Rows& s, std::size_t i, std::size_t j) {
    double z = 0;
    for (double v : s[i]) z += std::exp(v - s[i][j]);
    return -std::log(z);
}

inline double log_softmax_col(const Rows& s, std::size_t i, std::size_t j) {
    double z = 0;
    for (const auto& row : s) z += std::exp(row[j] - s[i][j]);
    return -std::log(z);
}

/// Symmetric InfoNCE: mean of the fMRI->target and target->fMRI cross
/// entropies with matching indices as positives.
inline double symmetric_infonce(const Rows& x, const Rows& y, double tau) {
    const Rows s = similarity(x, y, tau);
    const std::size_t n = x.size();
    double forward = 0, backward = 0;
    for (std::size_t i = 0; i < n; ++i) forward -= log_softmax_row(s, i, i);
    for (std::size_t j = 0; j < n; ++j) backward -= log_softmax_col(s, j, j);
    return 0.5 * (forward / n + backward / n);
}

/// The four-term bidirectional MixCo sum, evaluated term by term.
inline double bimixco_terms(const Rows& x, const Rows& y, const std::vector<double>& lambda,
                            const std::vector<int>& partner, double tau) {
    const Rows s = similarity(x, y, tau);
    const std::size_t n = x.size();
    const double k = 1.0 / (2.0 * n);
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) total -= k * lambda[i] * log_softmax_row(s, i, i);
    for (std::size_t i = 0; i < n; ++i)
        total -= k * (1 - lambda[i]) * log_softmax_row(s, i, static_cast<std::size_t>(partner[i]));
    for (std::size_t j = 0; j < n; ++j) total -= k * lambda[j] * log_softmax_col(s, j, j);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < n; ++l)
            if (partner[l] == static_cast<int>(j))
                total -= k * (1 - lambda[l]) * log_softmax_col(s, l, j);
    return total;
}

}  // namespace oracle
