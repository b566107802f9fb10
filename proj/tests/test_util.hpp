#pragma once

#include "grds/linalg.hpp"

#include <gtest/gtest.h>

namespace grds::test {

inline double max_abs(const cmat& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

// Entrywise closeness, reported with the worst deviation.
inline ::testing::AssertionResult near(const cmat& a, const cmat& b, double tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        return ::testing::AssertionFailure() << "shape " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
                                             << b.cols();
    const double d = max_abs(a - b);
    if (d <= tol) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << "max deviation " << d << " > " << tol;
}

inline cmat real_matrix(std::initializer_list<std::initializer_list<double>> rows) {
    cmat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index k = 0;
        for (double v : row) m(i, k++) = v;
        ++i;
    }
    return m;
}

}  // namespace grds::test
