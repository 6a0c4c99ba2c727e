#pragma once

#include "memqkf/errors.hpp"
#include "memqkf/state.hpp"

#include <Eigen/Dense>

#include <string>

namespace memqkf::detail {

/// Inverse of a small symmetric covariance, guarded by a condition-number check.
/// Throws `Err` when the matrix is singular or worse conditioned than kMaxConditionNumber.
template <typename Err, int N>
Eigen::Matrix<double, N, N> guarded_inverse(const Eigen::Matrix<double, N, N>& m, const char* what)
{
    if (!m.allFinite()) {
        throw Err(std::string(what) + ": non-finite entries");
    }
    Eigen::JacobiSVD<Eigen::Matrix<double, N, N>> svd(m);
    const auto& sv = svd.singularValues();
    const double largest = sv(0);
    const double smallest = sv(N - 1);
    if (!(smallest > 0.0) || largest / smallest > kMaxConditionNumber) {
        throw Err(std::string(what) + ": condition number exceeds limit");
    }
    return m.inverse();
}

}  // namespace memqkf::detail
