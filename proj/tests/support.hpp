#pragma once

#include "memqkf/state.hpp"

#include <numbers>
#include <random>

namespace memqkf::testing {

using Gen = std::mt19937_64;

inline double uniform(Gen& g, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline double normal(Gen& g)
{
    return std::normal_distribution<double>(0.0, 1.0)(g);
}

template <int N>
Eigen::Matrix<double, N, N> random_spd(Gen& g, double scale = 1.0, double floor = 0.05)
{
    Eigen::Matrix<double, N, N> a;
    for (int r = 0; r < N; ++r) {
        for (int c = 0; c < N; ++c) {
            a(r, c) = normal(g);
        }
    }
    return scale * (a * a.transpose() / N) + floor * Eigen::Matrix<double, N, N>::Identity();
}

inline DecoupledEstimate random_estimate(Gen& g)
{
    DecoupledEstimate e;
    e.kin.mean << uniform(g, -10, 10), uniform(g, -10, 10), uniform(g, -3, 3), uniform(g, -3, 3);
    e.kin.cov = random_spd<4>(g, 1.0, 0.1);
    e.axis.mean << uniform(g, 2.0, 6.0), uniform(g, 0.8, 2.5);
    e.axis.cov = random_spd<2>(g, 0.3, 0.02);
    e.orient.mean = uniform(g, -std::numbers::pi, std::numbers::pi);
    e.orient.var = uniform(g, 0.01, 0.3);
    return e;
}

inline FilterConfig random_config(Gen& g)
{
    FilterConfig cfg;
    cfg.R = random_spd<2>(g, 1.0, 0.1);
    cfg.c = 0.25;
    return cfg;
}

}  // namespace memqkf::testing
