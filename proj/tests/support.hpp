#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "kinmpc/box_qp.hpp"

namespace kinmpc::testing {

inline double uniform(std::mt19937_64 & rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64 & rng, Eigen::Index r, Eigen::Index c,
                                     double scale = 1.0)
{
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      m(i, j) = uniform(rng, -scale, scale);
    }
  }
  return m;
}

/// Strictly convex box QP with a mix of active and inactive bounds.
inline QpProblem random_box_qp(std::mt19937_64 & rng, Eigen::Index n, double half_width = 1.0)
{
  const Eigen::MatrixXd G = random_matrix(rng, n, n);
  QpProblem qp;
  qp.H = G * G.transpose() + uniform(rng, 0.05, 1.0) * Eigen::MatrixXd::Identity(n, n);
  qp.f = random_matrix(rng, n, 1, 3.0);
  qp.lb.resize(n);
  qp.ub.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double centre = uniform(rng, -0.5, 0.5);
    const double w = uniform(rng, 0.1, half_width);
    qp.lb[i] = centre - w;
    qp.ub[i] = centre + w;
  }
  return qp;
}

inline Eigen::VectorXd random_feasible(std::mt19937_64 & rng, const QpProblem & qp)
{
  Eigen::VectorXd w(qp.size());
  for (Eigen::Index i = 0; i < qp.size(); ++i) {
    w[i] = uniform(rng, qp.lb[i], qp.ub[i]);
  }
  return w;
}

inline double rel_err(double a, double b)
{
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace kinmpc::testing
