#pragma once

#include <Eigen/Core>

#include <stdexcept>

namespace kinmpc {

/// Raised for malformed or non-convex problems.
class QpError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// min 0.5 u'Hu + f'u  s.t.  lb <= u <= ub
struct QpProblem
{
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;

  Eigen::Index size() const { return f.size(); }

  double cost(const Eigen::VectorXd & u) const { return 0.5 * u.dot(H * u) + f.dot(u); }

  /// Checks dimensions, symmetry, lb <= ub and positive definiteness of H.
  void validate() const;
};

enum class QpStatus
{
  converged,
  max_iterations,
};

struct QpOptions
{
  double tol{1e-8};
  int max_iter{10'000};
};

struct QpSolution
{
  Eigen::VectorXd u;
  int iterations{0};
  QpStatus status{QpStatus::max_iterations};
  double kkt_residual{0};
};

/// Projected-gradient optimality residual || u - clip(u - (Hu + f), lb, ub) ||_inf.
double kkt_residual(const QpProblem & qp, const Eigen::VectorXd & u);

/**
 * @brief Solve a strictly convex box-constrained QP.
 *
 * Primal active-set method: each iteration takes a Newton step on the current
 * face, stopping at the first bound it hits, and releases the bound with the
 * most negative multiplier once the face minimiser is reached. Iterates stay
 * feasible. On iteration exhaustion the iterate with the smallest KKT residual
 * is returned with status max_iterations.
 *
 * Throws QpError when the problem fails validate().
 */
QpSolution solve_box_qp(const QpProblem & qp, const QpOptions & options = {});

}  // namespace kinmpc
