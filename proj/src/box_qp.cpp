#include "kinmpc/box_qp.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <vector>

namespace kinmpc {

namespace {

enum class Bound : signed char
{
  free = 0,
  lower = -1,
  upper = 1,
};

Eigen::VectorXd clip(const Eigen::VectorXd & u, const QpProblem & qp)
{
  return u.cwiseMax(qp.lb).cwiseMin(qp.ub);
}

}  // namespace

void QpProblem::validate() const
{
  const Eigen::Index n = f.size();
  if (n == 0 || H.rows() != n || H.cols() != n || lb.size() != n || ub.size() != n) {
    throw QpError("QP dimension mismatch");
  }
  if (!H.allFinite() || !f.allFinite()) {
    throw QpError("QP data must be finite");
  }
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw QpError("QP Hessian is not symmetric");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(lb[i]) || std::isnan(ub[i]) || lb[i] > ub[i]) {
      throw QpError("QP bounds require lb <= ub");
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    throw QpError("QP Hessian is not positive definite");
  }
}

double kkt_residual(const QpProblem & qp, const Eigen::VectorXd & u)
{
  const Eigen::VectorXd g = qp.H * u + qp.f;
  return (u - clip(u - g, qp)).cwiseAbs().maxCoeff();
}

QpSolution solve_box_qp(const QpProblem & qp, const QpOptions & options)
{
  qp.validate();
  const Eigen::Index n = qp.size();

  // Feasible start: the projection of the origin, with every variable that
  // landed on a bound in the working set.
  Eigen::VectorXd u = clip(Eigen::VectorXd::Zero(n), qp);
  std::vector<Bound> working(static_cast<std::size_t>(n), Bound::free);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (u[i] == qp.lb[i]) {
      working[i] = Bound::lower;
    } else if (u[i] == qp.ub[i]) {
      working[i] = Bound::upper;
    }
  }

  QpSolution best;
  best.u = u;
  best.kkt_residual = kkt_residual(qp, u);

  bool face_solved = false;
  std::vector<Eigen::Index> free;
  free.reserve(static_cast<std::size_t>(n));

  for (int iter = 0; iter <= options.max_iter; ++iter) {
    const Eigen::VectorXd g = qp.H * u + qp.f;
    const double res = (u - clip(u - g, qp)).cwiseAbs().maxCoeff();
    if (res < best.kkt_residual) {
      best.u = u;
      best.kkt_residual = res;
    }
    best.iterations = iter;
    if (res <= options.tol) {
      best.u = u;
      best.kkt_residual = res;
      best.status = QpStatus::converged;
      return best;
    }
    if (iter == options.max_iter) {
      break;
    }

    if (face_solved) {
      // Release the bound with the most negative multiplier, if any.
      Eigen::Index release = -1;
      double most_negative = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double lambda = working[i] == Bound::lower   ? g[i]
                              : working[i] == Bound::upper ? -g[i]
                                                           : 0.0;
        if (lambda < most_negative) {
          most_negative = lambda;
          release = i;
        }
      }
      if (release >= 0) {
        working[release] = Bound::free;
      }
      // Otherwise the face is optimal up to rounding and the Newton step
      // below acts as one round of iterative refinement.
    }

    free.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (working[i] == Bound::free) {
        free.push_back(i);
      }
    }
    if (free.empty()) {
      face_solved = true;
      continue;
    }

    // Newton step on the free variables of the current face.
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd H_ff(nf, nf);
    Eigen::VectorXd g_f(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      g_f[a] = g[free[a]];
      for (Eigen::Index b = 0; b < nf; ++b) {
        H_ff(a, b) = qp.H(free[a], free[b]);
      }
    }
    const Eigen::VectorXd p = -H_ff.llt().solve(g_f);

    // Ratio test against the box.
    double step = 1.0;
    Eigen::Index blocking = -1;
    Bound blocking_side = Bound::free;
    for (Eigen::Index a = 0; a < nf; ++a) {
      const Eigen::Index i = free[a];
      if (p[a] < 0.0) {
        const double t = (qp.lb[i] - u[i]) / p[a];
        if (t < step) {
          step = t;
          blocking = i;
          blocking_side = Bound::lower;
        }
      } else if (p[a] > 0.0) {
        const double t = (qp.ub[i] - u[i]) / p[a];
        if (t < step) {
          step = t;
          blocking = i;
          blocking_side = Bound::upper;
        }
      }
    }
    step = std::max(step, 0.0);
    for (Eigen::Index a = 0; a < nf; ++a) {
      u[free[a]] += step * p[a];
    }
    u = clip(u, qp);
    if (blocking >= 0) {
      u[blocking] = blocking_side == Bound::lower ? qp.lb[blocking] : qp.ub[blocking];
      working[blocking] = blocking_side;
      face_solved = false;
    } else {
      face_solved = true;
    }
  }
  best.status = QpStatus::max_iterations;
  return best;
}

}  // namespace kinmpc
