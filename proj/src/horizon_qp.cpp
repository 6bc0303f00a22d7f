#include "kinmpc/horizon_qp.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace kinmpc {

namespace {

Eigen::MatrixXd stacked_weight(const Eigen::MatrixXd & Q, int N)
{
  const Eigen::Index nx = Q.rows();
  Eigen::MatrixXd Qb = Eigen::MatrixXd::Zero(nx * N, nx * N);
  for (int i = 0; i < N; ++i) {
    Qb.block(i * nx, i * nx, nx, nx) = Q;
  }
  return Qb;
}

void check_pd(QpProblem & qp)
{
  qp.H = 0.5 * (qp.H + qp.H.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(qp.H);
  if (llt.info() != Eigen::Success) {
    throw QpError("tracking QP Hessian is not positive definite; check weights");
  }
}

void check_inputs(const PredictionMatrices & pred, const Eigen::VectorXd & x0,
                  const Eigen::VectorXd & X_ref, const HorizonWeights & w, InputBounds bounds)
{
  const Eigen::Index nx = pred.state_dim();
  w.validate(nx);
  if (w.N != pred.N || w.M != pred.M) {
    throw std::invalid_argument("horizon weights do not match prediction horizon");
  }
  if (x0.size() != nx || X_ref.size() != nx * pred.N) {
    throw std::invalid_argument("state or reference dimension mismatch");
  }
  if (!std::isfinite(bounds.lower) || !std::isfinite(bounds.upper) ||
      bounds.lower > bounds.upper) {
    throw std::invalid_argument("input bounds must be finite with lower <= upper");
  }
}

}  // namespace

TrackingWeights scale_tracking_weights(const TrackingWeights & w)
{
  if (!(w.alpha > 0.0)) {
    throw std::invalid_argument("alpha must be positive");
  }
  return {w.w_y * w.alpha, w.w_u / w.alpha, w.w_du * w.alpha, 1.0};
}

void HorizonWeights::validate(Eigen::Index nx) const
{
  if (N < 1 || M < 1 || M > N) {
    throw std::invalid_argument("horizons require 1 <= M <= N");
  }
  if (Q.rows() != nx || Q.cols() != nx) {
    throw std::invalid_argument("stage weight has wrong dimension");
  }
  if (!(R > 0.0)) {
    throw std::invalid_argument("input weight R must be positive");
  }
}

PredictionMatrices build_prediction(const Eigen::MatrixXd & A, const Eigen::VectorXd & B,
                                    const Eigen::VectorXd & K, int N, int M)
{
  if (N < 1 || M < 1 || M > N) {
    throw std::invalid_argument("horizons require 1 <= M <= N");
  }
  const Eigen::Index nx = A.rows();
  if (A.cols() != nx || B.size() != nx || K.size() != nx) {
    throw std::invalid_argument("model dimension mismatch");
  }

  PredictionMatrices p;
  p.N = N;
  p.M = M;
  p.Sx.resize(nx * N, nx);
  p.Su = Eigen::MatrixXd::Zero(nx * N, M);
  p.Sk.resize(nx * N);

  // Stage i from stage i-1: x_i = A x_{i-1} + B u_{min(i-1, M-1)} + K.
  Eigen::MatrixXd Sx_prev = Eigen::MatrixXd::Identity(nx, nx);
  Eigen::MatrixXd Su_prev = Eigen::MatrixXd::Zero(nx, M);
  Eigen::VectorXd Sk_prev = Eigen::VectorXd::Zero(nx);
  for (int i = 0; i < N; ++i) {
    Eigen::MatrixXd Sx_i = A * Sx_prev;
    Eigen::MatrixXd Su_i = A * Su_prev;
    Su_i.col(std::min(i, M - 1)) += B;
    Eigen::VectorXd Sk_i = A * Sk_prev + K;

    p.Sx.middleRows(i * nx, nx) = Sx_i;
    p.Su.middleRows(i * nx, nx) = Su_i;
    p.Sk.segment(i * nx, nx) = Sk_i;
    Sx_prev = std::move(Sx_i);
    Su_prev = std::move(Su_i);
    Sk_prev = std::move(Sk_i);
  }
  return p;
}

PredictionMatrices build_prediction(const AffineLtiModel & model, int N, int M)
{
  return build_prediction(model.A, model.B, model.K, N, M);
}

PredictionMatrices build_prediction(const DeltaLtiModel & model, int N, int M)
{
  return build_prediction(model.A, model.B, Eigen::Vector3d::Zero(), N, M);
}

QpProblem build_tracking_qp(const PredictionMatrices & pred, const Eigen::VectorXd & x0,
                            const Eigen::VectorXd & X_ref, const HorizonWeights & w,
                            InputBounds bounds)
{
  check_inputs(pred, x0, X_ref, w, bounds);
  const Eigen::MatrixXd Qb = stacked_weight(w.Q, pred.N);
  const Eigen::MatrixXd SuT_Q = pred.Su.transpose() * Qb;

  QpProblem qp;
  qp.H = SuT_Q * pred.Su + w.R * Eigen::MatrixXd::Identity(pred.M, pred.M);
  qp.f = SuT_Q * (pred.Sx * x0 + pred.Sk - X_ref);
  qp.lb = Eigen::VectorXd::Constant(pred.M, bounds.lower);
  qp.ub = Eigen::VectorXd::Constant(pred.M, bounds.upper);
  check_pd(qp);
  return qp;
}

QpProblem build_move_tracking_qp(const PredictionMatrices & pred, const Eigen::VectorXd & x0,
                                 const Eigen::VectorXd & X_ref, const HorizonWeights & w,
                                 double input_weight, double u_prev, InputBounds bounds)
{
  check_inputs(pred, x0, X_ref, w, bounds);
  if (!(input_weight >= 0.0)) {
    throw std::invalid_argument("input weight must be non-negative");
  }
  const int N = pred.N;
  const int M = pred.M;

  // U = u_prev * 1 + L dU, L lower-triangular ones.
  const Eigen::MatrixXd L =
      Eigen::MatrixXd::Ones(M, M).triangularView<Eigen::Lower>().toDenseMatrix();
  // Stage inputs: hold maps the M inputs onto the N stages.
  Eigen::MatrixXd hold = Eigen::MatrixXd::Zero(N, M);
  for (int i = 0; i < N; ++i) {
    hold(i, std::min(i, M - 1)) = 1.0;
  }

  const Eigen::MatrixXd Qb = stacked_weight(w.Q, N);
  const Eigen::MatrixXd G = pred.Su * L;
  const Eigen::MatrixXd HL = hold * L;
  const Eigen::VectorXd free_response =
      pred.Sx * x0 + pred.Sk + pred.Su * Eigen::VectorXd::Constant(M, u_prev) - X_ref;
  const Eigen::VectorXd held_prev = Eigen::VectorXd::Constant(N, u_prev);

  QpProblem qp;
  qp.H = G.transpose() * Qb * G + input_weight * HL.transpose() * HL +
         w.R * Eigen::MatrixXd::Identity(M, M);
  qp.f = G.transpose() * Qb * free_response + input_weight * HL.transpose() * held_prev;
  qp.lb = Eigen::VectorXd::Constant(M, bounds.lower);
  qp.ub = Eigen::VectorXd::Constant(M, bounds.upper);
  check_pd(qp);
  return qp;
}

}  // namespace kinmpc
