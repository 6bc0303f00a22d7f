#pragma once

#include <Eigen/Core>

#include "kinmpc/box_qp.hpp"
#include "kinmpc/linearization.hpp"

namespace kinmpc {

/// Output / input-target / move-suppression weights and their common scale.
struct TrackingWeights
{
  double w_y{10.0};
  double w_u{0.0};
  double w_du{0.1};
  double alpha{1.0};
};

/// Applies alpha: w_y and w_du are multiplied by it, w_u is divided by it.
/// The result carries alpha = 1 since the scale has been folded in.
TrackingWeights scale_tracking_weights(const TrackingWeights & w);

/// Per-stage quadratic weights over a prediction horizon of N steps with M free moves.
struct HorizonWeights
{
  Eigen::MatrixXd Q;  ///< stage state weight (nx x nx, PSD)
  double R{1.0};      ///< weight on each decision variable
  int N{1};
  int M{1};

  void validate(Eigen::Index nx) const;
};

/// Symmetric box on every decision variable.
struct InputBounds
{
  double lower{0};
  double upper{0};
};

/**
 * @brief Condensed prediction X = Sx x0 + Su U + Sk.
 *
 * X stacks the states of stages 1..N; U holds the M model inputs, the last of
 * which is repeated for stages M..N.
 */
struct PredictionMatrices
{
  Eigen::MatrixXd Sx;
  Eigen::MatrixXd Su;
  Eigen::VectorXd Sk;
  int N{0};
  int M{0};

  Eigen::Index state_dim() const { return Sx.cols(); }

  Eigen::VectorXd predict(const Eigen::VectorXd & x0, const Eigen::VectorXd & U) const
  {
    return Sx * x0 + Su * U + Sk;
  }
};

/// Generic unrolling of x+ = A x + B u + K.
PredictionMatrices build_prediction(const Eigen::MatrixXd & A, const Eigen::VectorXd & B,
                                    const Eigen::VectorXd & K, int N, int M);
PredictionMatrices build_prediction(const AffineLtiModel & model, int N, int M);
PredictionMatrices build_prediction(const DeltaLtiModel & model, int N, int M);

/**
 * Tracking QP whose decision variables are the model inputs themselves:
 * H = Su' Qb Su + R I,  f = Su' Qb (Sx x0 + Sk - X_ref).
 */
QpProblem build_tracking_qp(const PredictionMatrices & pred, const Eigen::VectorXd & x0,
                            const Eigen::VectorXd & X_ref, const HorizonWeights & weights,
                            InputBounds bounds);

/**
 * Tracking QP for a model driven by an absolute input, optimised over input
 * moves. With U = u_prev + cumsum(dU) held over the horizon, the cost is
 *
 *   sum_stages |x - x_ref|_Q^2 + input_weight * u_stage^2 + R * sum dU^2
 *
 * and `bounds` apply to each move dU.
 */
QpProblem build_move_tracking_qp(const PredictionMatrices & pred, const Eigen::VectorXd & x0,
                                 const Eigen::VectorXd & X_ref, const HorizonWeights & weights,
                                 double input_weight, double u_prev, InputBounds bounds);

}  // namespace kinmpc
