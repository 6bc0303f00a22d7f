#include "doctest.h"

#include <random>

#include "kinmpc/horizon_qp.hpp"
#include "support.hpp"

using namespace kinmpc;
using namespace kinmpc::testing;

namespace {

// Forward simulation of x+ = A x + B u + K with the last of the M inputs held.
Eigen::VectorXd simulate(const Eigen::MatrixXd & A, const Eigen::VectorXd & B,
                         const Eigen::VectorXd & K, const Eigen::VectorXd & x0,
                         const Eigen::VectorXd & U, int N)
{
  const Eigen::Index nx = A.rows();
  const auto M = static_cast<int>(U.size());
  Eigen::VectorXd X(nx * N);
  Eigen::VectorXd x = x0;
  for (int i = 0; i < N; ++i) {
    x = A * x + B * U[std::min(i, M - 1)] + K;
    X.segment(i * nx, nx) = x;
  }
  return X;
}

HorizonWeights weights(const Eigen::MatrixXd & Q, double R, int N, int M)
{
  HorizonWeights w;
  w.Q = Q;
  w.R = R;
  w.N = N;
  w.M = M;
  return w;
}

}  // namespace

TEST_CASE("single-stage prediction is the model itself")
{
  const AffineLtiModel m = linearize_position({0.4, 0.1}, VehicleParams{}, 0.1);
  const PredictionMatrices p = build_prediction(m, 1, 1);
  CHECK(p.Sx == Eigen::MatrixXd(m.A));
  CHECK(p.Su == Eigen::MatrixXd(m.B));
  CHECK(p.Sk == Eigen::VectorXd(m.K));
}

TEST_CASE("identity-state model unrolls to accumulated input and drift")
{
  const Eigen::Vector3d B{0.1, 0.2, 0.3};
  const Eigen::Vector3d K{1.0, -1.0, 0.5};
  const PredictionMatrices p = build_prediction(Eigen::Matrix3d::Identity(), B, K, 3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Eigen::Vector3d blk = p.Su.block(3 * i, j, 3, 1);
      CHECK((j <= i ? (blk - B).cwiseAbs().maxCoeff() : blk.cwiseAbs().maxCoeff()) == 0.0);
    }
    CHECK((p.Sk.segment<3>(3 * i) - (i + 1) * K).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("zero model repeats the initial state")
{
  const PredictionMatrices p =
      build_prediction(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(),
                       Eigen::Vector3d::Zero(), 5, 2);
  const Eigen::Vector3d x0{1.0, 2.0, 3.0};
  const Eigen::VectorXd X = p.predict(x0, Eigen::Vector2d{0.3, -0.7});
  for (int i = 0; i < 5; ++i) {
    CHECK(X.segment<3>(3 * i) == x0);
  }
  CHECK(p.Sk.isZero());
}

TEST_CASE("delta model has no drift accumulation")
{
  const DeltaLtiModel m = linearize_velocity({0.2, 0.05}, VehicleParams{}, 0.05);
  CHECK(build_prediction(m, 10, 4).Sk.isZero());
}

TEST_CASE("condensed prediction equals forward simulation")
{
  std::mt19937_64 rng(777);
  for (int c = 0; c < 100; ++c) {
    const int N = 1 + c % 10;
    const int M = 1 + static_cast<int>(rng() % static_cast<unsigned>(N));
    const Eigen::MatrixXd A = random_matrix(rng, 3, 3, 0.6) + Eigen::MatrixXd::Identity(3, 3);
    const Eigen::VectorXd B = random_matrix(rng, 3, 1);
    const Eigen::VectorXd K = random_matrix(rng, 3, 1);
    const Eigen::VectorXd x0 = random_matrix(rng, 3, 1, 5.0);
    const Eigen::VectorXd U = random_matrix(rng, M, 1);
    const PredictionMatrices p = build_prediction(A, B, K, N, M);
    const Eigen::VectorXd sim = simulate(A, B, K, x0, U, N);
    const double scale = std::max(1.0, sim.cwiseAbs().maxCoeff());
    CHECK((p.predict(x0, U) - sim).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  }
}

TEST_CASE("forced response blocks are powers of A times B, summed over held stages")
{
  std::mt19937_64 rng(31);
  const Eigen::MatrixXd A = random_matrix(rng, 3, 3, 0.5) + Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd B = random_matrix(rng, 3, 1);
  const int N = 7;
  const int M = 3;
  const PredictionMatrices p = build_prediction(A, B, Eigen::Vector3d::Zero(), N, M);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < M; ++j) {
      Eigen::VectorXd want = Eigen::VectorXd::Zero(3);
      // Input j drives stage-steps s with min(s, M-1) == j.
      for (int s = 0; s <= i; ++s) {
        if (std::min(s, M - 1) == j) {
          Eigen::MatrixXd Ap = Eigen::MatrixXd::Identity(3, 3);
          for (int k = 0; k < i - s; ++k) {
            Ap = A * Ap;
          }
          want += Ap * B;
        }
      }
      CHECK((p.Su.block(3 * i, j, 3, 1) - want).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("prediction rejects inconsistent horizons and dimensions")
{
  const Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
  const Eigen::Vector3d B = Eigen::Vector3d::Ones();
  CHECK_THROWS_AS(build_prediction(A, B, B, 3, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_prediction(A, B, B, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_prediction(A, Eigen::Vector2d::Ones(), B, 3, 2), std::invalid_argument);
}

TEST_CASE("one-dimensional tracking QP by hand")
{
  const PredictionMatrices p = build_prediction(Eigen::Matrix3d::Identity(),
                                                Eigen::Vector3d{0, 1, 0},
                                                Eigen::Vector3d::Zero(), 1, 1);
  const QpProblem qp = build_tracking_qp(p, Eigen::Vector3d::Zero(), Eigen::Vector3d{0, 1, 0},
                                         weights(Eigen::Matrix3d::Identity(), 1.0, 1, 1),
                                         {-10.0, 10.0});
  CHECK(qp.H(0, 0) == doctest::Approx(2.0));
  CHECK(qp.f[0] == doctest::Approx(-1.0));
  CHECK(solve_box_qp(qp).u[0] == doctest::Approx(0.5));
}

TEST_CASE("reference equal to the free response gives a zero linear term")
{
  const AffineLtiModel m = linearize_position({0.3, 0.05}, VehicleParams{}, 0.05);
  const PredictionMatrices p = build_prediction(m, 10, 4);
  const Eigen::Vector3d x0{1.0, -2.0, 0.3};
  const Eigen::VectorXd free = p.Sx * x0 + p.Sk;
  const QpProblem qp = build_tracking_qp(
      p, x0, free, weights(Eigen::Vector3d{100, 100, 0}.asDiagonal().toDenseMatrix(), 0.01, 10, 4),
      {-0.025, 0.025});
  CHECK(qp.f.cwiseAbs().maxCoeff() < 1e-9);
  CHECK(solve_box_qp(qp).u.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("scaling Q and R together scales H and f and keeps the minimiser")
{
  std::mt19937_64 rng(55);
  const AffineLtiModel m = linearize_position({0.1, 0.02}, VehicleParams{}, 0.05);
  const PredictionMatrices p = build_prediction(m, 8, 8);
  const Eigen::Vector3d x0{0.0, 0.5, 0.0};
  const Eigen::VectorXd ref = random_matrix(rng, 24, 1, 3.0);
  const Eigen::MatrixXd Q = Eigen::Vector3d{1, 2, 0.5}.asDiagonal();
  const QpProblem a = build_tracking_qp(p, x0, ref, weights(Q, 0.3, 8, 8), {-0.1, 0.1});
  const QpProblem b = build_tracking_qp(p, x0, ref, weights(7.0 * Q, 2.1, 8, 8), {-0.1, 0.1});
  CHECK((b.H - 7.0 * a.H).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((b.f - 7.0 * a.f).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((solve_box_qp(a).u - solve_box_qp(b).u).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("tracking QP objective equals the stage-wise cost up to a constant")
{
  std::mt19937_64 rng(66);
  const AffineLtiModel m = linearize_position({0.5, -0.1}, VehicleParams{}, 0.1);
  const int N = 6;
  const int M = 3;
  const PredictionMatrices p = build_prediction(m, N, M);
  const Eigen::Vector3d x0{2.0, 1.0, 0.5};
  const Eigen::VectorXd ref = random_matrix(rng, 3 * N, 1, 2.0);
  const Eigen::MatrixXd Q = Eigen::Vector3d{3, 1, 0.2}.asDiagonal();
  const double R = 0.4;
  const QpProblem qp = build_tracking_qp(p, x0, ref, weights(Q, R, N, M), {-1, 1});

  auto direct = [&](const Eigen::VectorXd & U) {
    const Eigen::VectorXd X = simulate(m.A, m.B, m.K, x0, U, N);
    double J = 0.0;
    for (int i = 0; i < N; ++i) {
      const Eigen::Vector3d e = X.segment<3>(3 * i) - ref.segment<3>(3 * i);
      J += e.dot(Q * e);
    }
    return 0.5 * (J + R * U.squaredNorm());
  };
  const Eigen::VectorXd U0 = random_matrix(rng, M, 1);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd U = random_matrix(rng, M, 1);
    CHECK((qp.cost(U) - qp.cost(U0)) == doctest::Approx(direct(U) - direct(U0)).epsilon(1e-9));
  }
}

TEST_CASE("move-parameterised QP equals the stage-wise cost up to a constant")
{
  std::mt19937_64 rng(77);
  const AffineLtiModel m = linearize_initial(VehicleParams{}, 0.2);
  const int N = 10;
  const int M = 5;
  const PredictionMatrices p = build_prediction(m, N, M);
  const Eigen::Vector3d x0{0.0, 0.3, 0.05};
  const Eigen::VectorXd ref = random_matrix(rng, 3 * N, 1, 2.0);
  const Eigen::MatrixXd Q = Eigen::Vector3d{100, 100, 0}.asDiagonal();
  const double R = 0.01;
  const double input_weight = 0.7;
  const double u_prev = 0.04;
  const QpProblem qp =
      build_move_tracking_qp(p, x0, ref, weights(Q, R, N, M), input_weight, u_prev, {-0.1, 0.1});

  auto direct = [&](const Eigen::VectorXd & dU) {
    Eigen::VectorXd U(M);
    double u = u_prev;
    for (int j = 0; j < M; ++j) {
      u += dU[j];
      U[j] = u;
    }
    const Eigen::VectorXd X = simulate(m.A, m.B, m.K, x0, U, N);
    double J = 0.0;
    for (int i = 0; i < N; ++i) {
      const Eigen::Vector3d e = X.segment<3>(3 * i) - ref.segment<3>(3 * i);
      const double ui = U[std::min(i, M - 1)];
      J += e.dot(Q * e) + input_weight * ui * ui;
    }
    return 0.5 * (J + R * dU.squaredNorm());
  };
  const Eigen::VectorXd d0 = random_matrix(rng, M, 1, 0.1);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd d = random_matrix(rng, M, 1, 0.1);
    CHECK((qp.cost(d) - qp.cost(d0)) == doctest::Approx(direct(d) - direct(d0)).epsilon(1e-9));
  }
}

TEST_CASE("weight scaling")
{
  const TrackingWeights base{10.0, 0.0, 0.1, 1.0};
  const TrackingWeights same = scale_tracking_weights(base);
  CHECK(same.w_y == base.w_y);
  CHECK(same.w_u == base.w_u);
  CHECK(same.w_du == base.w_du);

  TrackingWeights w = base;
  w.alpha = 2.8;
  const TrackingWeights s = scale_tracking_weights(w);
  CHECK(s.w_u == 0.0);
  CHECK(s.w_du == doctest::Approx(0.28));
  CHECK(s.w_y == doctest::Approx(28.0));
  CHECK(s.alpha == 1.0);

  TrackingWeights x{3.0, 0.5, 0.2, 4.0};
  TrackingWeights y = scale_tracking_weights(x);
  y.alpha = 0.25;
  const TrackingWeights back = scale_tracking_weights(y);
  CHECK(back.w_y == doctest::Approx(3.0));
  CHECK(back.w_u == doctest::Approx(0.5));
  CHECK(back.w_du == doctest::Approx(0.2));

  w.alpha = 0.0;
  CHECK_THROWS_AS(scale_tracking_weights(w), std::invalid_argument);
}

TEST_CASE("tracking QP input validation")
{
  const PredictionMatrices p = build_prediction(Eigen::Matrix3d::Identity(),
                                                Eigen::Vector3d{0, 1, 0},
                                                Eigen::Vector3d::Zero(), 2, 2);
  const Eigen::Vector3d x0 = Eigen::Vector3d::Zero();
  const Eigen::VectorXd ref = Eigen::VectorXd::Zero(6);
  const Eigen::MatrixXd Q = Eigen::Matrix3d::Identity();
  CHECK_THROWS_AS(build_tracking_qp(p, x0, ref, weights(Q, 0.0, 2, 2), {-1, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_tracking_qp(p, x0, ref, weights(Q, 1.0, 2, 1), {-1, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_tracking_qp(p, x0, Eigen::VectorXd::Zero(3), weights(Q, 1.0, 2, 2),
                                    {-1, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_tracking_qp(p, x0, ref, weights(Q, 1.0, 2, 2), {1, -1}),
                  std::invalid_argument);
}
