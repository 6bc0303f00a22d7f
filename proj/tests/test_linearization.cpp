#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "kinmpc/linearization.hpp"
#include "support.hpp"

using namespace kinmpc;
using kinmpc::testing::uniform;

namespace {

constexpr double kH = 1e-6;

double column_rel_err(const Eigen::Vector3d & got, const Eigen::Vector3d & want)
{
  return (got - want).cwiseAbs().maxCoeff() / std::max(want.cwiseAbs().maxCoeff(), 1e-300);
}

// Pose change of one plant step taken with slip `beta_after` from heading psi.
Eigen::Vector3d increment(double psi, double beta_after, double Ts, const VehicleParams & p)
{
  const VehicleState s{0.0, 0.0, psi, beta_after};
  return step_nonlinear(s, 0.0, Ts, p).pose() - s.pose();
}

}  // namespace

TEST_CASE("initial-point model entries")
{
  const VehicleParams p{1.105, 1.738, 10.0};
  const AffineLtiModel m = linearize_initial(p, 0.2);
  Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
  A(1, 2) = 2.0;
  CHECK((m.A - A).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(m.B[0] == 0.0);
  CHECK(m.B[1] == doctest::Approx(2.0));
  CHECK(m.B[2] == doctest::Approx(2.0 / 1.738));
  CHECK(std::abs(m.B[2] - 1.1507) < 1e-4);
  CHECK(m.K[0] == doctest::Approx(2.0));
  CHECK(m.K[1] == 0.0);
  CHECK(m.K[2] == 0.0);
  CHECK(m.input_kind == InputKind::slip);
}

TEST_CASE("initial-point model degenerates to identity at Ts = 0")
{
  const AffineLtiModel m = linearize_initial(VehicleParams{}, 0.0);
  CHECK(m.A == Eigen::Matrix3d::Identity());
  CHECK(m.B.isZero());
  CHECK(m.K.isZero());
}

TEST_CASE("initial-point model is exact at the expansion point")
{
  const VehicleParams p;
  const AffineLtiModel m = linearize_initial(p, 0.2);
  const Eigen::Vector3d next = m.step(Eigen::Vector3d::Zero(), 0.0);
  const VehicleState truth = step_nonlinear({}, 0.0, 0.2, p);
  CHECK(next[0] == doctest::Approx(p.v * 0.2));
  CHECK((next - truth.pose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("position model entries")
{
  const VehicleParams p{1.105, 1.738, 10.0};
  const AffineLtiModel m = linearize_position({0.0, 0.0}, p, 0.1);
  CHECK(m.A == Eigen::Matrix3d::Identity());
  CHECK(m.B[0] == 0.0);
  CHECK(m.B[1] == doctest::Approx(1.0));
  CHECK(std::abs(m.B[2] - 0.5754) < 1e-4);
  CHECK(m.K[0] == doctest::Approx(1.0));
  CHECK(m.K[1] == 0.0);
  CHECK(m.K[2] == 0.0);
  CHECK(m.input_kind == InputKind::slip_increment);

  const AffineLtiModel q = linearize_position({std::numbers::pi / 2, 0.0}, p, 0.1);
  CHECK(q.B[0] == doctest::Approx(-p.v * 0.1));
  CHECK(std::abs(q.B[1]) < 1e-15);
}

TEST_CASE("position model B matches central differences of the plant step")
{
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 100; ++i) {
    const VehicleParams p{uniform(rng, 0.8, 2.0), uniform(rng, 0.8, 2.5), uniform(rng, 2.0, 30.0)};
    const double Ts = uniform(rng, 0.01, 0.3);
    const VehicleState s{uniform(rng, -50, 50), uniform(rng, -50, 50),
                         uniform(rng, -std::numbers::pi, std::numbers::pi), uniform(rng, -0.4, 0.4)};
    const AffineLtiModel m = linearize_position({s.psi, s.beta}, p, Ts);
    const Eigen::Vector3d fd =
        (step_nonlinear(s, kH, Ts, p).pose() - step_nonlinear(s, -kH, Ts, p).pose()) / (2 * kH);
    CHECK(column_rel_err(m.B, fd) <= 1e-6);
  }
}

TEST_CASE("position model reproduces the zero-input plant step exactly")
{
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const VehicleParams p;
    const double Ts = uniform(rng, 0.01, 0.3);
    const VehicleState s{uniform(rng, -50, 50), uniform(rng, -50, 50), uniform(rng, -4, 4),
                         uniform(rng, -0.4, 0.4)};
    const AffineLtiModel m = linearize_position({s.psi, s.beta}, p, Ts);
    const Eigen::Vector3d model = m.step(s.pose(), 0.0);
    const Eigen::Vector3d plant = step_nonlinear(s, 0.0, Ts, p).pose();
    CHECK(model[0] == plant[0]);
    CHECK(model[1] == plant[1]);
    CHECK(model[2] == plant[2]);
  }
}

TEST_CASE("position model at the origin reduces to the initial-point model")
{
  const VehicleParams p;
  const AffineLtiModel pos = linearize_position({0.0, 0.0}, p, 0.2);
  const AffineLtiModel ini = linearize_initial(p, 0.2);
  CHECK((pos.B - ini.B).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((pos.K - ini.K).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("velocity model entries and structure")
{
  const VehicleParams p{1.105, 1.738, 10.0};
  const DeltaLtiModel m = linearize_velocity({0.0, 0.0}, p, 0.05);
  CHECK(m.A(0, 2) == 0.0);
  CHECK(m.A(1, 2) == doctest::Approx(0.5));
  CHECK(m.B[0] == 0.0);
  CHECK(m.B[1] == doctest::Approx(0.5));
  CHECK(std::abs(m.B[2] - 0.2877) < 1e-4);

  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const DeltaLtiModel v =
        linearize_velocity({uniform(rng, -4, 4), uniform(rng, -0.4, 0.4)}, p, 0.05);
    for (int r = 0; r < 3; ++r) {
      CHECK(v.A(r, r) == 1.0);
      for (int c = 0; c < r; ++c) {
        CHECK(v.A(r, c) == 0.0);
      }
    }
    CHECK(v.A(0, 1) == 0.0);
  }
}

TEST_CASE("velocity model leaves planar increments unchanged without heading change or input")
{
  const DeltaLtiModel m = linearize_velocity({0.7, 0.1}, VehicleParams{}, 0.05);
  const Eigen::Vector3d d{0.3, -0.2, 0.0};
  const Eigen::Vector3d n = m.step(d, 0.0);
  CHECK(n[0] == d[0]);
  CHECK(n[1] == d[1]);
}

TEST_CASE("velocity model rows swap under a quarter-turn of the operating heading")
{
  const VehicleParams p;
  const DeltaLtiModel a = linearize_velocity({0.3, 0.1}, p, 0.05);
  const DeltaLtiModel b = linearize_velocity({0.3 + std::numbers::pi / 2, 0.1}, p, 0.05);
  CHECK(b.B[0] == doctest::Approx(-a.B[1]));
  CHECK(b.B[1] == doctest::Approx(a.B[0]));
  CHECK(b.A(0, 2) == doctest::Approx(-a.A(1, 2)));
  CHECK(b.A(1, 2) == doctest::Approx(a.A(0, 2)));
  // The input column shares its planar rows with the heading coupling column.
  CHECK(a.B[0] == a.A(0, 2));
  CHECK(a.B[1] == a.A(1, 2));
}

TEST_CASE("velocity model matches central differences of the increment dynamics")
{
  // With the previous heading psi_p fixed and the plant having moved with slip
  // beta, the next increment is d + incr(psi_p + d_psi, beta + u) - incr(psi_p, beta).
  std::mt19937_64 rng(424242);
  for (int i = 0; i < 100; ++i) {
    const VehicleParams p{uniform(rng, 0.8, 2.0), uniform(rng, 0.8, 2.5), uniform(rng, 2.0, 30.0)};
    const double Ts = uniform(rng, 0.01, 0.3);
    const double psi_prev = uniform(rng, -std::numbers::pi, std::numbers::pi);
    const double beta = uniform(rng, -0.4, 0.4);
    const Eigen::Vector3d d0 = increment(psi_prev, beta, Ts, p);

    auto next = [&](const Eigen::Vector3d & d, double u) -> Eigen::Vector3d {
      return d + increment(psi_prev + d[2], beta + u, Ts, p) - increment(psi_prev, beta, Ts, p);
    };

    const DeltaLtiModel m = linearize_velocity({psi_prev + d0[2], beta}, p, Ts);

    const Eigen::Vector3d fd_u = (next(d0, kH) - next(d0, -kH)) / (2 * kH);
    CHECK(column_rel_err(m.B, fd_u) <= 1e-6);

    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e[2] = kH;
    const Eigen::Vector3d fd_psi = (next(d0 + e, 0.0) - next(d0 - e, 0.0)) / (2 * kH);
    CHECK(column_rel_err(m.A.col(2), fd_psi) <= 1e-6);
  }
}
