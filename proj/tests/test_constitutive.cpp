#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/samplers.hpp"
#include "support/test_rng.hpp"
#include "tecd/constitutive.hpp"

using namespace tecd;
using tecd::testing::Rng;

TEST_CASE("density from deformation gradient") {
  CHECK(density_from_F<double>(Mat::Identity(2, 2)) == doctest::Approx(1.0));
  Mat F = Mat::Zero(2, 2);
  F(0, 0) = 0.5;
  F(1, 1) = 1.0;
  CHECK(density_from_F<double>(F) == doctest::Approx(2.0));
  Mat G = Mat::Zero(3, 3);
  G(0, 0) = 1.0;
  G(1, 1) = 2.0;
  G(2, 2) = 0.5;
  CHECK(density_from_F<double>(G) == doctest::Approx(1.0));

  Mat bad = Mat::Identity(2, 2);
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(density_from_F<double>(bad), NonOrientationPreserving);
}

TEST_CASE("density scaling rho(alpha F) = alpha^-d rho(F)") {
  Rng rng(11);
  for (int d : {2, 3}) {
    const MaterialParams mp = MaterialParams::make(d);
    for (int k = 0; k < 200; ++k) {
      const ThermoState st = testing::random_admissible_state(rng, mp);
      const double alpha = rng.uniform(0.5, 2.0);
      const double lhs = density_from_F<double>(Mat(alpha * st.F));
      const double rhs = std::pow(alpha, -d) * density_from_F<double>(st.F);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST_CASE("gamma-law evaluation") {
  MaterialParams mp = MaterialParams::make(2, 1.4);
  EosEval ev = eos_eval(1.0, 0.0, mp);
  CHECK(ev.p == doctest::Approx(1.0));
  CHECK(ev.c2 == doctest::Approx(1.4));
  CHECK(ev.e == doctest::Approx(2.5));

  mp = MaterialParams::make(2, 2.0);
  ev = eos_eval(1.0, 0.0, mp);
  CHECK(ev.p == doctest::Approx(1.0));
  CHECK(ev.c2 == doctest::Approx(2.0));
  CHECK(ev.e == doctest::Approx(1.0));

  CHECK_THROWS_AS(eos_eval(-1.0, 0.0, mp), InvalidDensity);

  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    const double rho = rng.uniform(0.2, 3.0);
    const double S = rng.uniform(-1.0, 1.0);
    const EosEval e = eos_eval(rho, S, mp);
    CHECK(e.c2 > 0.0);
    CHECK(e.theta > 0.0);
  }
}

TEST_CASE("finite-difference dp/drho matches analytic c^2") {
  Rng rng(7);
  const MaterialParams mp = MaterialParams::make(2, 1.4);
  for (int k = 0; k < 50; ++k) {
    const double rho = rng.uniform(0.3, 2.5);
    const double S = rng.uniform(-0.8, 0.8);
    const double h = 1e-6 * rho;
    const double fd =
        (mp.eos.eval(rho + h, S).p - mp.eos.eval(rho - h, S).p) / (2.0 * h);
    const double c2 = mp.eos.eval(rho, S).c2;
    CHECK(std::abs(fd - c2) <= 1e-6 * std::abs(c2));
  }
}

TEST_CASE("internal energy values") {
  MaterialParams mp = MaterialParams::make(2, 1.4);
  CHECK(internal_energy(Mat::Identity(2, 2), 0.0, mp) == doctest::Approx(3.5));
  mp = MaterialParams::make(3, 2.0);
  CHECK(internal_energy(Mat::Identity(3, 3), 0.0, mp) == doctest::Approx(2.5));
}

TEST_CASE("frame indifference of the internal energy") {
  Rng rng(13);
  for (int d : {2, 3}) {
    const MaterialParams mp = MaterialParams::make(d, 1.4);
    for (int k = 0; k < 500; ++k) {
      const ThermoState st = testing::random_admissible_state(rng, mp);
      const Mat Q = testing::random_rotation(rng, d);
      const double e0 = internal_energy(st.F, st.S, mp);
      const double e1 = internal_energy(Mat(Q * st.F), st.S, mp);
      CHECK(std::abs(e1 - e0) <= 1e-12 * (1.0 + std::abs(e0)));
    }
  }
}

TEST_CASE("cauchy stress") {
  const MaterialParams mp = MaterialParams::make(2, 1.4);
  ThermoState st;
  st.F = Mat::Identity(2, 2);
  st.v = Eigen::VectorXd::Zero(2);
  st.S = 0.0;

  st.p = 1.0;
  CHECK(cauchy_stress(st, mp).norm() == doctest::Approx(0.0));

  st.p = 0.0;
  CHECK((cauchy_stress(st, mp) - Mat::Identity(2, 2)).norm() == doctest::Approx(0.0));

  Rng rng(3);
  for (int d : {2, 3}) {
    const MaterialParams m3 = MaterialParams::make(d, 1.4);
    for (int k = 0; k < 100; ++k) {
      const ThermoState s = testing::random_admissible_state(rng, m3);
      const Mat T = cauchy_stress(s, m3);
      CHECK((T - T.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
    }
  }
}

TEST_CASE("state vector round trip") {
  Rng rng(17);
  for (int d : {2, 3}) {
    const MaterialParams mp = MaterialParams::make(d);
    const ThermoState st = testing::random_admissible_state(rng, mp);
    const ThermoState back = ThermoState::from_vector(st.to_vector(mp), mp);
    CHECK((back.F - st.F).norm() == 0.0);
    CHECK((back.v - st.v).norm() == 0.0);
    CHECK(back.p == st.p);
    CHECK(back.S == st.S);
  }
}
