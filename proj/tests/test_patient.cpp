#include <catch2/catch_amalgamated.hpp>

#include "doa/patient.hpp"

#include <cmath>
#include <random>

using namespace doa;
using Catch::Approx;

TEST_CASE("lean body mass formula", "[patient]") {
  // 1.1*77 - 128*77^2/177^2, evaluated independently.
  CHECK(derive_lbm(Sex::male, 77, 177) == Approx(60.47605413514635).margin(1e-9));
  CHECK(derive_lbm(Sex::female, 60, 165) ==
        Approx(1.07 * 60 - 148 * 3600.0 / 27225.0).margin(1e-12));

  CHECK_THROWS_AS(derive_lbm(Sex::male, 0.0, 177), InvalidDemographics);
  CHECK_THROWS_AS(derive_lbm(Sex::female, 60, -1), InvalidDemographics);
  // W/H^2 large enough that 148 W^2/H^2 >= 1.07 W.
  const double h = 100.0;
  const double w_degenerate = 1.07 * h * h / 148.0;
  CHECK_THROWS_AS(derive_lbm(Sex::female, w_degenerate * 1.01, h), InvalidDemographics);
  CHECK_THROWS_AS(derive_lbm(Sex::female, w_degenerate * 1.5, h), InvalidDemographics);
}

TEST_CASE("pk parameters of the nominal patient", "[patient]") {
  const PatientProfile p;  // 53 y, 77 kg, 177 cm, male
  const PkParams k = derive_pk_params(p);
  CHECK(k.v1 == 4.27);
  CHECK(k.v2 == 18.9);
  CHECK(k.v3 == 238.0);
  CHECK(k.cl3 == 0.836);
  CHECK(k.lbm == Approx(60.476).margin(1e-3));
  CHECK(k.cl1 == Approx(1.7895).margin(1e-3));
  CHECK(k.k10 == Approx(0.4191).margin(1e-3));
  CHECK(k.k12 == Approx(0.30211).margin(1e-3));
  CHECK(k.k21 == Approx(0.068254).margin(1e-3));
  CHECK(k.k31 == Approx(0.0035126).margin(1e-3));

  const PkParams forced = derive_pk_params(p, 59.0);
  CHECK(forced.cl1 == 1.89);
}

TEST_CASE("rate constant identities hold for the whole registry", "[patient]") {
  for (const auto& p : default_registry()) {
    const PkParams k = derive_pk_params(p);
    CHECK(k.k10 == k.cl1 / k.v1);
    CHECK(k.k12 == k.cl2 / k.v1);
    CHECK(k.k13 == k.cl3 / k.v1);
    CHECK(k.k21 == k.cl2 / k.v2);
    CHECK(k.k31 == k.cl3 / k.v3);
    for (double v : {k.v1, k.v2, k.v3, k.cl1, k.cl2, k.cl3, k.k10, k.k12, k.k13, k.k21, k.k31,
                     k.lbm})
      CHECK(v > 0.0);
  }
}

TEST_CASE("default registry spans the documented ranges", "[patient]") {
  const auto reg = default_registry();
  REQUIRE(reg.size() == 8);
  bool male = false, female = false;
  double age_lo = 1e9, age_hi = 0, w_lo = 1e9, w_hi = 0, h_lo = 1e9, h_hi = 0;
  for (const auto& p : reg) {
    CHECK_NOTHROW(validate_profile(p));
    (p.sex == Sex::male ? male : female) = true;
    age_lo = std::min(age_lo, p.age), age_hi = std::max(age_hi, p.age);
    w_lo = std::min(w_lo, p.weight), w_hi = std::max(w_hi, p.weight);
    h_lo = std::min(h_lo, p.height), h_hi = std::max(h_hi, p.height);
    CHECK(std::abs(p.ke0 / 0.456 - 1.0) <= 0.3);
    CHECK(std::abs(p.ec50 / 4.0 - 1.0) <= 0.3);
    CHECK(std::abs(p.gamma / 2.5 - 1.0) <= 0.3);
  }
  CHECK((male && female));
  CHECK(age_lo == 20);
  CHECK(age_hi == 70);
  CHECK(w_lo == 50);
  CHECK(w_hi == 100);
  CHECK(h_lo == 155);
  CHECK(h_hi == 190);
}

TEST_CASE("validate_profile rejects out-of-range records", "[patient]") {
  PatientProfile p;
  p.weight = -3;
  CHECK_THROWS_AS(validate_profile(p), InvalidDemographics);
  p = {};
  p.bis0 = 101;
  CHECK_THROWS_AS(validate_profile(p), InvalidDemographics);
  p = {};
  p.age = 120;
  CHECK_THROWS_AS(validate_profile(p), InvalidDemographics);
  p = {};
  p.gamma = 0;
  CHECK_THROWS_AS(validate_profile(p), InvalidDemographics);
}

TEST_CASE("pkpd derivative", "[patient]") {
  const PatientProfile prof;
  const PkParams pk = derive_pk_params(prof);
  const PkPdState zero;

  const PkPdState d0 = pkpd_derivative(zero, 0.0, pk, prof);
  CHECK(d0.x1 == 0.0);
  CHECK(d0.x2 == 0.0);
  CHECK(d0.x3 == 0.0);
  CHECK(d0.ce == 0.0);

  const PkPdState du = pkpd_derivative(zero, 10.0, pk, prof);
  CHECK(du.x1 == 10.0);
  CHECK(du.x2 == 0.0);
  CHECK(du.x3 == 0.0);
  CHECK(du.ce == 0.0);

  PkParams closed = pk;
  closed.k10 = 0.0;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> amount(0.0, 200.0);
  for (int i = 0; i < 50; ++i) {
    const PkPdState s{amount(rng), amount(rng), amount(rng), amount(rng) / 50};
    const PkPdState d = pkpd_derivative(s, 0.0, closed, prof);
    CHECK(d.x1 + d.x2 + d.x3 == Approx(0.0).margin(1e-12 * (s.x1 + s.x2 + s.x3)));
  }
}

TEST_CASE("BIS Hill map", "[patient]") {
  PatientProfile p;
  CHECK(bis_output(0.0, p) == p.bis0);
  CHECK(std::abs(bis_output(p.ec50, p) - p.bis0 / 2) <= 1e-12);

  p.bis0 = 100;
  p.gamma = 2;
  p.ec50 = 4;
  CHECK(bis_output(8.0, p) == Approx(20.0).margin(1e-12));

  // Strictly decreasing on a 1000-point grid over [0, 10 EC50].
  const PatientProfile nominal;
  double prev = bis_output(0.0, nominal);
  for (int i = 1; i < 1000; ++i) {
    const double b = bis_output(10.0 * nominal.ec50 * i / 999.0, nominal);
    REQUIRE(b < prev);
    REQUIRE(b > 0.0);
    prev = b;
  }
}

TEST_CASE("RK4 conserves drug mass without elimination", "[patient]") {
  const PatientProfile prof;
  PkParams pk = derive_pk_params(prof);
  pk.k10 = 0.0;
  PkPdState s{40.0, 10.0, 5.0, 0.0};
  const double m0 = s.x1 + s.x2 + s.x3;
  const double h = 1.0 / 60.0;
  for (int k = 0; k < 3600; ++k) s = rk4_step(s, 0.0, pk, prof, h);
  CHECK(std::abs(s.x1 + s.x2 + s.x3 - m0) / m0 < 1e-9);
}

TEST_CASE("states stay nonnegative under bounded infusion", "[patient][property]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> rate(0.0, 200.0);
  const double h = 1.0 / 360.0;
  for (const auto& prof : default_registry()) {
    const PkParams pk = derive_pk_params(prof);
    PkPdState s;
    double u = 0.0;
    for (int k = 0; k < 120 * 60; ++k) {
      if (k % 60 == 0) u = rate(rng) * (rng() % 3 == 0 ? 0.0 : 1.0);
      for (int j = 0; j < 6; ++j) s = rk4_step(s, u, pk, prof, h);
      REQUIRE(s.x1 >= -1e-9);
      REQUIRE(s.x2 >= -1e-9);
      REQUIRE(s.x3 >= -1e-9);
      REQUIRE(s.ce >= -1e-9);
    }
  }
}
