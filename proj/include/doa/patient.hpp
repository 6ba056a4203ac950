#pragma once

// Propofol three-compartment PK model with effect-site PD and the Hill/BIS map.
// Units: mg, L, minutes. Infusion u is in mg/min.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "doa/error.hpp"

namespace doa {

enum class Sex { male, female };

inline std::string_view to_string(Sex s) { return s == Sex::male ? "male" : "female"; }

inline Sex parse_sex(std::string_view s) {
  if (s == "male" || s == "m" || s == "M") return Sex::male;
  if (s == "female" || s == "f" || s == "F") return Sex::female;
  throw ParseError("unknown sex '" + std::string(s) + "'");
}

struct PatientProfile {
  int id = 1;
  double age = 53.0;       // years
  double weight = 77.0;    // kg
  double height = 177.0;   // cm
  Sex sex = Sex::male;
  double ke0 = 0.456;      // 1/min
  double ec50 = 4.0;       // mg/L
  double gamma = 2.5;
  double bis0 = 100.0;
};

struct PkParams {
  double v1, v2, v3;
  double cl1, cl2, cl3;
  double k10, k12, k13, k21, k31;
  double lbm;
};

struct PkPdState {
  double x1 = 0.0, x2 = 0.0, x3 = 0.0;  // mg
  double ce = 0.0;                      // mg/L

  PkPdState& operator+=(const PkPdState& o) {
    x1 += o.x1; x2 += o.x2; x3 += o.x3; ce += o.ce;
    return *this;
  }
  friend PkPdState operator+(PkPdState a, const PkPdState& b) { return a += b; }
  friend PkPdState operator*(double s, PkPdState a) {
    a.x1 *= s; a.x2 *= s; a.x3 *= s; a.ce *= s;
    return a;
  }
  bool finite() const {
    return std::isfinite(x1) && std::isfinite(x2) && std::isfinite(x3) && std::isfinite(ce);
  }
};

// Plausibility range the demographic formulas are applied in.
struct DemographicBounds {
  double age_min = 1, age_max = 110;
  double weight_min = 20, weight_max = 250;
  double height_min = 100, height_max = 230;
};

inline double derive_lbm(Sex sex, double weight_kg, double height_cm) {
  if (!(weight_kg > 0.0) || !(height_cm > 0.0))
    throw InvalidDemographics("weight and height must be positive");
  const double ratio = (weight_kg * weight_kg) / (height_cm * height_cm);
  const double lbm = sex == Sex::male ? 1.1 * weight_kg - 128.0 * ratio
                                      : 1.07 * weight_kg - 148.0 * ratio;
  if (!(lbm > 0.0))
    throw InvalidDemographics("lean body mass is not positive for weight " +
                              std::to_string(weight_kg) + " kg, height " +
                              std::to_string(height_cm) + " cm");
  return lbm;
}

/// Checks the PatientProfile invariants and the demographic sanity bounds.
/// Throws InvalidDemographics naming the offending field.
inline void validate_profile(const PatientProfile& p, const DemographicBounds& b = {}) {
  auto fail = [&](const std::string& field, double v) {
    throw InvalidDemographics("patient " + std::to_string(p.id) + ": invalid " + field +
                              " = " + std::to_string(v));
  };
  if (!(p.age >= b.age_min && p.age <= b.age_max)) fail("age", p.age);
  if (!(p.weight >= b.weight_min && p.weight <= b.weight_max)) fail("weight_kg", p.weight);
  if (!(p.height >= b.height_min && p.height <= b.height_max)) fail("height_cm", p.height);
  if (!(p.ke0 > 0.0) || !std::isfinite(p.ke0)) fail("ke0", p.ke0);
  if (!(p.ec50 > 0.0) || !std::isfinite(p.ec50)) fail("ec50", p.ec50);
  if (!(p.gamma > 0.0) || !std::isfinite(p.gamma)) fail("gamma", p.gamma);
  if (!(p.bis0 > 0.0 && p.bis0 <= 100.0)) fail("bis0", p.bis0);
}

/// Volumes, clearances and transfer rates from demographics. `lbm_override`
/// bypasses the lean-body-mass formula.
inline PkParams derive_pk_params(const PatientProfile& p,
                                 std::optional<double> lbm_override = std::nullopt) {
  if (!(p.age > 0.0)) throw InvalidDemographics("age must be positive");
  PkParams k{};
  k.lbm = lbm_override ? *lbm_override : derive_lbm(p.sex, p.weight, p.height);
  k.v1 = 4.27;
  k.v2 = 18.9 - 0.391 * (p.age - 53.0);
  k.v3 = 238.0;
  k.cl1 = 1.89 + 0.0456 * (p.weight - 77.0) + 0.0264 * (p.height - 177.0) -
          0.0681 * (k.lbm - 59.0);
  k.cl2 = 1.29 - 0.024 * (p.age - 53.0);
  k.cl3 = 0.836;
  for (double v : {k.lbm, k.v2, k.cl1, k.cl2}) {
    if (!(v > 0.0))
      throw InvalidDemographics("patient " + std::to_string(p.id) +
                                ": derived volume/clearance is not positive");
  }
  k.k10 = k.cl1 / k.v1;
  k.k12 = k.cl2 / k.v1;
  k.k13 = k.cl3 / k.v1;
  k.k21 = k.cl2 / k.v2;
  k.k31 = k.cl3 / k.v3;
  return k;
}

inline double plasma_concentration(const PkPdState& s, const PkParams& pk) { return s.x1 / pk.v1; }

inline PkPdState pkpd_derivative(const PkPdState& s, double u, const PkParams& pk,
                                 const PatientProfile& prof) {
  PkPdState d;
  d.x1 = -(pk.k10 + pk.k12 + pk.k13) * s.x1 + pk.k21 * s.x2 + pk.k31 * s.x3 + u;
  d.x2 = pk.k12 * s.x1 - pk.k21 * s.x2;
  d.x3 = pk.k13 * s.x1 - pk.k31 * s.x3;
  d.ce = prof.ke0 * (s.x1 / pk.v1 - s.ce);
  return d;
}

// Classic fixed-step RK4 with u held constant over the step.
inline PkPdState rk4_step(const PkPdState& s, double u, const PkParams& pk,
                          const PatientProfile& prof, double h) {
  const PkPdState k1 = pkpd_derivative(s, u, pk, prof);
  const PkPdState k2 = pkpd_derivative(s + (0.5 * h) * k1, u, pk, prof);
  const PkPdState k3 = pkpd_derivative(s + (0.5 * h) * k2, u, pk, prof);
  const PkPdState k4 = pkpd_derivative(s + h * k3, u, pk, prof);
  return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline double bis_output(double ce, const PatientProfile& prof) {
  const double c = std::max(ce, 0.0);
  const double cg = std::pow(c, prof.gamma);
  const double eg = std::pow(prof.ec50, prof.gamma);
  return prof.bis0 * (1.0 - cg / (cg + eg));
}

/// Built-in stand-in cohort of eight profiles. Patient 1 is the nominal
/// patient (53 y, 77 kg, 177 cm, male, default PD constants); the others
/// span age 20-70, weight 50-100 kg, height 155-190 cm and vary ke0, EC50
/// and the Hill exponent within +-30% of the nominal values.
inline std::vector<PatientProfile> default_registry() {
  return {
      {1, 53, 77, 177, Sex::male, 0.456, 4.0, 2.5, 100},
      {2, 20, 60, 165, Sex::female, 0.55, 3.2, 2.2, 98},
      {3, 35, 100, 190, Sex::male, 0.38, 4.8, 2.9, 100},
      {4, 45, 50, 155, Sex::female, 0.52, 3.5, 3.0, 97},
      {5, 60, 90, 180, Sex::male, 0.35, 4.5, 2.0, 100},
      {6, 70, 65, 160, Sex::female, 0.40, 5.0, 2.7, 95},
      {7, 28, 85, 185, Sex::male, 0.59, 3.0, 2.3, 98},
      {8, 65, 55, 158, Sex::female, 0.33, 4.4, 3.2, 96},
  };
}

}  // namespace doa
