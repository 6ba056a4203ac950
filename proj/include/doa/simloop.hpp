#pragma once

// Closed-loop patient + controller simulation, IAE/ITAE metrics and the
// tuning objective.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "doa/control.hpp"
#include "doa/error.hpp"
#include "doa/patient.hpp"

namespace doa {

struct SimConfig {
  double horizon = 30.0;             // min
  int plant_substeps = 6;            // RK4 steps per control sample
  double setpoint = 50.0;            // BIS
  double sample_time = 1.0 / 60.0;   // min
  double settle_halfwidth = 5.0;     // settling band is setpoint +- this
  double safe_lo = 40.0, safe_hi = 60.0;
  double steady_window = 5.0;        // min, tail used for steady-state error

  std::size_t samples() const {
    return static_cast<std::size_t>(std::llround(horizon / sample_time));
  }

  void validate() const {
    if (!(horizon > 0.0)) throw std::invalid_argument("SimConfig: horizon must be > 0");
    if (plant_substeps < 1) throw std::invalid_argument("SimConfig: plant_substeps must be >= 1");
    if (!(sample_time > 0.0)) throw std::invalid_argument("SimConfig: sample_time must be > 0");
  }
};

struct Metrics {
  double iae = 0.0;    // BIS min
  double itae = 0.0;   // BIS min^2
  double cost = 0.0;   // iae + itae
  double settling_time = 0.0;  // min; equals the horizon when not settled
  bool settled = true;
  double steady_state_error = 0.0;
  double min_bis = 0.0;
  double time_in_band = 0.0;   // fraction of samples with BIS in [safe_lo, safe_hi]
};

struct SimResult {
  int patient_id = 0;
  std::vector<double> t, bis, ce, cp, x1, x2, x3, u, kp, ki, kd;
  Metrics metrics;

  std::size_t size() const { return t.size(); }
};

/// Metrics of a BIS series sampled every cfg.sample_time from t = 0.
/// Integrals use the left rectangle rule.
inline Metrics compute_metrics(std::span<const double> bis, const SimConfig& cfg) {
  if (bis.empty()) throw std::invalid_argument("compute_metrics: empty series");
  const double ts = cfg.sample_time;
  const std::size_t n = bis.size();
  Metrics m;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double ae = std::abs(bis[k] - cfg.setpoint);
    m.iae += ae * ts;
    m.itae += static_cast<double>(k) * ts * ae * ts;
  }
  m.cost = m.iae + m.itae;

  const double horizon = static_cast<double>(n - 1) * ts;
  std::optional<std::size_t> last_out;
  std::size_t in_band = 0;
  double tail_sum = 0.0;
  std::size_t tail_n = 0;
  m.min_bis = bis[0];
  for (std::size_t k = 0; k < n; ++k) {
    const double b = bis[k];
    const double t = static_cast<double>(k) * ts;
    m.min_bis = std::min(m.min_bis, b);
    if (std::abs(b - cfg.setpoint) > cfg.settle_halfwidth) last_out = k;
    if (b >= cfg.safe_lo && b <= cfg.safe_hi) ++in_band;
    if (t >= horizon - cfg.steady_window - 1e-9) {
      tail_sum += std::abs(b - cfg.setpoint);
      ++tail_n;
    }
  }
  if (!last_out) {
    m.settling_time = 0.0;
  } else if (*last_out + 1 >= n) {
    m.settling_time = horizon;
    m.settled = false;
  } else {
    m.settling_time = static_cast<double>(*last_out + 1) * ts;
  }
  m.steady_state_error = tail_sum / static_cast<double>(tail_n);
  m.time_in_band = static_cast<double>(in_band) / static_cast<double>(n);
  return m;
}

/// Runs the plant from the drug-free state. `policy(bis, k)` returns the
/// infusion for sample k (held over the sample) and may report gains via
/// `gains`. Throws DivergenceError on a non-finite state.
template <class Policy>
SimResult simulate_with(const PatientProfile& prof, const SimConfig& cfg, Policy&& policy) {
  cfg.validate();
  validate_profile(prof);
  const PkParams pk = derive_pk_params(prof);
  const std::size_t n = cfg.samples();
  const double ts = cfg.sample_time;
  const double h = ts / cfg.plant_substeps;

  SimResult r;
  r.patient_id = prof.id;
  for (auto* v : {&r.t, &r.bis, &r.ce, &r.cp, &r.x1, &r.x2, &r.x3, &r.u, &r.kp, &r.ki, &r.kd})
    v->reserve(n + 1);

  PkPdState s;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * ts;
    const double bis = bis_output(s.ce, prof);
    if (!s.finite() || !std::isfinite(bis))
      throw DivergenceError("patient " + std::to_string(prof.id) + ": state diverged", t);
    std::array<double, 3> gains{0.0, 0.0, 0.0};
    const double u = policy(bis, k, gains);
    r.t.push_back(t);
    r.bis.push_back(bis);
    r.ce.push_back(s.ce);
    r.cp.push_back(plasma_concentration(s, pk));
    r.x1.push_back(s.x1);
    r.x2.push_back(s.x2);
    r.x3.push_back(s.x3);
    r.u.push_back(u);
    r.kp.push_back(gains[0]);
    r.ki.push_back(gains[1]);
    r.kd.push_back(gains[2]);
    if (k == n) break;
    for (int j = 0; j < cfg.plant_substeps; ++j) s = rk4_step(s, u, pk, prof, h);
  }
  r.metrics = compute_metrics(r.bis, cfg);
  return r;
}

inline SimResult simulate(const PatientProfile& prof, const ControllerSpec& spec,
                          const SimConfig& cfg) {
  ControllerSpec cs = spec;
  cs.sample_time = cfg.sample_time;
  Controller ctrl(std::move(cs));
  const double u_max = ctrl.spec().u_max;
  return simulate_with(prof, cfg, [&](double bis, std::size_t k, std::array<double, 3>& gains) {
    const double u = ctrl.step(bis, cfg.setpoint);
    if (!(u >= 0.0 && u <= u_max))
      throw DivergenceError("infusion left [0, u_max]", static_cast<double>(k) * cfg.sample_time);
    gains = ctrl.last_gains();
    return u;
  });
}

inline constexpr double kPenaltyCost = 1e9;
inline constexpr double kOverdoseFloor = 20.0;

/// Penalty for a run that failed at t_fail: >= 1e9, larger for earlier failures.
inline double failure_penalty(double t_fail, double horizon) {
  const double frac = std::clamp(t_fail / horizon, 0.0, 1.0);
  return kPenaltyCost + 1e6 * (1.0 - frac);
}

/// Tuning cost of a gene vector: IAE + ITAE summed over `patients` (usually
/// just the nominal one). Divergence or BIS below 20 returns a penalty.
struct Objective {
  Variant variant = Variant::fopid;
  std::vector<PatientProfile> patients;
  SimConfig sim;
  ControllerSpec base;

  double operator()(std::span<const double> genes) const {
    const ControllerSpec spec = decode_controller_genes(variant, genes, base);
    double total = 0.0;
    double worst_penalty = 0.0;
    for (const auto& p : patients) {
      try {
        const SimResult r = simulate(p, spec, sim);
        if (r.metrics.min_bis < kOverdoseFloor) {
          const auto it = std::find_if(r.bis.begin(), r.bis.end(),
                                       [](double b) { return b < kOverdoseFloor; });
          const double t_fail = r.t[static_cast<std::size_t>(it - r.bis.begin())];
          worst_penalty = std::max(worst_penalty, failure_penalty(t_fail, sim.horizon));
        }
        total += r.metrics.cost;
      } catch (const DivergenceError& e) {
        worst_penalty = std::max(worst_penalty, failure_penalty(e.time_min, sim.horizon));
      } catch (const NumericInputError&) {
        worst_penalty = std::max(worst_penalty, failure_penalty(0.0, sim.horizon));
      }
    }
    return worst_penalty > 0.0 ? worst_penalty : total;
  }
};

struct CohortRow {
  int patient_id = 0;
  std::optional<Metrics> metrics;  // empty when the run diverged
  std::string error;
};

inline std::vector<CohortRow> evaluate_cohort(const ControllerSpec& spec,
                                              std::span<const PatientProfile> registry,
                                              const SimConfig& cfg) {
  if (registry.empty()) throw std::invalid_argument("evaluate_cohort: empty registry");
  std::vector<CohortRow> rows;
  for (const auto& p : registry) {
    CohortRow row;
    row.patient_id = p.id;
    try {
      row.metrics = simulate(p, spec, cfg).metrics;
    } catch (const DivergenceError& e) {
      row.error = e.what();
    } catch (const NumericInputError& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace doa
