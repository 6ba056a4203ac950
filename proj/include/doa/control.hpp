#pragma once

// Discrete PID, fractional-order PID and fuzzy-scheduled fractional-order PID
// with output saturation and conditional-integration anti-windup.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "doa/error.hpp"
#include "doa/fractional.hpp"
#include "doa/fuzzy.hpp"

namespace doa {

enum class Variant { pid, fopid, fofpid };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::pid: return "pid";
    case Variant::fopid: return "fopid";
    case Variant::fofpid: return "fofpid";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "pid") return Variant::pid;
  if (s == "fopid") return Variant::fopid;
  if (s == "fofpid") return Variant::fofpid;
  throw ParseError("unknown controller variant '" + std::string(s) + "'");
}

struct ControllerSpec {
  Variant variant = Variant::pid;
  double kp = 0.0, ki = 0.0, kd = 0.0;
  double alpha = 1.0, beta = 1.0;  // integral order, derivative order
  std::optional<FuzzySystem> fuzzy;
  double u_max = 200.0;            // mg/min
  double sample_time = 1.0 / 60.0; // min
  std::size_t memory_len = GlOperator::kDefaultMemory;

  double integral_order() const { return variant == Variant::pid ? -1.0 : -alpha; }
  double derivative_order() const { return variant == Variant::pid ? 1.0 : beta; }

  void validate() const {
    if (!(kp >= 0.0 && ki >= 0.0 && kd >= 0.0))
      throw std::invalid_argument("ControllerSpec: gains must be >= 0");
    if (variant != Variant::pid &&
        !(alpha >= kMinOrder && alpha <= kMaxOrder && beta >= kMinOrder && beta <= kMaxOrder))
      throw std::invalid_argument("ControllerSpec: fractional orders must lie in [0.01, 2]");
    if (!(u_max > 0.0)) throw std::invalid_argument("ControllerSpec: u_max must be > 0");
    if (!(sample_time > 0.0)) throw std::invalid_argument("ControllerSpec: sample_time must be > 0");
    if (variant == Variant::fofpid && (!fuzzy || !fuzzy->valid()))
      throw std::invalid_argument("ControllerSpec: FOFPID requires a valid fuzzy system");
  }
};

class Controller {
 public:
  explicit Controller(ControllerSpec spec)
      : spec_(std::move(spec)),
        integral_(spec_.integral_order(), spec_.sample_time, spec_.memory_len),
        derivative_(spec_.derivative_order(), spec_.sample_time, spec_.memory_len) {
    spec_.validate();
    gains_ = {spec_.kp, spec_.ki, spec_.kd};
  }

  const ControllerSpec& spec() const { return spec_; }
  const GlOperator& integral_operator() const { return integral_; }
  const GlOperator& derivative_operator() const { return derivative_; }

  /// Gains applied at the most recent step (scheduled ones for FOFPID).
  const std::array<double, 3>& last_gains() const { return gains_; }

  /// Infusion rate in [0, u_max] for one sample. The error is
  /// bis_measured - setpoint, so a BIS above target calls for more drug.
  double step(double bis_measured, double setpoint) {
    if (!std::isfinite(bis_measured))
      throw NumericInputError("controller received a non-finite BIS sample");
    const double ts = spec_.sample_time;
    const double e = bis_measured - setpoint;
    const double de = (e - e_prev_) / ts;
    e_prev_ = e;

    if (spec_.variant == Variant::fofpid) gains_ = schedule_gains(*spec_.fuzzy, e, de);
    const auto [kp, ki, kd] = gains_;

    const double d_term = derivative_.step(e);
    const double i_try = integral_.peek(e);
    const double raw_try = kp * e + ki * i_try + kd * d_term;
    const bool saturated = raw_try > spec_.u_max || raw_try < 0.0;
    const double i_term = (saturated && raw_try * e > 0.0) ? integral_.step(0.0) : integral_.step(e);
    const double raw = kp * e + ki * i_term + kd * d_term;
    return std::clamp(raw, 0.0, spec_.u_max);
  }

  void reset() {
    integral_.reset();
    derivative_.reset();
    e_prev_ = 0.0;
    gains_ = {spec_.kp, spec_.ki, spec_.kd};
  }

 private:
  ControllerSpec spec_;
  GlOperator integral_;
  GlOperator derivative_;
  double e_prev_ = 0.0;
  std::array<double, 3> gains_{};
};

inline std::size_t gene_count(Variant v, bool with_rules = false) {
  switch (v) {
    case Variant::pid: return 3;
    case Variant::fopid: return 5;
    case Variant::fofpid: return kFuzzyGenes + (with_rules ? kRuleGenes : 0);
  }
  return 0;
}

/// PID: [Kp, Ki, Kd]; FOPID: [Kp, Ki, Kd, alpha, beta]; FOFPID: the fuzzy
/// gene layout (20, or 95 with rule genes).
inline std::vector<double> encode_controller_genes(const ControllerSpec& spec,
                                                   bool with_rules = false) {
  switch (spec.variant) {
    case Variant::pid: return {spec.kp, spec.ki, spec.kd};
    case Variant::fopid: return {spec.kp, spec.ki, spec.kd, spec.alpha, spec.beta};
    case Variant::fofpid:
      if (!spec.fuzzy) throw LayoutError("FOFPID spec has no fuzzy system");
      return encode_fuzzy_genes(*spec.fuzzy, spec.alpha, spec.beta, with_rules);
  }
  return {};
}

/// Builds a spec from genes; `base` supplies u_max, sample time and memory
/// length. Out-of-range genes are clamped into bounds.
inline ControllerSpec decode_controller_genes(Variant variant, std::span<const double> g,
                                              const ControllerSpec& base = {}) {
  ControllerSpec s;
  s.variant = variant;
  s.u_max = base.u_max;
  s.sample_time = base.sample_time;
  s.memory_len = base.memory_len;
  auto gain = [](double v) { return std::isfinite(v) ? std::max(v, 0.0) : 0.0; };
  auto order = [](double v) { return std::clamp(v, kMinOrder, kMaxOrder); };
  switch (variant) {
    case Variant::pid:
    case Variant::fopid: {
      const std::size_t n = gene_count(variant);
      if (g.size() != n)
        throw LayoutError(std::string(to_string(variant)) + " gene vector has length " +
                          std::to_string(g.size()) + ", expected " + std::to_string(n));
      s.kp = gain(g[0]);
      s.ki = gain(g[1]);
      s.kd = gain(g[2]);
      if (variant == Variant::fopid) {
        s.alpha = order(g[3]);
        s.beta = order(g[4]);
      }
      break;
    }
    case Variant::fofpid: {
      auto genome = decode_fuzzy_genes(g);
      s.alpha = genome.alpha;
      s.beta = genome.beta;
      s.kp = genome.system.gp;
      s.ki = genome.system.gi;
      s.kd = genome.system.gd;
      s.fuzzy = std::move(genome.system);
      break;
    }
  }
  return s;
}

}  // namespace doa
