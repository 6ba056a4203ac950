#pragma once

// Mamdani fuzzy gain scheduler: (error, error rate) -> three normalized gains.
// Min-AND rule firing, max aggregation, centroid on a 201-point output grid.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "doa/error.hpp"

namespace doa {

inline constexpr int kTerms = 5;
inline constexpr int kDefuzzGrid = 201;

/// Five triangular terms peaked at ascending centers; the outer terms are
/// shoulders, so memberships always sum to one on the universe.
struct TriPartition {
  std::array<double, kTerms> centers{};

  double lo() const { return centers.front(); }
  double hi() const { return centers.back(); }

  bool valid() const {
    for (int i = 1; i < kTerms; ++i)
      if (!(centers[i - 1] < centers[i])) return false;
    return true;
  }

  std::array<double, kTerms> fuzzify(double x) const {
    std::array<double, kTerms> mu{};
    x = std::clamp(x, lo(), hi());
    for (int s = 0; s < kTerms - 1; ++s) {
      if (x <= centers[s + 1]) {
        const double right = (x - centers[s]) / (centers[s + 1] - centers[s]);
        mu[s] = 1.0 - right;
        mu[s + 1] = right;
        return mu;
      }
    }
    mu[kTerms - 1] = 1.0;
    return mu;
  }

  friend bool operator==(const TriPartition&, const TriPartition&) = default;
};

inline TriPartition uniform_partition(double lo, double hi) {
  TriPartition p;
  for (int i = 0; i < kTerms; ++i) p.centers[i] = lo + (hi - lo) * i / (kTerms - 1);
  return p;
}

inline std::array<double, kTerms> fuzzify(const TriPartition& part, double x) {
  return part.fuzzify(x);
}

/// Consequent term index per (error term, error-rate term), one grid per output.
struct RuleTable {
  using Grid = std::array<std::array<std::uint8_t, kTerms>, kTerms>;
  std::array<Grid, 3> consequents{};

  bool valid() const {
    for (const auto& g : consequents)
      for (const auto& row : g)
        for (auto c : row)
          if (c >= kTerms) return false;
    return true;
  }

  friend bool operator==(const RuleTable&, const RuleTable&) = default;
};

/// Classic scheduling table: Kp grows with |e| and |de|, Ki peaks near
/// e = 0, Kd grows with |de| and backs off at large |e|. Every grid depends
/// on |i - 2| and |j - 2| only, so it is symmetric under joint negation.
inline RuleTable standard_rule_table() {
  RuleTable t;
  for (int i = 0; i < kTerms; ++i) {
    for (int j = 0; j < kTerms; ++j) {
      const int ae = std::abs(i - 2), ade = std::abs(j - 2);
      t.consequents[0][i][j] = static_cast<std::uint8_t>(std::min(4, 2 + std::max(ae, ade)));
      t.consequents[1][i][j] = static_cast<std::uint8_t>(std::max(0, 2 - ae));
      t.consequents[2][i][j] =
          static_cast<std::uint8_t>(std::clamp(2 + ade - (ae == 2 ? 1 : 0), 0, 4));
    }
  }
  return t;
}

struct ScaledIo {
  double e_norm, de_norm;
  double kp, ki, kd;
};

struct FuzzySystem {
  TriPartition e_part = uniform_partition(-1.0, 1.0);
  TriPartition de_part = uniform_partition(-1.0, 1.0);
  std::array<TriPartition, 3> out_parts{uniform_partition(0.0, 1.0), uniform_partition(0.0, 1.0),
                                        uniform_partition(0.0, 1.0)};
  RuleTable rules = standard_rule_table();
  double ge = 0.02;   // 1/BIS
  double gde = 0.2;   // 1/(BIS/min)
  double gp = 4.0, gi = 2.0, gd = 0.5;

  bool valid() const {
    if (!e_part.valid() || !de_part.valid() || !rules.valid()) return false;
    for (const auto& p : out_parts)
      if (!p.valid()) return false;
    for (double g : {ge, gde, gp, gi, gd})
      if (!(g > 0.0)) return false;
    return true;
  }

  friend bool operator==(const FuzzySystem&, const FuzzySystem&) = default;
};

namespace detail {

// Centroid of max_k min(strength[k], mu_k(y)) sampled on kDefuzzGrid points
// spanning the partition's universe.
inline double sampled_centroid(const TriPartition& part, const std::array<double, kTerms>& strength) {
  const auto& c = part.centers;
  const double lo = part.lo(), span = part.hi() - part.lo();
  double num = 0.0, den = 0.0;
  int s = 0;
  for (int n = 0; n < kDefuzzGrid; ++n) {
    const double y = n == kDefuzzGrid - 1 ? part.hi() : lo + span * n / (kDefuzzGrid - 1);
    while (s < kTerms - 2 && y > c[s + 1]) ++s;
    const double right = (y - c[s]) / (c[s + 1] - c[s]);
    const double agg =
        std::max(std::min(strength[s], 1.0 - right), std::min(strength[s + 1], right));
    num += y * agg;
    den += agg;
  }
  assert(den > 0.0);
  return num / den;
}

}  // namespace detail

/// Normalized gains in the output universes for clamped (e_norm, de_norm).
inline std::array<double, 3> infer(const FuzzySystem& sys, double e_norm, double de_norm) {
  const auto mu_e = sys.e_part.fuzzify(e_norm);
  const auto mu_de = sys.de_part.fuzzify(de_norm);
  std::array<double, 3> out{};
  for (int o = 0; o < 3; ++o) {
    std::array<double, kTerms> strength{};
    for (int i = 0; i < kTerms; ++i) {
      if (mu_e[i] <= 0.0) continue;
      for (int j = 0; j < kTerms; ++j) {
        const double w = std::min(mu_e[i], mu_de[j]);
        auto& s = strength[sys.rules.consequents[o][i][j]];
        s = std::max(s, w);
      }
    }
    out[o] = detail::sampled_centroid(sys.out_parts[o], strength);
  }
  return out;
}

inline ScaledIo scale_io(const FuzzySystem& sys, double e, double de,
                         const std::array<double, 3>& normalized_gains) {
  return {std::clamp(sys.ge * e, -1.0, 1.0), std::clamp(sys.gde * de, -1.0, 1.0),
          sys.gp * normalized_gains[0], sys.gi * normalized_gains[1],
          sys.gd * normalized_gains[2]};
}

/// Scheduled (Kp, Ki, Kd) for raw error e [BIS] and error rate de [BIS/min].
inline std::array<double, 3> schedule_gains(const FuzzySystem& sys, double e, double de) {
  const auto in = scale_io(sys, e, de, {0.0, 0.0, 0.0});
  const auto n = infer(sys, in.e_norm, in.de_norm);
  const auto g = scale_io(sys, e, de, n);
  return {g.kp, g.ki, g.kd};
}

// Gene layout:
//   [ge, gde, gp, gi, gd, alpha, beta,
//    e half-width, de half-width,
//    kp-out c2 c3 c4, ki-out c2 c3 c4, kd-out c2 c3 c4]      (18 genes)
//   optionally followed by 75 rule genes, output-major then e term, de term.
// Input partitions are symmetric: centers (-1, -w, 0, w, 1) for half-width w.
// Output partitions keep c1 = 0 and c5 = 1.
inline constexpr std::size_t kFuzzyGenes = 18;
inline constexpr std::size_t kRuleGenes = 3 * kTerms * kTerms;
inline constexpr double kMinCenterGap = 0.01;
inline constexpr double kMinOrder = 0.01;
inline constexpr double kMaxOrder = 2.0;
inline constexpr double kMinScale = 1e-6;

struct FuzzyGenome {
  FuzzySystem system;
  double alpha = 1.0;
  double beta = 1.0;
};

inline std::vector<double> encode_fuzzy_genes(const FuzzySystem& sys, double alpha, double beta,
                                              bool with_rules) {
  auto half_width = [](const TriPartition& p) { return 0.5 * (p.centers[3] - p.centers[1]); };
  std::vector<double> g{sys.ge, sys.gde, sys.gp, sys.gi, sys.gd, alpha, beta,
                        half_width(sys.e_part), half_width(sys.de_part)};
  for (const auto& p : sys.out_parts)
    g.insert(g.end(), {p.centers[1], p.centers[2], p.centers[3]});
  if (with_rules)
    for (const auto& grid : sys.rules.consequents)
      for (const auto& row : grid)
        for (auto c : row) g.push_back(static_cast<double>(c));
  return g;
}

namespace detail {

inline TriPartition repair_input(double half_width) {
  const double w = std::clamp(std::abs(half_width), kMinCenterGap, 1.0 - kMinCenterGap);
  return {{-1.0, -w, 0.0, w, 1.0}};
}

inline TriPartition repair_output(double c2, double c3, double c4) {
  std::array<double, 3> v{c2, c3, c4};
  std::sort(v.begin(), v.end());
  const double d = kMinCenterGap;
  TriPartition p;
  p.centers[0] = 0.0;
  p.centers[1] = std::clamp(v[0], d, 1.0 - 3 * d);
  p.centers[2] = std::clamp(v[1], p.centers[1] + d, 1.0 - 2 * d);
  p.centers[3] = std::clamp(v[2], p.centers[2] + d, 1.0 - d);
  p.centers[4] = 1.0;
  return p;
}

inline std::uint8_t rule_index(double gene) {
  if (!std::isfinite(gene)) return 0;
  return static_cast<std::uint8_t>(std::clamp(std::floor(gene + 0.5), 0.0, 4.0));
}

inline double repair_scale(double g) { return std::isfinite(g) ? std::max(g, kMinScale) : kMinScale; }

}  // namespace detail

/// Inverse of encode_fuzzy_genes (which symmetrizes input partitions).
/// Output interior centers are sorted and pulled into (0, 1), input
/// half-widths into (0, 1), scaling factors kept positive, orders clamped to
/// [0.01, 2], and rule genes rounded half-up to a term index.
inline FuzzyGenome decode_fuzzy_genes(std::span<const double> g) {
  if (g.size() != kFuzzyGenes && g.size() != kFuzzyGenes + kRuleGenes)
    throw LayoutError("fuzzy gene vector has length " + std::to_string(g.size()) + ", expected " +
                      std::to_string(kFuzzyGenes) + " or " +
                      std::to_string(kFuzzyGenes + kRuleGenes));
  FuzzyGenome out;
  auto& s = out.system;
  s.ge = detail::repair_scale(g[0]);
  s.gde = detail::repair_scale(g[1]);
  s.gp = detail::repair_scale(g[2]);
  s.gi = detail::repair_scale(g[3]);
  s.gd = detail::repair_scale(g[4]);
  out.alpha = std::clamp(g[5], kMinOrder, kMaxOrder);
  out.beta = std::clamp(g[6], kMinOrder, kMaxOrder);
  s.e_part = detail::repair_input(g[7]);
  s.de_part = detail::repair_input(g[8]);
  for (int o = 0; o < 3; ++o)
    s.out_parts[o] = detail::repair_output(g[9 + 3 * o], g[10 + 3 * o], g[11 + 3 * o]);
  if (g.size() > kFuzzyGenes) {
    std::size_t k = kFuzzyGenes;
    for (auto& grid : s.rules.consequents)
      for (auto& row : grid)
        for (auto& c : row) c = detail::rule_index(g[k++]);
  }
  return out;
}

}  // namespace doa
