#pragma once

// Default gene bounds per controller variant and a one-call tuning helper.

#include <vector>

#include "doa/control.hpp"
#include "doa/simloop.hpp"
#include "doa/woa.hpp"

namespace doa {

/// Gains and output scalers in [0, 100], ge in [0.001, 1], gde in
/// [0.001, 10], orders in [0.01, 2], interior MF centers inside their
/// open intervals (input half-widths in (0, 1)), rule genes in [0, 4].
inline SearchSpace default_search_space(Variant v, bool with_rules = false) {
  constexpr double g = 100.0, d = kMinCenterGap;
  switch (v) {
    case Variant::pid:
      return {{0, 0, 0}, {g, g, g}};
    case Variant::fopid:
      return {{0, 0, 0, kMinOrder, kMinOrder}, {g, g, g, kMaxOrder, kMaxOrder}};
    case Variant::fofpid: {
      SearchSpace s{{0.001, 0.001, 0, 0, 0, kMinOrder, kMinOrder, d, d},
                    {1.0, 10.0, g, g, g, kMaxOrder, kMaxOrder, 1 - d, 1 - d}};
      for (int k = 0; k < 9; ++k) {
        s.lower.push_back(d);
        s.upper.push_back(1 - d);
      }
      if (with_rules) {
        s.lower.insert(s.lower.end(), kRuleGenes, 0.0);
        s.upper.insert(s.upper.end(), kRuleGenes, 4.0);
      }
      return s;
    }
  }
  return {};
}

struct TuningResult {
  Variant variant;
  WoaResult woa;
  ControllerSpec spec;
};

inline TuningResult tune(Variant v, const Objective& objective, const WoaConfig& woa,
                         bool with_rules = false) {
  const SearchSpace space = default_search_space(v, with_rules);
  WoaResult r = optimize(space, woa, objective);
  ControllerSpec spec = decode_controller_genes(v, r.best, objective.base);
  return {v, std::move(r), std::move(spec)};
}

}  // namespace doa
