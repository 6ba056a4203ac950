// Tunes a FOPID controller on the nominal patient with a small WOA budget,
// then prints the cohort metrics of the frozen controller.

#include <cstdio>

#include "doa/doa.hpp"

int main() {
  doa::Objective objective;
  objective.variant = doa::Variant::fopid;
  objective.patients = {doa::default_registry().front()};

  doa::WoaConfig woa;
  woa.agents = 20;
  woa.iterations = 30;
  woa.seed = 7;

  const auto tuned = doa::tune(doa::Variant::fopid, objective, woa);
  std::printf("Kp %.3f Ki %.3f Kd %.3f alpha %.3f beta %.3f  cost %.2f\n", tuned.spec.kp,
              tuned.spec.ki, tuned.spec.kd, tuned.spec.alpha, tuned.spec.beta,
              tuned.woa.best_cost);

  const auto registry = doa::default_registry();
  for (const auto& row : doa::evaluate_cohort(tuned.spec, registry, objective.sim)) {
    if (!row.metrics) {
      std::printf("patient %d: %s\n", row.patient_id, row.error.c_str());
      continue;
    }
    const auto& m = *row.metrics;
    std::printf("patient %d: IAE %.1f ITAE %.1f settle %.2f min  min BIS %.1f\n", row.patient_id,
                m.iae, m.itae, m.settling_time, m.min_bis);
  }
}
