// Drives two observers by hand through the reference scenario and prints the
// attitude error once per second.

#include <cstdio>

#include "stochso3/harness.hpp"
#include "stochso3/scenario.hpp"

using namespace stochso3;

int main() {
  const Scenario sc = paper_sv_scenario();
  const MeasurementStream stream = synthesize_measurements(sc, /*seed=*/1);

  Observer ito(FilterKind::kIto, sc.initial_estimate.rotation(), Vec3::Zero(), Vec3::Zero(),
               sc.gains);
  Observer strat(FilterKind::kStratonovich, sc.initial_estimate.rotation(), Vec3::Zero(),
                 Vec3::Zero(), sc.gains);

  std::printf("%6s  %12s  %12s\n", "t [s]", "ito", "strat");
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const MeasurementSample& m = stream[k];
    if (k % 1000 == 0) {
      const double e_ito = normalized_distance(m.r_true.transpose() * ito.estimate());
      const double e_strat = normalized_distance(m.r_true.transpose() * strat.estimate());
      std::printf("%6.1f  %12.4e  %12.4e\n", m.t, e_ito, e_strat);
    }
    if (k + 1 == stream.size()) break;
    ito.step(m.omega_m, m.r_y, m.q_y, sc.grid.dt());
    strat.step(m.omega_m, m.r_y, m.q_y, sc.grid.dt());
  }
  std::printf("bias estimate (strat): %.4f %.4f %.4f\n", strat.b_hat().x(), strat.b_hat().y(),
              strat.b_hat().z());
}
