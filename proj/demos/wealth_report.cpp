// Wealth of the side-information universal portfolio on a synthetic regime market,
// next to the best constant rebalanced portfolio chosen in hindsight.
#include <cmath>
#include <cstdio>

#include "upsi/upsi.hpp"

int main() {
  using namespace upsi;
  const auto data = generate({RegimeSwitching{}, 7}, 512);
  const auto z = extract_side_info(data.market, SideInfoMode::prev_first());
  const auto cls = FunctionClass::threshold1d();

  const auto best = best_crp(data.market);
  const auto qs = mc_wealth_qstar(data.market, z, cls, {10000, 7, true});
  const double exact = qstar_wealth_dp(data.market, z, cls);

  std::printf("best CRP        theta=(%.3f, %.3f)  growth %.4g\n", best.theta[0], best.theta[1], std::exp(best.log_wealth));
  std::printf("side-info UP    MC log wealth %.4f +- %.4f  (exact %.4f)\n", qs.log_wealth, qs.stderr_log, exact);
  for (const auto& e : qs.per_epoch) std::printf("  epoch %2d  l=%4zu  log factor %+.4f\n", e.epoch, e.ell, e.log_factor);
}
