// Online use of the epoch-restarted covering mixture: predict, then observe.
#include <cstdio>

#include "upsi/upsi.hpp"

int main() {
  using namespace upsi;
  auto rng = make_stream(1);
  QStarPredictor pred(FunctionClass::threshold1d(), 2);
  int correct = 0;
  const int n = 256;
  for (int i = 0; i < n; ++i) {
    const double z = uniform01(rng);
    const Symbol y = (z >= 0.3) == (uniform01(rng) < 0.9) ? 1 : 2;  // mostly determined by z >= 0.3
    const auto p = pred.predict(std::span<const double>(&z, 1));
    if ((p[0] >= 0.5) == (y == 1)) ++correct;
    pred.observe(y);
  }
  std::printf("log q*(y^n || z^n) = %.3f nats, %d/%d majority calls right\n", pred.log_prob(), correct, n);
}
