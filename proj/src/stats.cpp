#include "dynmatch/stats.hpp"

#include <cmath>

namespace dynmatch {

Estimate mean_ci(std::span<const double> samples, double z) {
  Estimate e;
  e.n = samples.size();
  if (e.n == 0) return e;
  double sum = 0.0;
  for (double x : samples) sum += x;
  e.mean = sum / static_cast<double>(e.n);
  if (e.n > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - e.mean) * (x - e.mean);
    e.std_error = std::sqrt(ss / static_cast<double>(e.n - 1) / static_cast<double>(e.n));
  }
  e.lo = e.mean - z * e.std_error;
  e.hi = e.mean + z * e.std_error;
  return e;
}

unsigned default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace dynmatch
