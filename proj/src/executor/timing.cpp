#include <algorithm>
#include <chrono>

#include "dgforge/executor.hpp"

namespace dgforge {

double SteadyClock::now() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

double wall_time(Backend& backend, const std::function<void()>& launches, Clock& clock) {
  backend.synchronize();
  const double t0 = clock.now();
  launches();
  backend.synchronize();
  return std::max(0.0, clock.now() - t0);
}

double wall_time(Backend& backend, const std::function<void()>& launches) {
  SteadyClock clock;
  return wall_time(backend, launches, clock);
}

TimingStats time_repeated(Backend& backend, const std::function<void()>& launches, int warmup, int repetitions,
                          Clock* clock) {
  SteadyClock steady;
  Clock& c = clock ? *clock : steady;
  for (int i = 0; i < warmup; ++i) wall_time(backend, launches, c);
  TimingStats s;
  for (int i = 0; i < std::max(1, repetitions); ++i) s.samples.push_back(wall_time(backend, launches, c));
  auto sorted = s.samples;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  s.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  s.min = sorted.front();
  s.max = sorted.back();
  return s;
}

}  // namespace dgforge
