#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace mvid::cli {

struct StageTiming {
  std::string stage;
  double mean_ms = 0.0;
  double std_ms = 0.0;  // sample standard deviation; 0 for a single run
  int runs = 0;
};

inline constexpr int kDefaultWarmup = 20;
inline constexpr int kDefaultRuns = 100;

// Calls fn warmup + runs times and times the last `runs` calls individually
// with a monotonic clock.
StageTiming time_stage(const std::string& stage, int warmup, int runs,
                       const std::function<void()>& fn);

void write_timings_csv(std::ostream& out, const std::vector<StageTiming>& timings);
void print_timings(std::ostream& out, const std::vector<StageTiming>& timings);

}  // namespace mvid::cli
