#include "bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "mvid/error.hpp"

namespace mvid::cli {

StageTiming time_stage(const std::string& stage, int warmup, int runs,
                       const std::function<void()>& fn) {
  if (warmup < 0 || runs < 1) fail(ErrorCode::kInvalidArgument, "need warmup >= 0 and runs >= 1");
  for (int i = 0; i < warmup; ++i) fn();

  std::vector<double> ms(static_cast<std::size_t>(runs));
  for (auto& m : ms) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    m = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }

  StageTiming t{stage, 0.0, 0.0, runs};
  for (double m : ms) t.mean_ms += m;
  t.mean_ms /= runs;
  if (runs > 1) {
    double ss = 0.0;
    for (double m : ms) ss += (m - t.mean_ms) * (m - t.mean_ms);
    t.std_ms = std::sqrt(ss / (runs - 1));
  }
  return t;
}

void write_timings_csv(std::ostream& out, const std::vector<StageTiming>& timings) {
  char buf[256];
  out << "stage,mean_ms,std_ms,runs\n";
  for (const auto& t : timings) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%d\n", t.stage.c_str(), t.mean_ms, t.std_ms,
                  t.runs);
    out << buf;
  }
}

void print_timings(std::ostream& out, const std::vector<StageTiming>& timings) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %12s %12s %6s\n", "stage", "mean [ms]", "std [ms]", "runs");
  out << buf;
  for (const auto& t : timings) {
    std::snprintf(buf, sizeof buf, "%-24s %12.4f %12.4f %6d\n", t.stage.c_str(), t.mean_ms,
                  t.std_ms, t.runs);
    out << buf;
  }
}

}  // namespace mvid::cli
