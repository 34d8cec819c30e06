#include <doctest.h>

#include <sstream>

#include "bench.hpp"

using namespace mvid::cli;

TEST_CASE("time_stage runs warmup plus timed calls") {
  int calls = 0;
  const auto t = time_stage("noop", kDefaultWarmup, kDefaultRuns, [&] { ++calls; });
  CHECK(calls == 120);
  CHECK(t.runs == 100);
  CHECK(t.stage == "noop");
  CHECK(t.mean_ms >= 0.0);
  CHECK(t.std_ms >= 0.0);
}

TEST_CASE("a single run has zero spread") {
  int calls = 0;
  const auto t = time_stage("one", 0, 1, [&] { ++calls; });
  CHECK(calls == 1);
  CHECK(t.std_ms == 0.0);
}

TEST_CASE("timings csv") {
  std::ostringstream out;
  write_timings_csv(out, {{"global_alignment", 1.5, 0.25, 100}});
  CHECK(out.str().rfind("stage,mean_ms,std_ms,runs\nglobal_alignment,", 0) == 0);
}
