#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bench.hpp"
#include "mvid/metrics.hpp"
#include "mvid/png_io.hpp"

namespace mvid::cli {

namespace fs = std::filesystem;

struct AlignOptions {
  fs::path pred;  // inverse-depth PFM
  fs::path sparse;
  std::string profile = "void";
  std::optional<fs::path> checkpoint;
  std::optional<fs::path> rgb;
  fs::path out;  // depth PNG
  std::string encoding = "mm";
  std::optional<fs::path> render;  // prefix for <prefix>_depth.png / _error.png
  std::optional<fs::path> gt;      // needed for the error render
};
void cmd_align(const AlignOptions& o, std::ostream& log);

enum class EvalMode { kGa, kSml, kBoth };

struct EvalOptions {
  fs::path manifest;
  std::optional<std::string> profile;  // overrides the per-record profile
  EvalMode mode = EvalMode::kGa;
  std::optional<fs::path> checkpoint;
  fs::path report;
  bool pooled = false;
  int density = 0;  // echoed into the report
  int threads = 0;  // 0: MVID_THREADS or hardware concurrency
};

struct EvalResult {
  std::optional<AggregateReport> ga;
  std::optional<AggregateReport> sml;
};
EvalResult cmd_eval(const EvalOptions& o, std::ostream& log);

struct TrainOptions {
  fs::path manifest;
  std::optional<fs::path> config;
  fs::path out_checkpoint;
  std::optional<fs::path> trace;  // defaults to <checkpoint>.trace.csv
  std::optional<std::string> profile;
};
void cmd_train(const TrainOptions& o, std::ostream& log);

struct SparsifyOptions {
  fs::path gt;
  std::string encoding = "mm";
  std::optional<fs::path> rgb;
  std::string mode = "min_distance";
  int count = 150;
  double min_dist = 4.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  fs::path out;
};
void cmd_sparsify(const SparsifyOptions& o, std::ostream& log);

struct BenchOptions {
  std::optional<fs::path> pred;  // read from file in depth_source; otherwise synthesised
  std::optional<fs::path> sparse;
  std::optional<fs::path> checkpoint;
  std::optional<fs::path> gt;
  std::string encoding = "mm";
  std::string profile = "void";
  int width = 384;   // synthetic frame size
  int height = 384;
  int points = 150;  // synthetic sparse count
  std::uint64_t seed = 0;
  int warmup = kDefaultWarmup;
  int runs = kDefaultRuns;
  std::optional<fs::path> csv;
};
std::vector<StageTiming> cmd_bench(const BenchOptions& o, std::ostream& log);

struct SynthOptions {
  fs::path out_dir;
  int frames = 16;
  int first_index = 0;
  int width = 96;
  int height = 96;
  int count = 150;
  std::string mode = "min_distance";
  bool local_field = true;
  std::string encoding = "mm";
  std::string profile = "void";
  std::uint64_t seed = 0;
};
void cmd_synth(const SynthOptions& o, std::ostream& log);

}  // namespace mvid::cli
