#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "mvid/checkpoint.hpp"
#include "mvid/formats.hpp"
#include "mvid/pipeline.hpp"
#include "mvid/render.hpp"

namespace mvid::cli {

namespace {

InverseDepthMap to_per_km(const InverseDepthMap& z) {
  InverseDepthMap out = z;
  for (auto& v : out.values()) v *= 1000.0;
  return out;
}

void write_report(const fs::path& path, std::span<const FrameMetrics> frames,
                  const AggregateReport& summary) {
  std::ostringstream csv;
  write_metrics_csv(csv, frames, summary);
  write_text_file(path, csv.str());
}

fs::path suffixed(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out.replace_filename(p.stem().string() + suffix + p.extension().string());
  return out;
}

void print_aggregate(std::ostream& log, const std::string& label, const AggregateReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%-6s frames=%zu skipped=%zu mae_mm=%.4f rmse_mm=%.4f imae=%.4f irmse=%.4f "
                "iabsrel=%.6f\n",
                label.c_str(), r.frames, r.skipped_frames, r.mae_mm, r.rmse_mm, r.imae, r.irmse,
                r.iabsrel);
  log << buf;
}

int worker_count(int requested, std::size_t jobs) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("MVID_THREADS"); env != nullptr && *env != '\0') {
      n = std::atoi(env);
      if (n <= 0) fail(ErrorCode::kInvalidArgument, "MVID_THREADS must be a positive integer");
    } else {
      n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
  }
  return std::max(1, std::min<int>(n, static_cast<int>(jobs)));
}

struct LoadedFrame {
  DepthFrame gt;
  InverseDepthMap pred;
  SparsePoints sparse;
  std::optional<RgbImage> rgb;
};

LoadedFrame load_frame(const ManifestRecord& r, DepthEncoding encoding, bool need_rgb,
                       std::vector<std::string>* warnings) {
  if (!r.pred) fail(ErrorCode::kInvalidArgument, "frame '" + r.id + "' has no prediction path");
  if (!r.sparse) fail(ErrorCode::kInvalidArgument, "frame '" + r.id + "' has no sparse path");
  LoadedFrame f;
  f.gt = read_depth_png(r.gt, encoding);
  f.pred = read_inverse_pfm(*r.pred);
  f.sparse = read_sparse_csv(*r.sparse, warnings);
  if (need_rgb) {
    if (!r.rgb) fail(ErrorCode::kInvalidArgument, "frame '" + r.id + "' needs an rgb image");
    f.rgb = read_rgb_png(*r.rgb);
  }
  return f;
}

bool needs_rgb(const SmlConfig& c) {
  return c.extra.gradients || c.extra.grayscale || c.extra.rgb;
}

}  // namespace

// ---------------------------------------------------------------------------

void cmd_align(const AlignOptions& o, std::ostream& log) {
  const ClampProfile profile = ClampProfile::by_name(o.profile);
  const DepthEncoding encoding = parse_depth_encoding(o.encoding);
  const InverseDepthMap pred = read_inverse_pfm(o.pred);
  std::vector<std::string> warnings;
  const SparsePoints sparse = read_sparse_csv(o.sparse, &warnings);
  for (const auto& w : warnings) log << "warning: " << w << "\n";

  std::optional<SmlNetwork<float>> net;
  std::optional<RgbImage> rgb;
  if (o.checkpoint) {
    net.emplace(read_checkpoint(*o.checkpoint));
    if (needs_rgb(net->config()) && !o.rgb) {
      fail(ErrorCode::kInvalidArgument, "checkpoint expects image channels; pass --rgb");
    }
  }
  if (o.rgb) rgb = read_rgb_png(*o.rgb);

  const FrameResult r =
      align_frame(pred, sparse, profile, net ? &*net : nullptr, rgb ? &*rgb : nullptr);
  const InverseDepthMap& z = r.z_sml ? *r.z_sml : r.z_ga;
  const DepthFrame depth = from_inverse(z, profile);
  write_depth_png(depth, o.out, encoding);

  char buf[256];
  std::snprintf(buf, sizeof buf, "global_alignment scale=%.9g shift=%.9g points=%zu degenerate=%d\n",
                r.alignment.scale, r.alignment.shift, r.alignment.n_points,
                r.alignment.degenerate ? 1 : 0);
  log << buf;
  std::snprintf(buf, sizeof buf, "scaffold anchors=%zu dropped=%zu identity=%d\n",
                r.anchors.anchors.size(), r.anchors.dropped, r.scaffold.identity ? 1 : 0);
  log << buf;
  log << "sml " << (r.z_sml ? "applied" : "skipped") << "\n";

  if (o.render) {
    const fs::path prefix = *o.render;
    render_depth_map(depth, prefix.string() + "_depth.png");
    if (o.gt) {
      const DepthFrame gt = read_depth_png(*o.gt, encoding);
      require_same_shape(gt, depth, "ground truth");
      const auto [gt_inv, gt_valid] = to_inverse(gt);
      render_error_map(to_per_km(z), to_per_km(gt_inv), eval_mask(gt, profile),
                       prefix.string() + "_error.png");
    }
  }
}

// ---------------------------------------------------------------------------

EvalResult cmd_eval(const EvalOptions& o, std::ostream& log) {
  const DatasetManifest manifest = read_manifest(o.manifest);
  const auto& records = manifest.records;
  if (records.empty()) fail(ErrorCode::kEmptyList, "manifest has no frames");

  const bool want_ga = o.mode != EvalMode::kSml;
  const bool want_sml = o.mode != EvalMode::kGa;
  std::optional<SmlWeights> weights;
  if (want_sml) {
    if (!o.checkpoint) fail(ErrorCode::kInvalidArgument, "--mode sml/both needs --checkpoint");
    weights = read_checkpoint(*o.checkpoint);
  }
  const bool rgb = weights && needs_rgb(weights->config);

  std::string profile_name = o.profile.value_or(records.front().profile);
  if (!o.profile) {
    for (const auto& r : records) {
      if (r.profile != profile_name) profile_name = "mixed";
    }
  }

  struct Slot {
    std::optional<FrameMetrics> ga, sml;
    std::vector<std::string> warnings;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(records.size());
  std::atomic<std::size_t> next{0};

  auto work = [&]() {
    std::optional<SmlNetwork<float>> net;
    if (weights) net.emplace(*weights);
    for (std::size_t i = next++; i < records.size(); i = next++) {
      Slot& slot = slots[i];
      try {
        const ManifestRecord& rec = records[i];
        const ClampProfile profile = ClampProfile::by_name(o.profile.value_or(rec.profile));
        const LoadedFrame f = load_frame(rec, manifest.encoding, rgb, &slot.warnings);
        const FrameResult r = align_frame(f.pred, f.sparse, profile, net ? &*net : nullptr,
                                          f.rgb ? &*f.rgb : nullptr);
        try {
          if (want_ga) slot.ga = frame_metrics(from_inverse(r.z_ga, profile), f.gt, profile);
          if (want_sml) slot.sml = frame_metrics(from_inverse(*r.z_sml, profile), f.gt, profile);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kEmptyMask) throw;
          slot.ga.reset();
          slot.sml.reset();
          slot.warnings.push_back("frame '" + rec.id + "' has no evaluable pixels; skipped");
        }
        if (slot.ga) slot.ga->frame_id = rec.id;
        if (slot.sml) slot.sml->frame_id = rec.id;
      } catch (...) {
        slot.error = std::current_exception();
      }
    }
  };

  const int n_workers = worker_count(o.threads, records.size());
  std::vector<std::thread> pool;
  for (int t = 1; t < n_workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::vector<FrameMetrics> ga, sml;
  std::size_t skipped = 0;
  for (const auto& s : slots) {
    if (s.error) std::rethrow_exception(s.error);
    for (const auto& w : s.warnings) log << "warning: " << w << "\n";
    if (want_ga && !s.ga) ++skipped;
    if (!want_ga && want_sml && !s.sml) ++skipped;
    if (s.ga) ga.push_back(*s.ga);
    if (s.sml) sml.push_back(*s.sml);
  }

  const Pooling pooling = o.pooled ? Pooling::kPooledPixels : Pooling::kMeanOfFrames;
  auto finish = [&](const std::vector<FrameMetrics>& frames) {
    AggregateReport r = aggregate(frames, pooling);
    r.skipped_frames = skipped;
    r.profile = profile_name;
    r.density = o.density;
    return r;
  };

  EvalResult result;
  if (want_ga) {
    result.ga = finish(ga);
    write_report(o.mode == EvalMode::kBoth ? suffixed(o.report, "_ga") : o.report, ga, *result.ga);
    print_aggregate(log, "ga", *result.ga);
  }
  if (want_sml) {
    result.sml = finish(sml);
    write_report(o.mode == EvalMode::kBoth ? suffixed(o.report, "_sml") : o.report, sml,
                 *result.sml);
    print_aggregate(log, "ga+sml", *result.sml);
  }
  if (result.ga && result.sml) {
    const MetricReduction c = compare(*result.ga, *result.sml);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "reduction%% mae_mm=%.2f rmse_mm=%.2f imae=%.2f irmse=%.2f iabsrel=%.2f\n",
                  c.mae_mm, c.rmse_mm, c.imae, c.irmse, c.iabsrel);
    log << buf;
  }
  return result;
}

// ---------------------------------------------------------------------------

void cmd_train(const TrainOptions& o, std::ostream& log) {
  const TrainingConfigFile config =
      o.config ? read_training_config(*o.config) : TrainingConfigFile{};
  const DatasetManifest manifest = read_manifest(o.manifest);
  if (manifest.records.empty()) fail(ErrorCode::kEmptyList, "manifest has no frames");

  std::vector<TrainingSample> samples;
  samples.reserve(manifest.records.size());
  const bool rgb = needs_rgb(config.sml);
  for (const auto& rec : manifest.records) {
    std::vector<std::string> warnings;
    const LoadedFrame f = load_frame(rec, manifest.encoding, rgb, &warnings);
    for (const auto& w : warnings) log << "warning: " << w << "\n";
    const ClampProfile profile = ClampProfile::by_name(o.profile.value_or(rec.profile));
    samples.push_back(make_training_sample(config.sml, f.pred, f.sparse, f.gt, profile,
                                           f.rgb ? &*f.rgb : nullptr));
  }
  log << "training on " << samples.size() << " frames\n";

  const fs::path trace_path = o.trace.value_or(fs::path(o.out_checkpoint.string() + ".trace.csv"));
  std::string trace = "epoch,lr,loss,depth_loss,grad_loss\n";
  const TrainResult result = train_sml(samples, config.train, config.sml, [&](const EpochStats& s) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g\n", s.epoch, s.lr, s.loss,
                  s.depth_loss, s.grad_loss);
    trace += buf;
    log << "epoch " << s.epoch << " loss " << s.loss << "\n";
    log.flush();
  });
  write_checkpoint(result.weights, o.out_checkpoint);
  write_text_file(trace_path, trace);
}

// ---------------------------------------------------------------------------

void cmd_sparsify(const SparsifyOptions& o, std::ostream& log) {
  const DepthFrame gt = read_depth_png(o.gt, parse_depth_encoding(o.encoding));
  SparsifierConfig cfg;
  cfg.mode = parse_sparsifier_mode(o.mode);
  cfg.target_count = o.count;
  cfg.min_dist = o.min_dist;
  cfg.depth_noise = o.noise;
  cfg.seed = o.seed;
  if (std::find(kDensityPresets.begin(), kDensityPresets.end(), o.count) == kDensityPresets.end()) {
    log << "note: count " << o.count << " is not one of the presets 50/150/500/1500\n";
  }
  std::optional<RgbImage> rgb;
  if (o.rgb) rgb = read_rgb_png(*o.rgb);
  const SparsePoints points = sparsify(gt, cfg, rgb ? &*rgb : nullptr);
  if (static_cast<int>(points.size()) < o.count) {
    log << "warning: only " << points.size() << " of " << o.count
        << " points could be placed\n";
  }
  write_sparse_csv(points, o.out);
}

// ---------------------------------------------------------------------------

std::vector<StageTiming> cmd_bench(const BenchOptions& o, std::ostream& log) {
  const ClampProfile profile = ClampProfile::by_name(o.profile);
  const DepthEncoding encoding = parse_depth_encoding(o.encoding);

  std::optional<SyntheticScene> scene;
  std::optional<InverseDepthMap> gt_inv;
  if (!o.pred) {
    SceneConfig sc;
    sc.width = o.width;
    sc.height = o.height;
    sc.seed = o.seed;
    scene = synth_scene(sc);
    gt_inv = to_inverse(scene->gt).first;
  }

  std::vector<StageTiming> timings;
  InverseDepthMap pred;
  auto depth_source = [&]() {
    pred = o.pred ? read_inverse_pfm(*o.pred) : synth_prediction(*gt_inv, o.seed + 1).z;
  };
  timings.push_back(time_stage("depth_source", o.warmup, o.runs, depth_source));

  SparsePoints sparse;
  if (o.sparse) {
    sparse = read_sparse_csv(*o.sparse);
  } else if (scene) {
    SparsifierConfig sp;
    sp.target_count = o.points;
    sp.seed = o.seed + 2;
    sparse = sparsify(scene->gt, sp, &scene->rgb);
  } else {
    fail(ErrorCode::kInvalidArgument, "--sparse is required with --pred");
  }

  std::optional<DepthFrame> gt;
  if (o.gt) {
    gt = read_depth_png(*o.gt, encoding);
  } else if (scene) {
    gt = scene->gt;
  }

  SmlWeights weights = o.checkpoint ? read_checkpoint(*o.checkpoint)
                                    : SmlWeights::initialize(SmlConfig{}, o.seed);
  if (!o.checkpoint) log << "note: no checkpoint given; timing a freshly initialised network\n";
  SmlNetwork<float> net(weights);
  const RgbImage* rgb = scene ? &scene->rgb : nullptr;

  GlobalStage ga;
  timings.push_back(time_stage("global_alignment", o.warmup, o.runs,
                               [&] { ga = run_global_alignment(pred, sparse, profile); }));
  ScaffoldStage sc;
  timings.push_back(time_stage("scale_map_scaffolding", o.warmup, o.runs,
                               [&] { sc = run_scaffolding(sparse, ga.z_tilde); }));
  InverseDepthMap z_sml;
  timings.push_back(time_stage("sml_inference", o.warmup, o.runs, [&] {
    const SmlFrameChannels ch = frame_channels(net.config(), ga.z_tilde, sc.scaffold, sparse, rgb);
    const std::vector<float> chw = assemble_channels<float>(net.config(), ch);
    const SmlOutput out = infer_sml(net, chw, pred.width(), pred.height());
    z_sml = apply_residual(ga.z_tilde, out.residual, out.shift ? &*out.shift : nullptr, profile);
  }));
  if (gt) {
    FrameMetrics m;
    timings.push_back(time_stage("metrics", o.warmup, o.runs, [&] {
      m = frame_metrics(from_inverse(z_sml, profile), *gt, profile);
    }));
  } else {
    log << "note: no ground truth; metrics stage skipped\n";
  }

  log << "frame " << pred.width() << "x" << pred.height() << ", " << sparse.size()
      << " sparse points, " << o.warmup << " warmup + " << o.runs << " timed runs per stage\n";
  print_timings(log, timings);
  if (o.csv) {
    std::ostringstream csv;
    write_timings_csv(csv, timings);
    write_text_file(*o.csv, csv.str());
  }
  return timings;
}

// ---------------------------------------------------------------------------

void cmd_synth(const SynthOptions& o, std::ostream& log) {
  if (o.frames < 1) fail(ErrorCode::kInvalidArgument, "--frames must be >= 1");
  ClampProfile::by_name(o.profile);
  SyntheticDatasetConfig dc;
  dc.scene.width = o.width;
  dc.scene.height = o.height;
  dc.sparsifier.mode = parse_sparsifier_mode(o.mode);
  dc.sparsifier.target_count = o.count;
  dc.distortion.local_field = o.local_field;
  dc.seed = o.seed;

  DatasetManifest manifest;
  manifest.encoding = parse_depth_encoding(o.encoding);
  for (const char* sub : {"rgb", "gt", "pred", "sparse"}) fs::create_directories(o.out_dir / sub);

  for (int k = 0; k < o.frames; ++k) {
    const SyntheticFrame f = make_synthetic_frame(dc, o.first_index + k);
    ManifestRecord r;
    r.id = f.id;
    r.rgb = fs::path("rgb") / (f.id + ".png");
    r.gt = fs::path("gt") / (f.id + ".png");
    r.pred = fs::path("pred") / (f.id + ".pfm");
    r.sparse = fs::path("sparse") / (f.id + ".csv");
    r.profile = o.profile;
    write_rgb_png(f.rgb, o.out_dir / *r.rgb);
    write_depth_png(f.gt, o.out_dir / r.gt, manifest.encoding);
    write_inverse_pfm(f.pred, o.out_dir / *r.pred);
    write_sparse_csv(f.sparse, o.out_dir / *r.sparse);
    manifest.records.push_back(std::move(r));
  }
  write_manifest(manifest, o.out_dir / "manifest.tsv");
  log << "wrote " << o.frames << " frames to " << o.out_dir.string() << "\n";
}

}  // namespace mvid::cli
