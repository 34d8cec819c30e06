#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "commands.hpp"
#include "mvid/error.hpp"

namespace {

using namespace mvid::cli;

void add_align(CLI::App& app, AlignOptions& o) {
  auto* c = app.add_subcommand("align", "Align one predicted inverse-depth map to sparse metric depth");
  c->add_option("--pred", o.pred, "Predicted inverse depth (PFM)")->required();
  c->add_option("--sparse", o.sparse, "Sparse points CSV (u,v,depth_m)")->required();
  c->add_option("--profile", o.profile, "Clamp profile")->check(CLI::IsMember({"void", "tartanair"}));
  c->add_option("--checkpoint", o.checkpoint, "SML checkpoint; GA only when absent");
  c->add_option("--rgb", o.rgb, "RGB image for image-derived SML channels");
  c->add_option("--out", o.out, "Output depth PNG")->required();
  c->add_option("--encoding", o.encoding, "Depth PNG encoding")->check(CLI::IsMember({"mm", "q8.8"}));
  c->add_option("--render", o.render, "Prefix for rendered depth/error images");
  c->add_option("--gt", o.gt, "Ground-truth depth PNG for the error render");
}

void add_eval(CLI::App& app, EvalOptions& o) {
  auto* c = app.add_subcommand("eval", "Evaluate GA and/or GA+SML over a manifest");
  c->add_option("--manifest", o.manifest, "Dataset manifest (TSV)")->required();
  c->add_option("--profile", o.profile, "Override the per-frame clamp profile")
      ->check(CLI::IsMember({"void", "tartanair"}));
  const std::map<std::string, EvalMode> modes{
      {"ga", EvalMode::kGa}, {"sml", EvalMode::kSml}, {"both", EvalMode::kBoth}};
  c->add_option("--mode", o.mode, "ga, sml or both")->transform(CLI::CheckedTransformer(modes));
  c->add_option("--checkpoint", o.checkpoint, "SML checkpoint (sml/both)");
  c->add_option("--report", o.report, "Per-frame metrics CSV")->required();
  c->add_flag("--pooled", o.pooled, "Pool pixels across frames instead of averaging frames");
  c->add_option("--density", o.density, "Sparse density echoed into the report");
  c->add_option("--threads", o.threads, "Worker threads (default: MVID_THREADS or all cores)");
}

void add_train(CLI::App& app, TrainOptions& o) {
  auto* c = app.add_subcommand("train", "Train an SML checkpoint");
  c->add_option("--manifest", o.manifest, "Training manifest (TSV)")->required();
  c->add_option("--config", o.config, "key=value training config");
  c->add_option("--out-checkpoint", o.out_checkpoint, "Checkpoint to write")->required();
  c->add_option("--trace", o.trace, "Loss trace CSV (default <checkpoint>.trace.csv)");
  c->add_option("--profile", o.profile, "Override the per-frame clamp profile")
      ->check(CLI::IsMember({"void", "tartanair"}));
}

void add_sparsify(CLI::App& app, SparsifyOptions& o) {
  auto* c = app.add_subcommand("sparsify", "Sample sparse metric depth from a ground-truth PNG");
  c->add_option("--gt", o.gt, "Ground-truth depth PNG")->required();
  c->add_option("--encoding", o.encoding, "Depth PNG encoding")->check(CLI::IsMember({"mm", "q8.8"}));
  c->add_option("--rgb", o.rgb, "RGB image used as texture score");
  c->add_option("--mode", o.mode, "min_distance or clustered")
      ->check(CLI::IsMember({"min_distance", "clustered"}));
  c->add_option("--count", o.count, "Target point count (presets 50, 150, 500, 1500)")
      ->check(CLI::PositiveNumber);
  c->add_option("--min-dist", o.min_dist, "Minimum pixel distance (min_distance)");
  c->add_option("--noise", o.noise, "Relative log-normal depth noise");
  c->add_option("--seed", o.seed, "Random seed");
  c->add_option("--out", o.out, "Sparse CSV to write")->required();
}

void add_bench(CLI::App& app, BenchOptions& o) {
  auto* c = app.add_subcommand("bench", "Time each pipeline stage");
  c->add_option("--pred", o.pred, "Predicted inverse depth (PFM); synthetic when absent");
  c->add_option("--sparse", o.sparse, "Sparse points CSV");
  c->add_option("--checkpoint", o.checkpoint, "SML checkpoint");
  c->add_option("--gt", o.gt, "Ground-truth depth PNG for the metrics stage");
  c->add_option("--encoding", o.encoding, "Depth PNG encoding")->check(CLI::IsMember({"mm", "q8.8"}));
  c->add_option("--profile", o.profile, "Clamp profile")->check(CLI::IsMember({"void", "tartanair"}));
  c->add_option("--width", o.width, "Synthetic frame width");
  c->add_option("--height", o.height, "Synthetic frame height");
  c->add_option("--points", o.points, "Synthetic sparse point count");
  c->add_option("--seed", o.seed, "Random seed");
  c->add_option("--warmup", o.warmup, "Untimed runs per stage")->check(CLI::NonNegativeNumber);
  c->add_option("--runs", o.runs, "Timed runs per stage")->check(CLI::PositiveNumber);
  c->add_option("--csv", o.csv, "Timing CSV to write");
}

void add_synth(CLI::App& app, SynthOptions& o) {
  auto* c = app.add_subcommand("synth", "Generate a synthetic dataset with a manifest");
  c->add_option("--out", o.out_dir, "Output directory")->required();
  c->add_option("--frames", o.frames, "Number of frames");
  c->add_option("--first-index", o.first_index, "Index of the first frame");
  c->add_option("--width", o.width, "Frame width");
  c->add_option("--height", o.height, "Frame height");
  c->add_option("--count", o.count, "Sparse points per frame");
  c->add_option("--mode", o.mode, "Sparsifier mode")
      ->check(CLI::IsMember({"min_distance", "clustered"}));
  c->add_flag("!--no-field", o.local_field, "Disable the local scale distortion");
  c->add_option("--encoding", o.encoding, "Depth PNG encoding")->check(CLI::IsMember({"mm", "q8.8"}));
  c->add_option("--profile", o.profile, "Profile written to the manifest")
      ->check(CLI::IsMember({"void", "tartanair"}));
  c->add_option("--seed", o.seed, "Dataset seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metric depth from monocular predictions and sparse metric points"};
  app.require_subcommand(1);
  AlignOptions align;
  EvalOptions eval;
  TrainOptions train;
  SparsifyOptions sparsify;
  BenchOptions bench;
  SynthOptions synth;
  add_align(app, align);
  add_eval(app, eval);
  add_train(app, train);
  add_sparsify(app, sparsify);
  add_bench(app, bench);
  add_synth(app, synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("align")) cmd_align(align, std::cout);
    if (app.got_subcommand("eval")) cmd_eval(eval, std::cout);
    if (app.got_subcommand("train")) cmd_train(train, std::cout);
    if (app.got_subcommand("sparsify")) cmd_sparsify(sparsify, std::cerr);
    if (app.got_subcommand("bench")) cmd_bench(bench, std::cout);
    if (app.got_subcommand("synth")) cmd_synth(synth, std::cout);
  } catch (const mvid::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mvid::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
