#include "mvid/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

namespace mvid {

SparsifierMode parse_sparsifier_mode(std::string_view name) {
  if (name == "min_distance") return SparsifierMode::kMinDistance;
  if (name == "clustered") return SparsifierMode::kClustered;
  fail(ErrorCode::kInvalidArgument, "unknown sparsifier mode '" + std::string(name) + "'");
}

std::string_view sparsifier_mode_name(SparsifierMode mode) noexcept {
  return mode == SparsifierMode::kMinDistance ? "min_distance" : "clustered";
}

void SparsifierConfig::validate() const {
  if (target_count < 0) fail(ErrorCode::kInvalidArgument, "target_count must be >= 0");
  if (!(min_dist >= 0.0)) fail(ErrorCode::kInvalidArgument, "min_dist must be >= 0");
  if (cluster_count < 1) fail(ErrorCode::kInvalidArgument, "cluster_count must be >= 1");
  if (!(cluster_sigma >= 0.0)) fail(ErrorCode::kInvalidArgument, "cluster_sigma must be >= 0");
  if (!(depth_noise >= 0.0)) fail(ErrorCode::kInvalidArgument, "depth_noise must be >= 0");
}

namespace {

double noisy_depth(double d, double sigma, std::mt19937_64& rng) {
  if (sigma <= 0.0) return d;
  std::normal_distribution<double> n(0.0, 1.0);
  return d * std::exp(sigma * n(rng));
}

// Uniform-cell bucket grid for "any accepted point within r?" queries.
class PointGrid {
 public:
  PointGrid(int width, int height, double radius)
      : cell_(std::max(1.0, radius)),
        cols_(static_cast<int>(std::ceil(width / cell_)) + 1),
        rows_(static_cast<int>(std::ceil(height / cell_)) + 1),
        radius2_(radius * radius),
        buckets_(static_cast<std::size_t>(cols_) * rows_) {}

  bool has_neighbour(int u, int v) const {
    const int cu = static_cast<int>(u / cell_), cv = static_cast<int>(v / cell_);
    for (int dv = -1; dv <= 1; ++dv) {
      for (int du = -1; du <= 1; ++du) {
        const int bu = cu + du, bv = cv + dv;
        if (bu < 0 || bv < 0 || bu >= cols_ || bv >= rows_) continue;
        for (const auto& [pu, pv] : buckets_[static_cast<std::size_t>(bv) * cols_ + bu]) {
          const double dx = pu - u, dy = pv - v;
          if (dx * dx + dy * dy < radius2_) return true;
        }
      }
    }
    return false;
  }

  void add(int u, int v) {
    const int cu = static_cast<int>(u / cell_), cv = static_cast<int>(v / cell_);
    buckets_[static_cast<std::size_t>(cv) * cols_ + cu].emplace_back(u, v);
  }

 private:
  double cell_;
  int cols_, rows_;
  double radius2_;
  std::vector<std::vector<std::pair<int, int>>> buckets_;
};

GrayImage depth_texture(const DepthFrame& gt) {
  GrayImage g(gt.width(), gt.height(), 0.0);
  for (std::size_t i = 0; i < gt.size(); ++i) g[i] = is_valid_depth(gt[i]) ? 1.0 / gt[i] : 0.0;
  return scharr_gradients(g);
}

}  // namespace

SparsePoints sample_min_distance(const DepthFrame& gt, const SparsifierConfig& cfg,
                                 const GrayImage* texture) {
  cfg.validate();
  SparsePoints out;
  if (cfg.target_count == 0 || gt.empty()) return out;

  GrayImage fallback;
  if (texture == nullptr) {
    fallback = depth_texture(gt);
    texture = &fallback;
  }
  require_same_shape(gt, *texture, "sparsifier texture");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Weighted random permutation: key = log(U) / w, larger keys first.
  struct Candidate {
    double key;
    std::uint32_t index;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!is_valid_depth(gt[i])) continue;
    const double weight = 0.05 + std::clamp((*texture)[i], 0.0, 1.0);
    const double u = std::max(unif(rng), 1e-300);
    candidates.push_back({std::log(u) / weight, static_cast<std::uint32_t>(i)});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.key > b.key; });

  PointGrid grid(gt.width(), gt.height(), cfg.min_dist);
  for (const auto& c : candidates) {
    if (static_cast<int>(out.size()) >= cfg.target_count) break;
    const int u = static_cast<int>(c.index % static_cast<std::uint32_t>(gt.width()));
    const int v = static_cast<int>(c.index / static_cast<std::uint32_t>(gt.width()));
    if (cfg.min_dist > 0.0 && grid.has_neighbour(u, v)) continue;
    grid.add(u, v);
    out.push_back({u, v, noisy_depth(gt(u, v), cfg.depth_noise, rng)});
  }
  return out;
}

SparsePoints sample_clustered(const DepthFrame& gt, const SparsifierConfig& cfg) {
  cfg.validate();
  SparsePoints out;
  if (cfg.target_count == 0 || gt.empty()) return out;

  std::vector<std::uint32_t> valid;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (is_valid_depth(gt[i])) valid.push_back(static_cast<std::uint32_t>(i));
  }
  if (valid.empty()) return out;

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, valid.size() - 1);
  std::vector<std::pair<double, double>> centers;
  for (int k = 0; k < cfg.cluster_count; ++k) {
    const std::uint32_t i = valid[pick(rng)];
    centers.emplace_back(i % static_cast<std::uint32_t>(gt.width()),
                         i / static_cast<std::uint32_t>(gt.width()));
  }

  std::normal_distribution<double> offset(0.0, 1.0);
  std::uniform_int_distribution<int> which(0, cfg.cluster_count - 1);
  std::unordered_set<std::uint64_t> taken;
  const long attempts = 50L * cfg.target_count + 100;
  for (long a = 0; a < attempts && static_cast<int>(out.size()) < cfg.target_count; ++a) {
    const auto& [cx, cy] = centers[static_cast<std::size_t>(which(rng))];
    const double dx = offset(rng) * cfg.cluster_sigma;
    const double dy = offset(rng) * cfg.cluster_sigma;
    const int u = static_cast<int>(std::lround(cx + dx));
    const int v = static_cast<int>(std::lround(cy + dy));
    if (!gt.contains(u, v) || !is_valid_depth(gt(u, v))) continue;
    const std::uint64_t key = static_cast<std::uint64_t>(v) * gt.width() + u;
    if (!taken.insert(key).second) continue;
    out.push_back({u, v, noisy_depth(gt(u, v), cfg.depth_noise, rng)});
  }
  return out;
}

SparsePoints sparsify(const DepthFrame& gt, const SparsifierConfig& cfg, const RgbImage* rgb) {
  if (cfg.mode == SparsifierMode::kClustered) return sample_clustered(gt, cfg);
  if (rgb != nullptr) {
    require_same_shape(gt, *rgb, "sparsifier rgb");
    const GrayImage texture = scharr_gradients(grayscale(*rgb));
    return sample_min_distance(gt, cfg, &texture);
  }
  return sample_min_distance(gt, cfg);
}

}  // namespace mvid
