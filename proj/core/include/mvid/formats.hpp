#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mvid/depth.hpp"
#include "mvid/png_io.hpp"
#include "mvid/sml.hpp"
#include "mvid/train.hpp"

namespace mvid {

// Little-endian single-channel PFM ("Pf", scale -1), rows stored bottom-up.
InverseDepthMap read_inverse_pfm(const std::filesystem::path& path);
void write_inverse_pfm(const InverseDepthMap& map, const std::filesystem::path& path);

// "u,v,depth_m" per line, '#' comments and blank lines ignored. A repeated
// (u, v) keeps the first occurrence and appends a message to `warnings`.
// Throws kParseError (with the line number) and kNonPositiveDepth.
SparsePoints parse_sparse_csv(std::string_view text, std::vector<std::string>* warnings = nullptr);
SparsePoints read_sparse_csv(const std::filesystem::path& path,
                             std::vector<std::string>* warnings = nullptr);
void write_sparse_csv(std::span<const SparsePoint> points, const std::filesystem::path& path);

struct ManifestRecord {
  std::string id;
  std::optional<std::filesystem::path> rgb;
  std::filesystem::path gt;
  std::optional<std::filesystem::path> pred;
  std::optional<std::filesystem::path> sparse;
  std::string profile;

  bool operator==(const ManifestRecord&) const = default;
};

// Tab-separated text file:
//   # mvid-manifest encoding=mm
//   # id<TAB>rgb<TAB>gt<TAB>pred<TAB>sparse<TAB>profile
//   f0000<TAB>rgb/f0000.png<TAB>gt/f0000.png<TAB>...
// '-' marks an absent optional column. Relative paths are resolved against
// the manifest's directory on load and written relative to it on save.
struct DatasetManifest {
  DepthEncoding encoding = DepthEncoding::kMillimeters;
  std::vector<ManifestRecord> records;
};

// Ids must be unique (kParseError). With check_files, every referenced file
// must exist (kIoFailure).
DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
DatasetManifest read_manifest(const std::filesystem::path& path, bool check_files = true);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// Flat key=value file; keys are the TrainConfig and SmlConfig field names
// (stage_widths as a comma list, optional channels as extra_<name>).
struct TrainingConfigFile {
  TrainConfig train;
  SmlConfig sml;
};

TrainingConfigFile parse_training_config(std::string_view text);
TrainingConfigFile read_training_config(const std::filesystem::path& path);
std::string format_training_config(const TrainingConfigFile& config);

// Whole-file helpers. Throw kIoFailure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace mvid
