#pragma once

// Single-file model archives and the block container they share with the
// stage cache.
//
// Layout (all integers little-endian):
//   bytes 0-7     magic "PHOTON01"
//   bytes 8-11    u32 manifest length L
//   bytes 12..    L bytes of UTF-8 JSON manifest
//   then blocks:  u32 name length, name, u64 payload length, payload

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hyperpipe/pipeline.hpp"
#include "hyperpipe/pipeline_io.hpp"

namespace hyperpipe {

inline constexpr std::string_view kArchiveMagic = "PHOTON01";
inline constexpr int kArchiveSchemaVersion = 1;

struct Container {
  Json manifest = Json::object();
  std::vector<std::pair<std::string, std::string>> blocks;
};

std::string encode_container(const Container& c);
/// Throws ArchiveError: "not a model archive" on a bad magic, "truncated
/// payload" when a length runs past the end.
Container decode_container(std::string_view bytes);

/// Writes `bytes` to a sibling temporary file, then renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

/// Requires a fitted pipeline. `config` is the configuration it was fitted with.
void save_model(const Pipeline& pipeline, const Config& config, const std::filesystem::path& path);

struct LoadedModel {
  Pipeline pipeline;
  Config config;
};

/// Throws ArchiveError on a bad magic, unknown schema version, or truncated payload.
LoadedModel load_model(const std::filesystem::path& path);

/// Predictions of a fitted pipeline; checks the feature count first.
std::vector<double> model_predict(const Pipeline& pipeline, const FeatureMatrix& x);

}  // namespace hyperpipe
