#pragma once

#include <filesystem>

#include "hyperpipe/pipeline.hpp"

namespace hyperpipe {

/// Stage cache backed by one "<hex key>.stage" file per entry, in the model
/// archive container format. Entries are written atomically; an entry that
/// fails to decode or verify is reported with a warning and treated as a miss
/// (the recomputed stage then overwrites it). Safe to share across threads.
class DiskStageCache final : public StageCache {
 public:
  explicit DiskStageCache(std::filesystem::path folder);

  std::optional<StageOutput> load(const Digest& key) override;
  void store(const Digest& key, const StageOutput& output) override;

  std::filesystem::path entry_path(const Digest& key) const;
  const std::filesystem::path& folder() const noexcept { return folder_; }

 private:
  std::filesystem::path folder_;
};

}  // namespace hyperpipe
