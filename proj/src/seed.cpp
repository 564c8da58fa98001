#include "hyperpipe/seed.hpp"

#include "hyperpipe/digest.hpp"

namespace hyperpipe {

std::uint64_t derive_seed(std::uint64_t master, const ScopePath& path) {
  Sha256 h;
  h.update_str("hyperpipe.seed");
  h.update_u64(master);
  h.update_u64(path.size());
  for (const auto& part : path) {
    if (const auto* s = std::get_if<std::string>(&part)) {
      h.update("s");
      h.update_str(*s);
    } else {
      h.update("i");
      h.update_u64(static_cast<std::uint64_t>(std::get<std::int64_t>(part)));
    }
  }
  const Digest d = h.finish();
  std::uint64_t out = 0;
  for (int i = 7; i >= 0; --i) out = (out << 8) | d[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace hyperpipe
