#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace hyperpipe {

using Digest = std::array<std::uint8_t, 32>;

std::string to_hex(const Digest& d);

/// Incremental SHA-256 (OpenSSL EVP underneath).
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::string_view bytes);
  Sha256& update_u64(std::uint64_t v);
  Sha256& update_f64(double v);
  /// Length-prefixed, so ("ab","c") and ("a","bc") hash differently.
  Sha256& update_str(std::string_view s);
  Digest finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Digest sha256(std::string_view bytes);

}  // namespace hyperpipe
