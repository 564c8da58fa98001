#include "hyperpipe/bytes.hpp"

#include <bit>
#include <cstring>

#include "hyperpipe/error.hpp"

namespace hyperpipe {

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::str(std::string_view s) {
  u64(s.size());
  buf_.append(s);
}

void ByteWriter::f64s(std::span<const double> v) {
  u64(v.size());
  for (double d : v) f64(d);
}

void ByteWriter::u64s(std::span<const std::size_t> v) {
  u64(v.size());
  for (std::size_t x : v) u64(x);
}

void ByteReader::need(std::size_t n) const {
  if (n > data_.size() - pos_) throw ArchiveError("truncated payload");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return static_cast<std::uint8_t>(data_[pos_++]);
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(data_[pos_ + i])) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(data_[pos_ + i])) << (8 * i);
  pos_ += 8;
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

bool ByteReader::boolean() {
  const auto v = u8();
  if (v > 1) throw ArchiveError("invalid boolean byte");
  return v == 1;
}

std::string ByteReader::str() {
  const auto n = u64();
  return std::string(raw(n));
}

std::vector<double> ByteReader::f64s() {
  const auto n = u64();
  need(n > remaining() / 8 ? remaining() + 1 : n * 8);
  std::vector<double> out(n);
  for (auto& d : out) d = f64();
  return out;
}

std::vector<std::size_t> ByteReader::u64s() {
  const auto n = u64();
  need(n > remaining() / 8 ? remaining() + 1 : n * 8);
  std::vector<std::size_t> out(n);
  for (auto& x : out) x = static_cast<std::size_t>(u64());
  return out;
}

std::string_view ByteReader::raw(std::size_t n) {
  need(n);
  auto out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

}  // namespace hyperpipe
