#include "hyperpipe/cache.hpp"

#include "hyperpipe/archive.hpp"
#include "hyperpipe/bytes.hpp"
#include "hyperpipe/error.hpp"
#include "hyperpipe/log.hpp"

namespace hyperpipe {

namespace {

constexpr int kCacheSchemaVersion = 1;

void write_matrix(ByteWriter& out, const FeatureMatrix& m) {
  out.u64(m.rows());
  out.u64(m.cols());
  out.f64s(m.values());
  out.u64(m.column_names().size());
  for (const auto& n : m.column_names()) out.str(n);
}

FeatureMatrix read_matrix(ByteReader& in) {
  const auto rows = in.u64();
  const auto cols = in.u64();
  auto values = in.f64s();
  std::vector<std::string> names(in.u64());
  for (auto& n : names) n = in.str();
  if (values.size() != rows * cols) throw ArchiveError("matrix size does not match its shape");
  return FeatureMatrix(rows, cols, std::move(values), std::move(names));
}

std::string checksum(const Container& c) {
  Sha256 h;
  for (const auto& [name, payload] : c.blocks) h.update_str(name).update_str(payload);
  return to_hex(h.finish());
}

const std::string& block(const Container& c, std::size_t i, const char* name) {
  if (i >= c.blocks.size() || c.blocks[i].first != name) throw ArchiveError(std::string("missing block ") + name);
  return c.blocks[i].second;
}

}  // namespace

DiskStageCache::DiskStageCache(std::filesystem::path folder) : folder_(std::move(folder)) {
  std::error_code ec;
  std::filesystem::create_directories(folder_, ec);
  if (ec || !std::filesystem::is_directory(folder_)) throw Error("cannot create cache folder " + folder_.string());
}

std::filesystem::path DiskStageCache::entry_path(const Digest& key) const {
  return folder_ / (to_hex(key) + ".stage");
}

std::optional<StageOutput> DiskStageCache::load(const Digest& key) {
  const auto path = entry_path(key);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    Container c = decode_container(read_file(path));
    if (c.manifest.value("format", "") != "hyperpipe-stage" ||
        c.manifest.value("schema_version", -1) != kCacheSchemaVersion || c.manifest.value("key", "") != to_hex(key))
      throw ArchiveError("unexpected manifest");
    const std::string& sum = block(c, 5, "checksum");
    Container body = c;
    body.blocks.pop_back();
    if (checksum(body) != sum) throw ArchiveError("checksum mismatch");

    StageOutput out;
    out.state = block(c, 0, "state");
    ByteReader x(block(c, 1, "x"));
    FeatureMatrix fx = read_matrix(x);
    ByteReader y(block(c, 2, "y"));
    const auto kind = static_cast<TargetKind>(y.u8());
    TargetVector ty(y.f64s(), kind);
    ByteReader e(block(c, 3, "extras"));
    ExtraData extras;
    for (auto n = e.u64(); n > 0; --n) {
      std::string name = e.str();
      extras.add(name, read_matrix(e));
    }
    ByteReader r(block(c, 4, "row_ids"));
    out.data = Dataset(std::move(fx), std::move(ty), std::move(extras), r.u64s());
    return out;
  } catch (const Error& e) {
    log::warn("cache entry " + path.filename().string() + " is unreadable (" + e.what() + "); recomputing");
    return std::nullopt;
  }
}

void DiskStageCache::store(const Digest& key, const StageOutput& output) {
  Container c;
  c.manifest = {{"format", "hyperpipe-stage"}, {"schema_version", kCacheSchemaVersion}, {"key", to_hex(key)}};
  c.blocks.emplace_back("state", output.state);
  ByteWriter x;
  write_matrix(x, output.data.x);
  c.blocks.emplace_back("x", x.take());
  ByteWriter y;
  y.u8(static_cast<std::uint8_t>(output.data.y.kind()));
  y.f64s(output.data.y.values());
  c.blocks.emplace_back("y", y.take());
  ByteWriter e;
  e.u64(output.data.extras.channels().size());
  for (const auto& [name, m] : output.data.extras.channels()) {
    e.str(name);
    write_matrix(e, m);
  }
  c.blocks.emplace_back("extras", e.take());
  ByteWriter r;
  r.u64s(output.data.row_ids);
  c.blocks.emplace_back("row_ids", r.take());
  c.blocks.emplace_back("checksum", checksum(c));
  write_file_atomic(entry_path(key), encode_container(c));
}

}  // namespace hyperpipe
