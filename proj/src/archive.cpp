#include "hyperpipe/archive.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "hyperpipe/bytes.hpp"
#include "hyperpipe/error.hpp"
#include "hyperpipe/results.hpp"

namespace hyperpipe {

std::string encode_container(const Container& c) {
  const std::string manifest = canonical_dump(c.manifest);
  ByteWriter out;
  out.raw(kArchiveMagic);
  out.u32(static_cast<std::uint32_t>(manifest.size()));
  out.raw(manifest);
  for (const auto& [name, payload] : c.blocks) {
    out.u32(static_cast<std::uint32_t>(name.size()));
    out.raw(name);
    out.u64(payload.size());
    out.raw(payload);
  }
  return out.take();
}

Container decode_container(std::string_view bytes) {
  if (bytes.size() < kArchiveMagic.size() || bytes.substr(0, kArchiveMagic.size()) != kArchiveMagic)
    throw ArchiveError("not a model archive");
  Container c;
  try {
    ByteReader in(bytes.substr(kArchiveMagic.size()));
    const std::uint32_t len = in.u32();
    const std::string_view manifest = in.raw(len);
    try {
      c.manifest = Json::parse(manifest);
    } catch (const Json::parse_error& e) {
      throw ArchiveError(std::string("unreadable manifest: ") + e.what());
    }
    while (!in.done()) {
      const std::uint32_t name_len = in.u32();
      std::string name(in.raw(name_len));
      const std::uint64_t payload_len = in.u64();
      if (payload_len > in.remaining()) throw ArchiveError("truncated payload");
      c.blocks.emplace_back(std::move(name), std::string(in.raw(payload_len)));
    }
  } catch (const ArchiveError& e) {
    if (std::string_view(e.what()).starts_with("unreadable manifest")) throw;
    throw ArchiveError("truncated payload");
  }
  return c;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  static std::atomic<std::uint64_t> counter{0};
  std::ostringstream suffix;
  suffix << ".tmp." << std::this_thread::get_id() << "." << counter++;
  const std::filesystem::path tmp = path.string() + suffix.str();
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error("cannot write " + tmp.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot move " + tmp.string() + " into place at " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void save_model(const Pipeline& pipeline, const Config& config, const std::filesystem::path& path) {
  if (!pipeline.fitted()) throw StateError("cannot save an unfitted pipeline");
  Container c;
  c.manifest = {{"format", "hyperpipe-model"},
                {"schema_version", kArchiveSchemaVersion},
                {"pipeline", pipeline_to_json(pipeline, true)},
                {"config", config_to_json(config)},
                {"n_features", pipeline.n_features()},
                {"target_kind", to_string(pipeline.target_kind())},
                {"created_by", "hyperpipe"}};
  for (const Node* leaf : pipeline.leaves()) {
    ByteWriter state;
    leaf->element()->save_state(state);
    c.blocks.emplace_back(leaf->name(), state.take());
  }
  write_file_atomic(path, encode_container(c));
}

LoadedModel load_model(const std::filesystem::path& path) {
  const Container c = decode_container(read_file(path));
  const Json& m = c.manifest;
  if (!m.is_object() || m.value("format", "") != "hyperpipe-model") throw ArchiveError("not a model archive");
  const int version = m.value("schema_version", -1);
  if (version != kArchiveSchemaVersion)
    throw ArchiveError("unsupported model archive schema version " + std::to_string(version) + " (this build reads " +
                       std::to_string(kArchiveSchemaVersion) + ")");
  LoadedModel out;
  try {
    out.pipeline = pipeline_from_json(m.at("pipeline"), default_registry(), "manifest.pipeline");
    out.config = config_from_json(m.at("config"), "manifest.config");
    auto leaves = out.pipeline.leaves();
    if (leaves.size() != c.blocks.size())
      throw ArchiveError("archive has " + std::to_string(c.blocks.size()) + " payloads for " +
                         std::to_string(leaves.size()) + " elements");
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (c.blocks[i].first != leaves[i]->name())
        throw ArchiveError("payload '" + c.blocks[i].first + "' does not match element '" + leaves[i]->name() + "'");
      ByteReader in(c.blocks[i].second);
      leaves[i]->element()->load_state(in);
      if (!in.done()) throw ArchiveError("trailing bytes in payload '" + c.blocks[i].first + "'");
    }
    out.pipeline.mark_fitted(m.at("n_features").get<std::size_t>(),
                             parse_target_kind(m.at("target_kind").get<std::string>()));
  } catch (const Json::exception& e) {
    throw ArchiveError(std::string("malformed manifest: ") + e.what());
  } catch (const ValidationError& e) {
    throw ArchiveError(std::string("malformed manifest: ") + e.what());
  }
  return out;
}

std::vector<double> model_predict(const Pipeline& pipeline, const FeatureMatrix& x) {
  if (x.cols() != pipeline.n_features())
    throw ValidationError("column mismatch: model expects " + std::to_string(pipeline.n_features()) +
                          " feature columns, input has " + std::to_string(x.cols()));
  return pipeline.predict(x);
}

}  // namespace hyperpipe
