#include "fingat/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "fingat/binary_io.hpp"
#include "fingat/errors.hpp"

namespace fingat::nn {

using nlohmann::json;

const ad::Tensor& Checkpoint::at(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw CheckpointError("checkpoint has no tensor '" + name + "'");
}

namespace {
std::span<const char> as_bytes(std::span<const double> v) {
  return {reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double)};
}
}  // namespace

std::vector<char> serialize_checkpoint(const TensorEntries& tensors, const json& meta) {
  json index;
  index["tensors"] = json::array();
  std::uint64_t offset = 0;
  std::vector<char> payload;
  for (const auto& [name, t] : tensors) {
    const auto bytes = as_bytes(t->data());
    index["tensors"].push_back({{"name", name},
                                {"shape", t->shape()},
                                {"offset", offset},
                                {"nbytes", bytes.size()},
                                {"fnv1a", io::fnv1a(bytes)}});
    payload.insert(payload.end(), bytes.begin(), bytes.end());
    offset += bytes.size();
  }
  index["meta"] = meta;
  const std::string text = index.dump();

  io::Writer w;
  w.put_bytes(std::string_view(kCheckpointMagic, sizeof kCheckpointMagic));
  w.put(kCheckpointVersion);
  w.put(static_cast<std::uint64_t>(text.size()));
  w.put_bytes(text);
  std::vector<char> out = w.bytes();
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Checkpoint deserialize_checkpoint(std::span<const char> bytes, const std::string& source) {
  io::Reader r(bytes, source);
  if (r.get_bytes(sizeof kCheckpointMagic) != std::string(kCheckpointMagic, sizeof kCheckpointMagic)) {
    r.fail("not a checkpoint file");
  }
  if (const auto v = r.get<std::uint32_t>(); v != kCheckpointVersion) {
    r.fail("unsupported checkpoint version " + std::to_string(v));
  }
  const auto index_len = r.get<std::uint64_t>();
  if (index_len > r.remaining()) r.fail("truncated index");
  json index;
  try {
    index = json::parse(r.get_bytes(index_len));
  } catch (const json::exception& e) {
    r.fail(std::string("unreadable index: ") + e.what());
  }
  const std::size_t base = r.position();
  const auto payload = bytes.subspan(base);

  Checkpoint ck;
  try {
    std::uint64_t expected_offset = 0;
    for (const auto& entry : index.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<ad::Shape>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const auto nbytes = entry.at("nbytes").get<std::uint64_t>();
      if (offset != expected_offset || nbytes != ad::shape_size(shape) * sizeof(double) ||
          offset + nbytes > payload.size()) {
        r.fail("tensor '" + name + "' has an inconsistent index entry");
      }
      const auto chunk = payload.subspan(offset, nbytes);
      if (io::fnv1a(chunk) != entry.at("fnv1a").get<std::uint64_t>()) r.fail("checksum mismatch in '" + name + "'");
      std::vector<double> values(nbytes / sizeof(double));
      std::memcpy(values.data(), chunk.data(), nbytes);
      ck.tensors.emplace_back(name, ad::Tensor(shape, std::move(values)));
      expected_offset += nbytes;
    }
    if (expected_offset != payload.size()) r.fail("trailing bytes after payload");
    ck.meta = index.value("meta", json::object());
  } catch (const json::exception& e) {
    r.fail(std::string("malformed index: ") + e.what());
  } catch (const ShapeError& e) {
    r.fail(std::string("malformed tensor shape: ") + e.what());
  }
  return ck;
}

void write_checkpoint(const std::filesystem::path& path, const TensorEntries& tensors, const json& meta) {
  const auto bytes = serialize_checkpoint(tensors, meta);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw CheckpointError("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes, path.string());
}

}  // namespace fingat::nn
