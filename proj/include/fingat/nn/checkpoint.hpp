#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fingat/ad/tensor.hpp"
#include "json.hpp"

namespace fingat::nn {

// File layout:
//   "FGATCKPT" | u32 version | u64 index length | JSON index | payload
// The index lists {name, shape, offset, nbytes, fnv1a} per tensor plus a
// free-form "meta" object; the payload is the tensors' float64 values,
// little-endian, back to back in index order.
inline constexpr char kCheckpointMagic[8] = {'F', 'G', 'A', 'T', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::vector<std::pair<std::string, ad::Tensor>> tensors;
  nlohmann::json meta = nlohmann::json::object();

  // Throws CheckpointError when absent.
  const ad::Tensor& at(const std::string& name) const;
};

using TensorEntries = std::vector<std::pair<std::string, const ad::Tensor*>>;

std::vector<char> serialize_checkpoint(const TensorEntries& tensors, const nlohmann::json& meta);
Checkpoint deserialize_checkpoint(std::span<const char> bytes, const std::string& source = "checkpoint");

void write_checkpoint(const std::filesystem::path& path, const TensorEntries& tensors, const nlohmann::json& meta);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace fingat::nn
