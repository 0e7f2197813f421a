#pragma once

#include <filesystem>
#include <vector>

#include "fingat/data/instances.hpp"
#include "fingat/data/market.hpp"

namespace fingat::data {

// Instance cache, little-endian binary:
//   "FGATINST" | u32 version (=1) | options | catalog | price table | instances | u64 FNV-1a of all prior bytes
// The raw bars travel with the instances so sweeps can re-window without
// touching the CSVs. Writing is deterministic: same inputs, same bytes.
inline constexpr char kCacheMagic[8] = {'F', 'G', 'A', 'T', 'I', 'N', 'S', 'T'};
inline constexpr std::uint32_t kCacheVersion = 1;

struct InstanceCache {
  InstanceOptions options;
  SectorCatalog catalog;
  PriceTable prices;
  std::vector<InstanceWindow> instances;
};

std::vector<char> serialize_cache(const InstanceCache& cache);
InstanceCache deserialize_cache(std::span<const char> bytes, const std::string& source = "<cache>");

void write_cache(const std::filesystem::path& path, const InstanceCache& cache);
// Throws CheckpointError on a bad magic, version, or checksum.
InstanceCache read_cache(const std::filesystem::path& path);

}  // namespace fingat::data
