#include "fingat/data/cache.hpp"

#include <fstream>
#include <iterator>

#include "fingat/binary_io.hpp"
#include "fingat/errors.hpp"

namespace fingat::data {

std::vector<char> serialize_cache(const InstanceCache& cache) {
  io::Writer w;
  w.put_bytes(std::string_view(kCacheMagic, sizeof kCacheMagic));
  w.put(kCacheVersion);

  const auto& o = cache.options;
  w.put(static_cast<std::uint64_t>(o.weeks));
  w.put(static_cast<std::uint64_t>(o.days_per_week));
  w.put(static_cast<std::uint8_t>(o.features.set));
  w.put(static_cast<std::uint8_t>(o.features.ma_literal));
  w.put(o.calendar_coverage);

  const auto pairs = cache.catalog.pairs();
  w.put(static_cast<std::uint64_t>(pairs.size()));
  for (const auto& [stock, sector] : pairs) {
    w.put_string(stock);
    w.put_string(sector);
  }

  w.put(static_cast<std::uint64_t>(cache.prices.size()));
  for (const auto& [stock, bars] : cache.prices) {
    w.put_string(stock);
    w.put(static_cast<std::uint64_t>(bars.size()));
    for (const auto& b : bars) {
      w.put(static_cast<std::int32_t>(b.date.days()));
      for (double v : {b.open, b.high, b.low, b.close, b.adj_close, b.volume}) w.put(v);
    }
  }

  w.put(static_cast<std::uint64_t>(cache.instances.size()));
  for (const auto& inst : cache.instances) {
    w.put(static_cast<std::int32_t>(inst.prediction_date.days()));
    w.put(static_cast<std::uint64_t>(inst.weeks));
    w.put(static_cast<std::uint64_t>(inst.days_per_week));
    w.put(static_cast<std::uint64_t>(inst.feature_dim));
    w.put(static_cast<std::uint64_t>(inst.stocks.size()));
    for (const auto& s : inst.stocks) {
      w.put_string(s.stock_id);
      w.put_doubles(s.features);
      w.put(s.target_return);
      w.put(static_cast<std::int32_t>(s.target_move));
    }
  }
  std::vector<char> bytes = w.bytes();
  const std::uint64_t sum = io::fnv1a(bytes);
  const char* p = reinterpret_cast<const char*>(&sum);
  bytes.insert(bytes.end(), p, p + sizeof sum);
  return bytes;
}

InstanceCache deserialize_cache(std::span<const char> bytes, const std::string& source) {
  if (bytes.size() < sizeof kCacheMagic + sizeof(std::uint64_t)) throw CheckpointError(source + ": truncated cache");
  const auto body = bytes.first(bytes.size() - sizeof(std::uint64_t));
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body.size(), sizeof stored);

  io::Reader r(body, source);
  if (r.get_bytes(sizeof kCacheMagic) != std::string(kCacheMagic, sizeof kCacheMagic)) r.fail("not an instance cache");
  if (const auto v = r.get<std::uint32_t>(); v != kCacheVersion) r.fail("unsupported cache version " + std::to_string(v));
  if (io::fnv1a(body) != stored) r.fail("checksum mismatch");

  InstanceCache cache;
  auto& o = cache.options;
  o.weeks = r.get<std::uint64_t>();
  o.days_per_week = r.get<std::uint64_t>();
  o.features.set = static_cast<FeatureSet>(r.get<std::uint8_t>());
  o.features.ma_literal = r.get<std::uint8_t>() != 0;
  o.calendar_coverage = r.get<double>();

  std::vector<std::pair<std::string, std::string>> pairs(r.get<std::uint64_t>());
  for (auto& [stock, sector] : pairs) {
    stock = r.get_string();
    sector = r.get_string();
  }
  cache.catalog = SectorCatalog::from_pairs(pairs);

  const auto n_stocks = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < n_stocks; ++i) {
    const std::string stock = r.get_string();
    auto& bars = cache.prices[stock];
    bars.resize(r.get<std::uint64_t>());
    for (auto& b : bars) {
      b.stock_id = stock;
      b.date = Date(r.get<std::int32_t>());
      b.open = r.get<double>();
      b.high = r.get<double>();
      b.low = r.get<double>();
      b.close = r.get<double>();
      b.adj_close = r.get<double>();
      b.volume = r.get<double>();
    }
  }

  cache.instances.resize(r.get<std::uint64_t>());
  for (auto& inst : cache.instances) {
    inst.prediction_date = Date(r.get<std::int32_t>());
    inst.weeks = r.get<std::uint64_t>();
    inst.days_per_week = r.get<std::uint64_t>();
    inst.feature_dim = r.get<std::uint64_t>();
    inst.stocks.resize(r.get<std::uint64_t>());
    for (auto& s : inst.stocks) {
      s.stock_id = r.get_string();
      s.features = r.get_doubles();
      s.target_return = r.get<double>();
      s.target_move = r.get<std::int32_t>();
      if (s.features.size() != inst.window_days() * inst.feature_dim) r.fail("instance feature block has wrong size");
    }
  }
  if (r.remaining() != 0) r.fail("trailing bytes");
  return cache;
}

void write_cache(const std::filesystem::path& path, const InstanceCache& cache) {
  const auto bytes = serialize_cache(cache);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

InstanceCache read_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open cache " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_cache(bytes, path.string());
}

}  // namespace fingat::data
