#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fingat/data/date.hpp"

namespace fingat::data {

inline constexpr const char* kPriceHeader = "stock_id,date,open,high,low,close,adj_close,volume";
inline constexpr const char* kSectorHeader = "stock_id,sector_id";

struct PriceBar {
  std::string stock_id;
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double adj_close = 0.0;
  double volume = 0.0;
};

// Throws DataError when prices are non-positive, volume is negative, or the
// high/low band does not contain open and close.
void validate_bar(const PriceBar& bar);

// stock_id -> bars ascending by date. std::map keeps stock order deterministic.
using PriceTable = std::map<std::string, std::vector<PriceBar>>;

PriceTable parse_prices(std::istream& in, const std::string& source = "<stream>");
PriceTable load_prices(const std::filesystem::path& path);
void write_prices(const std::filesystem::path& path, const PriceTable& table);

// Stock -> sector mapping. Sectors and members are kept sorted by id.
class SectorCatalog {
 public:
  SectorCatalog() = default;
  // Throws DataError on a stock listed twice or an empty id.
  static SectorCatalog from_pairs(const std::vector<std::pair<std::string, std::string>>& stock_to_sector);

  bool contains(const std::string& stock) const { return stock_sector_.count(stock) != 0; }
  const std::string& sector_of(const std::string& stock) const;
  std::size_t sector_index(const std::string& sector) const;
  const std::vector<std::string>& sectors() const { return sectors_; }
  const std::vector<std::string>& members(const std::string& sector) const;
  std::vector<std::pair<std::string, std::string>> pairs() const;
  std::size_t stock_count() const { return stock_sector_.size(); }

  // Restriction to the given stocks; sectors left without members vanish.
  SectorCatalog restricted_to(const std::vector<std::string>& stocks) const;

 private:
  std::map<std::string, std::string> stock_sector_;
  std::vector<std::string> sectors_;
  std::map<std::string, std::vector<std::string>> members_;
};

SectorCatalog parse_sectors(std::istream& in, const std::string& source = "<stream>");
SectorCatalog load_sectors(const std::filesystem::path& path);
void write_sectors(const std::filesystem::path& path, const SectorCatalog& catalog);

}  // namespace fingat::data
