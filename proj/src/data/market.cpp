#include "fingat/data/market.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <string_view>

#include "fingat/errors.hpp"

namespace fingat::data {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, const std::string& source, std::size_t line, const char* name) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw ParseError(source, line, std::string("bad ") + name + " '" + std::string(field) + "'");
  }
  return v;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

void validate_bar(const PriceBar& bar) {
  const std::string where = bar.stock_id + " " + bar.date.iso();
  for (double p : {bar.open, bar.high, bar.low, bar.close, bar.adj_close}) {
    if (!(p > 0.0)) throw DataError(where + ": prices must be strictly positive");
  }
  if (bar.volume < 0.0) throw DataError(where + ": negative volume");
  if (bar.low > std::min(bar.open, bar.close) || bar.high < std::max(bar.open, bar.close) || bar.high < bar.low) {
    throw DataError(where + ": high/low band does not contain open/close");
  }
}

PriceTable parse_prices(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kPriceHeader) {
    throw ParseError(source, 1, std::string("header must be exactly '") + kPriceHeader + "'");
  }
  PriceTable table;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = strip_cr(line);
    if (text.empty()) continue;
    const auto f = split_fields(text);
    if (f.size() != 8) throw ParseError(source, lineno, "expected 8 fields, got " + std::to_string(f.size()));
    PriceBar bar;
    bar.stock_id = std::string(f[0]);
    if (bar.stock_id.empty()) throw ParseError(source, lineno, "empty stock_id");
    try {
      bar.date = Date::parse(f[1]);
    } catch (const DomainError& e) {
      throw ParseError(source, lineno, e.what());
    }
    bar.open = parse_number(f[2], source, lineno, "open");
    bar.high = parse_number(f[3], source, lineno, "high");
    bar.low = parse_number(f[4], source, lineno, "low");
    bar.close = parse_number(f[5], source, lineno, "close");
    bar.adj_close = parse_number(f[6], source, lineno, "adj_close");
    bar.volume = parse_number(f[7], source, lineno, "volume");
    try {
      validate_bar(bar);
    } catch (const DataError& e) {
      throw DataError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
    table[bar.stock_id].push_back(std::move(bar));
  }
  for (auto& [stock, bars] : table) {
    std::stable_sort(bars.begin(), bars.end(), [](const PriceBar& a, const PriceBar& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < bars.size(); ++i) {
      if (bars[i].date == bars[i - 1].date) {
        throw DataError(source + ": duplicate bar for " + stock + " on " + bars[i].date.iso());
      }
    }
  }
  return table;
}

PriceTable load_prices(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_prices(in, path.string());
}

void write_prices(const std::filesystem::path& path, const PriceTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << kPriceHeader << '\n';
  for (const auto& [stock, bars] : table) {
    for (const auto& b : bars) {
      out << stock << ',' << b.date.iso() << ',' << fmt_double(b.open) << ',' << fmt_double(b.high) << ','
          << fmt_double(b.low) << ',' << fmt_double(b.close) << ',' << fmt_double(b.adj_close) << ','
          << fmt_double(b.volume) << '\n';
    }
  }
}

SectorCatalog SectorCatalog::from_pairs(const std::vector<std::pair<std::string, std::string>>& stock_to_sector) {
  SectorCatalog c;
  std::set<std::string> sectors;
  for (const auto& [stock, sector] : stock_to_sector) {
    if (stock.empty() || sector.empty()) throw DataError("empty stock or sector id");
    if (!c.stock_sector_.emplace(stock, sector).second) throw DataError("stock " + stock + " listed twice");
    sectors.insert(sector);
    c.members_[sector].push_back(stock);
  }
  c.sectors_.assign(sectors.begin(), sectors.end());
  for (auto& [sector, m] : c.members_) std::sort(m.begin(), m.end());
  return c;
}

const std::string& SectorCatalog::sector_of(const std::string& stock) const {
  auto it = stock_sector_.find(stock);
  if (it == stock_sector_.end()) throw DataError("stock " + stock + " is not in the sector catalog");
  return it->second;
}

std::size_t SectorCatalog::sector_index(const std::string& sector) const {
  auto it = std::lower_bound(sectors_.begin(), sectors_.end(), sector);
  if (it == sectors_.end() || *it != sector) throw DataError("unknown sector " + sector);
  return static_cast<std::size_t>(it - sectors_.begin());
}

const std::vector<std::string>& SectorCatalog::members(const std::string& sector) const {
  auto it = members_.find(sector);
  if (it == members_.end()) throw DataError("unknown sector " + sector);
  return it->second;
}

std::vector<std::pair<std::string, std::string>> SectorCatalog::pairs() const {
  return {stock_sector_.begin(), stock_sector_.end()};
}

SectorCatalog SectorCatalog::restricted_to(const std::vector<std::string>& stocks) const {
  std::vector<std::pair<std::string, std::string>> kept;
  for (const auto& s : stocks) kept.emplace_back(s, sector_of(s));
  return from_pairs(kept);
}

SectorCatalog parse_sectors(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kSectorHeader) {
    throw ParseError(source, 1, std::string("header must be exactly '") + kSectorHeader + "'");
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = strip_cr(line);
    if (text.empty()) continue;
    const auto f = split_fields(text);
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      throw ParseError(source, lineno, "expected 'stock_id,sector_id'");
    }
    pairs.emplace_back(std::string(f[0]), std::string(f[1]));
  }
  try {
    return SectorCatalog::from_pairs(pairs);
  } catch (const DataError& e) {
    throw DataError(source + ": " + e.what());
  }
}

SectorCatalog load_sectors(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_sectors(in, path.string());
}

void write_sectors(const std::filesystem::path& path, const SectorCatalog& catalog) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << kSectorHeader << '\n';
  for (const auto& [stock, sector] : catalog.pairs()) out << stock << ',' << sector << '\n';
}

}  // namespace fingat::data
