#include "fingat/model/attention_dump.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "fingat/errors.hpp"

namespace fingat::model {

std::vector<AttentionRow> capture_attention(const PredictionBatch& batch) {
  std::vector<AttentionRow> rows;
  for (const auto& c : batch.attention) {
    for (std::size_t q = 0; q < c.from.size(); ++q)
      for (std::size_t k = 0; k < c.to.size(); ++k)
        rows.push_back({batch.prediction_date, c.level, c.context, c.from[q], c.to[k], c.weights[q * c.to.size() + k]});
  }
  return rows;
}

void write_attention_csv(std::ostream& out, const std::vector<AttentionRow>& rows) {
  out << kAttentionHeader << '\n';
  char buf[32];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.weight);
    out << r.date.iso() << ',' << r.level << ',' << r.context << ',' << r.from << ',' << r.to << ',' << buf << '\n';
  }
}

std::vector<AttentionRow> read_attention_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || line != kAttentionHeader) throw ParseError(source, 1, "expected header " + std::string(kAttentionHeader));
  std::vector<AttentionRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 6) throw ParseError(source, lineno, "expected 6 fields");
    AttentionRow r;
    try {
      r.date = data::Date::parse(f[0]);
    } catch (const DomainError& e) {
      throw ParseError(source, lineno, e.what());
    }
    r.level = f[1];
    r.context = f[2];
    r.from = f[3];
    r.to = f[4];
    const auto [ptr, ec] = std::from_chars(f[5].data(), f[5].data() + f[5].size(), r.weight);
    if (ec != std::errc() || ptr != f[5].data() + f[5].size()) throw ParseError(source, lineno, "bad weight");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::map<std::string, LevelStats> attention_summary(const std::vector<AttentionRow>& rows) {
  std::map<std::string, LevelStats> out;
  for (const auto& r : rows) {
    auto& s = out[r.level];
    ++s.count;
    s.mean += r.weight;
  }
  for (auto& [level, s] : out) s.mean /= static_cast<double>(s.count);
  for (const auto& r : rows) {
    auto& s = out[r.level];
    s.variance += (r.weight - s.mean) * (r.weight - s.mean);
  }
  for (auto& [level, s] : out) s.variance /= static_cast<double>(s.count);
  return out;
}

nlohmann::json to_json(const std::map<std::string, LevelStats>& summary) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [level, s] : summary) j[level] = {{"count", s.count}, {"mean", s.mean}, {"variance", s.variance}};
  return j;
}

}  // namespace fingat::model
