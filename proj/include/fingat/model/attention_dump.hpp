#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fingat/model/fingat.hpp"
#include "json.hpp"

namespace fingat::model {

inline constexpr const char* kAttentionHeader = "date,level,context,from,to,weight";

struct AttentionRow {
  data::Date date;
  std::string level;
  std::string context;
  std::string from;
  std::string to;
  double weight = 0.0;
};

// One row per attention coefficient; off-neighborhood zeros are kept so
// every (level, context, from) group is a full distribution.
std::vector<AttentionRow> capture_attention(const PredictionBatch& batch);

void write_attention_csv(std::ostream& out, const std::vector<AttentionRow>& rows);
std::vector<AttentionRow> read_attention_csv(std::istream& in, const std::string& source = "<stream>");

struct LevelStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // population
};

std::map<std::string, LevelStats> attention_summary(const std::vector<AttentionRow>& rows);
nlohmann::json to_json(const std::map<std::string, LevelStats>& summary);

}  // namespace fingat::model
