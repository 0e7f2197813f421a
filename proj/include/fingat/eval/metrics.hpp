#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fingat/data/date.hpp"
#include "json.hpp"

namespace fingat::eval {

// One prediction day ordered by descending predicted return. Ties (in both
// predicted and true returns) go to the smaller stock id.
struct RankedList {
  data::Date date;
  std::vector<std::string> stock_ids;
  std::vector<double> pred_return;
  std::vector<double> true_return;
  std::vector<std::size_t> true_rank;  // 1-based rank by true return
};

// Inputs are aligned by stock; throws ShapeError on mismatched lengths and
// DomainError on an empty day.
RankedList rank_day(data::Date date, const std::vector<std::string>& ids, std::span<const double> pred,
                    std::span<const double> truth);

// (1/K) * sum over the predicted top K of 1 / true_rank. Note this is not
// the first-relevant-item MRR used in retrieval. Throws DomainError unless
// 1 <= K <= n.
double mrr_at_k(const RankedList& ranked, std::size_t k);
// |predicted top K  ∩  true top K| / K.
double precision_at_k(const RankedList& ranked, std::size_t k);
// Share of predictions with (prob > 0.5) == (label == 1). Throws
// DomainError on empty input, ShapeError on mismatched lengths.
double accuracy(std::span<const double> move_probs, std::span<const double> labels);

struct KMetrics {
  double mrr = 0.0;
  double precision = 0.0;
};

struct EvalReport {
  std::map<std::size_t, KMetrics> by_k;
  double acc = 0.0;
  std::size_t n_days = 0;
  std::vector<std::uint64_t> seeds;
};

nlohmann::json to_json(const EvalReport& r);

// One row per stock-day.
struct DetailRow {
  data::Date date;
  std::string stock_id;
  double pred_return = 0.0;
  double true_return = 0.0;
  double pred_move = 0.0;
  int true_move = 0;
  std::size_t pred_rank = 0;
  std::size_t true_rank = 0;
};

inline constexpr const char* kDetailHeader =
    "date,stock_id,pred_return,true_return,pred_move,true_move,pred_rank,true_rank";

void write_detail_csv(std::ostream& out, const std::vector<DetailRow>& rows);
std::vector<DetailRow> read_detail_csv(std::istream& in, const std::string& source = "<stream>");

// Per-day predictions with their truth, the input to report building.
struct DayPredictions {
  data::Date date;
  std::vector<std::string> stock_ids;
  std::vector<double> pred_return;
  std::vector<double> pred_move;
  std::vector<double> true_return;
  std::vector<double> true_move;
};

// MRR/Precision averaged over days; ACC pooled over every stock-day. A K
// larger than a day's cross-section is a DomainError.
EvalReport build_report(const std::vector<DayPredictions>& days, const std::vector<std::size_t>& ks,
                        std::vector<DetailRow>* detail = nullptr);
// Regroups detail rows by date and rebuilds the report from them.
EvalReport report_from_detail(const std::vector<DetailRow>& rows, const std::vector<std::size_t>& ks);

struct RandomBaseline {
  std::size_t n = 0, k = 0, trials = 0;
  double mrr = 0.0, mrr_se = 0.0;
  double precision = 0.0, precision_se = 0.0;
};

// Monte-Carlo metrics of a uniformly random ranking of n stocks.
RandomBaseline random_baseline(std::size_t n, std::size_t k, std::size_t trials, std::uint64_t seed);

}  // namespace fingat::eval
