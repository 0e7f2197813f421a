#include "fingat/eval/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "fingat/errors.hpp"

namespace fingat::eval {

namespace {
// Indices sorted by descending value, ascending id on ties.
std::vector<std::size_t> order_desc(std::span<const double> v, const std::vector<std::string>& ids) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (v[a] != v[b]) return v[a] > v[b];
    return ids[a] < ids[b];
  });
  return idx;
}

void check_k(const RankedList& r, std::size_t k) {
  if (k == 0 || k > r.stock_ids.size()) {
    throw DomainError("K=" + std::to_string(k) + " outside 1.." + std::to_string(r.stock_ids.size()));
  }
}
}  // namespace

RankedList rank_day(data::Date date, const std::vector<std::string>& ids, std::span<const double> pred,
                    std::span<const double> truth) {
  if (ids.size() != pred.size() || ids.size() != truth.size()) throw ShapeError("rank_day: misaligned inputs");
  if (ids.empty()) throw DomainError("rank_day: empty cross-section");
  const auto by_pred = order_desc(pred, ids);
  const auto by_truth = order_desc(truth, ids);
  std::vector<std::size_t> rank_of(ids.size());
  for (std::size_t r = 0; r < by_truth.size(); ++r) rank_of[by_truth[r]] = r + 1;
  RankedList out;
  out.date = date;
  for (std::size_t i : by_pred) {
    out.stock_ids.push_back(ids[i]);
    out.pred_return.push_back(pred[i]);
    out.true_return.push_back(truth[i]);
    out.true_rank.push_back(rank_of[i]);
  }
  return out;
}

double mrr_at_k(const RankedList& ranked, std::size_t k) {
  check_k(ranked, k);
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += 1.0 / static_cast<double>(ranked.true_rank[i]);
  return s / static_cast<double>(k);
}

double precision_at_k(const RankedList& ranked, std::size_t k) {
  check_k(ranked, k);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += ranked.true_rank[i] <= k;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double accuracy(std::span<const double> move_probs, std::span<const double> labels) {
  if (move_probs.size() != labels.size()) throw ShapeError("accuracy: misaligned inputs");
  if (move_probs.empty()) throw DomainError("accuracy: no predictions");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += (move_probs[i] > 0.5) == (labels[i] > 0.5);
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, m] : r.by_k) j[std::to_string(k)] = {{"mrr", m.mrr}, {"precision", m.precision}};
  j["acc"] = r.acc;
  j["n_days"] = r.n_days;
  j["seeds"] = r.seeds;
  return j;
}

void write_detail_csv(std::ostream& out, const std::vector<DetailRow>& rows) {
  out << kDetailHeader << '\n';
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,%zu,%zu", r.pred_return, r.true_return, r.pred_move,
                  r.true_move, r.pred_rank, r.true_rank);
    out << r.date.iso() << ',' << r.stock_id << ',' << buf << '\n';
  }
}

namespace {
template <typename T>
T parse_number(const std::string& s, const std::string& source, std::size_t line) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(source, line, "bad number '" + s + "'");
  return v;
}
}  // namespace

std::vector<DetailRow> read_detail_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || line != kDetailHeader) throw ParseError(source, 1, "expected header " + std::string(kDetailHeader));
  std::vector<DetailRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw ParseError(source, lineno, "expected 8 fields");
    DetailRow r;
    try {
      r.date = data::Date::parse(f[0]);
    } catch (const DomainError& e) {
      throw ParseError(source, lineno, e.what());
    }
    r.stock_id = f[1];
    r.pred_return = parse_number<double>(f[2], source, lineno);
    r.true_return = parse_number<double>(f[3], source, lineno);
    r.pred_move = parse_number<double>(f[4], source, lineno);
    r.true_move = parse_number<int>(f[5], source, lineno);
    r.pred_rank = parse_number<std::size_t>(f[6], source, lineno);
    r.true_rank = parse_number<std::size_t>(f[7], source, lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

EvalReport build_report(const std::vector<DayPredictions>& days, const std::vector<std::size_t>& ks,
                        std::vector<DetailRow>* detail) {
  if (days.empty()) throw DomainError("evaluation needs at least one day");
  EvalReport report;
  report.n_days = days.size();
  std::vector<double> probs, labels;
  for (const auto& d : days) {
    const auto ranked = rank_day(d.date, d.stock_ids, d.pred_return, d.true_return);
    for (std::size_t k : ks) {
      auto& m = report.by_k[k];
      m.mrr += mrr_at_k(ranked, k);
      m.precision += precision_at_k(ranked, k);
    }
    if (d.pred_move.size() != d.stock_ids.size() || d.true_move.size() != d.stock_ids.size()) {
      throw ShapeError("evaluation day " + d.date.iso() + " has misaligned movement columns");
    }
    probs.insert(probs.end(), d.pred_move.begin(), d.pred_move.end());
    labels.insert(labels.end(), d.true_move.begin(), d.true_move.end());
    if (detail) {
      std::map<std::string, std::size_t> index_of;
      for (std::size_t i = 0; i < d.stock_ids.size(); ++i) index_of[d.stock_ids[i]] = i;
      // Rows in predicted order.
      for (std::size_t r = 0; r < ranked.stock_ids.size(); ++r) {
        const std::size_t i = index_of.at(ranked.stock_ids[r]);
        detail->push_back({d.date, d.stock_ids[i], d.pred_return[i], d.true_return[i], d.pred_move[i],
                           static_cast<int>(d.true_move[i]), r + 1, ranked.true_rank[r]});
      }
    }
  }
  for (auto& [k, m] : report.by_k) {
    m.mrr /= static_cast<double>(days.size());
    m.precision /= static_cast<double>(days.size());
  }
  report.acc = accuracy(probs, labels);
  return report;
}

EvalReport report_from_detail(const std::vector<DetailRow>& rows, const std::vector<std::size_t>& ks) {
  std::map<data::Date, DayPredictions> by_date;
  for (const auto& r : rows) {
    auto& d = by_date[r.date];
    d.date = r.date;
    d.stock_ids.push_back(r.stock_id);
    d.pred_return.push_back(r.pred_return);
    d.pred_move.push_back(r.pred_move);
    d.true_return.push_back(r.true_return);
    d.true_move.push_back(r.true_move);
  }
  std::vector<DayPredictions> days;
  for (auto& [date, d] : by_date) days.push_back(std::move(d));
  return build_report(days, ks);
}

RandomBaseline random_baseline(std::size_t n, std::size_t k, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw DomainError("random_baseline needs at least one trial");
  if (k == 0 || k > n) throw DomainError("random_baseline: K outside 1..n");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> ranks(n);
  double sm = 0.0, smm = 0.0, sp = 0.0, spp = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::iota(ranks.begin(), ranks.end(), 1);
    std::shuffle(ranks.begin(), ranks.end(), rng);
    // ranks[i] is the true rank of the stock placed at predicted position i.
    double m = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < k; ++i) {
      m += 1.0 / static_cast<double>(ranks[i]);
      hits += ranks[i] <= k;
    }
    m /= static_cast<double>(k);
    const double p = static_cast<double>(hits) / static_cast<double>(k);
    sm += m;
    smm += m * m;
    sp += p;
    spp += p * p;
  }
  const double nt = static_cast<double>(trials);
  RandomBaseline b{n, k, trials};
  b.mrr = sm / nt;
  b.precision = sp / nt;
  auto se = [&](double s, double ss, double mean) {
    if (trials < 2) return 0.0;
    const double var = std::max(0.0, (ss - nt * mean * mean) / (nt - 1.0));
    return std::sqrt(var / nt);
  };
  b.mrr_se = se(sm, smm, b.mrr);
  b.precision_se = se(sp, spp, b.precision);
  return b;
}

}  // namespace fingat::eval
