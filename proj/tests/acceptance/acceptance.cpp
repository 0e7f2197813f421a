// Acceptance gate. Usage: acceptance <criterion 1..10>
// Prints one "[criterion N] PASS|FAIL ..." line and exits 0 on PASS.
// Tolerances and budgets are pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fingat/errors.hpp"
#include "fingat/eval/evaluate.hpp"
#include "fingat/eval/metrics.hpp"
#include "fingat/model/fingat.hpp"
#include "fingat/nn/checkpoint.hpp"
#include "fingat/train/gradcheck_suite.hpp"
#include "fingat/train/loss.hpp"
#include "fingat/train/sweep.hpp"
#include "fingat/train/trainer.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;
using namespace fingat;

namespace {

constexpr double kGradTolerance = 1e-4;
constexpr double kGradBudgetSeconds = 60.0;
constexpr double kAttentionTolerance = 1e-9;
constexpr double kRankLossTolerance = 1e-12;
constexpr double kReconcileTolerance = 1e-9;
constexpr double kIsolationTolerance = 1e-10;
constexpr double kLearnabilityFactor = 2.0;
constexpr std::size_t kBaselineTrials = 100000;
constexpr double kLearnabilityBudgetSeconds = 300.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int verdict(int n, bool pass, const std::string& detail) {
  std::cout << "[criterion " << n << "] " << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
  return pass ? 0 : 1;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

const data::InstanceCache& synthetic() {
  static const data::InstanceCache cache = test::synthetic_cache(40);
  return cache;
}

const data::DatasetSplit& synthetic_split() {
  static const data::DatasetSplit split = train::make_split(synthetic(), 3);
  return split;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fingat_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------- 1

int gradients() {
  const auto t0 = Clock::now();
  const auto rows = train::run_gradcheck_suite();
  const double secs = seconds_since(t0);
  double worst = 0.0;
  std::string worst_row;
  std::size_t model_rows = 0;
  for (const auto& r : rows) {
    if (r.result.max_relative_error >= worst) {
      worst = r.result.max_relative_error;
      worst_row = r.name;
    }
    model_rows += r.name.rfind("model/", 0) == 0;
  }
  const bool pass = worst < kGradTolerance && secs < kGradBudgetSeconds &&
                    model_rows == model::all_variants().size();
  return verdict(1, pass,
                 std::to_string(rows.size()) + " rows, max rel err " + fmt(worst) + " (" + worst_row + "), " +
                     fmt(secs) + " s");
}

// ---------------------------------------------------------------- 2

int attention_normalization() {
  std::mt19937_64 rng(2024);
  const auto& variants = model::all_variants();
  std::size_t rows_checked = 0, violations = 0;
  double worst = 0.0;
  for (int pass = 0; pass < 100; ++pass) {
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    model::ModelConfig c;
    c.variant = variants[pick(0, variants.size() - 1)];
    c.hidden = pick(2, 8);
    c.weeks = pick(1, 4);
    c.days_per_week = pick(1, 5);
    c.feature_dim = pick(2, 8);
    c.seed = rng();
    const std::size_t n = pick(2, 12);
    const auto catalog = test::modulo_sectors(n, pick(1, 4));
    const auto state = model::ModelState::init(c);
    const auto inst = test::random_instance(rng, test::stock_names(n), c.weeks, c.days_per_week, c.feature_dim);
    const auto batch = model::forward(state, inst, catalog);
    for (const auto& cap : batch.attention) {
      const std::size_t cols = cap.to.size();
      for (std::size_t r = 0; r < cap.from.size(); ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += cap.weights[r * cols + j];
        const double err = std::abs(s - 1.0);
        worst = std::max(worst, err);
        violations += !(err <= kAttentionTolerance);
        ++rows_checked;
      }
    }
  }
  return verdict(2, violations == 0 && rows_checked > 0,
                 std::to_string(rows_checked) + " rows, " + std::to_string(violations) + " violations, worst |sum-1| " +
                     fmt(worst));
}

// ---------------------------------------------------------------- 3

// Brute force straight from the definitions: sort by prediction, count how
// many stocks truly beat each pick.
std::pair<double, double> brute_metrics(const std::vector<double>& pred, const std::vector<double>& truth,
                                        std::size_t k) {
  const std::size_t n = pred.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pred[a] > pred[b]; });
  double mrr = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t rank = 1;
    for (std::size_t j = 0; j < n; ++j) rank += truth[j] > truth[order[i]];
    mrr += 1.0 / static_cast<double>(rank);
    hits += rank <= k;
  }
  return {mrr / static_cast<double>(k), static_cast<double>(hits) / static_cast<double>(k)};
}

int metric_oracle() {
  std::mt19937_64 rng(3);
  const std::size_t ks[] = {1, 5, 10, 20};
  std::size_t compared = 0, mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    // Distinct values from permutations, so the tie rule never applies.
    std::vector<double> pred(n), truth(n);
    std::iota(pred.begin(), pred.end(), 0.0);
    std::iota(truth.begin(), truth.end(), 0.0);
    std::shuffle(pred.begin(), pred.end(), rng);
    std::shuffle(truth.begin(), truth.end(), rng);
    const auto ranked = eval::rank_day(data::Date::from_ymd(2022, 1, 3), test::stock_names(n), pred, truth);
    for (std::size_t k : ks) {
      if (k > n) continue;
      const auto [mrr, prec] = brute_metrics(pred, truth, k);
      mismatches += eval::mrr_at_k(ranked, k) != mrr;
      mismatches += eval::precision_at_k(ranked, k) != prec;
      compared += 2;
    }
  }
  std::vector<double> perfect(12);
  std::iota(perfect.begin(), perfect.end(), 0.0);
  const auto ranked = eval::rank_day(data::Date::from_ymd(2022, 1, 3), test::stock_names(12), perfect, perfect);
  const bool exact = eval::mrr_at_k(ranked, 5) == 137.0 / 300.0;
  return verdict(3, mismatches == 0 && exact,
                 std::to_string(compared) + " comparisons, " + std::to_string(mismatches) +
                     " mismatches; perfect MRR@5 == 137/300: " + (exact ? "yes" : "no"));
}

// ---------------------------------------------------------------- 4

int rank_loss_oracle() {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  std::size_t concordant_nonzero = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    std::vector<double> pred(n), truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = g(rng);
      truth[i] = 0.05 * g(rng);
    }
    // Unordered pairs, each counted for both orientations.
    double oracle = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) oracle += 2.0 * std::max(0.0, -(pred[i] - pred[j]) * (truth[i] - truth[j]));
    worst = std::max(worst, std::abs(train::rank_loss(pred, truth) - oracle));

    // A strictly increasing map of the truth is concordant with it.
    std::vector<double> agree(n);
    for (std::size_t i = 0; i < n; ++i) agree[i] = 3.0 * truth[i] + std::tanh(truth[i]) - 1.0;
    concordant_nonzero += train::rank_loss(agree, truth) != 0.0;
  }
  return verdict(4, worst <= kRankLossTolerance && concordant_nonzero == 0,
                 "max |loss - oracle| " + fmt(worst) + ", concordant nonzero " + std::to_string(concordant_nonzero));
}

// ---------------------------------------------------------------- 5

int reconciliation() {
  double worst = 0.0;
  std::size_t epochs = 0;
  for (auto v : model::all_variants()) {
    model::ModelConfig mc;
    mc.variant = v;
    train::TrainConfig tc;
    tc.max_epochs = 10;
    tc.patience = 10;
    tc.batch_size = 32;  // several optimizer steps per epoch
    const auto r = train::train(synthetic_split(), synthetic().catalog, mc, tc);
    for (const auto& e : r.epochs) {
      const double expect = train::total_loss(e.rank, e.move, e.l2, r.delta_effective, tc.lambda);
      worst = std::max(worst, std::abs(e.total - expect));
      ++epochs;
    }
  }
  return verdict(5, worst <= kReconcileTolerance,
                 std::to_string(epochs) + " epochs over all variants, max |total - parts| " + fmt(worst));
}

// ---------------------------------------------------------------- 6

int learnability() {
  const auto t0 = Clock::now();
  train::TrainConfig tc;  // lr 1e-3, delta 0.01, lambda 1e-4
  tc.max_epochs = 200;
  tc.patience = 200;  // run all 200 epochs
  model::ModelConfig mc;  // hidden 16, 3 weeks
  const auto r = train::train(synthetic_split(), synthetic().catalog, mc, tc);
  const double secs = seconds_since(t0);
  const auto base = eval::random_baseline(12, 5, kBaselineTrials, 1);
  const double threshold = kLearnabilityFactor * base.mrr;
  const double ceiling = 137.0 / 300.0;
  const bool pass = r.best_score >= threshold && secs < kLearnabilityBudgetSeconds;
  return verdict(6, pass,
                 "best validation MRR@5 " + fmt(r.best_score) + " (epoch " + std::to_string(r.best_epoch) +
                     ") vs 2 x random " + fmt(threshold) + " (random " + fmt(base.mrr) + " +- " + fmt(base.mrr_se) +
                     "); perfect-ranking ceiling " + fmt(ceiling) + "; " + fmt(secs) + " s");
}

// ---------------------------------------------------------------- 7

int ablations() {
  const auto& split = synthetic_split();
  const auto& catalog = synthetic().catalog;
  std::ostringstream detail;
  bool all_done = true;
  model::ModelState no_inter_state;
  for (auto v : model::all_variants()) {
    model::ModelConfig mc;
    mc.variant = v;
    train::TrainConfig tc;
    tc.max_epochs = 20;
    model::ModelState best;
    try {
      const auto r = train::train(split, catalog, mc, tc, &best);
      const bool done = !r.epochs.empty() && r.best_epoch >= 1 && std::isfinite(r.epochs.back().total);
      all_done = all_done && done;
      detail << model::to_string(v) << ":" << r.epochs.size() << "ep ";
      if (v == model::Variant::no_inter) no_inter_state = best;
    } catch (const std::exception& e) {
      all_done = false;
      detail << model::to_string(v) << ":error(" << e.what() << ") ";
    }
  }
  // Perturb one sector's features; no other sector's predictions may move.
  double worst = 0.0;
  if (all_done) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 0.5);
    for (const auto& inst : split.test) {
      const std::string target = catalog.sector_of(inst.stocks.front().stock_id);
      auto moved = inst;
      for (auto& s : moved.stocks)
        if (catalog.sector_of(s.stock_id) == target)
          for (auto& x : s.features) x += g(rng);
      const auto a = model::forward(no_inter_state, inst, catalog, false);
      const auto b = model::forward(no_inter_state, moved, catalog, false);
      for (std::size_t i = 0; i < a.stock_ids.size(); ++i)
        if (a.sectors[i] != target) worst = std::max(worst, std::abs(a.pred_return[i] - b.pred_return[i]));
    }
  }
  detail << "| no_inter isolation max change " << fmt(worst);
  return verdict(7, all_done && worst <= kIsolationTolerance, detail.str());
}

// ---------------------------------------------------------------- 8

std::vector<char> file_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

int determinism() {
  std::vector<train::TrainReport> runs;
  for (int i = 0; i < 2; ++i) {
    train::TrainConfig tc;
    tc.max_epochs = 10;
    tc.run_dir = scratch_dir("determinism_" + std::to_string(i));
    runs.push_back(train::train(synthetic_split(), synthetic().catalog, model::ModelConfig{}, tc));
  }
  bool same_losses = runs[0].epochs.size() >= 5 && runs[1].epochs.size() >= 5;
  for (std::size_t e = 0; same_losses && e < 5; ++e) {
    const auto& a = runs[0].epochs[e];
    const auto& b = runs[1].epochs[e];
    same_losses = a.rank == b.rank && a.move == b.move && a.l2 == b.l2 && a.total == b.total;
  }
  const bool same_best = runs[0].best_epoch == runs[1].best_epoch;
  const bool same_bytes = file_bytes(runs[0].best_checkpoint) == file_bytes(runs[1].best_checkpoint);
  return verdict(8, same_losses && same_best && same_bytes,
                 std::string("first 5 epoch losses identical: ") + (same_losses ? "yes" : "no") + ", best epoch " +
                     std::to_string(runs[0].best_epoch) + "/" + std::to_string(runs[1].best_epoch) +
                     ", best.ckpt bytes identical: " + (same_bytes ? "yes" : "no"));
}

// ---------------------------------------------------------------- 9

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream f(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

int end_to_end() {
  constexpr std::size_t k = 5;
  const fs::path dir = scratch_dir("e2e");
  const std::string tool = FINGAT_TOOL_PATH;
  const std::string cfg = (dir / "config.json").string();
  auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + tool + "\" " + args + " > \"" + (dir / "last.log").string() + "\" 2>&1";
    return std::system(cmd.c_str());
  };
  std::vector<std::string> failed;
  auto step = [&](const std::string& name, const std::string& args) {
    if (run(args) != 0) failed.push_back(name);
    return failed.empty();
  };
  const fs::path run_dir = dir / "runs" / "run" / "full" / "seed_1";
  const std::string ckpt = (run_dir / "best.ckpt").string();
  std::string date;
  bool consistent = false;
  if (step("synth", "synth --out \"" + dir.string() + "\"") &&
      step("ingest", "-c \"" + cfg + "\" ingest") &&
      step("train", "-c \"" + cfg + "\" train --epochs 5") &&
      step("evaluate", "-c \"" + cfg + "\" evaluate --checkpoint \"" + ckpt + "\"")) {
    const auto detail = read_csv(run_dir / "detail.csv");
    if (!detail.empty()) date = detail.front()[0];
    // Detail columns: date,stock_id,pred_return,true_return,pred_move,true_move,pred_rank,true_rank
    std::map<std::size_t, std::string> expected;
    for (const auto& row : detail)
      if (row[0] == date && std::stoul(row[6]) <= k) expected[std::stoul(row[6])] = row[1];
    if (step("recommend", "-c \"" + cfg + "\" recommend --checkpoint \"" + ckpt + "\" --date " + date +
                              " -k " + std::to_string(k)) &&
        step("export-attention", "-c \"" + cfg + "\" export-attention --checkpoint \"" + ckpt + "\" --date " + date)) {
      const auto rec = read_csv(run_dir / ("recommend_" + date + ".csv"));
      consistent = rec.size() == k && expected.size() == k;
      for (std::size_t i = 0; consistent && i < k; ++i)
        consistent = std::stoul(rec[i][0]) == i + 1 && rec[i][1] == expected[i + 1];
      consistent = consistent && fs::exists(run_dir / ("attention_" + date + ".csv"));
    }
  }
  std::string failures;
  for (const auto& f : failed) failures += f + " ";
  return verdict(9, failed.empty() && consistent,
                 (failed.empty() ? std::string("all steps exit 0") : "failed: " + failures) + "; date " + date +
                     ", K=" + std::to_string(k) + " list matches detail.csv: " + (consistent ? "yes" : "no"));
}

// ---------------------------------------------------------------- 10

int ablation_echo() {
  const auto& split = synthetic_split();
  const auto& catalog = synthetic().catalog;
  auto mean_train_mrr = [&](model::Variant v, std::vector<double>& per_seed) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      model::ModelConfig mc;
      mc.variant = v;
      mc.seed = seed;
      train::TrainConfig tc;
      tc.seed = seed;
      tc.max_epochs = 100;
      model::ModelState best;
      train::train(split, catalog, mc, tc, &best);
      per_seed.push_back(eval::evaluate(best, split.train, catalog, {5}).by_k.at(5).mrr);
    }
    return std::accumulate(per_seed.begin(), per_seed.end(), 0.0) / static_cast<double>(per_seed.size());
  };
  std::vector<double> full_runs, no_intra_runs;
  const double full = mean_train_mrr(model::Variant::full, full_runs);
  const double no_intra = mean_train_mrr(model::Variant::no_intra, no_intra_runs);
  std::ostringstream detail;
  detail << "(soft) mean train MRR@5 full " << fmt(full) << " vs no_intra " << fmt(no_intra) << "; ordering "
         << (full >= no_intra ? "matches" : "does not match") << " the ablation table";
  std::cout << "[criterion 10] " << (full >= no_intra ? "PASS" : "FAIL") << "  " << detail.str() << std::endl;
  return 0;  // non-gating
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <criterion 1..10>\n";
    return 2;
  }
  const int n = std::atoi(argv[1]);
  try {
    switch (n) {
      case 1: return gradients();
      case 2: return attention_normalization();
      case 3: return metric_oracle();
      case 4: return rank_loss_oracle();
      case 5: return reconciliation();
      case 6: return learnability();
      case 7: return ablations();
      case 8: return determinism();
      case 9: return end_to_end();
      case 10: return ablation_echo();
      default: std::cerr << "unknown criterion " << argv[1] << "\n"; return 2;
    }
  } catch (const std::exception& e) {
    return verdict(n, false, std::string("exception: ") + e.what());
  }
}
