#include "fingat/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "fingat/ad/tape.hpp"
#include "fingat/cli/run_config.hpp"
#include "fingat/data/cache.hpp"
#include "fingat/data/synth.hpp"
#include "fingat/errors.hpp"
#include "fingat/eval/evaluate.hpp"
#include "fingat/model/attention_dump.hpp"
#include "fingat/nn/checkpoint.hpp"
#include "fingat/train/gradcheck_suite.hpp"
#include "fingat/train/sweep.hpp"
#include "spdlog/sinks/basic_file_sink.h"
#include "spdlog/sinks/stdout_sinks.h"
#include "spdlog/spdlog.h"

namespace fingat::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<double> kLearningRateGrid{0.0005, 0.001, 0.005};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

data::Date parse_date_arg(const std::string& text) {
  try {
    return data::Date::parse(text);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("--date: ") + e.what());
  }
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  fs::path config_path;
  std::vector<std::string> overrides;
  bool verbose = false;

  RunConfig load() const {
    json j = config_path.empty() ? json::object() : read_config_json(config_path);
    for (const auto& o : overrides) apply_override(j, o);
    auto c = run_config_from_json(j);
    const fs::path base = config_path.empty() ? fs::current_path() : fs::absolute(config_path).parent_path();
    c = resolve_paths(std::move(c), base);
    c.validate();
    return c;
  }
};

data::InstanceCache load_cache(const RunConfig& c) {
  if (!fs::exists(c.cache)) throw ConfigError("no instance cache at " + c.cache.string() + "; run `ingest` first");
  return data::read_cache(c.cache);
}

// A checkpoint with the split it was trained on, normalized the same way.
struct LoadedModel {
  model::ModelState state;
  data::DatasetSplit split;
  std::uint64_t seed = 0;
};

LoadedModel load_model(const RunConfig& c, const data::InstanceCache& cache, const fs::path& ckpt) {
  const auto ck = nn::read_checkpoint(ckpt);
  LoadedModel m;
  m.state = model::ModelState::from_checkpoint(ck);
  m.seed = m.state.config.seed;
  m.split = train::make_split(cache, m.state.config.weeks, c.split);
  const auto norm = train::normalization_from_meta(ck.meta);
  if (norm.mean != m.split.normalization.mean || norm.stddev != m.split.normalization.stddev) {
    throw ConfigError("checkpoint " + ckpt.string() + " was trained on different data or split ratios");
  }
  return m;
}

const data::InstanceWindow& find_day(const data::DatasetSplit& split, data::Date date) {
  std::vector<const data::InstanceWindow*> all;
  for (const auto* part : {&split.train, &split.validation, &split.test})
    for (const auto& inst : *part) all.push_back(&inst);
  for (const auto* inst : all)
    if (inst->prediction_date == date) return *inst;
  if (all.empty()) throw DomainError("the cache holds no instance windows");
  throw DomainError("no complete instance window for " + date.iso() + "; the earliest valid date is " +
                    all.front()->prediction_date.iso() + " and the latest is " + all.back()->prediction_date.iso());
}

model::PredictionBatch predict(const model::ModelState& s, const data::InstanceWindow& inst,
                               const data::SectorCatalog& catalog) {
  return s.config.variant == model::Variant::nt ? model::forward_nt(s, inst) : model::forward(s, inst, catalog);
}

// Logs to stderr, plus a file while a run is in progress.
class RunLog {
 public:
  RunLog(const fs::path& file, bool verbose) {
    previous_ = spdlog::default_logger();
    auto console = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    console->set_level(verbose ? spdlog::level::debug : spdlog::level::info);
    auto f = std::make_shared<spdlog::sinks::basic_file_sink_mt>(file.string(), true);
    f->set_level(spdlog::level::debug);
    auto logger = std::make_shared<spdlog::logger>("run", spdlog::sinks_init_list{console, f});
    logger->set_level(spdlog::level::debug);
    spdlog::set_default_logger(logger);
  }
  ~RunLog() {
    spdlog::default_logger()->flush();
    spdlog::set_default_logger(previous_);
  }
  RunLog(const RunLog&) = delete;
  RunLog& operator=(const RunLog&) = delete;

 private:
  std::shared_ptr<spdlog::logger> previous_;
};

// ---------------------------------------------------------------- synth

struct SynthArgs {
  fs::path out = "synthetic";
  data::SynthOptions options;
};

int cmd_synth(const Context& ctx, const SynthArgs& a) {
  const auto market = data::generate_synthetic_market(a.options);
  fs::create_directories(a.out);
  data::write_prices(a.out / "prices.csv", market.prices);
  data::write_sectors(a.out / "sectors.csv", market.catalog);
  RunConfig c;
  c.prices = "prices.csv";
  c.sectors = "sectors.csv";
  write_json(a.out / "config.json", to_json(c));
  ctx.out << "wrote " << (a.out / "prices.csv").string() << ", " << (a.out / "sectors.csv").string() << ", "
          << (a.out / "config.json").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- ingest

int cmd_ingest(const Context& ctx) {
  const auto c = ctx.load();
  if (c.prices.empty() || !fs::exists(c.prices)) throw ConfigError("prices file not found: " + c.prices.string());
  if (c.sectors.empty() || !fs::exists(c.sectors)) throw ConfigError("sector file not found: " + c.sectors.string());
  data::InstanceCache cache;
  cache.options = c.instance_options();
  cache.prices = data::load_prices(c.prices);
  cache.catalog = data::load_sectors(c.sectors);
  data::BuildLog log;
  cache.instances = data::build_instances(cache.prices, cache.catalog, cache.options, &log);
  if (cache.instances.empty()) throw DataError("no complete instance window in " + c.prices.string());
  data::write_cache(c.cache, cache);
  const json summary{{"stocks", cache.prices.size()},
                     {"sectors", cache.catalog.sectors().size()},
                     {"days", log.calendar.size()},
                     {"instances", cache.instances.size()},
                     {"exclusions", log.exclusions.size()},
                     {"first_prediction_date", cache.instances.front().prediction_date.iso()},
                     {"last_prediction_date", cache.instances.back().prediction_date.iso()},
                     {"cache", c.cache.string()}};
  spdlog::info("ingest: {} stocks, {} sectors, {} days, {} instances", cache.prices.size(),
               cache.catalog.sectors().size(), log.calendar.size(), cache.instances.size());
  ctx.out << summary.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  bool lr_search = false;
};

int cmd_train(const Context& ctx, const TrainArgs& a) {
  const auto c = ctx.load();
  const auto cache = load_cache(c);
  const auto split = train::make_split(cache, c.model.weeks, c.split);
  const fs::path root = c.runs / c.run_id / model::to_string(c.model.variant);
  fs::create_directories(root);
  write_json(root / "config.json", to_json(c));

  json summary = json::array();
  for (auto seed : c.seeds) {
    const fs::path seed_dir = root / ("seed_" + std::to_string(seed));
    const std::vector<double> rates = a.lr_search ? kLearningRateGrid : std::vector<double>{c.train.learning_rate};
    json best_run;
    for (double lr : rates) {
      auto mc = c.model;
      mc.seed = seed;
      auto tc = c.train;
      tc.seed = seed;
      tc.learning_rate = lr;
      tc.run_dir = a.lr_search ? seed_dir / ("lr_" + num(lr)) : seed_dir;
      fs::create_directories(tc.run_dir);
      train::TrainReport report;
      {
        RunLog log(tc.run_dir / "train.log", ctx.verbose);
        spdlog::info("train {} seed {} lr {}: {} train / {} validation days", model::to_string(mc.variant), seed,
                     num(lr), split.train.size(), split.validation.size());
        report = train::train(split, cache.catalog, mc, tc);
        spdlog::info("done: {} epochs, best epoch {} (validation mrr@{} {:.6f}), {:.2f}s wall", report.epochs.size(),
                     report.best_epoch, tc.select_k, report.best_score, report.wall_seconds);
      }
      write_json(tc.run_dir / "train_report.json", train::to_json(report));
      const json run{{"seed", seed},
                     {"learning_rate", lr},
                     {"best_epoch", report.best_epoch},
                     {"best_score", report.best_score},
                     {"epochs", report.epochs.size()},
                     {"checkpoint", report.best_checkpoint.string()}};
      if (best_run.is_null() || run["best_score"].get<double>() > best_run["best_score"].get<double>()) best_run = run;
    }
    if (a.lr_search) write_json(seed_dir / "selection.json", best_run);
    summary.push_back(best_run);
    ctx.out << "seed " << seed << ": lr " << num(best_run["learning_rate"].get<double>()) << ", best epoch "
            << best_run["best_epoch"] << ", validation mrr@" << c.train.select_k << " "
            << num(best_run["best_score"].get<double>()) << ", checkpoint " << best_run["checkpoint"].get<std::string>()
            << "\n";
  }
  write_json(root / "summary.json", summary);
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::vector<fs::path> checkpoints;
  bool oracle = false;
  std::string part = "test";
  fs::path out;
};

const std::vector<data::InstanceWindow>& split_part(const data::DatasetSplit& s, const std::string& part) {
  if (part == "train") return s.train;
  if (part == "validation") return s.validation;
  if (part == "test") return s.test;
  throw ConfigError("--split must be train, validation, or test");
}

json aggregate(const std::vector<eval::EvalReport>& reports) {
  auto stats = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    // Sample deviation across runs; 0 for a single run.
    const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    return std::pair{mean, sd};
  };
  json j = json::object();
  for (const auto& [k, m] : reports.front().by_k) {
    std::vector<double> mrr, prec;
    for (const auto& r : reports) {
      mrr.push_back(r.by_k.at(k).mrr);
      prec.push_back(r.by_k.at(k).precision);
    }
    const auto [mm, ms] = stats(mrr);
    const auto [pm, ps] = stats(prec);
    j[std::to_string(k)] = {{"mrr", mm}, {"mrr_std", ms}, {"precision", pm}, {"precision_std", ps}};
  }
  std::vector<double> acc;
  json seeds = json::array();
  for (const auto& r : reports) {
    acc.push_back(r.acc);
    for (auto s : r.seeds) seeds.push_back(s);
  }
  const auto [am, as] = stats(acc);
  j["acc"] = am;
  j["acc_std"] = as;
  j["n_days"] = reports.front().n_days;
  j["seeds"] = seeds;
  j["runs"] = reports.size();
  return j;
}

int cmd_evaluate(const Context& ctx, const EvaluateArgs& a) {
  const auto c = ctx.load();
  const auto cache = load_cache(c);
  if (a.oracle == !a.checkpoints.empty()) throw ConfigError("evaluate needs either --checkpoint or --oracle");
  std::vector<eval::EvalReport> reports;
  std::vector<std::vector<eval::DetailRow>> details;
  fs::path out = a.out;
  if (a.oracle) {
    const auto split = train::make_split(cache, c.model.weeks, c.split);
    std::vector<eval::DetailRow> detail;
    reports.push_back(eval::build_report(eval::oracle_days(split_part(split, a.part)), c.ks, &detail));
    details.push_back(std::move(detail));
    if (out.empty()) out = c.runs / c.run_id / "oracle";
  } else {
    for (const auto& ckpt : a.checkpoints) {
      const auto m = load_model(c, cache, ckpt);
      std::vector<eval::DetailRow> detail;
      auto r = eval::evaluate(m.state, split_part(m.split, a.part), cache.catalog, c.ks, &detail);
      r.seeds = {m.seed};
      reports.push_back(std::move(r));
      details.push_back(std::move(detail));
    }
    if (out.empty()) out = a.checkpoints.front().parent_path();
  }
  fs::create_directories(out);
  json report = reports.size() == 1 ? eval::to_json(reports.front()) : aggregate(reports);
  report["split"] = a.part;
  if (reports.size() > 1) {
    report["per_run"] = json::array();
    for (const auto& r : reports) report["per_run"].push_back(eval::to_json(r));
  }
  write_json(out / "eval_report.json", report);
  for (std::size_t i = 0; i < details.size(); ++i) {
    const std::string name =
        details.size() == 1 ? "detail.csv" : "detail_seed" + std::to_string(reports[i].seeds.front()) + ".csv";
    std::ofstream f(out / name, std::ios::binary);
    eval::write_detail_csv(f, details[i]);
  }
  ctx.out << report.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- recommend

struct DayArgs {
  fs::path checkpoint;
  std::string date;
  std::size_t k = 5;
  fs::path out;
};

int cmd_recommend(const Context& ctx, const DayArgs& a) {
  const auto c = ctx.load();
  const auto date = parse_date_arg(a.date);
  const auto cache = load_cache(c);
  const auto m = load_model(c, cache, a.checkpoint);
  const auto& inst = find_day(m.split, date);
  const auto batch = predict(m.state, inst, cache.catalog);
  if (a.k == 0 || a.k > batch.stock_ids.size()) {
    throw DomainError("K must lie in [1, " + std::to_string(batch.stock_ids.size()) + "] on " + date.iso());
  }
  const auto ranked = eval::rank_day(date, batch.stock_ids, batch.pred_return, inst.target_returns());
  std::map<std::string, double> move;
  for (std::size_t i = 0; i < batch.stock_ids.size(); ++i) move[batch.stock_ids[i]] = batch.pred_move[i];

  std::ostringstream csv;
  csv << "rank,stock_id,pred_return,pred_move\n";
  csv << std::setprecision(17);
  for (std::size_t r = 0; r < a.k; ++r) {
    csv << r + 1 << ',' << ranked.stock_ids[r] << ',' << ranked.pred_return[r] << ',' << move[ranked.stock_ids[r]]
        << '\n';
    ctx.out << std::setw(3) << r + 1 << "  " << ranked.stock_ids[r] << "  " << num(ranked.pred_return[r]) << "\n";
  }
  const fs::path out = a.out.empty() ? a.checkpoint.parent_path() / ("recommend_" + date.iso() + ".csv") : a.out;
  write_text(out, csv.str());
  spdlog::info("recommend: wrote {}", out.string());
  return kExitOk;
}

// ---------------------------------------------------------------- export-attention

int cmd_export_attention(const Context& ctx, const DayArgs& a) {
  const auto c = ctx.load();
  const auto date = parse_date_arg(a.date);
  const auto cache = load_cache(c);
  const auto m = load_model(c, cache, a.checkpoint);
  const auto& inst = find_day(m.split, date);
  const auto rows = model::capture_attention(predict(m.state, inst, cache.catalog));
  const fs::path dir = a.out.empty() ? a.checkpoint.parent_path() : a.out;
  fs::create_directories(dir);
  {
    std::ofstream f(dir / ("attention_" + date.iso() + ".csv"), std::ios::binary);
    model::write_attention_csv(f, rows);
  }
  const auto summary = model::to_json(model::attention_summary(rows));
  write_json(dir / ("attention_summary_" + date.iso() + ".json"), summary);
  ctx.out << rows.size() << " attention weights written to " << (dir / ("attention_" + date.iso() + ".csv")).string()
          << "\n"
          << summary.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::vector<std::size_t> weeks, hidden;
  std::vector<double> delta;
  fs::path out;
};

int cmd_sweep(const Context& ctx, const SweepArgs& a) {
  const auto c = ctx.load();
  const auto cache = load_cache(c);
  train::SweepGrid grid{a.weeks.empty() ? std::vector<std::size_t>{c.model.weeks} : a.weeks,
                        a.hidden.empty() ? std::vector<std::size_t>{c.model.hidden} : a.hidden,
                        a.delta.empty() ? std::vector<double>{c.train.delta} : a.delta};
  auto tc = c.train;
  tc.ks = c.ks;
  if (std::find(tc.ks.begin(), tc.ks.end(), tc.select_k) == tc.ks.end()) tc.ks.push_back(tc.select_k);
  const auto rows = train::sweep(cache, c.model, tc, grid, c.split);
  const fs::path out = a.out.empty() ? c.runs / c.run_id / "sweep" : a.out;
  fs::create_directories(out);
  write_json(out / "config.json", to_json(c));
  write_json(out / "sweep.json", train::to_json(rows));
  std::ofstream f(out / "sweep.csv", std::ios::binary);
  train::write_sweep_csv(f, rows);
  train::write_sweep_csv(ctx.out, rows);
  return kExitOk;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  std::uint64_t seed = train::kGradCheckSeed;
  std::string inject_fault;
  fs::path json_out;
};

ad::OpKind op_from_name(const std::string& name) {
  for (int k = 0; k <= static_cast<int>(ad::OpKind::squared_error); ++k) {
    const auto kind = static_cast<ad::OpKind>(k);
    if (name == ad::op_name(kind)) return kind;
  }
  throw ConfigError("--inject-fault: unknown op '" + name + "'");
}

int cmd_gradcheck(const Context& ctx, const GradcheckArgs& a) {
  struct FaultGuard {
    ~FaultGuard() { ad::testing::corrupt_backward(ad::OpKind::leaf); }
  } guard;
  if (!a.inject_fault.empty()) ad::testing::corrupt_backward(op_from_name(a.inject_fault));
  const auto rows = train::run_gradcheck_suite({.seed = a.seed});
  bool all = true;
  double seconds = 0.0;
  ctx.out << std::left << std::setw(22) << "check" << std::setw(14) << "max_rel_err" << std::setw(8) << "result"
          << "worst\n";
  for (const auto& r : rows) {
    all = all && r.passed;
    seconds += r.seconds;
    char err[32];
    std::snprintf(err, sizeof err, "%.3e", r.result.max_relative_error);
    ctx.out << std::setw(22) << r.name << std::setw(14) << err << std::setw(8) << (r.passed ? "pass" : "FAIL");
    if (!r.result.worst_name.empty() || !r.passed) {
      ctx.out << r.result.worst_name << "[" << r.result.worst_index << "]";
    }
    if (r.refined_error) {
      std::snprintf(err, sizeof err, "%.3e", *r.refined_error);
      ctx.out << "  (at step/100: " << err << ")";
    }
    ctx.out << "\n";
  }
  ctx.out << (all ? "all checks passed" : "gradient check FAILED") << " in " << num(seconds) << "s\n";
  if (!a.json_out.empty()) write_json(a.json_out, train::to_json(rows));
  return all ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err, {}, {}, false};
  const auto previous_logger = spdlog::default_logger();
  spdlog::set_default_logger(
      std::make_shared<spdlog::logger>("fingat", std::make_shared<spdlog::sinks::stderr_sink_mt>()));
  struct Restore {
    std::shared_ptr<spdlog::logger> logger;
    ~Restore() { spdlog::set_default_logger(logger); }
  } restore{previous_logger};
  CLI::App app{"FinGAT stock recommendation: data ingestion, training, evaluation, and inspection", "fingat"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("-c,--config", ctx.config_path, "JSON run configuration");
  app.add_option("--set", ctx.overrides, "Config override key.path=value (repeatable)");
  app.add_flag("-v,--verbose", ctx.verbose, "Debug logging");

  std::function<int()> action;

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write the seeded synthetic momentum market");
  s->add_option("--out", synth.out, "Output directory");
  s->add_option("--seed", synth.options.seed, "Generator seed");
  s->add_option("--stocks", synth.options.stocks, "Number of stocks");
  s->add_option("--sectors", synth.options.sectors, "Number of sectors");
  s->add_option("--weeks", synth.options.weeks, "Weeks of trading days");
  s->callback([&] { action = [&] { return cmd_synth(ctx, synth); }; });

  auto* ing = app.add_subcommand("ingest", "Build the instance cache from the price and sector CSVs");
  ing->callback([&] { action = [&] { return cmd_ingest(ctx); }; });

  TrainArgs train_args;
  std::string variant;
  std::vector<std::uint64_t> seeds;
  std::size_t epochs = 0;
  auto* tr = app.add_subcommand("train", "Train one model per seed");
  tr->add_option("--variant", variant, "full | nt | no_intra | no_inter | no_mtl | mse");
  tr->add_option("--seeds", seeds, "Seeds (overrides the config)")->delimiter(',');
  tr->add_option("--epochs", epochs, "Maximum epochs (overrides the config)");
  tr->add_flag("--lr-search", train_args.lr_search, "Try learning rates 0.0005, 0.001, 0.005");
  tr->callback([&] {
    if (!variant.empty()) ctx.overrides.push_back("model.variant=" + variant);
    if (epochs) ctx.overrides.push_back("train.max_epochs=" + std::to_string(epochs));
    if (!seeds.empty()) {
      std::string list = "seeds=[";
      for (std::size_t i = 0; i < seeds.size(); ++i) list += (i ? "," : "") + std::to_string(seeds[i]);
      ctx.overrides.push_back(list + "]");
    }
    action = [&] { return cmd_train(ctx, train_args); };
  });

  EvaluateArgs eval_args;
  auto* ev = app.add_subcommand("evaluate", "Evaluate checkpoints (several give mean and std)");
  ev->add_option("--checkpoint", eval_args.checkpoints, "Checkpoint file (repeatable)");
  ev->add_flag("--oracle", eval_args.oracle, "Use true returns as predictions");
  ev->add_option("--split", eval_args.part, "train | validation | test");
  ev->add_option("--out", eval_args.out, "Output directory");
  ev->callback([&] { action = [&] { return cmd_evaluate(ctx, eval_args); }; });

  DayArgs rec_args;
  auto* rec = app.add_subcommand("recommend", "Top-K stocks for one prediction date");
  rec->add_option("--checkpoint", rec_args.checkpoint, "Checkpoint file")->required();
  rec->add_option("--date", rec_args.date, "Prediction date YYYY-MM-DD")->required();
  rec->add_option("-k,--K", rec_args.k, "List length");
  rec->add_option("--out", rec_args.out, "CSV path");
  rec->callback([&] { action = [&] { return cmd_recommend(ctx, rec_args); }; });

  DayArgs att_args;
  auto* att = app.add_subcommand("export-attention", "Attention weights of one prediction date");
  att->add_option("--checkpoint", att_args.checkpoint, "Checkpoint file")->required();
  att->add_option("--date", att_args.date, "Prediction date YYYY-MM-DD")->required();
  att->add_option("--out", att_args.out, "Output directory");
  att->callback([&] { action = [&] { return cmd_export_attention(ctx, att_args); }; });

  SweepArgs sweep_args;
  auto* sw = app.add_subcommand("sweep", "Grid over weeks, hidden size, and delta");
  sw->add_option("--weeks", sweep_args.weeks, "Window weeks")->delimiter(',');
  sw->add_option("--hidden", sweep_args.hidden, "Hidden sizes")->delimiter(',');
  sw->add_option("--delta", sweep_args.delta, "Movement-loss weights")->delimiter(',');
  sw->add_option("--out", sweep_args.out, "Output directory");
  sw->callback([&] { action = [&] { return cmd_sweep(ctx, sweep_args); }; });

  GradcheckArgs gc_args;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every layer and the full model");
  gc->add_option("--seed", gc_args.seed, "Seed of the random shapes and weights");
  gc->add_option("--inject-fault", gc_args.inject_fault, "Corrupt the backward rule of this op (self-test)");
  gc->add_option("--json", gc_args.json_out, "Also write the table as JSON");
  gc->callback([&] { action = [&] { return cmd_gradcheck(ctx, gc_args); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (ctx.verbose) spdlog::set_level(spdlog::level::debug);
  try {
    return action();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace fingat::cli
