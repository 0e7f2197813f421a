#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fingat/cli/commands.hpp"
#include "fingat/data/cache.hpp"
#include "fingat/eval/metrics.hpp"
#include "fingat/model/attention_dump.hpp"
#include "fingat/model/fingat.hpp"
#include "json.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;
using namespace fingat;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run fingat_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fingat_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

// A synthesized and ingested dataset; `extra` is passed to synth.
fs::path dataset(const std::string& name, const std::vector<std::string>& extra = {}) {
  const auto dir = fresh_dir(name);
  std::vector<std::string> args{"synth", "--out", dir.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  REQUIRE(fingat_cli(args).code == cli::kExitOk);
  REQUIRE(fingat_cli({"-c", (dir / "config.json").string(), "ingest"}).code == cli::kExitOk);
  return dir;
}

// The default dataset trained for a few epochs, shared by the read-only tests.
const fs::path& trained() {
  static const fs::path dir = [] {
    auto d = dataset("trained");
    const auto r = fingat_cli({"-c", (d / "config.json").string(), "train", "--epochs", "3"});
    REQUIRE(r.code == cli::kExitOk);
    return d;
  }();
  return dir;
}

fs::path seed_dir(const fs::path& root, const std::string& variant = "full", int seed = 1) {
  return root / "runs" / "run" / variant / ("seed_" + std::to_string(seed));
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("ingest summary matches the in-memory pipeline") {
  const auto dir = fresh_dir("ingest");
  REQUIRE(fingat_cli({"synth", "--out", dir.string()}).code == 0);
  const auto r = fingat_cli({"-c", (dir / "config.json").string(), "ingest"});
  REQUIRE(r.code == 0);
  const auto summary = json::parse(r.out);
  const auto expected = test::synthetic_cache(40);
  CHECK(summary["stocks"] == 12);
  CHECK(summary["sectors"] == 3);
  CHECK(summary["instances"] == expected.instances.size());
  CHECK(summary["first_prediction_date"] == expected.instances.front().prediction_date.iso());
  CHECK(summary["last_prediction_date"] == expected.instances.back().prediction_date.iso());

  const auto cache_path = dir / "cache" / "instances.bin";
  const auto first = slurp(cache_path);
  REQUIRE(fingat_cli({"-c", (dir / "config.json").string(), "ingest"}).code == 0);
  CHECK(slurp(cache_path) == first);
  CHECK(data::read_cache(cache_path).instances.size() == expected.instances.size());
}

TEST_CASE("exit codes") {
  const auto dir = fresh_dir("exit");
  REQUIRE(fingat_cli({"synth", "--out", dir.string()}).code == 0);
  const auto cfg = (dir / "config.json").string();
  SUBCASE("missing sector file is a configuration error") {
    fs::remove(dir / "sectors.csv");
    const auto r = fingat_cli({"-c", cfg, "ingest"});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("sectors.csv") != std::string::npos);
  }
  SUBCASE("usage errors") {
    CHECK(fingat_cli({}).code == cli::kExitUsage);
    CHECK(fingat_cli({"frobnicate"}).code == cli::kExitUsage);
    CHECK(fingat_cli({"-c", cfg, "train", "--variant", "bogus"}).code == cli::kExitUsage);
    CHECK(fingat_cli({"-c", cfg, "--set", "model.hidden=\"x\"", "ingest"}).code == cli::kExitUsage);
  }
  SUBCASE("--set after the subcommand applies") {
    const auto r = fingat_cli({"-c", cfg, "ingest", "--set", "paths.cache=other/c.bin"});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "other" / "c.bin"));
  }
}

TEST_CASE("oracle evaluation is perfect") {
  const auto& dir = trained();
  const auto r = fingat_cli({"-c", (dir / "config.json").string(), "evaluate", "--oracle"});
  REQUIRE(r.code == 0);
  const auto report = read_json(dir / "runs" / "run" / "oracle" / "eval_report.json");
  for (const char* k : {"1", "5", "10"}) CHECK(report[k]["precision"] == 1.0);
  CHECK(report["1"]["mrr"] == 1.0);
  CHECK(report["acc"] == 1.0);
}

TEST_CASE("K list 5,10,20 needs a universe of at least 20 stocks") {
  const auto small = trained();
  const auto too_big = fingat_cli({"-c", (small / "config.json").string(), "--set", "ks=[5,10,20]", "evaluate",
                                   "--oracle", "--out", (small / "k20").string()});
  CHECK(too_big.code == cli::kExitFailure);

  const auto wide = dataset("wide", {"--stocks", "24", "--sectors", "4"});
  const auto r = fingat_cli({"-c", (wide / "config.json").string(), "--set", "ks=[5,10,20]", "evaluate", "--oracle"});
  REQUIRE(r.code == 0);
  const auto report = read_json(wide / "runs" / "run" / "oracle" / "eval_report.json");
  for (const char* k : {"5", "10", "20"}) CHECK(report[k]["precision"] == 1.0);
}

TEST_CASE("evaluate is repeatable and aggregates several checkpoints") {
  const auto& dir = trained();
  const auto cfg = (dir / "config.json").string();
  const auto ckpt = (seed_dir(dir) / "best.ckpt").string();
  const auto out_a = fresh_dir("eval_a"), out_b = fresh_dir("eval_b");
  REQUIRE(fingat_cli({"-c", cfg, "evaluate", "--checkpoint", ckpt, "--out", out_a.string()}).code == 0);
  REQUIRE(fingat_cli({"-c", cfg, "evaluate", "--checkpoint", ckpt, "--out", out_b.string()}).code == 0);
  CHECK(slurp(out_a / "eval_report.json") == slurp(out_b / "eval_report.json"));
  CHECK(slurp(out_a / "detail.csv") == slurp(out_b / "detail.csv"));

  const auto out_c = fresh_dir("eval_c");
  REQUIRE(fingat_cli({"-c", cfg, "evaluate", "--checkpoint", ckpt, "--checkpoint", ckpt, "--out", out_c.string()}).code ==
          0);
  const auto agg = read_json(out_c / "eval_report.json");
  CHECK(agg["runs"] == 2);
  CHECK(agg["5"]["mrr_std"] == 0.0);
  CHECK(agg["5"]["mrr"] == read_json(out_a / "eval_report.json")["5"]["mrr"]);

  CHECK(fingat_cli({"-c", cfg, "evaluate", "--checkpoint", (dir / "nope.ckpt").string()}).code == cli::kExitFailure);
}

TEST_CASE("recommend agrees with the evaluation detail") {
  const auto& dir = trained();
  const auto cfg = (dir / "config.json").string();
  const auto sd = seed_dir(dir);
  const auto ckpt = (sd / "best.ckpt").string();
  const auto out = fresh_dir("rec_detail");
  REQUIRE(fingat_cli({"-c", cfg, "evaluate", "--checkpoint", ckpt, "--out", out.string()}).code == 0);
  const auto detail = csv_rows(out / "detail.csv");
  REQUIRE(!detail.empty());
  const std::string date = detail.back()[0];
  std::map<std::size_t, std::string> by_rank;
  for (const auto& row : detail)
    if (row[0] == date) by_rank[std::stoul(row[6])] = row[1];
  REQUIRE(by_rank.size() == 12);

  for (std::size_t k : {std::size_t{1}, std::size_t{12}}) {
    const auto path = out / ("rec_" + std::to_string(k) + ".csv");
    REQUIRE(fingat_cli({"-c", cfg, "recommend", "--checkpoint", ckpt, "--date", date, "-k", std::to_string(k), "--out",
                        path.string()})
                .code == 0);
    const auto rec = csv_rows(path);
    REQUIRE(rec.size() == k);
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(std::stoul(rec[i][0]) == i + 1);
      CHECK(rec[i][1] == by_rank[i + 1]);
    }
  }
  CHECK(fingat_cli({"-c", cfg, "recommend", "--checkpoint", ckpt, "--date", date, "-k", "13"}).code ==
        cli::kExitFailure);
  const auto early = fingat_cli({"-c", cfg, "recommend", "--checkpoint", ckpt, "--date", "2019-01-03"});
  CHECK(early.code == cli::kExitFailure);
  CHECK(early.err.find("earliest") != std::string::npos);
}

TEST_CASE("export-attention rows are normalized") {
  const auto& dir = trained();
  const auto cfg = (dir / "config.json").string();
  const auto ckpt = (seed_dir(dir) / "best.ckpt").string();
  const auto detail_dir = fresh_dir("att_detail");
  REQUIRE(fingat_cli({"-c", cfg, "evaluate", "--checkpoint", ckpt, "--out", detail_dir.string()}).code == 0);
  const std::string date = csv_rows(detail_dir / "detail.csv").front()[0];
  const auto out = fresh_dir("att");
  REQUIRE(fingat_cli({"-c", cfg, "export-attention", "--checkpoint", ckpt, "--date", date, "--out", out.string()})
              .code == 0);
  std::ifstream f(out / ("attention_" + date + ".csv"));
  const auto rows = model::read_attention_csv(f);
  std::map<std::string, double> sums;
  std::map<std::string, std::size_t> inter_cells;
  for (const auto& r : rows) {
    sums[r.level + "|" + r.context + "|" + r.from] += r.weight;
    if (r.level == "inter") ++inter_cells[r.context];
  }
  for (const auto& [key, s] : sums) CHECK_MESSAGE(std::abs(s - 1.0) <= 1e-9, key);
  REQUIRE(!inter_cells.empty());
  for (const auto& [ctx, cells] : inter_cells) CHECK(cells == 9);  // 3 x 3 sectors
  CHECK(fs::exists(out / ("attention_summary_" + date + ".json")));
}

TEST_CASE("gradcheck command") {
  const auto dir = fresh_dir("gc");
  fs::create_directories(dir);
  SUBCASE("clean run passes and writes JSON") {
    const auto r = fingat_cli({"gradcheck", "--json", (dir / "gc.json").string()});
    CHECK(r.code == cli::kExitOk);
    CHECK(read_json(dir / "gc.json").size() == 19);
  }
  SUBCASE("an injected fault fails and names the check, repeatably") {
    std::vector<json> runs;
    for (int i = 0; i < 2; ++i) {
      const auto path = dir / ("fault" + std::to_string(i) + ".json");
      const auto r = fingat_cli({"gradcheck", "--inject-fault", "outer_sum", "--json", path.string()});
      CHECK(r.code == cli::kExitFailure);
      CHECK(r.out.find("gat") != std::string::npos);
      CHECK(r.out.find("FAIL") != std::string::npos);
      runs.push_back(read_json(path));
    }
    REQUIRE(runs[0].size() == runs[1].size());
    for (std::size_t i = 0; i < runs[0].size(); ++i) {
      CHECK(runs[0][i]["name"] == runs[1][i]["name"]);
      CHECK(runs[0][i]["max_relative_error"] == runs[1][i]["max_relative_error"]);
    }
    // The fault is undone afterwards.
    CHECK(fingat_cli({"gradcheck"}).code == cli::kExitOk);
  }
  SUBCASE("unknown op") { CHECK(fingat_cli({"gradcheck", "--inject-fault", "nope"}).code == cli::kExitUsage); }
}

TEST_CASE("train routes seeds and variants") {
  const auto dir = dataset("routes");
  const auto cfg = (dir / "config.json").string();
  REQUIRE(fingat_cli({"-c", cfg, "train", "--seeds", "1,2", "--epochs", "2"}).code == 0);
  const auto a = read_json(seed_dir(dir, "full", 1) / "train_report.json");
  const auto b = read_json(seed_dir(dir, "full", 2) / "train_report.json");
  CHECK(a["epochs"][0]["total"] != b["epochs"][0]["total"]);
  CHECK(read_json(dir / "runs" / "run" / "full" / "summary.json").size() == 2);

  for (auto v : model::all_variants()) {
    const auto name = model::to_string(v);
    CAPTURE(name);
    REQUIRE(fingat_cli({"-c", cfg, "train", "--variant", name, "--epochs", "1"}).code == 0);
    const auto report = read_json(seed_dir(dir, name) / "train_report.json");
    CHECK(report["model"]["variant"] == name);
    CHECK(fs::exists(seed_dir(dir, name) / "best.ckpt"));
    CHECK(fs::exists(seed_dir(dir, name) / "train.log"));
  }
}
