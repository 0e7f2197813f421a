#include "fingat/train/gradcheck_suite.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "fingat/ad/ops.hpp"
#include "fingat/nn/attention.hpp"
#include "fingat/nn/dense.hpp"
#include "fingat/nn/gat.hpp"
#include "fingat/nn/gru.hpp"
#include "fingat/train/loss.hpp"

namespace fingat::train {

using ad::NamedTensor;
using ad::Tape;
using ad::Tensor;
using ad::Var;

namespace {

constexpr std::size_t kStocks = 4;
constexpr std::size_t kSectors = 2;
// Weight on the movement term; large enough that both terms matter.
constexpr double kDelta = 0.5;

Tensor random_tensor(nn::Rng& rng, ad::Shape shape, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = u(rng);
  return t;
}

double timed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Re-differences the worst coordinate with a 100x smaller step.
double refine(const std::function<Var(Tape&)>& loss, const std::vector<NamedTensor>& params,
              const ad::GradCheckResult& r, double step) {
  Tensor* t = nullptr;
  for (const auto& p : params)
    if (p.name == r.worst_name) t = p.tensor;
  if (!t) return r.max_relative_error;
  const double h = step / 100.0;
  const double orig = (*t)[r.worst_index];
  auto eval = [&] {
    Tape tape;
    return loss(tape).value().item();
  };
  (*t)[r.worst_index] = orig + h;
  const double up = eval();
  (*t)[r.worst_index] = orig - h;
  const double down = eval();
  (*t)[r.worst_index] = orig;
  return ad::relative_error(r.analytic, (up - down) / (2.0 * h));
}

GradCheckRow params_row(const std::string& name, const std::function<Var(Tape&)>& loss,
                        const std::vector<NamedTensor>& params, const GradCheckOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  GradCheckRow row;
  row.name = name;
  row.result = ad::finite_diff_check_params(loss, params, o.step);
  row.passed = row.result.max_relative_error < o.tolerance;
  if (!row.passed) row.refined_error = refine(loss, params, row.result, o.step);
  row.seconds = timed_since(t0);
  return row;
}

GradCheckRow input_row(const std::string& name, const ad::ScalarFn& f, const Tensor& x, const GradCheckOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  GradCheckRow row;
  row.name = name;
  row.result = ad::finite_diff_check(f, x, o.step);
  row.passed = row.result.max_relative_error < o.tolerance;
  if (!row.passed) {
    const double h = o.step / 100.0;
    Tensor probe = x;
    auto eval = [&](double at) {
      probe[row.result.worst_index] = at;
      Tape tape;
      return f(tape, tape.constant(probe)).value().item();
    };
    const double orig = x[row.result.worst_index];
    const double numeric = (eval(orig + h) - eval(orig - h)) / (2.0 * h);
    row.refined_error = ad::relative_error(row.result.analytic, numeric);
  }
  row.seconds = timed_since(t0);
  return row;
}

std::vector<NamedTensor> named(const nn::ParamList& list) {
  std::vector<NamedTensor> out;
  for (const auto& p : list) out.push_back({p.name, p.tensor});
  return out;
}

// Fixed positive weights turn a matrix output into a scalar without
// symmetries that could hide a transposed gradient.
Var weigh(Tape& tape, Var x, const Tensor& w) { return ad::sum(ad::mul(x, tape.constant(w))); }

data::InstanceWindow tiny_instance(const model::ModelConfig& c, nn::Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  data::InstanceWindow inst;
  inst.prediction_date = data::Date::from_ymd(2022, 3, 1);
  inst.weeks = c.weeks;
  inst.days_per_week = c.days_per_week;
  inst.feature_dim = c.feature_dim;
  for (std::size_t i = 0; i < kStocks; ++i) {
    data::StockWindow s;
    s.stock_id = "S" + std::to_string(i);
    s.features.resize(inst.window_days() * c.feature_dim);
    for (auto& v : s.features) v = u(rng);
    s.target_return = 0.05 * u(rng);
    s.target_move = data::movement_label(s.target_return);
    inst.stocks.push_back(std::move(s));
  }
  return inst;
}

data::SectorCatalog tiny_catalog() {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < kStocks; ++i) pairs.emplace_back("S" + std::to_string(i), "SEC" + std::to_string(i % kSectors));
  return data::SectorCatalog::from_pairs(pairs);
}

}  // namespace

model::ModelConfig gradcheck_model_config(model::Variant variant, std::uint64_t seed) {
  model::ModelConfig c;
  c.hidden = 3;
  c.weeks = 2;
  c.days_per_week = 3;
  c.feature_dim = 4;
  c.variant = variant;
  c.seed = seed;
  return c;
}

GradCheckRow full_model_gradcheck(model::Variant variant, const GradCheckOptions& options) {
  const auto c = gradcheck_model_config(variant, options.seed);
  auto state = model::ModelState::init(c);
  nn::Rng rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto inst = tiny_instance(c, rng);
  const auto catalog = tiny_catalog();
  auto params = named(state.parameters());
  const double delta = effective_delta(variant, kDelta);
  auto loss = [&](Tape& t) {
    const auto g = model::forward_graph(t, state, inst, catalog);
    return weighted(day_objective(g, inst, variant), delta);
  };
  return params_row("model/" + model::to_string(variant), loss, params, options);
}

std::vector<GradCheckRow> run_gradcheck_suite(const GradCheckOptions& o) {
  std::vector<GradCheckRow> rows;
  nn::Rng rng(o.seed);

  {
    auto p = nn::GruParams::init(3, 4, rng);
    std::vector<Tensor> seq;
    for (int s = 0; s < 4; ++s) seq.push_back(random_tensor(rng, {2, 3}));
    const Tensor w = random_tensor(rng, {2, 4}, 0.5, 1.5);
    nn::ParamList list;
    p.collect("gru", list);
    auto loss = [&](Tape& t) {
      std::vector<Var> xs;
      for (const auto& x : seq) xs.push_back(t.constant(x));
      const auto out = nn::gru_forward(t, p, xs);
      Var acc = weigh(t, out.last, w);
      for (const auto& h : out.states) acc = acc + ad::sum_squares(h);
      return acc;
    };
    rows.push_back(params_row("gru", loss, named(list), o));
    rows.push_back(input_row(
        "gru/input",
        [&](Tape& t, Var x0) {
          std::vector<Var> xs{x0};
          for (std::size_t s = 1; s < seq.size(); ++s) xs.push_back(t.constant(seq[s]));
          return weigh(t, nn::gru_forward(t, p, xs).last, w);
        },
        seq[0], o));
  }
  {
    auto p = nn::TemporalAttentionParams::init(4, rng);
    std::vector<Tensor> states;
    for (int s = 0; s < 5; ++s) states.push_back(random_tensor(rng, {3, 4}));
    const Tensor w = random_tensor(rng, {3, 4}, 0.5, 1.5);
    nn::ParamList list;
    p.collect("attention", list);
    auto loss = [&](Tape& t) {
      std::vector<Var> hs;
      for (const auto& h : states) hs.push_back(t.constant(h));
      return weigh(t, nn::temporal_attention(t, p, hs).out, w);
    };
    rows.push_back(params_row("temporal_attention", loss, named(list), o));
  }
  {
    auto p = nn::GatParams::init(4, 3, rng);
    const Tensor x = random_tensor(rng, {5, 4});
    const Tensor w = random_tensor(rng, {5, 3}, 0.5, 1.5);
    const auto graph = nn::Graph::from_neighbors({{1, 2}, {0, 2, 3}, {4}, {0, 1, 2, 3, 4}, {3}});
    nn::ParamList list;
    p.collect("gat", list);
    auto loss = [&](Tape& t) { return weigh(t, nn::gat_forward(t, p, graph, t.constant(x)).out, w); };
    rows.push_back(params_row("gat", loss, named(list), o));
    rows.push_back(input_row(
        "gat/input", [&](Tape& t, Var in) { return weigh(t, nn::gat_forward(t, p, graph, in).out, w); }, x, o));
  }
  const std::pair<ad::Activation, const char*> acts[] = {{ad::Activation::identity, "identity"},
                                                        {ad::Activation::relu, "relu"},
                                                        {ad::Activation::sigmoid, "sigmoid"},
                                                        {ad::Activation::tanh, "tanh"}};
  for (const auto& [act, act_name] : acts) {
    auto p = nn::DenseParams::init(4, 3, true, rng);
    const Tensor x = random_tensor(rng, {6, 4});
    const Tensor w = random_tensor(rng, {6, 3}, 0.5, 1.5);
    nn::ParamList list;
    p.collect("dense", list);
    auto loss = [&](Tape& t) { return weigh(t, nn::dense(t, p, t.constant(x), act), w); };
    rows.push_back(params_row(std::string("dense/") + act_name, loss, named(list), o));
  }
  {
    const Tensor pred = random_tensor(rng, {6, 1});
    std::vector<double> truth(6), labels(6);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    for (std::size_t i = 0; i < 6; ++i) {
      truth[i] = u(rng);
      labels[i] = truth[i] > 0.0;
    }
    rows.push_back(input_row(
        "loss/rank_hinge", [&](Tape&, Var x) { return ad::pairwise_rank_hinge(x, truth); }, pred, o));
    rows.push_back(input_row(
        "loss/bce_logits", [&](Tape&, Var x) { return ad::binary_cross_entropy_logits(x, labels); }, pred, o));
    rows.push_back(input_row(
        "loss/bce", [&](Tape&, Var x) { return ad::binary_cross_entropy(ad::sigmoid(x), labels); }, pred, o));
    rows.push_back(input_row(
        "loss/squared_error", [&](Tape&, Var x) { return ad::squared_error(x, truth); }, pred, o));
  }
  for (auto v : model::all_variants()) rows.push_back(full_model_gradcheck(v, o));
  return rows;
}

nlohmann::json to_json(const std::vector<GradCheckRow>& rows) {
  auto out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j{{"name", r.name},
                     {"max_relative_error", r.result.max_relative_error},
                     {"worst", r.result.worst_name + "[" + std::to_string(r.result.worst_index) + "]"},
                     {"analytic", r.result.analytic},
                     {"numeric", r.result.numeric},
                     {"coordinates", r.result.coordinates},
                     {"passed", r.passed}};
    if (r.refined_error) j["refined_error"] = *r.refined_error;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace fingat::train
