#include "fingat/model/fingat.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "fingat/errors.hpp"

namespace fingat::model {

using namespace ad;
using nlohmann::json;

namespace {
const std::vector<std::pair<Variant, const char*>> kVariantNames = {
    {Variant::full, "full"},         {Variant::nt, "nt"},         {Variant::no_intra, "no_intra"},
    {Variant::no_inter, "no_inter"}, {Variant::no_mtl, "no_mtl"}, {Variant::mse, "mse"},
};
}  // namespace

std::string to_string(Variant v) {
  for (const auto& [k, name] : kVariantNames) {
    if (k == v) return name;
  }
  return "unknown";
}

Variant variant_from_string(const std::string& name) {
  for (const auto& [k, n] : kVariantNames) {
    if (name == n) return k;
  }
  throw ConfigError("unknown variant '" + name + "' (expected full, nt, no_intra, no_inter, no_mtl or mse)");
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v = {Variant::full,     Variant::nt,     Variant::no_intra,
                                         Variant::no_inter, Variant::no_mtl, Variant::mse};
  return v;
}

std::size_t ModelConfig::fusion_inputs() const {
  switch (variant) {
    case Variant::full:
    case Variant::no_mtl:
    case Variant::mse:
      return 3;
    case Variant::nt:
    case Variant::no_intra:
    case Variant::no_inter:
      return 2;
  }
  return 3;
}

void ModelConfig::validate() const {
  if (hidden == 0 || weeks == 0 || days_per_week == 0 || feature_dim == 0) {
    throw ConfigError("model sizes (hidden, weeks, days_per_week, feature_dim) must be positive");
  }
}

void to_json(json& j, const ModelConfig& c) {
  j = json{{"hidden", c.hidden},           {"weeks", c.weeks},
           {"days_per_week", c.days_per_week}, {"feature_dim", c.feature_dim},
           {"variant", to_string(c.variant)},  {"seed", c.seed}};
}

void from_json(const json& j, ModelConfig& c) {
  c.hidden = j.value("hidden", c.hidden);
  c.weeks = j.value("weeks", c.weeks);
  c.days_per_week = j.value("days_per_week", c.days_per_week);
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  if (j.contains("variant")) c.variant = variant_from_string(j.at("variant").get<std::string>());
  c.seed = j.value("seed", c.seed);
}

ModelState ModelState::init(const ModelConfig& config) {
  config.validate();
  nn::Rng rng(config.seed);
  const std::size_t h = config.hidden;
  ModelState s;
  s.config = config;
  s.week_gru = nn::GruParams::init(config.feature_dim, h, rng);
  s.week_att = nn::TemporalAttentionParams::init(h, rng);
  if (config.uses_stock_graph()) s.stock_gat = nn::GatParams::init(h, h, rng);
  s.long_a_gru = nn::GruParams::init(h, h, rng);
  s.long_a_att = nn::TemporalAttentionParams::init(h, rng);
  if (config.uses_stock_graph()) {
    s.long_g_gru = nn::GruParams::init(h, h, rng);
    s.long_g_att = nn::TemporalAttentionParams::init(h, rng);
  }
  if (config.uses_sectors()) s.sector_gat = nn::GatParams::init(h, h, rng);
  const std::size_t fan_in = config.fusion_inputs() * h;
  s.fusion = nn::uniform_init({fan_in, h}, fan_in, rng);
  s.head_return = nn::DenseParams::init(h, 1, true, rng);
  if (config.has_move_head()) s.head_move = nn::DenseParams::init(h, 1, true, rng);
  return s;
}

nn::ParamList ModelState::parameters() {
  nn::ParamList out;
  week_gru.collect("week_gru", out);
  week_att.collect("week_att", out);
  if (stock_gat) stock_gat->collect("stock_gat", out);
  long_a_gru.collect("long_a_gru", out);
  long_a_att.collect("long_a_att", out);
  if (long_g_gru) long_g_gru->collect("long_g_gru", out);
  if (long_g_att) long_g_att->collect("long_g_att", out);
  if (sector_gat) sector_gat->collect("sector_gat", out);
  out.push_back({"fusion.w", &fusion, true});
  head_return.collect("head_return", out);
  if (head_move) head_move->collect("head_move", out);
  return out;
}

std::size_t ModelState::parameter_count() {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.tensor->size();
  return n;
}

nn::TensorEntries ModelState::checkpoint_entries() {
  nn::TensorEntries out;
  for (const auto& p : parameters()) out.emplace_back(p.name, p.tensor);
  return out;
}

ModelState ModelState::from_checkpoint(const nn::Checkpoint& ck) {
  if (!ck.meta.contains("model")) throw CheckpointError("checkpoint meta has no model config");
  ModelConfig config;
  try {
    config = ck.meta.at("model").get<ModelConfig>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("bad model config in checkpoint: ") + e.what());
  }
  ModelState s = init(config);
  auto params = s.parameters();
  if (params.size() != ck.tensors.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(ck.tensors.size()) + " tensors, variant " +
                          to_string(config.variant) + " needs " + std::to_string(params.size()));
  }
  for (auto& p : params) {
    const Tensor& t = ck.at(p.name);
    if (t.shape() != p.tensor->shape()) {
      throw CheckpointError("tensor '" + p.name + "' has shape " + shape_string(t.shape()) + ", expected " +
                            shape_string(p.tensor->shape()));
    }
    std::copy(t.data().begin(), t.data().end(), p.tensor->data().begin());
  }
  return s;
}

namespace {

void require_finite(Var v, const char* layer) {
  if (!v.value().all_finite()) throw NumericError(std::string("non-finite output in ") + layer);
}

std::vector<std::size_t> range(std::size_t begin, std::size_t count) {
  std::vector<std::size_t> r(count);
  std::iota(r.begin(), r.end(), begin);
  return r;
}

std::vector<std::string> numbered(const char* prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

struct AttentiveGru {
  Var out;
  Var alpha;
};

AttentiveGru attentive_gru(Tape& tape, const nn::GruParams& gru, const nn::TemporalAttentionParams& att,
                           std::span<const Var> seq) {
  const auto states = nn::gru_forward(tape, gru, seq);
  const auto pooled = nn::temporal_attention(tape, att, states.states);
  return {pooled.out, pooled.alpha};
}

void capture_rows(std::vector<AttentionCapture>& out, const std::string& level, const std::string& suffix,
                  const std::vector<std::string>& ids, const Tensor& alpha, std::size_t row0,
                  const std::vector<std::string>& to) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    AttentionCapture c{level, ids[i] + suffix, {ids[i]}, to, {}};
    for (std::size_t k = 0; k < to.size(); ++k) c.weights.push_back(alpha.at(row0 + i, k));
    out.push_back(std::move(c));
  }
}

void capture_block(std::vector<AttentionCapture>& out, const std::string& level, const std::string& context,
                   const std::vector<std::string>& ids, const std::vector<std::size_t>& nodes, const Tensor& beta) {
  AttentionCapture c{level, context, {}, {}, {}};
  for (std::size_t q : nodes) c.from.push_back(ids[q]);
  c.to = c.from;
  for (std::size_t q : nodes)
    for (std::size_t n : nodes) c.weights.push_back(beta.at(q, n));
  out.push_back(std::move(c));
}

}  // namespace

ForwardGraph forward_graph(Tape& tape, const ModelState& state, const data::InstanceWindow& instance,
                           const data::SectorCatalog& catalog, bool capture) {
  const ModelConfig& cfg = state.config;
  const std::size_t n = instance.stocks.size();
  const std::size_t t = cfg.weeks, d = cfg.days_per_week, f = cfg.feature_dim;
  if (n == 0) throw ShapeError("instance has no stocks");
  if (instance.weeks != t || instance.days_per_week != d || instance.feature_dim != f) {
    throw ShapeError("instance window " + std::to_string(instance.weeks) + "x" + std::to_string(instance.days_per_week) +
                     " days x " + std::to_string(instance.feature_dim) + " features does not match the model's " +
                     std::to_string(t) + "x" + std::to_string(d) + " x " + std::to_string(f));
  }

  ForwardGraph g;
  g.stock_ids = instance.stock_ids();

  // Sector layout over the stocks present in this cross-section.
  std::vector<std::string> sector_names;
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::size_t> sector_of;
  if (cfg.variant != Variant::nt) {
    std::map<std::string, std::vector<std::size_t>> by_sector;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& id = g.stock_ids[i];
      if (!catalog.contains(id)) throw DataError("stock " + id + " has no sector");
      by_sector[catalog.sector_of(id)].push_back(i);
      g.sectors.push_back(catalog.sector_of(id));
    }
    for (auto& [name, m] : by_sector) {
      sector_names.push_back(name);
      members.push_back(std::move(m));
    }
    sector_of.resize(n);
    for (std::size_t s = 0; s < members.size(); ++s)
      for (std::size_t i : members[s]) sector_of[i] = s;
  }

  // Week encoder: all weeks of all stocks in one batch, row w*n + i.
  std::vector<Var> days;
  for (std::size_t j = 0; j < d; ++j) {
    Tensor x({t * n, f});
    for (std::size_t w = 0; w < t; ++w) {
      for (std::size_t i = 0; i < n; ++i) {
        const double* src = instance.stocks[i].features.data() + (w * d + j) * f;
        std::copy(src, src + f, x.data().begin() + (w * n + i) * f);
      }
    }
    days.push_back(tape.constant(std::move(x)));
  }
  const auto week = attentive_gru(tape, state.week_gru, state.week_att, days);
  require_finite(week.out, "week encoder");
  std::vector<Var> a(t);
  for (std::size_t w = 0; w < t; ++w) {
    a[w] = gather_rows(week.out, range(w * n, n));
    if (capture) capture_rows(g.attention, "temporal", "/week" + std::to_string(w + 1), g.stock_ids,
                              week.alpha.value(), w * n, numbered("d", d));
  }

  // Stock graph per week.
  std::vector<Var> gw(t);
  if (cfg.uses_stock_graph()) {
    const nn::Graph graph = cfg.variant == Variant::nt ? nn::Graph::complete(n) : [&] {
      std::vector<std::vector<std::size_t>> nbrs(n);
      for (const auto& m : members)
        for (std::size_t i : m) nbrs[i] = m;
      return nn::Graph::from_neighbors(nbrs);
    }();
    for (std::size_t w = 0; w < t; ++w) {
      const auto out = nn::gat_forward(tape, *state.stock_gat, graph, a[w]);
      require_finite(out.out, cfg.variant == Variant::nt ? "stock graph attention" : "intra-sector attention");
      gw[w] = out.out;
      if (!capture) continue;
      const std::string week_tag = "/week" + std::to_string(w + 1);
      if (cfg.variant == Variant::nt) {
        capture_block(g.attention, "intra", "all" + week_tag, g.stock_ids, range(0, n), out.beta.value());
      } else {
        for (std::size_t s = 0; s < members.size(); ++s)
          capture_block(g.attention, "intra", sector_names[s] + week_tag, g.stock_ids, members[s], out.beta.value());
      }
    }
  }

  // Long-term streams over weeks.
  const auto tau_a = attentive_gru(tape, state.long_a_gru, state.long_a_att, a);
  require_finite(tau_a.out, "long-term encoder (A)");
  if (capture) capture_rows(g.attention, "temporal", "/long_a", g.stock_ids, tau_a.alpha.value(), 0, numbered("w", t));
  AttentiveGru tau_g;
  if (cfg.uses_stock_graph()) {
    tau_g = attentive_gru(tape, *state.long_g_gru, *state.long_g_att, gw);
    require_finite(tau_g.out, "long-term encoder (G)");
    if (capture) capture_rows(g.attention, "temporal", "/long_g", g.stock_ids, tau_g.alpha.value(), 0, numbered("w", t));
  }

  // Sector pooling and inter-sector attention.
  Var tau_pi;
  if (cfg.uses_sectors()) {
    const Var pool_src = cfg.uses_stock_graph() ? tau_g.out : tau_a.out;
    std::vector<Var> z;
    for (const auto& m : members) z.push_back(max_rows(gather_rows(pool_src, m)));
    const auto inter = nn::gat_forward(tape, *state.sector_gat, nn::Graph::complete(members.size()), concat(z, 0));
    require_finite(inter.out, "inter-sector attention");
    tau_pi = gather_rows(inter.out, sector_of);
    if (capture) capture_block(g.attention, "inter", "sectors", sector_names, range(0, members.size()), inter.beta.value());
  }

  std::vector<Var> parts;
  if (cfg.uses_stock_graph()) parts.push_back(tau_g.out);
  parts.push_back(tau_a.out);
  if (cfg.uses_sectors()) parts.push_back(tau_pi);
  const Var fused = relu(matmul(concat(parts, 1), tape.parameter(state.fusion)));
  require_finite(fused, "fusion");

  g.pred_return = nn::dense(tape, state.head_return, fused);
  require_finite(g.pred_return, "return head");
  if (state.head_move) {
    g.move_head = nn::dense(tape, *state.head_move, fused);
    require_finite(g.move_head, "movement head");
  }
  return g;
}

namespace {
double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

PredictionBatch to_batch(const data::InstanceWindow& instance, ForwardGraph g) {
  PredictionBatch b;
  b.prediction_date = instance.prediction_date;
  b.stock_ids = std::move(g.stock_ids);
  b.sectors = std::move(g.sectors);
  b.attention = std::move(g.attention);
  const auto r = g.pred_return.value().data();
  b.pred_return.assign(r.begin(), r.end());
  const auto m = g.move_head.valid() ? g.move_head.value().data() : r;
  for (double v : m) b.pred_move.push_back(stable_sigmoid(v));
  return b;
}
}  // namespace

PredictionBatch forward(const ModelState& state, const data::InstanceWindow& instance,
                        const data::SectorCatalog& catalog, bool capture) {
  Tape tape;
  return to_batch(instance, forward_graph(tape, state, instance, catalog, capture));
}

PredictionBatch forward_nt(const ModelState& state, const data::InstanceWindow& instance, bool capture) {
  if (state.config.variant != Variant::nt) throw ConfigError("forward_nt needs a model built with variant nt");
  Tape tape;
  return to_batch(instance, forward_graph(tape, state, instance, data::SectorCatalog{}, capture));
}

}  // namespace fingat::model
