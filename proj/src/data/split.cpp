#include "fingat/data/split.hpp"

#include <cmath>

#include "fingat/errors.hpp"

namespace fingat::data {

void Normalization::apply(InstanceWindow& instance) const {
  const std::size_t dim = instance.feature_dim;
  if (dims() > dim) throw ConfigError("normalization covers more columns than the features have");
  for (auto& s : instance.stocks) {
    for (std::size_t row = 0; row < instance.window_days(); ++row) {
      for (std::size_t c = 0; c < dims(); ++c) {
        double& v = s.features[row * dim + c];
        v = (v - mean[c]) / stddev[c];
      }
    }
  }
}

Normalization fit_normalization(std::span<const InstanceWindow> instances, std::size_t dims) {
  Normalization n;
  n.mean.assign(dims, 0.0);
  n.stddev.assign(dims, 1.0);
  if (dims == 0) return n;
  std::vector<double> sum(dims, 0.0), sq(dims, 0.0);
  double count = 0.0;
  for (const auto& inst : instances) {
    const std::size_t dim = inst.feature_dim;
    for (const auto& s : inst.stocks) {
      for (std::size_t row = 0; row < inst.window_days(); ++row) {
        for (std::size_t c = 0; c < dims; ++c) sum[c] += s.features[row * dim + c];
      }
      count += static_cast<double>(inst.window_days());
    }
  }
  if (count == 0.0) throw ConfigError("cannot fit normalization on an empty training set");
  for (std::size_t c = 0; c < dims; ++c) n.mean[c] = sum[c] / count;
  for (const auto& inst : instances) {
    const std::size_t dim = inst.feature_dim;
    for (const auto& s : inst.stocks) {
      for (std::size_t row = 0; row < inst.window_days(); ++row) {
        for (std::size_t c = 0; c < dims; ++c) {
          const double d = s.features[row * dim + c] - n.mean[c];
          sq[c] += d * d;
        }
      }
    }
  }
  for (std::size_t c = 0; c < dims; ++c) {
    const double sd = std::sqrt(sq[c] / count);
    n.stddev[c] = sd > 0.0 ? sd : 1.0;
  }
  return n;
}

SplitCounts split_counts(std::size_t days, const std::array<double, 3>& ratios) {
  double total = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ConfigError("split ratios must be non-negative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
  SplitCounts c;
  c.train = static_cast<std::size_t>(std::llround(ratios[0] * static_cast<double>(days)));
  c.validation = static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(days)));
  if (c.train + c.validation > days) c.validation = days - c.train;
  c.test = days - c.train - c.validation;
  if (c.train == 0 || c.validation == 0 || c.test == 0) {
    throw ConfigError("split of " + std::to_string(days) + " days leaves an empty part (" + std::to_string(c.train) +
                      "/" + std::to_string(c.validation) + "/" + std::to_string(c.test) + ")");
  }
  return c;
}

DatasetSplit split_chronological(std::vector<InstanceWindow> instances, const std::array<double, 3>& ratios,
                                 std::size_t normalized_dims) {
  for (std::size_t i = 1; i < instances.size(); ++i) {
    if (!(instances[i - 1].prediction_date < instances[i].prediction_date)) {
      throw DataError("instances must be strictly ordered by prediction date");
    }
  }
  const SplitCounts c = split_counts(instances.size(), ratios);
  DatasetSplit split;
  auto begin = std::make_move_iterator(instances.begin());
  split.train.assign(begin, begin + static_cast<std::ptrdiff_t>(c.train));
  split.validation.assign(begin + static_cast<std::ptrdiff_t>(c.train),
                          begin + static_cast<std::ptrdiff_t>(c.train + c.validation));
  split.test.assign(begin + static_cast<std::ptrdiff_t>(c.train + c.validation), std::make_move_iterator(instances.end()));
  split.normalization = fit_normalization(split.train, normalized_dims);
  for (auto* part : {&split.train, &split.validation, &split.test}) {
    for (auto& inst : *part) split.normalization.apply(inst);
  }
  return split;
}

}  // namespace fingat::data
