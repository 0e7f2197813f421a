#pragma once

#include <array>
#include <span>
#include <vector>

#include "fingat/data/instances.hpp"

namespace fingat::data {

// Per-feature z-score statistics for the leading `dims` feature columns (the
// raw price block); later columns are already scale-free and stay untouched.
struct Normalization {
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t dims() const { return mean.size(); }
  void apply(InstanceWindow& instance) const;
};

// Population statistics over every feature row of every stock in `instances`.
// A zero deviation is stored as 1 so constant columns map to 0.
Normalization fit_normalization(std::span<const InstanceWindow> instances, std::size_t dims);

struct DatasetSplit {
  std::vector<InstanceWindow> train;
  std::vector<InstanceWindow> validation;
  std::vector<InstanceWindow> test;
  Normalization normalization;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

// train = round(r0 * n), validation = round(r1 * n), test = the rest.
SplitCounts split_counts(std::size_t days, const std::array<double, 3>& ratios);

// Contiguous prefix/middle/suffix by prediction day. Statistics are fitted on
// the training part only and applied to all three. Instances must be sorted
// by prediction date; any empty part is a ConfigError.
DatasetSplit split_chronological(std::vector<InstanceWindow> instances, const std::array<double, 3>& ratios,
                                 std::size_t normalized_dims);

}  // namespace fingat::data
