#include "fingat/train/adam.hpp"

#include <cmath>
#include <utility>

#include "fingat/errors.hpp"

namespace fingat::train {

void Adam::step(const nn::ParamList& params) {
  for (const auto& p : params) {
    if (!p.tensor->has_grad()) throw TrainingError("adam: parameter " + p.name + " has no gradient");
  }
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.tensor->size(), 0.0);
      v_.emplace_back(p.tensor->size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw TrainingError("adam: parameter list changed between steps");
  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto x = params[k].tensor->data();
    const auto g = std::as_const(*params[k].tensor).grad();
    if (x.size() != m_[k].size()) throw TrainingError("adam: parameter " + params[k].name + " changed size");
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      x[i] -= options_.learning_rate * mhat / (std::sqrt(vhat) + options_.epsilon);
    }
  }
}

}  // namespace fingat::train
