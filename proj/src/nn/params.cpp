#include "fingat/nn/params.hpp"

#include <cmath>

namespace fingat::nn {

ad::Tensor uniform_init(ad::Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  ad::Tensor t(std::move(shape));
  for (auto& v : t.data()) v = u(rng);
  return t;
}

}  // namespace fingat::nn
