#include "fingat/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace fingat::ad {

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max(std::abs(analytic), floor);
}

namespace {
void consider(GradCheckResult& r, const std::string& name, std::size_t i, double a, double n) {
  const double e = relative_error(a, n);
  if (r.coordinates++ == 0 || e > r.max_relative_error) {
    r.max_relative_error = e;
    r.worst_name = name;
    r.worst_index = i;
    r.analytic = a;
    r.numeric = n;
  }
}
}  // namespace

GradCheckResult finite_diff_check(const ScalarFn& f, const Tensor& x, double step) {
  std::vector<double> analytic;
  {
    Tape tape;
    Var in = tape.variable(x);
    Var loss = f(tape, in);
    tape.compute_adjoints(loss);
    analytic = tape.grad(in);
  }
  auto eval = [&](const Tensor& at) {
    Tape tape;
    return f(tape, tape.constant(at)).value().item();
  };
  GradCheckResult result;
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double up = eval(probe);
    probe[i] = orig - step;
    const double down = eval(probe);
    probe[i] = orig;
    consider(result, "", i, analytic[i], (up - down) / (2.0 * step));
  }
  return result;
}

GradCheckResult finite_diff_check_params(const std::function<Var(Tape&)>& loss, const std::vector<NamedTensor>& params,
                                         double step) {
  std::vector<std::vector<double>> saved_grads;
  for (const auto& p : params) {
    p.tensor->set_requires_grad(true);
    saved_grads.emplace_back(p.tensor->grad().begin(), p.tensor->grad().end());
    p.tensor->zero_grad();
  }
  {
    Tape tape;
    tape.backward(loss(tape));
  }
  std::vector<std::vector<double>> analytic;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto g = params[k].tensor->grad();
    analytic.emplace_back(g.begin(), g.end());
    std::copy(saved_grads[k].begin(), saved_grads[k].end(), g.begin());
  }
  auto eval = [&] {
    Tape tape;
    return loss(tape).value().item();
  };
  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& t = *params[k].tensor;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double orig = t[i];
      t[i] = orig + step;
      const double up = eval();
      t[i] = orig - step;
      const double down = eval();
      t[i] = orig;
      consider(result, params[k].name, i, analytic[k][i], (up - down) / (2.0 * step));
    }
  }
  return result;
}

}  // namespace fingat::ad
