#pragma once

// Plain nested-vector re-implementations of the layers, written without the
// tape or any library op, used as oracles in tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include "fingat/ad/tensor.hpp"

namespace fingat::test::reference {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline Mat to_mat(const ad::Tensor& t) {
  Mat m(t.rows(), Vec(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = t.at(i, j);
  return m;
}

inline Vec to_vec(const ad::Tensor& t) { return Vec(t.data().begin(), t.data().end()); }

// Row vector times matrix: out_j = sum_i x_i W_ij.
inline Vec vm(const Vec& x, const Mat& w) {
  Vec out(w.empty() ? 0 : w[0].size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += x[i] * w[i][j];
  return out;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec softmax(const Vec& s) {
  const double m = *std::max_element(s.begin(), s.end());
  Vec e(s.size());
  double z = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) z += (e[i] = std::exp(s[i] - m));
  for (auto& v : e) v /= z;
  return e;
}

struct Gru {
  Mat wz, uz, wr, ur, wh, uh;
  Vec bz, br, bh;
};

inline Vec gru_step(const Gru& g, const Vec& x, const Vec& h) {
  const std::size_t n = h.size();
  const Vec xz = vm(x, g.wz), hz = vm(h, g.uz), xr = vm(x, g.wr), hr = vm(h, g.ur), xh = vm(x, g.wh);
  Vec z(n), r(n), rh(n);
  for (std::size_t k = 0; k < n; ++k) {
    z[k] = sigm(xz[k] + hz[k] + g.bz[k]);
    r[k] = sigm(xr[k] + hr[k] + g.br[k]);
    rh[k] = r[k] * h[k];
  }
  const Vec hh = vm(rh, g.uh);
  Vec out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double cand = std::tanh(xh[k] + hh[k] + g.bh[k]);
    out[k] = z[k] * h[k] + (1.0 - z[k]) * cand;
  }
  return out;
}

// All hidden states for one sequence starting from zero.
inline Mat gru_run(const Gru& g, const Mat& xs) {
  Vec h(g.uz.size(), 0.0);
  Mat states;
  for (const auto& x : xs) states.push_back(h = gru_step(g, x, h));
  return states;
}

struct Attention {
  Mat w0;
  Vec v;
};

// Returns the pooled vector; alpha receives the weights.
inline Vec attend(const Attention& a, const Mat& hs, Vec* alpha = nullptr) {
  Vec s;
  for (const auto& h : hs) {
    Vec t = vm(h, a.w0);
    for (auto& x : t) x = std::tanh(x);
    s.push_back(dot(t, a.v));
  }
  const Vec w = softmax(s);
  Vec out(hs[0].size(), 0.0);
  for (std::size_t j = 0; j < hs.size(); ++j)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += w[j] * hs[j][k];
  if (alpha) *alpha = w;
  return out;
}

struct Gat {
  Mat w1, w2;
  Vec r;  // 2*out
};

// Complete graph with self-loops. beta receives the attention matrix.
inline Mat gat_complete(const Gat& g, const Mat& a, Mat* beta = nullptr, double slope = 0.2) {
  const std::size_t m = a.size(), out = g.w1[0].size();
  Mat msg(m), key(m);
  for (std::size_t i = 0; i < m; ++i) {
    msg[i] = vm(a[i], g.w1);
    key[i] = vm(a[i], g.w2);
  }
  Mat b(m), res(m, Vec(out, 0.0));
  for (std::size_t q = 0; q < m; ++q) {
    Vec logits(m);
    for (std::size_t n = 0; n < m; ++n) {
      Vec cat = key[q];
      cat.insert(cat.end(), key[n].begin(), key[n].end());
      const double e = dot(g.r, cat);
      logits[n] = e > 0 ? e : slope * e;
    }
    b[q] = softmax(logits);
    for (std::size_t n = 0; n < m; ++n)
      for (std::size_t k = 0; k < out; ++k) res[q][k] += b[q][n] * msg[n][k];
    for (auto& v : res[q]) v = std::max(v, 0.0);
  }
  if (beta) *beta = b;
  return res;
}

}  // namespace fingat::test::reference
