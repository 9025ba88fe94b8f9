#pragma once
// Reference post-norm encoder layer written straight from the standard
// formulas with per-node loops. Shares weight tensors with the model under
// test but none of its code path; single node type, no masking. Used by the
// unit suite and the acceptance suite as the equivalence oracle.

#include <cmath>
#include <vector>

#include "hinctr/model.hpp"

namespace testutil {

using Matrix = std::vector<std::vector<double>>;

inline Matrix to_matrix(const hinctr::Tensor& t) {
  Matrix m(t.rows(), std::vector<double>(t.cols()));
  for (int i = 0; i < t.rows(); ++i)
    for (int j = 0; j < t.cols(); ++j) m[i][j] = t.at(i, j);
  return m;
}

inline Matrix reference_encoder_layer(hinctr::ModelParams& params, int layer,
                                      const Matrix& h_in) {
  using hinctr::Tensor;
  const hinctr::ModelConfig& cfg = params.config();
  const int n = static_cast<int>(h_in.size()), d = cfg.d, heads = cfg.heads;
  const int dh = cfg.head_dim();

  auto matvec = [](const Tensor& w, const std::vector<double>& x) {
    std::vector<double> y(w.rows(), 0.0);
    for (int i = 0; i < w.rows(); ++i)
      for (int j = 0; j < w.cols(); ++j) y[i] += w.at(i, j) * x[j];
    return y;
  };

  Matrix concat(n, std::vector<double>(d, 0.0));
  for (int h = 0; h < heads; ++h) {
    Matrix q(n), k(n), v(n);
    for (int i = 0; i < n; ++i) {
      q[i] = matvec(params.wq(layer, h, 0).value, h_in[i]);
      k[i] = matvec(params.wk(layer, h, 0).value, h_in[i]);
      v[i] = matvec(params.wv(layer, h, 0).value, h_in[i]);
    }
    for (int i = 0; i < n; ++i) {
      std::vector<double> e(n);
      double mx = -1e300;
      for (int j = 0; j < n; ++j) {
        double dot = 0.0;
        for (int a = 0; a < dh; ++a) dot += q[i][a] * k[j][a];
        e[j] = dot / std::sqrt(static_cast<double>(dh));
        mx = std::max(mx, e[j]);
      }
      double z = 0.0;
      for (int j = 0; j < n; ++j) z += std::exp(e[j] - mx);
      for (int j = 0; j < n; ++j) {
        double alpha = std::exp(e[j] - mx) / z;
        for (int a = 0; a < dh; ++a) concat[i][h * dh + a] += alpha * v[j][a];
      }
    }
  }

  auto layer_norm = [&](const std::vector<double>& x, const Tensor& gamma,
                        const Tensor& beta) {
    const int width = static_cast<int>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= width;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= width;
    double inv = 1.0 / std::sqrt(var + 1e-12);
    std::vector<double> out(width);
    for (int j = 0; j < width; ++j) out[j] = gamma[j] * (x[j] - mean) * inv + beta[j];
    return out;
  };

  Matrix out(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> attn = matvec(params.wo(layer, 0).value, concat[i]);
    std::vector<double> r1(d);
    for (int j = 0; j < d; ++j) r1[j] = h_in[i][j] + attn[j];
    std::vector<double> x1 =
        layer_norm(r1, params.ln1_gamma(layer).value, params.ln1_beta(layer).value);

    std::vector<double> hidden = matvec(params.ffn_w1(layer).value, x1);
    for (int j = 0; j < cfg.d_ff; ++j) {
      hidden[j] += params.ffn_b1(layer).value[j];
      hidden[j] = std::max(0.0, hidden[j]);
    }
    std::vector<double> ff = matvec(params.ffn_w2(layer).value, hidden);
    std::vector<double> r2(d);
    for (int j = 0; j < d; ++j) r2[j] = x1[j] + ff[j] + params.ffn_b2(layer).value[j];
    out[i] = layer_norm(r2, params.ln2_gamma(layer).value, params.ln2_beta(layer).value);
  }
  return out;
}

// Four all-ones masks; turns every head into plain unmasked attention.
inline hinctr::MaskSet all_ones_masks(int n) {
  using namespace hinctr;
  MaskSet ms;
  ms.n = n;
  ms.induced = build_complete_mask(n);
  ms.induced.kind = MaskKind::Induced;
  ms.similarity = build_complete_mask(n);
  ms.similarity.kind = MaskKind::Similarity;
  ms.cross = build_complete_mask(n);
  ms.cross.kind = MaskKind::Cross;
  ms.complete = build_complete_mask(n);
  return ms;
}

}  // namespace testutil
