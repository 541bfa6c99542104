#include "tandem/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tandem/rng.hpp"
#include "tandem/tokenizer.hpp"

namespace tandem {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
  return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) +
         x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// y = xhat * gain + bias per row; xhat and rstd are cached for backward.
void layer_norm_rows(const Matrix& x, const Vector& gain, const Vector& bias,
                     Matrix& xhat, Vector& rstd, Matrix& y) {
  int n = x.rows, d = x.cols;
  xhat.resize(n, d);
  y.resize(n, d);
  rstd.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* xi = x.row(i);
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += xi[j];
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      double c = xi[j] - mean;
      var += c * c;
    }
    var /= d;
    double r = 1.0 / std::sqrt(var + kLnEps);
    rstd[i] = r;
    double* xh = xhat.row(i);
    double* yi = y.row(i);
    for (int j = 0; j < d; ++j) {
      xh[j] = (xi[j] - mean) * r;
      yi[j] = xh[j] * gain[j] + bias[j];
    }
  }
}

// Accumulates dx from dy; also accumulates gain/bias gradients.
void layer_norm_backward_rows(const Matrix& dy, const Matrix& xhat,
                              const Vector& rstd, const Vector& gain, Matrix& dx,
                              Vector& dgain, Vector& dbias) {
  int n = dy.rows, d = dy.cols;
  std::vector<double> dxh(d);
  for (int i = 0; i < n; ++i) {
    const double* dyi = dy.row(i);
    const double* xh = xhat.row(i);
    double* dxi = dx.row(i);
    double sum_dxh = 0.0, sum_dxh_xh = 0.0;
    for (int j = 0; j < d; ++j) {
      dxh[j] = dyi[j] * gain[j];
      sum_dxh += dxh[j];
      sum_dxh_xh += dxh[j] * xh[j];
      dgain[j] += dyi[j] * xh[j];
      dbias[j] += dyi[j];
    }
    double m1 = sum_dxh / d;
    double m2 = sum_dxh_xh / d;
    double r = rstd[i];
    for (int j = 0; j < d; ++j) dxi[j] += r * (dxh[j] - m1 - xh[j] * m2);
  }
}

// Y.row(i) = W X.row(i) + b for all rows.
void affine_rows(const Matrix& w, const Vector& b, const Matrix& x, Matrix& y) {
  y.resize(x.rows, w.rows);
  for (int i = 0; i < x.rows; ++i) affine(w, x.row(i), b.data(), y.row(i));
}

Matrix init_matrix(int rows, int cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.next_symmetric(bound);
  return m;
}

}  // namespace

TokenSequence pack_sequence(const std::vector<int>& history_ids,
                            const std::vector<int>& target_ids, int max_len) {
  if (target_ids.empty()) {
    throw std::runtime_error("pack_sequence: target must not be empty");
  }
  int t = static_cast<int>(target_ids.size());
  if (t + 2 > max_len) {
    throw std::runtime_error(
        "pack_sequence: target plus special tokens exceeds max_len (" +
        std::to_string(t + 2) + " > " + std::to_string(max_len) + ")");
  }
  int h = static_cast<int>(history_ids.size());
  int keep = std::min(h, max_len - t - 2);
  int drop = h - keep;  // oldest history tokens dropped first

  TokenSequence seq;
  seq.ids.reserve(keep + t + 2);
  seq.ids.push_back(Vocabulary::kCls);
  for (int i = drop; i < h; ++i) seq.ids.push_back(history_ids[i]);
  seq.ids.push_back(Vocabulary::kSep);
  for (int id : target_ids) seq.ids.push_back(id);

  seq.special.assign(seq.ids.size(), 0);
  seq.special[0] = 1;
  seq.special[1 + keep] = 1;
  return seq;
}

EncoderParams init_encoder(const EncoderConfig& config, uint64_t seed) {
  if (config.vocab_size < 1 || config.d_model < 1 || config.n_layers < 0 ||
      config.n_heads < 1 || config.max_len < 3 || config.ffn_dim < 1) {
    throw std::runtime_error("init_encoder: invalid configuration");
  }
  if (config.d_model % config.n_heads != 0) {
    throw std::runtime_error("init_encoder: d_model must be divisible by n_heads");
  }
  Rng rng(seed);
  EncoderParams p;
  p.config = config;
  int d = config.d_model, f = config.ffn_dim;
  double emb_bound = 1.0 / std::sqrt(static_cast<double>(d));
  double d_bound = 1.0 / std::sqrt(static_cast<double>(d));
  double f_bound = 1.0 / std::sqrt(static_cast<double>(f));
  p.token_embedding = init_matrix(config.vocab_size, d, emb_bound, rng);
  p.pos_embedding = init_matrix(config.max_len, d, emb_bound, rng);
  p.layers.resize(config.n_layers);
  for (auto& layer : p.layers) {
    layer.ln1_gain.assign(d, 1.0);
    layer.ln1_bias.assign(d, 0.0);
    layer.wq = init_matrix(d, d, d_bound, rng);
    layer.wk = init_matrix(d, d, d_bound, rng);
    layer.wv = init_matrix(d, d, d_bound, rng);
    layer.wo = init_matrix(d, d, d_bound, rng);
    layer.bq.assign(d, 0.0);
    layer.bk.assign(d, 0.0);
    layer.bv.assign(d, 0.0);
    layer.bo.assign(d, 0.0);
    layer.ln2_gain.assign(d, 1.0);
    layer.ln2_bias.assign(d, 0.0);
    layer.w_ff1 = init_matrix(f, d, d_bound, rng);
    layer.b_ff1.assign(f, 0.0);
    layer.w_ff2 = init_matrix(d, f, f_bound, rng);
    layer.b_ff2.assign(d, 0.0);
  }
  p.final_gain.assign(d, 1.0);
  p.final_bias.assign(d, 0.0);
  return p;
}

EncoderParams zeros_like(const EncoderParams& params) {
  EncoderParams g = params;
  std::vector<TensorRef> refs;
  collect_tensors(g, "", refs);
  for (auto& ref : refs) ref.values->assign(ref.values->size(), 0.0);
  return g;
}

void collect_tensors(EncoderParams& p, const std::string& prefix,
                     std::vector<TensorRef>& out) {
  auto mat = [&](const std::string& name, Matrix& m) {
    out.push_back({prefix + name, &m.data, m.rows, m.cols});
  };
  auto vec = [&](const std::string& name, Vector& v) {
    out.push_back({prefix + name, &v, 1, static_cast<int>(v.size())});
  };
  mat("token_embedding", p.token_embedding);
  mat("pos_embedding", p.pos_embedding);
  for (size_t l = 0; l < p.layers.size(); ++l) {
    auto& layer = p.layers[l];
    std::string base = "layer" + std::to_string(l) + ".";
    vec(base + "ln1_gain", layer.ln1_gain);
    vec(base + "ln1_bias", layer.ln1_bias);
    mat(base + "wq", layer.wq);
    vec(base + "bq", layer.bq);
    mat(base + "wk", layer.wk);
    vec(base + "bk", layer.bk);
    mat(base + "wv", layer.wv);
    vec(base + "bv", layer.bv);
    mat(base + "wo", layer.wo);
    vec(base + "bo", layer.bo);
    vec(base + "ln2_gain", layer.ln2_gain);
    vec(base + "ln2_bias", layer.ln2_bias);
    mat(base + "w_ff1", layer.w_ff1);
    vec(base + "b_ff1", layer.b_ff1);
    mat(base + "w_ff2", layer.w_ff2);
    vec(base + "b_ff2", layer.b_ff2);
  }
  vec("final_gain", p.final_gain);
  vec("final_bias", p.final_bias);
}

void encoder_forward(const TokenSequence& x, const EncoderParams& p,
                     EncoderCache& cache) {
  const EncoderConfig& cfg = p.config;
  int n = x.size();
  if (n == 0) throw std::runtime_error("encoder_forward: empty sequence");
  if (n > cfg.max_len) {
    throw std::runtime_error("encoder_forward: sequence length " +
                             std::to_string(n) + " exceeds max_len " +
                             std::to_string(cfg.max_len));
  }
  for (int id : x.ids) {
    if (id < 0 || id >= cfg.vocab_size) {
      throw std::runtime_error("encoder_forward: token id " + std::to_string(id) +
                               " out of range for vocabulary of size " +
                               std::to_string(cfg.vocab_size));
    }
  }
  if (p.token_embedding.rows != cfg.vocab_size ||
      p.token_embedding.cols != cfg.d_model ||
      p.pos_embedding.rows != cfg.max_len ||
      static_cast<int>(p.layers.size()) != cfg.n_layers) {
    throw std::runtime_error(
        "encoder_forward: parameter shapes do not match the configuration");
  }
  int d = cfg.d_model;
  int heads = cfg.n_heads;
  int dh = d / heads;
  double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  cache.ids = x.ids;
  cache.layers.resize(cfg.n_layers);

  Matrix stream(n, d);
  for (int i = 0; i < n; ++i) {
    const double* emb = p.token_embedding.row(x.ids[i]);
    const double* pos = p.pos_embedding.row(i);
    double* si = stream.row(i);
    for (int j = 0; j < d; ++j) si[j] = emb[j] + pos[j];
  }

  std::vector<double> srow;
  for (int l = 0; l < cfg.n_layers; ++l) {
    const LayerParams& lp = p.layers[l];
    LayerCache& lc = cache.layers[l];
    lc.x_in = stream;

    layer_norm_rows(lc.x_in, lp.ln1_gain, lp.ln1_bias, lc.ln1_xhat, lc.ln1_rstd,
                    lc.ln1_out);
    affine_rows(lp.wq, lp.bq, lc.ln1_out, lc.q);
    affine_rows(lp.wk, lp.bk, lc.ln1_out, lc.k);
    affine_rows(lp.wv, lp.bv, lc.ln1_out, lc.v);

    lc.attn.resize(heads);
    lc.attn_out.resize(n, d);
    srow.resize(n);
    for (int h = 0; h < heads; ++h) {
      int off = h * dh;
      Matrix& probs = lc.attn[h];
      probs.resize(n, n);
      for (int i = 0; i < n; ++i) {
        const double* qi = lc.q.row(i) + off;
        double maxv = -1e300;
        for (int j = 0; j < n; ++j) {
          srow[j] = dot(qi, lc.k.row(j) + off, dh) * scale;
          if (srow[j] > maxv) maxv = srow[j];
        }
        double sum = 0.0;
        double* pi = probs.row(i);
        for (int j = 0; j < n; ++j) {
          pi[j] = std::exp(srow[j] - maxv);
          sum += pi[j];
        }
        double inv = 1.0 / sum;
        double* oi = lc.attn_out.row(i) + off;
        for (int j = 0; j < dh; ++j) oi[j] = 0.0;
        for (int j = 0; j < n; ++j) {
          pi[j] *= inv;
          axpy(pi[j], lc.v.row(j) + off, oi, dh);
        }
      }
    }

    lc.x_mid.resize(n, d);
    for (int i = 0; i < n; ++i) {
      double* mid = lc.x_mid.row(i);
      affine(lp.wo, lc.attn_out.row(i), lp.bo.data(), mid);
      const double* xi = lc.x_in.row(i);
      for (int j = 0; j < d; ++j) mid[j] += xi[j];
    }

    layer_norm_rows(lc.x_mid, lp.ln2_gain, lp.ln2_bias, lc.ln2_xhat, lc.ln2_rstd,
                    lc.ln2_out);
    affine_rows(lp.w_ff1, lp.b_ff1, lc.ln2_out, lc.ffn_pre);
    lc.ffn_act.resize(n, cfg.ffn_dim);
    for (size_t i = 0; i < lc.ffn_pre.data.size(); ++i) {
      lc.ffn_act.data[i] = gelu(lc.ffn_pre.data[i]);
    }
    stream.resize(n, d);
    for (int i = 0; i < n; ++i) {
      double* si = stream.row(i);
      affine(lp.w_ff2, lc.ffn_act.row(i), lp.b_ff2.data(), si);
      const double* mid = lc.x_mid.row(i);
      for (int j = 0; j < d; ++j) si[j] += mid[j];
    }
  }

  cache.x_final = std::move(stream);
  layer_norm_rows(cache.x_final, p.final_gain, p.final_bias, cache.f_xhat,
                  cache.f_rstd, cache.hidden);
}

Matrix encode(const TokenSequence& x, const EncoderParams& params) {
  EncoderCache cache;
  encoder_forward(x, params, cache);
  return std::move(cache.hidden);
}

Vector encode_cls(const TokenSequence& x, const EncoderParams& params) {
  Matrix hidden = encode(x, params);
  return Vector(hidden.row(0), hidden.row(0) + hidden.cols);
}

void encoder_backward(const EncoderParams& p, const EncoderCache& cache,
                      const Matrix& d_hidden, EncoderParams& grads) {
  const EncoderConfig& cfg = p.config;
  int n = cache.length();
  int d = cfg.d_model;
  int heads = cfg.n_heads;
  int dh = d / heads;
  double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix d_stream(n, d);
  layer_norm_backward_rows(d_hidden, cache.f_xhat, cache.f_rstd, p.final_gain,
                           d_stream, grads.final_gain, grads.final_bias);

  Matrix d_mid(n, d), d_ln2(n, d), d_pre(n, cfg.ffn_dim), d_ffn_out(n, d);
  Matrix d_attn_out(n, d), d_q(n, d), d_k(n, d), d_v(n, d), d_ln1(n, d);
  std::vector<double> dp(n), ds(n);

  for (int l = cfg.n_layers - 1; l >= 0; --l) {
    const LayerParams& lp = p.layers[l];
    LayerParams& lg = grads.layers[l];
    const LayerCache& lc = cache.layers[l];

    // FFN block: stream_out = x_mid + w_ff2 gelu(w_ff1 ln2(x_mid) + b1) + b2
    d_mid = d_stream;  // residual path
    d_pre.resize(n, cfg.ffn_dim);
    for (int i = 0; i < n; ++i) {
      const double* dout = d_stream.row(i);
      affine_backward_params(dout, lc.ffn_act.row(i), lg.w_ff2, lg.b_ff2.data());
      double* dact = d_pre.row(i);  // reuse buffer for dact then dpre
      for (int j = 0; j < cfg.ffn_dim; ++j) dact[j] = 0.0;
      affine_backward_input(lp.w_ff2, dout, dact);
      const double* pre = lc.ffn_pre.row(i);
      for (int j = 0; j < cfg.ffn_dim; ++j) dact[j] *= gelu_grad(pre[j]);
      affine_backward_params(dact, lc.ln2_out.row(i), lg.w_ff1, lg.b_ff1.data());
    }
    d_ln2.resize(n, d);
    d_ln2.zero();
    for (int i = 0; i < n; ++i) {
      affine_backward_input(lp.w_ff1, d_pre.row(i), d_ln2.row(i));
    }
    layer_norm_backward_rows(d_ln2, lc.ln2_xhat, lc.ln2_rstd, lp.ln2_gain, d_mid,
                             lg.ln2_gain, lg.ln2_bias);

    // Attention block: x_mid = x_in + wo concat_h(P_h V_h) + bo
    d_stream = d_mid;  // residual path into x_in
    d_attn_out.resize(n, d);
    d_attn_out.zero();
    for (int i = 0; i < n; ++i) {
      const double* dmid = d_mid.row(i);
      affine_backward_params(dmid, lc.attn_out.row(i), lg.wo, lg.bo.data());
      affine_backward_input(lp.wo, dmid, d_attn_out.row(i));
    }

    d_q.resize(n, d);
    d_q.zero();
    d_k.resize(n, d);
    d_k.zero();
    d_v.resize(n, d);
    d_v.zero();
    for (int h = 0; h < heads; ++h) {
      int off = h * dh;
      const Matrix& probs = lc.attn[h];
      for (int i = 0; i < n; ++i) {
        const double* doi = d_attn_out.row(i) + off;
        const double* pi = probs.row(i);
        double dot_dp_p = 0.0;
        for (int j = 0; j < n; ++j) {
          dp[j] = dot(doi, lc.v.row(j) + off, dh);
          axpy(pi[j], doi, d_v.row(j) + off, dh);
          dot_dp_p += dp[j] * pi[j];
        }
        double* dqi = d_q.row(i) + off;
        for (int j = 0; j < n; ++j) {
          ds[j] = pi[j] * (dp[j] - dot_dp_p) * scale;
          axpy(ds[j], lc.k.row(j) + off, dqi, dh);
          axpy(ds[j], lc.q.row(i) + off, d_k.row(j) + off, dh);
        }
      }
    }

    d_ln1.resize(n, d);
    d_ln1.zero();
    for (int i = 0; i < n; ++i) {
      affine_backward_params(d_q.row(i), lc.ln1_out.row(i), lg.wq, lg.bq.data());
      affine_backward_params(d_k.row(i), lc.ln1_out.row(i), lg.wk, lg.bk.data());
      affine_backward_params(d_v.row(i), lc.ln1_out.row(i), lg.wv, lg.bv.data());
      double* dli = d_ln1.row(i);
      affine_backward_input(lp.wq, d_q.row(i), dli);
      affine_backward_input(lp.wk, d_k.row(i), dli);
      affine_backward_input(lp.wv, d_v.row(i), dli);
    }
    layer_norm_backward_rows(d_ln1, lc.ln1_xhat, lc.ln1_rstd, lp.ln1_gain,
                             d_stream, lg.ln1_gain, lg.ln1_bias);
  }

  for (int i = 0; i < n; ++i) {
    const double* di = d_stream.row(i);
    axpy(1.0, di, grads.token_embedding.row(cache.ids[i]), d);
    axpy(1.0, di, grads.pos_embedding.row(i), d);
  }
}

}  // namespace tandem
