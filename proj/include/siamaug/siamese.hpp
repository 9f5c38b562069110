#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "siamaug/augmentor.hpp"
#include "siamaug/common.hpp"
#include "siamaug/event_log.hpp"
#include "siamaug/nn.hpp"
#include "siamaug/rng.hpp"

namespace siamaug {

enum class EncoderVariant { kEmbedPoolMlp, kAttentionBlock };

inline const char* to_string(EncoderVariant v) {
  return v == EncoderVariant::kEmbedPoolMlp ? "embed-pool-mlp" : "single-attention-block";
}

inline EncoderVariant encoder_variant_from_string(const std::string& s) {
  if (s == "embed-pool-mlp") return EncoderVariant::kEmbedPoolMlp;
  if (s == "single-attention-block") return EncoderVariant::kAttentionBlock;
  throw ConfigError("unknown encoder variant: " + s);
}

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 16;
  std::size_t hidden_dim = 32;
  std::size_t max_len = 32;
  EncoderVariant variant = EncoderVariant::kEmbedPoolMlp;

  void validate() const {
    if (vocab_size < kReservedIds + 1) throw ConfigError("vocab_size too small");
    if (embed_dim < 1 || hidden_dim < 1 || max_len < 1) {
      throw ConfigError("encoder dimensions must be >= 1");
    }
  }
};

// Token embedding + right-aligned positional embedding, masked mean pooling,
// and a tanh MLP. The attention variant adds one residual self-attention
// block before pooling.
struct EncoderParams {
  nn::Mat embed;  // vocab_size x embed_dim
  nn::Mat pos;    // max_len x embed_dim
  nn::Mat wq, wk, wv;  // embed_dim x embed_dim; empty for the pooling variant
  nn::Mlp2 mlp;   // embed_dim -> hidden_dim -> embed_dim, tanh hidden
  EncoderVariant variant = EncoderVariant::kEmbedPoolMlp;
};

struct NetworkParams {
  EncoderParams enc;
  nn::Mlp2 projector;   // linear head
  nn::Mlp2 predictor;   // linear head, online network only
  bool has_predictor = true;
};

namespace detail {

struct TensorRef {
  std::string name;
  std::vector<double>* data;
};

inline void collect(EncoderParams& enc, std::vector<TensorRef>& out) {
  out.push_back({"enc.embed", &enc.embed.a});
  out.push_back({"enc.pos", &enc.pos.a});
  if (enc.variant == EncoderVariant::kAttentionBlock) {
    out.push_back({"enc.wq", &enc.wq.a});
    out.push_back({"enc.wk", &enc.wk.a});
    out.push_back({"enc.wv", &enc.wv.a});
  }
  out.push_back({"enc.mlp.w1", &enc.mlp.w1.a});
  out.push_back({"enc.mlp.b1", &enc.mlp.b1});
  out.push_back({"enc.mlp.w2", &enc.mlp.w2.a});
  out.push_back({"enc.mlp.b2", &enc.mlp.b2});
}

inline void collect(nn::Mlp2& m, const std::string& prefix, std::vector<TensorRef>& out) {
  out.push_back({prefix + ".w1", &m.w1.a});
  out.push_back({prefix + ".b1", &m.b1});
  out.push_back({prefix + ".w2", &m.w2.a});
  out.push_back({prefix + ".b2", &m.b2});
}

}  // namespace detail

// Tensors shared between online and target networks (everything except the
// predictor). Fixed enumeration order.
inline std::vector<detail::TensorRef> shared_tensors(NetworkParams& params) {
  std::vector<detail::TensorRef> out;
  detail::collect(params.enc, out);
  detail::collect(params.projector, "proj", out);
  return out;
}

inline std::vector<detail::TensorRef> all_tensors(NetworkParams& params) {
  auto out = shared_tensors(params);
  if (params.has_predictor) detail::collect(params.predictor, "pred", out);
  return out;
}

// Lecun-uniform half-width: variance 1/fan_in, so layer gain stays near 1
// and stacked heads neither explode nor shrink representations. Keeping
// output norms O(1) also keeps the cosine loss well conditioned for the
// finite-difference gradient oracle.
inline double init_half_width(std::size_t fan_in) {
  return std::sqrt(3.0 / static_cast<double>(fan_in));
}

inline EncoderParams init_encoder(const EncoderConfig& cfg, Rng& rng) {
  cfg.validate();
  EncoderParams enc;
  enc.variant = cfg.variant;
  enc.embed = nn::Mat(cfg.vocab_size, cfg.embed_dim);
  enc.pos = nn::Mat(cfg.max_len, cfg.embed_dim);
  nn::fill_uniform(enc.embed, rng, 0.5);
  nn::fill_uniform(enc.pos, rng, 0.5);
  if (cfg.variant == EncoderVariant::kAttentionBlock) {
    const double attn_scale = init_half_width(cfg.embed_dim);
    enc.wq = nn::Mat(cfg.embed_dim, cfg.embed_dim);
    enc.wk = nn::Mat(cfg.embed_dim, cfg.embed_dim);
    enc.wv = nn::Mat(cfg.embed_dim, cfg.embed_dim);
    nn::fill_uniform(enc.wq, rng, attn_scale);
    nn::fill_uniform(enc.wk, rng, attn_scale);
    nn::fill_uniform(enc.wv, rng, attn_scale);
  }
  enc.mlp = nn::Mlp2::make(cfg.embed_dim, cfg.hidden_dim, cfg.embed_dim, nn::Activation::kTanh);
  nn::fill_uniform(enc.mlp.w1, rng, init_half_width(cfg.embed_dim));
  nn::fill_uniform(enc.mlp.w2, rng, init_half_width(cfg.hidden_dim));
  return enc;
}

inline NetworkParams init_network(const EncoderConfig& cfg, Rng& rng) {
  NetworkParams params;
  params.enc = init_encoder(cfg, rng);
  params.projector =
      nn::Mlp2::make(cfg.embed_dim, cfg.hidden_dim, cfg.embed_dim, nn::Activation::kIdentity);
  nn::fill_uniform(params.projector.w1, rng, init_half_width(cfg.embed_dim));
  nn::fill_uniform(params.projector.w2, rng, init_half_width(cfg.hidden_dim));
  params.predictor =
      nn::Mlp2::make(cfg.embed_dim, cfg.hidden_dim, cfg.embed_dim, nn::Activation::kIdentity);
  nn::fill_uniform(params.predictor.w1, rng, init_half_width(cfg.embed_dim));
  nn::fill_uniform(params.predictor.w2, rng, init_half_width(cfg.hidden_dim));
  params.has_predictor = true;
  return params;
}

// The target network is the online network minus the predictor.
inline NetworkParams make_target(const NetworkParams& online) {
  NetworkParams target;
  target.enc = online.enc;
  target.projector = online.projector;
  target.has_predictor = false;
  return target;
}

namespace detail {

struct EncodeCache {
  std::vector<ActivityId> content;       // non-PAD token ids
  std::vector<std::size_t> positions;    // right-aligned position indices
  std::vector<nn::Vec> x;                // embed + pos per content token
  // attention intermediates (attention variant only)
  std::vector<nn::Vec> q, k, v;
  std::vector<nn::Vec> attn;             // softmax rows
  std::vector<nn::Vec> h;                // x + attention output
  nn::Vec pooled;
  nn::Vec mlp_hidden;
  nn::Vec y;
};

}  // namespace detail

// Forward pass of the encoder. PAD positions are skipped entirely; positions
// are assigned right-aligned so the amount of left padding cannot change the
// output.
inline nn::Vec encode_cached(const EncoderParams& enc, std::span<const ActivityId> seq,
                             detail::EncodeCache& cache) {
  const std::size_t max_len = enc.pos.rows;
  if (seq.size() > max_len) {
    throw ContractError("sequence longer than max_len");
  }
  cache.content.clear();
  for (ActivityId id : seq) {
    if (id == kPadId) continue;
    if (id < 0 || static_cast<std::size_t>(id) >= enc.embed.rows) {
      throw ContractError("activity id outside embedding table: " + std::to_string(id));
    }
    cache.content.push_back(id);
  }
  const std::size_t len = cache.content.size();
  if (len == 0) throw ContractError("encode: sequence has no content tokens");

  const std::size_t dim = enc.embed.cols;
  cache.positions.resize(len);
  cache.x.assign(len, nn::Vec(dim, 0.0));
  for (std::size_t j = 0; j < len; ++j) {
    const std::size_t pos_index = max_len - len + j;
    cache.positions[j] = pos_index;
    const double* erow = enc.embed.a.data() + static_cast<std::size_t>(cache.content[j]) * dim;
    const double* prow = enc.pos.a.data() + pos_index * dim;
    for (std::size_t d = 0; d < dim; ++d) cache.x[j][d] = erow[d] + prow[d];
  }

  const std::vector<nn::Vec>* pooled_input = &cache.x;
  if (enc.variant == EncoderVariant::kAttentionBlock) {
    cache.q.resize(len);
    cache.k.resize(len);
    cache.v.resize(len);
    for (std::size_t j = 0; j < len; ++j) {
      cache.q[j] = nn::matvec(enc.wq, cache.x[j]);
      cache.k[j] = nn::matvec(enc.wk, cache.x[j]);
      cache.v[j] = nn::matvec(enc.wv, cache.x[j]);
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    cache.attn.assign(len, nn::Vec(len, 0.0));
    cache.h.assign(len, nn::Vec(dim, 0.0));
    for (std::size_t j = 0; j < len; ++j) {
      nn::Vec scores(len, 0.0);
      double max_score = -1e300;
      for (std::size_t t = 0; t < len; ++t) {
        scores[t] = nn::dot(cache.q[j], cache.k[t]) * scale;
        max_score = std::max(max_score, scores[t]);
      }
      double denom = 0.0;
      for (std::size_t t = 0; t < len; ++t) {
        scores[t] = std::exp(scores[t] - max_score);
        denom += scores[t];
      }
      for (std::size_t t = 0; t < len; ++t) cache.attn[j][t] = scores[t] / denom;
      // residual: h_j = x_j + sum_t attn_jt * v_t
      cache.h[j] = cache.x[j];
      for (std::size_t t = 0; t < len; ++t) {
        nn::axpy(cache.attn[j][t], cache.v[t], cache.h[j]);
      }
    }
    pooled_input = &cache.h;
  }

  cache.pooled.assign(dim, 0.0);
  for (const auto& row : *pooled_input) nn::axpy(1.0, row, cache.pooled);
  const double inv_len = 1.0 / static_cast<double>(len);
  for (double& p : cache.pooled) p *= inv_len;

  cache.y = enc.mlp.forward(cache.pooled, cache.mlp_hidden);
  return cache.y;
}

inline nn::Vec encode(const EncoderParams& enc, std::span<const ActivityId> seq) {
  detail::EncodeCache cache;
  return encode_cached(enc, seq, cache);
}

// Backward through the encoder given dL/dy; parameter gradients accumulate
// into `grad` (same shapes as `enc`).
inline void encode_backward(const EncoderParams& enc, const detail::EncodeCache& cache,
                            const nn::Vec& dy, EncoderParams& grad) {
  const std::size_t len = cache.content.size();
  const std::size_t dim = enc.embed.cols;
  const nn::Vec dpooled = enc.mlp.backward(cache.pooled, cache.mlp_hidden, dy, grad.mlp);

  const double inv_len = 1.0 / static_cast<double>(len);
  nn::Vec dtoken(dim, 0.0);
  for (std::size_t d = 0; d < dim; ++d) dtoken[d] = dpooled[d] * inv_len;

  std::vector<nn::Vec> dx(len, nn::Vec(dim, 0.0));
  if (enc.variant == EncoderVariant::kEmbedPoolMlp) {
    for (std::size_t j = 0; j < len; ++j) dx[j] = dtoken;
  } else {
    // residual path
    for (std::size_t j = 0; j < len; ++j) dx[j] = dtoken;
    // attention path: dO_j = dtoken for every j
    std::vector<nn::Vec> dq(len, nn::Vec(dim, 0.0));
    std::vector<nn::Vec> dk(len, nn::Vec(dim, 0.0));
    std::vector<nn::Vec> dv(len, nn::Vec(dim, 0.0));
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (std::size_t j = 0; j < len; ++j) {
      // dA_jt = dO_j . v_t, then softmax backward within the row
      nn::Vec da(len, 0.0);
      double weighted = 0.0;
      for (std::size_t t = 0; t < len; ++t) {
        da[t] = nn::dot(dtoken, cache.v[t]);
        weighted += cache.attn[j][t] * da[t];
      }
      for (std::size_t t = 0; t < len; ++t) {
        const double ds = cache.attn[j][t] * (da[t] - weighted);
        nn::axpy(ds * scale, cache.k[t], dq[j]);
        nn::axpy(ds * scale, cache.q[j], dk[t]);
        nn::axpy(cache.attn[j][t], dtoken, dv[t]);
      }
    }
    for (std::size_t j = 0; j < len; ++j) {
      for (std::size_t r = 0; r < dim; ++r) {
        double* gq = grad.wq.a.data() + r * dim;
        double* gk = grad.wk.a.data() + r * dim;
        double* gv = grad.wv.a.data() + r * dim;
        for (std::size_t c = 0; c < dim; ++c) {
          gq[c] += dq[j][r] * cache.x[j][c];
          gk[c] += dk[j][r] * cache.x[j][c];
          gv[c] += dv[j][r] * cache.x[j][c];
        }
      }
      // dx_j += Wq^T dq_j + Wk^T dk_j + Wv^T dv_j
      for (std::size_t r = 0; r < dim; ++r) {
        const double* wq_row = enc.wq.a.data() + r * dim;
        const double* wk_row = enc.wk.a.data() + r * dim;
        const double* wv_row = enc.wv.a.data() + r * dim;
        for (std::size_t c = 0; c < dim; ++c) {
          dx[j][c] += wq_row[c] * dq[j][r] + wk_row[c] * dk[j][r] + wv_row[c] * dv[j][r];
        }
      }
    }
  }

  for (std::size_t j = 0; j < len; ++j) {
    double* erow = grad.embed.a.data() + static_cast<std::size_t>(cache.content[j]) * dim;
    double* prow = grad.pos.a.data() + cache.positions[j] * dim;
    for (std::size_t d = 0; d < dim; ++d) {
      erow[d] += dx[j][d];
      prow[d] += dx[j][d];
    }
  }
}

inline nn::Vec project(const NetworkParams& params, const nn::Vec& y) {
  return params.projector.forward(y);
}

inline nn::Vec predict(const NetworkParams& params, const nn::Vec& z) {
  if (!params.has_predictor) {
    throw ContractError("predict called on a target network (no predictor)");
  }
  return params.predictor.forward(z);
}

inline constexpr double kNormEpsilon = 1e-12;

// 2 - 2 cos(q, z). z is the stop-gradient branch and is treated as constant.
inline double byol_loss(const nn::Vec& q_of_z, const nn::Vec& z_target) {
  if (q_of_z.size() != z_target.size()) throw ContractError("byol_loss dimension mismatch");
  const double nq = nn::norm(q_of_z);
  const double nz = nn::norm(z_target);
  if (nq == 0.0 || nz == 0.0) throw ContractError("byol_loss on zero-norm vector");
  const double denom = std::max(nq, kNormEpsilon) * std::max(nz, kNormEpsilon);
  return 2.0 - 2.0 * nn::dot(q_of_z, z_target) / denom;
}

namespace detail {

// dL/dq for L = 2 - 2 q.z / (|q||z|).
inline nn::Vec byol_loss_grad(const nn::Vec& q, const nn::Vec& z) {
  const double nq = std::max(nn::norm(q), kNormEpsilon);
  const double nz = std::max(nn::norm(z), kNormEpsilon);
  const double cos = nn::dot(q, z) / (nq * nz);
  nn::Vec dq(q.size(), 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    dq[i] = -2.0 * (z[i] / (nq * nz) - cos * q[i] / (nq * nq));
  }
  return dq;
}

}  // namespace detail

// One directional term through full networks: online(v) vs target(v').
inline double directional_loss(const NetworkParams& online, const NetworkParams& target,
                               std::span<const ActivityId> v, std::span<const ActivityId> v_prime) {
  const nn::Vec p = predict(online, project(online, encode(online.enc, v)));
  const nn::Vec z = project(target, encode(target.enc, v_prime));
  return byol_loss(p, z);
}

// Symmetrized objective: each view is fed once to the online network and
// once to the target network.
inline double symmetric_loss(const NetworkParams& online, const NetworkParams& target,
                             std::span<const ActivityId> v, std::span<const ActivityId> v_prime) {
  return directional_loss(online, target, v, v_prime) +
         directional_loss(online, target, v_prime, v);
}

struct BackwardResult {
  NetworkParams grads;  // same shapes as the online network
  double mean_loss = 0.0;
};

namespace detail {

inline NetworkParams zeros_like(const NetworkParams& params) {
  NetworkParams z = params;
  auto refs = all_tensors(z);
  for (auto& ref : refs) std::fill(ref.data->begin(), ref.data->end(), 0.0);
  return z;
}

// Backprop of one directional loss term into the online gradients.
inline double directional_backward(const NetworkParams& online, const NetworkParams& target,
                                   std::span<const ActivityId> v,
                                   std::span<const ActivityId> v_prime, NetworkParams& grads) {
  EncodeCache cache;
  const nn::Vec y = encode_cached(online.enc, v, cache);
  nn::Vec proj_hidden;
  const nn::Vec z = online.projector.forward(y, proj_hidden);
  nn::Vec pred_hidden;
  const nn::Vec p = online.predictor.forward(z, pred_hidden);

  // target branch: constants under stop-gradient
  const nn::Vec z_target = target.projector.forward(encode(target.enc, v_prime));

  const double loss = byol_loss(p, z_target);
  const nn::Vec dp = byol_loss_grad(p, z_target);
  const nn::Vec dz = online.predictor.backward(z, pred_hidden, dp, grads.predictor);
  const nn::Vec dy = online.projector.backward(y, proj_hidden, dz, grads.projector);
  encode_backward(online.enc, cache, dy, grads.enc);
  return loss;
}

}  // namespace detail

// Analytic gradients of the mean symmetric loss with respect to the online
// parameters only; the target network contributes constants.
inline BackwardResult backward(const NetworkParams& online, const NetworkParams& target,
                               const std::vector<ViewPair>& batch) {
  if (batch.empty()) throw ContractError("backward on empty batch");
  BackwardResult result;
  result.grads = detail::zeros_like(online);
  double total = 0.0;
  for (const auto& pair : batch) {
    total += detail::directional_backward(online, target, pair.v, pair.v_prime, result.grads);
    total += detail::directional_backward(online, target, pair.v_prime, pair.v, result.grads);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& ref : all_tensors(result.grads)) {
    for (double& g : *ref.data) {
      g *= inv;
      if (!std::isfinite(g)) {
        throw TrainingError("non-finite gradient over a batch of " +
                            std::to_string(batch.size()) + " pairs");
      }
    }
  }
  result.mean_loss = total * inv;
  if (!std::isfinite(result.mean_loss)) throw TrainingError("non-finite loss");
  return result;
}

// xi <- tau * xi + (1 - tau) * theta over all shared tensors.
inline void ema_update(NetworkParams& xi, const NetworkParams& theta, double tau) {
  if (tau < 0.0 || tau >= 1.0) throw ContractError("ema_update requires tau in [0,1)");
  auto xi_refs = shared_tensors(xi);
  auto theta_refs = shared_tensors(const_cast<NetworkParams&>(theta));
  if (xi_refs.size() != theta_refs.size()) throw ContractError("ema_update shape mismatch");
  for (std::size_t i = 0; i < xi_refs.size(); ++i) {
    auto& x = *xi_refs[i].data;
    const auto& t = *theta_refs[i].data;
    if (x.size() != t.size()) throw ContractError("ema_update shape mismatch");
    for (std::size_t j = 0; j < x.size(); ++j) {
      x[j] = tau * x[j] + (1.0 - tau) * t[j];
    }
  }
}

inline void sgd_step(NetworkParams& params, const NetworkParams& grads, double learning_rate) {
  auto p_refs = all_tensors(params);
  auto g_refs = all_tensors(const_cast<NetworkParams&>(grads));
  if (p_refs.size() != g_refs.size()) throw ContractError("sgd_step shape mismatch");
  for (std::size_t i = 0; i < p_refs.size(); ++i) {
    auto& p = *p_refs[i].data;
    const auto& g = *g_refs[i].data;
    for (std::size_t j = 0; j < p.size(); ++j) p[j] -= learning_rate * g[j];
  }
}

struct CollapseReport {
  // Mean per-dimension standard deviation of L2-normalized online
  // projections; near 1/sqrt(dim) when representations are spread out, 0 at
  // full collapse.
  double embedding_std = 0.0;
};

inline CollapseReport collapse_metric(const NetworkParams& params,
                                      const std::vector<std::vector<ActivityId>>& probe) {
  std::set<std::vector<ActivityId>> distinct(probe.begin(), probe.end());
  if (distinct.size() < 2) {
    throw ContractError("collapse_metric needs at least 2 distinct probe sequences");
  }
  std::vector<nn::Vec> zs;
  zs.reserve(probe.size());
  for (const auto& seq : probe) {
    nn::Vec z = project(params, encode(params.enc, seq));
    const double n = std::max(nn::norm(z), kNormEpsilon);
    for (double& v : z) v /= n;
    zs.push_back(std::move(z));
  }
  const std::size_t dim = zs.front().size();
  const double inv_n = 1.0 / static_cast<double>(zs.size());
  double total_std = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0.0;
    for (const auto& z : zs) mean += z[d];
    mean *= inv_n;
    double var = 0.0;
    for (const auto& z : zs) var += (z[d] - mean) * (z[d] - mean);
    var *= inv_n;
    total_std += std::sqrt(var);
  }
  CollapseReport report;
  report.embedding_std = total_std / static_cast<double>(dim);
  return report;
}

struct TrainConfig {
  double tau = 0.99;
  double learning_rate = 0.05;
  std::size_t batch_size = 64;
  std::size_t epochs = 10;
  std::uint64_t seed = 7;
  double collapse_floor = 0.01;
  int collapse_patience = 3;

  void validate() const {
    if (tau < 0.0 || tau >= 1.0) throw ConfigError("tau must lie in [0,1)");
    if (learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
    if (batch_size < 1 || epochs < 1) throw ConfigError("batch size and epochs must be >= 1");
  }
};

struct EpochStats {
  double mean_loss = 0.0;
  double collapse_std = 0.0;
};

struct PretrainResult {
  NetworkParams params;
  std::vector<EpochStats> history;
  bool collapse_warning = false;
  std::size_t skipped_examples = 0;
  std::size_t view_pairs = 0;
  std::size_t fallback_pairs = 0;
  std::size_t identity_views = 0;  // views equal to their original; expected 0
};

namespace detail {

inline std::vector<ActivityId> clip_tail(std::vector<ActivityId> seq, std::size_t max_len) {
  if (seq.size() > max_len) {
    seq.erase(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(seq.size() - max_len));
  }
  return seq;
}

template <typename T>
void shuffle_in_place(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.index(i)]);
  }
}

// rng stream namespaces for the deterministic training schedule
inline constexpr std::uint64_t kInitStream = 1ULL << 62;
inline constexpr std::uint64_t kPairStream = 1ULL << 63;

}  // namespace detail

// Self-supervised pretraining: per step, a batch of prefixes is turned into
// distinct view pairs, padded, pushed through both branches, and the online
// parameters take one SGD step on the mean symmetric loss before the EMA
// target update. Per-example rngs are derived from the master seed and the
// (epoch, example) pair, so the trajectory is reproducible and independent
// of any batching-internal evaluation order.
inline PretrainResult pretrain(const std::vector<std::vector<ActivityId>>& prefixes,
                               const AugmentationPool& pool, const ActivityVocab& vocab,
                               const EncoderConfig& encoder_cfg, const TrainConfig& train_cfg) {
  encoder_cfg.validate();
  train_cfg.validate();
  if (encoder_cfg.vocab_size != vocab.size()) {
    throw ConfigError("encoder vocab_size does not match the vocabulary");
  }
  if (prefixes.empty()) throw ContractError("pretrain without prefixes");

  const Rng master(train_cfg.seed);
  Rng init_rng = master.fork(detail::kInitStream);
  PretrainResult result;
  result.params = init_network(encoder_cfg, init_rng);
  NetworkParams target = make_target(result.params);

  // fixed probe batch for the collapse metric
  std::vector<std::vector<ActivityId>> probe;
  {
    std::set<std::vector<ActivityId>> seen;
    for (const auto& p : prefixes) {
      auto clipped = detail::clip_tail(p, encoder_cfg.max_len);
      if (seen.insert(clipped).second) probe.push_back(std::move(clipped));
      if (probe.size() >= 64) break;
    }
  }
  const bool can_probe = probe.size() >= 2;

  int below_floor_streak = 0;
  for (std::size_t epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(prefixes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng = master.fork(epoch);
    detail::shuffle_in_place(order, shuffle_rng);

    double epoch_loss = 0.0;
    std::size_t epoch_pairs = 0;
    for (std::size_t start = 0; start < order.size(); start += train_cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + train_cfg.batch_size);
      std::vector<ViewPair> batch;
      batch.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t idx = order[i];
        const auto x = detail::clip_tail(prefixes[idx], encoder_cfg.max_len);
        Rng pair_rng =
            master.fork(detail::kPairStream | (epoch << 32) | static_cast<std::uint32_t>(idx));
        PairStats stats;
        std::vector<Transformation> usable = select_applicable(x, pool, vocab);
        if (usable.empty()) {
          ++result.skipped_examples;
          continue;
        }
        ViewPair pair = generate_view_pair(x, pool, vocab, pair_rng, 30, &stats);
        pair.v = detail::clip_tail(std::move(pair.v), encoder_cfg.max_len);
        pair.v_prime = detail::clip_tail(std::move(pair.v_prime), encoder_cfg.max_len);
        if (pair.v == pair.v_prime) {
          // can only happen if clipping collided; drop rather than feed a
          // degenerate pair
          ++result.skipped_examples;
          continue;
        }
        if (stats.used_fallback) ++result.fallback_pairs;
        if (stats.view_equals_original) ++result.identity_views;
        batch.push_back(std::move(pair));
      }
      if (batch.empty()) continue;
      auto padded = pad_batch(std::move(batch));
      BackwardResult back = backward(result.params, target, padded);
      sgd_step(result.params, back.grads, train_cfg.learning_rate);
      ema_update(target, result.params, train_cfg.tau);
      epoch_loss += back.mean_loss * static_cast<double>(padded.size());
      epoch_pairs += padded.size();
      result.view_pairs += padded.size();
    }

    EpochStats stats;
    stats.mean_loss = epoch_pairs > 0 ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0;
    stats.collapse_std = can_probe ? collapse_metric(result.params, probe).embedding_std : 0.0;
    result.history.push_back(stats);

    if (can_probe && stats.collapse_std < train_cfg.collapse_floor) {
      if (++below_floor_streak >= train_cfg.collapse_patience) result.collapse_warning = true;
    } else {
      below_floor_streak = 0;
    }
  }
  return result;
}

// --- Fine-tuning -------------------------------------------------------------

struct ClassifierParams {
  EncoderParams enc;
  nn::Mat head_w;  // num_classes x embed_dim
  nn::Vec head_b;
};

struct FinetuneResult {
  ClassifierParams params;  // best validation epoch when a validation set is given
  std::vector<double> epoch_loss;
  std::vector<double> validation_accuracy;  // empty when no validation set given
  std::size_t best_epoch = 0;
};

inline nn::Vec classifier_logits(const ClassifierParams& params, std::span<const ActivityId> seq) {
  return nn::affine(params.head_w, encode(params.enc, seq), params.head_b);
}

inline int predict_class(const ClassifierParams& params, std::span<const ActivityId> seq) {
  const nn::Vec logits = classifier_logits(params, seq);
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

struct SupervisedExample {
  std::vector<ActivityId> sequence;
  int label = 0;
};

inline double evaluate_classifier(const ClassifierParams& params,
                                  const std::vector<SupervisedExample>& examples) {
  if (examples.empty()) throw ContractError("evaluate_classifier on empty set");
  std::size_t hits = 0;
  for (const auto& ex : examples) {
    if (predict_class(params, ex.sequence) == ex.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

namespace detail {

inline nn::Vec softmax(const nn::Vec& logits) {
  nn::Vec out(logits.size());
  double max_logit = logits[0];
  for (double v : logits) max_logit = std::max(max_logit, v);
  double denom = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    denom += out[i];
  }
  for (double& v : out) v /= denom;
  return out;
}

}  // namespace detail

// Natural-log cross-entropy of a softmax head; uniform logits give ln(C).
inline double cross_entropy(const nn::Vec& logits, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw ContractError("cross_entropy label out of range");
  }
  const nn::Vec probs = detail::softmax(logits);
  return -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-300));
}

// Supervised training of encoder + softmax head. When `pretrained` is given,
// the encoder starts from those weights (projection and prediction heads are
// discarded); otherwise it is randomly initialized. The whole model trains
// end to end; with a validation set, the returned parameters are the
// snapshot from the best-validation epoch.
inline FinetuneResult finetune(const EncoderParams* pretrained, std::size_t num_classes,
                               const std::vector<SupervisedExample>& train,
                               const std::vector<SupervisedExample>& validation,
                               const EncoderConfig& encoder_cfg, const TrainConfig& train_cfg) {
  encoder_cfg.validate();
  train_cfg.validate();
  if (train.empty()) throw ContractError("finetune without training examples");
  if (num_classes < 2) throw TrainingError("finetune needs at least 2 classes");
  {
    std::set<int> labels;
    for (const auto& ex : train) labels.insert(ex.label);
    if (labels.size() < 2) throw TrainingError("training labels form a single class");
  }

  const Rng master(train_cfg.seed);
  Rng init_rng = master.fork(detail::kInitStream);
  FinetuneResult result;
  if (pretrained) {
    result.params.enc = *pretrained;
  } else {
    result.params.enc = init_encoder(encoder_cfg, init_rng);
  }
  result.params.head_w = nn::Mat(num_classes, encoder_cfg.embed_dim);
  result.params.head_b = nn::Vec(num_classes, 0.0);
  Rng head_rng = master.fork(detail::kInitStream + 1);
  nn::fill_uniform(result.params.head_w, head_rng,
                   1.0 / std::sqrt(static_cast<double>(encoder_cfg.embed_dim)));

  EncoderParams grad_enc;
  ClassifierParams best_params;
  double best_val = -1.0;
  for (std::size_t epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng = master.fork(epoch);
    detail::shuffle_in_place(order, shuffle_rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += train_cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + train_cfg.batch_size);

      // fresh zero gradients
      grad_enc = result.params.enc;
      for (auto& ref : [&] {
             std::vector<detail::TensorRef> refs;
             detail::collect(grad_enc, refs);
             return refs;
           }()) {
        std::fill(ref.data->begin(), ref.data->end(), 0.0);
      }
      nn::Mat grad_w(result.params.head_w.rows, result.params.head_w.cols);
      nn::Vec grad_b(result.params.head_b.size(), 0.0);

      const double inv = 1.0 / static_cast<double>(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        const auto& ex = train[order[i]];
        const auto seq = detail::clip_tail(ex.sequence, encoder_cfg.max_len);
        detail::EncodeCache cache;
        const nn::Vec y = encode_cached(result.params.enc, seq, cache);
        const nn::Vec logits = nn::affine(result.params.head_w, y, result.params.head_b);
        epoch_loss += cross_entropy(logits, ex.label);

        nn::Vec dlogits = detail::softmax(logits);
        dlogits[static_cast<std::size_t>(ex.label)] -= 1.0;
        for (double& v : dlogits) v *= inv;
        const nn::Vec dy = nn::affine_backward(result.params.head_w, y, dlogits, grad_w, grad_b);
        encode_backward(result.params.enc, cache, dy, grad_enc);
      }

      // SGD on encoder + head
      auto apply = [&](std::vector<double>& p, const std::vector<double>& g) {
        for (std::size_t k = 0; k < p.size(); ++k) p[k] -= train_cfg.learning_rate * g[k];
      };
      std::vector<detail::TensorRef> p_refs, g_refs;
      detail::collect(result.params.enc, p_refs);
      detail::collect(grad_enc, g_refs);
      for (std::size_t k = 0; k < p_refs.size(); ++k) apply(*p_refs[k].data, *g_refs[k].data);
      apply(result.params.head_w.a, grad_w.a);
      apply(result.params.head_b, grad_b);
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(train.size()));
    if (!validation.empty()) {
      const double acc = evaluate_classifier(result.params, validation);
      result.validation_accuracy.push_back(acc);
      if (acc > best_val) {
        best_val = acc;
        best_params = result.params;
        result.best_epoch = epoch;
      }
    }
  }
  if (!validation.empty()) result.params = std::move(best_params);
  return result;
}

}  // namespace siamaug
