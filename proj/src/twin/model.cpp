#include "slicesim/twin/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slicesim/core/rng.hpp"
#include "slicesim/kernels/kernels.hpp"

namespace slicesim::twin {

namespace {

double sign_subgradient(double err) {
  if (err > 0.0) return 1.0;
  if (err < 0.0) return -1.0;
  return 0.0;
}

std::vector<nn::LayerSpec> extractor_layers(const TwinConfig& cfg) {
  return {nn::LayerSpec::conv1d(1, cfg.conv_hidden, cfg.conv_kernel),
          nn::LayerSpec::relu(),
          nn::LayerSpec::conv1d(cfg.conv_hidden, cfg.features, cfg.conv_kernel)};
}

std::vector<nn::LayerSpec> head_layers(const TwinConfig& cfg) {
  return {nn::LayerSpec::dense(cfg.out_dim, cfg.head_hidden), nn::LayerSpec::relu(),
          nn::LayerSpec::dense(cfg.head_hidden, 1)};
}

}  // namespace

void TwinConfig::validate() const {
  if (nodes < 2 || window < 1 || conv_kernel < 1 || conv_hidden < 1 ||
      features < 1 || embed < 1 || graph_dim < 1 || attn_dim < 1 ||
      out_dim < 1 || head_hidden < 1)
    throw std::invalid_argument("twin config dimensions must be positive");
  if (window < conv_kernel)
    throw std::invalid_argument("twin window shorter than conv kernel");
  if (beta <= 0.0) throw std::invalid_argument("twin beta must be > 0");
  if (attn_leaky_slope <= 0.0 || learning_rate < 0.0)
    throw std::invalid_argument("twin config rates must be positive");
}

TwinModel::TwinModel(const TwinConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      extractor_(extractor_layers(cfg), cfg.window, mix_seed(seed, 0xE47)),
      head_(head_layers(cfg), cfg.out_dim, mix_seed(seed, 0x4EAD)),
      params_(),
      opt_(cfg.optimizer, cfg.learning_rate) {
  cfg_.validate();
  const std::size_t cf = cfg_.embed + cfg_.features;
  params_ = nn::ParamVector(nn::ParamLayout::build({
      {"extractor", {extractor_.params().size()}},
      {"embed", {cfg_.nodes, cfg_.embed}},
      {"theta1", {cf, cfg_.graph_dim}},
      {"theta2", {cf, cfg_.graph_dim}},
      {"attn:Wz", {cfg_.attn_dim, cfg_.features}},
      {"attn:q", {2 * cfg_.attn_dim}},
      {"out:Ws", {cfg_.out_dim, cfg_.features}},
      {"head", {head_.params().size()}},
  }));

  std::copy_n(extractor_.params().data(), extractor_.params().size(),
              params_.block("extractor").data());
  std::copy_n(head_.params().data(), head_.params().size(),
              params_.block("head").data());
  // Zero the head's output layer and give it a small positive bias so the
  // rectified output starts in its linear region regardless of seed; a head
  // whose raw output is negative everywhere at init gets zero gradient from
  // the clip and would never leave that state.
  {
    std::span<double> head = params_.block("head");
    const std::size_t out_w = static_cast<std::size_t>(cfg_.head_hidden) + 1;
    for (std::size_t i = head.size() - out_w; i < head.size(); ++i) head[i] = 0.0;
    head.back() = 0.5;
  }
  sync_nets();

  Rng rng(mix_seed(seed, 0x741));
  auto init_block = [&](const std::string& id, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& w : params_.block(id)) w = rng.uniform(-bound, bound);
  };
  init_block("embed", cfg_.embed);
  init_block("theta1", cf);
  init_block("theta2", cf);
  init_block("attn:Wz", cfg_.features);
  init_block("attn:q", 2 * cfg_.attn_dim);
  init_block("out:Ws", cfg_.features);
}

void TwinModel::import_params(const nn::ParamVector& p) {
  if (!params_.same_layout(p))
    throw std::invalid_argument("twin import: layout mismatch");
  params_ = p;
  sync_nets();
}

void TwinModel::sync_nets() {
  nn::ParamVector ext(extractor_.layout());
  std::copy_n(params_.block("extractor").data(), ext.size(), ext.data());
  extractor_.set_params(ext);
  nn::ParamVector head(head_.layout());
  std::copy_n(params_.block("head").data(), head.size(), head.data());
  head_.set_params(head);
}

std::vector<double> TwinModel::extract_features(
    std::span<const double> window, std::vector<nn::ForwardCache>* caches) const {
  const std::size_t v = cfg_.nodes, l = cfg_.window, f = cfg_.features;
  if (window.size() != v * l)
    throw std::invalid_argument("extract_features: window must be V x L");

  std::vector<double> feats(v * f, 0.0);
  if (caches) caches->assign(v, {});
  for (std::size_t z = 0; z < v; ++z) {
    nn::ForwardCache local;
    nn::ForwardCache& cache = caches ? (*caches)[z] : local;
    const std::vector<double> out =
        extractor_.forward(window.subspan(z * l, l), cache);
    // Temporal mean pool: F x L down to F per node.
    for (std::size_t i = 0; i < f; ++i) {
      double acc = 0.0;
      for (std::size_t t = 0; t < l; ++t) acc += out[i * l + t];
      feats[z * f + i] = acc / static_cast<double>(l);
    }
  }
  return feats;
}

TwinForward TwinModel::forward(std::span<const double> window) const {
  TwinForward fwd;
  fwd.features = extract_features(window, &fwd.ext_caches);
  fwd.graph = learn_graph(fwd.features, cfg_.nodes, cfg_.features,
                          params_.block("embed"), cfg_.embed,
                          params_.block("theta1"), params_.block("theta2"),
                          cfg_.graph_dim, cfg_.beta);
  fwd.attn = gat_attention(fwd.features, cfg_.nodes, cfg_.features, fwd.graph,
                           params_.block("attn:Wz"), cfg_.attn_dim,
                           params_.block("attn:q"), cfg_.attn_leaky_slope);

  const auto& k = kernels::active();
  const std::size_t v = cfg_.nodes, f = cfg_.features, h = cfg_.out_dim;
  std::span<const double> ws = params_.block("out:Ws");
  fwd.s_proj.assign(v * h, 0.0);
  for (std::size_t n = 0; n < v; ++n)
    for (std::size_t i = 0; i < h; ++i)
      fwd.s_proj[n * h + i] =
          k.dot(ws.data() + i * f, fwd.features.data() + n * f, f);

  fwd.mixed.assign(v * h, 0.0);
  fwd.xprime.assign(v * h, 0.0);
  for (std::size_t z = 0; z < v; ++z) {
    for (std::size_t n = 0; n < v; ++n) {
      const double a = fwd.attn.coeff(z, n);
      if (a != 0.0) k.axpy(a, fwd.s_proj.data() + n * h, fwd.mixed.data() + z * h, h);
    }
    for (std::size_t i = 0; i < h; ++i)
      fwd.xprime[z * h + i] = 1.0 / (1.0 + std::exp(-fwd.mixed[z * h + i]));
  }

  if (cfg_.head_mode == HeadMode::Linear) {
    fwd.pooled.assign(h, 0.0);
    for (std::size_t z = 0; z < v; ++z)
      k.axpy(1.0, fwd.xprime.data() + z * h, fwd.pooled.data(), h);
    const std::vector<double> y = head_.forward(fwd.pooled, fwd.head_cache);
    fwd.y_raw = y[0];
    fwd.d_hat = std::max(0.0, fwd.y_raw);
  } else {
    fwd.node_head_caches.assign(v, {});
    fwd.node_scores.resize(v);
    for (std::size_t z = 0; z < v; ++z)
      fwd.node_scores[z] = head_.forward(
          std::span<const double>(fwd.xprime).subspan(z * h, h),
          fwd.node_head_caches[z])[0];
    const double mx = *std::max_element(fwd.node_scores.begin(), fwd.node_scores.end());
    fwd.shares.resize(v);
    double denom = 0.0;
    for (std::size_t z = 0; z < v; ++z) {
      fwd.shares[z] = std::exp(fwd.node_scores[z] - mx);
      denom += fwd.shares[z];
    }
    for (double& s : fwd.shares) s /= denom;
  }
  return fwd;
}

double TwinModel::predict(std::span<const double> window) const {
  if (cfg_.head_mode != HeadMode::Linear)
    throw std::logic_error("predict: scalar forecast needs the linear head");
  return forward(window).d_hat;
}

std::vector<double> TwinModel::predict_shares(std::span<const double> window) const {
  if (cfg_.head_mode != HeadMode::Softmax)
    throw std::logic_error("predict_shares: needs the softmax head");
  return forward(window).shares;
}

void TwinModel::backward_features(const TwinForward& fwd,
                                  std::span<const double> d_xprime,
                                  nn::ParamVector& grad) const {
  const auto& k = kernels::active();
  const std::size_t v = cfg_.nodes, f = cfg_.features, h = cfg_.out_dim,
                    d = cfg_.attn_dim, l = cfg_.window;
  std::span<const double> ws = params_.block("out:Ws");
  std::span<const double> wz = params_.block("attn:Wz");
  std::span<const double> q = params_.block("attn:q");

  // Sigmoid, then split into the mixing weights and the projected features.
  std::vector<double> d_mixed(v * h);
  for (std::size_t i = 0; i < v * h; ++i)
    d_mixed[i] = d_xprime[i] * fwd.xprime[i] * (1.0 - fwd.xprime[i]);

  std::vector<double> d_sproj(v * h, 0.0);
  std::vector<double> d_alpha(v * v, 0.0);
  for (std::size_t z = 0; z < v; ++z)
    for (std::size_t n = 0; n < v; ++n) {
      const double a = fwd.attn.coeff(z, n);
      if (a == 0.0) continue;
      d_alpha[z * v + n] =
          k.dot(d_mixed.data() + z * h, fwd.s_proj.data() + n * h, h);
      k.axpy(a, d_mixed.data() + z * h, d_sproj.data() + n * h, h);
    }

  // s_proj = Ws b_n.
  std::span<double> g_ws = grad.block("out:Ws");
  std::vector<double> d_feat(v * f, 0.0);
  for (std::size_t n = 0; n < v; ++n)
    for (std::size_t i = 0; i < h; ++i) {
      const double g = d_sproj[n * h + i];
      if (g == 0.0) continue;
      k.axpy(g, fwd.features.data() + n * f, g_ws.data() + i * f, f);
      k.axpy(g, ws.data() + i * f, d_feat.data() + n * f, f);
    }

  // Softmax over each neighborhood column, then LeakyReLU and the bilinear
  // attention score q . [u_z || u_n].
  std::vector<double> d_u(v * d, 0.0);
  std::span<double> g_q = grad.block("attn:q");
  for (std::size_t n = 0; n < v; ++n) {
    const std::vector<std::size_t>& nv = fwd.attn.neighbors[n];
    double inner = 0.0;
    for (std::size_t z : nv) inner += fwd.attn.coeff(z, n) * d_alpha[z * v + n];
    for (std::size_t z : nv) {
      const double d_e =
          fwd.attn.coeff(z, n) * (d_alpha[z * v + n] - inner);
      const double pre = fwd.attn.pre[z * v + n];
      const double d_raw = d_e * (pre > 0.0 ? 1.0 : cfg_.attn_leaky_slope);
      if (d_raw == 0.0) continue;
      k.axpy(d_raw, fwd.attn.u.data() + z * d, g_q.data(), d);
      k.axpy(d_raw, fwd.attn.u.data() + n * d, g_q.data() + d, d);
      k.axpy(d_raw, q.data(), d_u.data() + z * d, d);
      k.axpy(d_raw, q.data() + d, d_u.data() + n * d, d);
    }
  }

  // u_z = Wz b_z.
  std::span<double> g_wz = grad.block("attn:Wz");
  for (std::size_t z = 0; z < v; ++z)
    for (std::size_t i = 0; i < d; ++i) {
      const double g = d_u[z * d + i];
      if (g == 0.0) continue;
      k.axpy(g, fwd.features.data() + z * f, g_wz.data() + i * f, f);
      k.axpy(g, wz.data() + i * f, d_feat.data() + z * f, f);
    }

  // Mean pool back to F x L, then the shared extractor. The adjacency only
  // selects neighborhoods, so no gradient reaches the graph parameters.
  nn::ParamVector ext_grad(extractor_.layout());
  std::vector<double> upstream(f * l);
  for (std::size_t z = 0; z < v; ++z) {
    for (std::size_t i = 0; i < f; ++i) {
      const double g = d_feat[z * f + i] / static_cast<double>(l);
      for (std::size_t t = 0; t < l; ++t) upstream[i * l + t] = g;
    }
    extractor_.backward(upstream, fwd.ext_caches[z], ext_grad);
  }
  k.axpy(1.0, ext_grad.data(), grad.block("extractor").data(), ext_grad.size());
}

nn::ParamVector TwinModel::gradient(const TwinForward& fwd,
                                    double upstream_dhat) const {
  if (cfg_.head_mode != HeadMode::Linear)
    throw std::logic_error("gradient: linear head only");
  nn::ParamVector grad(params_.layout_ptr());
  const double d_y = fwd.y_raw > 0.0 ? upstream_dhat : 0.0;
  nn::ParamVector head_grad(head_.layout());
  std::vector<double> d_pooled =
      head_.backward(std::vector<double>{d_y}, fwd.head_cache, head_grad);
  kernels::active().axpy(1.0, head_grad.data(), grad.block("head").data(),
                         head_grad.size());

  const std::size_t v = cfg_.nodes, h = cfg_.out_dim;
  std::vector<double> d_xprime(v * h);
  for (std::size_t z = 0; z < v; ++z)
    std::copy_n(d_pooled.data(), h, d_xprime.data() + z * h);
  backward_features(fwd, d_xprime, grad);
  return grad;
}

double TwinModel::train_step(std::span<const double> window, double target) {
  if (cfg_.head_mode != HeadMode::Linear)
    throw std::logic_error("train_step: linear head only");
  TwinForward fwd = forward(window);
  const double loss = std::abs(fwd.d_hat - target);
  if (!std::isfinite(loss))
    throw std::runtime_error("twin loss is not finite (prediction " +
                             std::to_string(fwd.d_hat) + ", target " +
                             std::to_string(target) + ")");
  nn::ParamVector grad = gradient(fwd, sign_subgradient(fwd.d_hat - target));
  opt_.step(params_, grad);
  sync_nets();
  return loss;
}

double TwinModel::train_step_nodes(std::span<const double> window,
                                   std::span<const double> node_targets) {
  if (cfg_.head_mode != HeadMode::Softmax)
    throw std::logic_error("train_step_nodes: softmax head only");
  const std::size_t v = cfg_.nodes, h = cfg_.out_dim;
  if (node_targets.size() != v)
    throw std::invalid_argument("train_step_nodes: one target per node");

  TwinForward fwd = forward(window);
  double total = 0.0;
  for (double t : node_targets) total += t;

  double loss = 0.0;
  std::vector<double> d_share(v);
  for (std::size_t z = 0; z < v; ++z) {
    const double pred = fwd.shares[z] * total;
    loss += std::abs(pred - node_targets[z]);
    d_share[z] = sign_subgradient(pred - node_targets[z]) * total /
                 static_cast<double>(v);
  }
  loss /= static_cast<double>(v);
  if (!std::isfinite(loss))
    throw std::runtime_error("twin node loss is not finite");

  double inner = 0.0;
  for (std::size_t z = 0; z < v; ++z) inner += d_share[z] * fwd.shares[z];

  nn::ParamVector grad(params_.layout_ptr());
  nn::ParamVector head_grad(head_.layout());
  std::vector<double> d_xprime(v * h, 0.0);
  for (std::size_t z = 0; z < v; ++z) {
    const double d_score = fwd.shares[z] * (d_share[z] - inner);
    head_grad.fill(0.0);
    std::vector<double> dx = head_.backward(std::vector<double>{d_score},
                                            fwd.node_head_caches[z], head_grad);
    kernels::active().axpy(1.0, head_grad.data(), grad.block("head").data(),
                           head_grad.size());
    std::copy_n(dx.data(), h, d_xprime.data() + z * h);
  }
  backward_features(fwd, d_xprime, grad);
  opt_.step(params_, grad);
  sync_nets();
  return loss;
}

}  // namespace slicesim::twin
