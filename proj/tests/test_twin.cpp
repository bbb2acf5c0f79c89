#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "slicesim/core/rng.hpp"
#include "slicesim/twin/gat.hpp"
#include "slicesim/twin/graph.hpp"
#include "slicesim/twin/model.hpp"

using namespace slicesim::twin;
namespace nn = slicesim::nn;
using slicesim::Rng;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -1.0,
                               double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

TwinConfig small_config() {
  TwinConfig cfg;
  cfg.nodes = 4;
  cfg.window = 8;
  cfg.conv_kernel = 3;
  cfg.conv_hidden = 4;
  cfg.features = 6;
  cfg.embed = 5;
  cfg.graph_dim = 5;
  cfg.attn_dim = 6;
  cfg.out_dim = 6;
  cfg.head_hidden = 8;
  return cfg;
}

}  // namespace

TEST_CASE("learned graph scores are antisymmetric with one-directional support") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    Rng rng(seed);
    const std::size_t v = 2 + seed % 7, f = 5, e = 4, r = 4;
    auto b = random_vec(rng, v * f);
    auto em = random_vec(rng, v * e);
    auto t1 = random_vec(rng, (e + f) * r);
    auto t2 = random_vec(rng, (e + f) * r);
    GraphSnapshot snap = learn_graph(b, v, f, em, e, t1, t2, r, 1.5);
    snap.validate();

    bool any_edge = false;
    for (std::size_t i = 0; i < v; ++i) {
      CHECK(snap.score(i, i) == 0.0);
      CHECK(snap.adj(i, i) == 0.0);
      for (std::size_t j = 0; j < v; ++j) {
        CHECK(snap.score(i, j) == -snap.score(j, i));
        CHECK(std::min(snap.adj(i, j), snap.adj(j, i)) == 0.0);
        CHECK(snap.adj(i, j) >= 0.0);
        CHECK(snap.adj(i, j) <= 1.0);
        if (snap.adj(i, j) > 0.0) any_edge = true;
      }
    }
    CHECK(any_edge);
  }
}

TEST_CASE("identical projections collapse the graph to zero") {
  Rng rng(3);
  const std::size_t v = 5, f = 4, e = 3, r = 4;
  auto b = random_vec(rng, v * f);
  auto em = random_vec(rng, v * e);
  auto theta = random_vec(rng, (e + f) * r);
  GraphSnapshot snap = learn_graph(b, v, f, em, e, theta, theta, r, 2.0);
  for (double x : snap.s) CHECK(x == 0.0);
  for (double x : snap.a) CHECK(x == 0.0);
}

TEST_CASE("attention over a singleton neighborhood is 1") {
  const std::size_t v = 3, f = 4, d = 4;
  Rng rng(8);
  auto x = random_vec(rng, v * f);
  auto wz = random_vec(rng, d * f);
  auto q = random_vec(rng, 2 * d);
  GraphSnapshot empty;
  empty.nodes = v;
  empty.a.assign(v * v, 0.0);
  empty.s.assign(v * v, 0.0);
  AttentionResult res = gat_attention(x, v, f, empty, wz, d, q, 0.2);
  for (std::size_t n = 0; n < v; ++n) {
    REQUIRE(res.neighbors[n].size() == 1);
    CHECK(res.neighbors[n][0] == n);
    CHECK(res.coeff(n, n) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("identical features give uniform attention") {
  const std::size_t v = 4, f = 3, d = 5;
  std::vector<double> x(v * f);
  for (std::size_t n = 0; n < v; ++n)
    for (std::size_t i = 0; i < f; ++i) x[n * f + i] = 0.3 * (i + 1);
  Rng rng(5);
  auto wz = random_vec(rng, d * f);
  auto q = random_vec(rng, 2 * d);

  GraphSnapshot g;
  g.nodes = v;
  g.a.assign(v * v, 0.0);
  g.s.assign(v * v, 0.0);
  g.a[0 * v + 1] = 0.4;
  g.a[0 * v + 2] = 0.7;
  g.a[3 * v + 1] = 0.2;
  AttentionResult res = gat_attention(x, v, f, g, wz, d, q, 0.2);
  for (std::size_t n = 0; n < v; ++n) {
    const double uniform = 1.0 / static_cast<double>(res.neighbors[n].size());
    for (std::size_t z : res.neighbors[n])
      CHECK(res.coeff(z, n) == doctest::Approx(uniform).epsilon(1e-12));
  }
  CHECK(res.neighbors[0].size() == 3);
}

TEST_CASE("attention columns sum to one over each neighborhood") {
  Rng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t v = 6, f = 5, e = 4, r = 4, d = 5;
    auto b = random_vec(rng, v * f);
    auto em = random_vec(rng, v * e);
    auto t1 = random_vec(rng, (e + f) * r);
    auto t2 = random_vec(rng, (e + f) * r);
    GraphSnapshot g = learn_graph(b, v, f, em, e, t1, t2, r, 1.0);
    auto wz = random_vec(rng, d * f);
    auto q = random_vec(rng, 2 * d);
    AttentionResult res = gat_attention(b, v, f, g, wz, d, q, 0.2);
    for (std::size_t n = 0; n < v; ++n) {
      double sum = 0.0;
      for (std::size_t z = 0; z < v; ++z) sum += res.coeff(z, n);
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("gat output on uniform attention and equal features") {
  const std::size_t v = 3, f = 4, h = 5;
  std::vector<double> x(v * f);
  for (std::size_t n = 0; n < v; ++n)
    for (std::size_t i = 0; i < f; ++i) x[n * f + i] = 0.1 * (i + 2);
  Rng rng(12);
  auto ws = random_vec(rng, h * f);
  std::vector<double> alpha(v * v, 1.0 / v);
  std::vector<double> out = gat_output(x, v, f, alpha, ws, h);
  for (std::size_t n = 0; n < v; ++n)
    for (std::size_t i = 0; i < h; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < f; ++j) dot += ws[i * f + j] * x[j];
      CHECK(out[n * h + i] == doctest::Approx(1.0 / (1.0 + std::exp(-dot))).epsilon(1e-12));
      CHECK(out[n * h + i] > 0.0);
      CHECK(out[n * h + i] < 1.0);
    }

  std::vector<double> zero_ws(h * f, 0.0);
  std::vector<double> half = gat_output(x, v, f, alpha, zero_ws, h);
  for (double o : half) CHECK(o == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("feature extraction is permutation equivariant") {
  TwinConfig cfg = small_config();
  TwinModel model(cfg, 77);
  Rng rng(9);
  auto window = random_vec(rng, cfg.nodes * cfg.window, 0.0, 1.0);
  auto feats = model.extract_features(window);

  const std::vector<std::size_t> perm{2, 0, 3, 1};
  std::vector<double> permuted(window.size());
  for (std::size_t n = 0; n < cfg.nodes; ++n)
    std::copy_n(window.data() + perm[n] * cfg.window, cfg.window,
                permuted.data() + n * cfg.window);
  auto permuted_feats = model.extract_features(permuted);
  for (std::size_t n = 0; n < cfg.nodes; ++n)
    for (std::size_t i = 0; i < cfg.features; ++i)
      CHECK(permuted_feats[n * cfg.features + i] ==
            feats[perm[n] * cfg.features + i]);
}

TEST_CASE("identical node series give identical feature rows") {
  TwinConfig cfg = small_config();
  TwinModel model(cfg, 42);
  std::vector<double> window(cfg.nodes * cfg.window);
  for (std::size_t n = 0; n < cfg.nodes; ++n)
    for (std::size_t t = 0; t < cfg.window; ++t)
      window[n * cfg.window + t] = 0.25 + 0.1 * std::sin(0.7 * t);
  auto feats = model.extract_features(window);
  for (std::size_t n = 1; n < cfg.nodes; ++n)
    for (std::size_t i = 0; i < cfg.features; ++i)
      CHECK(feats[n * cfg.features + i] == feats[0 * cfg.features + i]);
  for (double f : feats) CHECK(std::isfinite(f));
  CHECK(feats.size() == cfg.nodes * cfg.features);
}

TEST_CASE("window shorter than the kernel is rejected") {
  TwinConfig cfg = small_config();
  cfg.window = 2;
  cfg.conv_kernel = 3;
  CHECK_THROWS_AS(TwinModel(cfg, 1), std::invalid_argument);
}

TEST_CASE("end-to-end twin gradient matches finite differences") {
  TwinConfig cfg = small_config();
  TwinModel model(cfg, 2029);
  Rng rng(55);
  auto window = random_vec(rng, cfg.nodes * cfg.window, 0.05, 0.95);

  // Jitter every parameter off its init point so no block sits at an exact
  // zero (the output layer starts zeroed) and the whole path carries gradient.
  nn::ParamVector jittered = model.params();
  Rng jitter(91);
  for (std::size_t i = 0; i < jittered.size(); ++i)
    jittered[i] += jitter.uniform(-0.05, 0.05);
  model.import_params(jittered);

  TwinForward fwd = model.forward(window);
  REQUIRE(fwd.d_hat > 0.0);
  // The finite-difference step must not flip any edge on or off, so demand
  // a margin on the learned scores.
  double min_score = 1.0;
  for (double s : fwd.graph.s)
    if (s != 0.0) min_score = std::min(min_score, std::abs(s));
  REQUIRE(min_score > 1e-3);

  nn::ParamVector analytic = model.gradient(fwd, 1.0);

  const double h = 1e-5;
  nn::ParamVector probe = model.params();
  double max_err = 0.0;
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    model.import_params(probe);
    const double plus = model.forward(window).d_hat;
    probe[i] = saved - h;
    model.import_params(probe);
    const double minus = model.forward(window).d_hat;
    probe[i] = saved;
    const double numeric = (plus - minus) / (2.0 * h);
    const double a = analytic[i];
    if (a != 0.0) ++nonzero;
    max_err = std::max(max_err, std::abs(a - numeric) /
                                    std::max({std::abs(a), std::abs(numeric), 1.0}));
  }
  model.import_params(probe);
  CHECK(max_err < 1e-4);
  CHECK(nonzero > 100);
}

TEST_CASE("perfect prediction yields zero loss and zero update") {
  TwinConfig cfg = small_config();
  Rng rng(3);
  auto window = random_vec(rng, cfg.nodes * cfg.window, 0.1, 0.9);
  for (std::uint64_t seed = 1;; ++seed) {
    REQUIRE(seed < 50);
    TwinModel model(cfg, seed);
    const double target = model.predict(window);
    if (target <= 0.0) continue;
    nn::ParamVector before = model.params();
    const double loss = model.train_step(window, target);
    CHECK(loss == 0.0);
    for (std::size_t i = 0; i < before.size(); ++i)
      CHECK(model.params()[i] == before[i]);
    break;
  }
}

TEST_CASE("mae loss arithmetic") {
  // Errors 0 and 1 on two samples average to 0.5 under the absolute loss.
  TwinConfig cfg = small_config();
  Rng rng(3);
  auto window = random_vec(rng, cfg.nodes * cfg.window, 0.1, 0.9);
  TwinModel a(cfg, 10), b(cfg, 10);
  const double pred = a.predict(window);
  const double l1 = a.train_step(window, pred);
  const double l2 = b.train_step(window, pred + 1.0);
  CHECK(l1 == 0.0);
  CHECK(l2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((l1 + l2) / 2.0 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("softmax head produces normalized shares") {
  TwinConfig cfg = small_config();
  cfg.head_mode = HeadMode::Softmax;
  TwinModel model(cfg, 19);
  Rng rng(6);
  auto window = random_vec(rng, cfg.nodes * cfg.window, 0.1, 0.9);
  std::vector<double> shares = model.predict_shares(window);
  REQUIRE(shares.size() == cfg.nodes);
  double sum = 0.0;
  for (double s : shares) {
    CHECK(s > 0.0);
    CHECK(s < 1.0);
    sum += s;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> targets(cfg.nodes, 0.25);
  const double loss = model.train_step_nodes(window, targets);
  CHECK(std::isfinite(loss));
}

TEST_CASE("training reduces the loss on a learnable trace") {
  int improved = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TwinConfig cfg = small_config();
    TwinModel model(cfg, seed);
    Rng rng(seed * 7);
    // Deterministic mapping: target is the mean of the window.
    std::vector<std::vector<double>> windows;
    std::vector<double> targets;
    for (int i = 0; i < 40; ++i) {
      auto w = random_vec(rng, cfg.nodes * cfg.window, 0.1, 0.9);
      windows.push_back(w);
      targets.push_back(std::accumulate(w.begin(), w.end(), 0.0) /
                        static_cast<double>(w.size()));
    }
    double first = 0.0, last = 0.0;
    for (int step = 0; step < 200; ++step) {
      const std::size_t i = step % windows.size();
      const double loss = model.train_step(windows[i], targets[i]);
      if (step < 50) first += loss;
      if (step >= 150) last += loss;
    }
    if (last < first) ++improved;
  }
  CHECK(improved >= 3);
}
