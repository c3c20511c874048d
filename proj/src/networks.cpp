#include "ttnet/networks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ttnet/random.hpp"

namespace ttnet {

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu:
      return z > 0.0 ? z : 0.0;
    case Activation::sigmoid:
      return 1.0 / (1.0 + std::exp(-z));
    case Activation::identity:
      break;
  }
  return z;
}

// Derivative at z; relu'(0) = 0.
double activate_grad(Activation a, double z) {
  switch (a) {
    case Activation::relu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case Activation::identity:
      break;
  }
  return 1.0;
}

std::string dims3(const Tensor3& t) {
  return "(" + std::to_string(t.dim0()) + "," + std::to_string(t.dim1()) + "," + std::to_string(t.dim2()) + ")";
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Mode sizes must all equal m. Returns d and the number of classes.
struct Layout {
  std::size_t length = 0;
  std::size_t classes = 0;
  ClassMode mode = ClassMode::shared;
};

Layout check_tt(const TTWeights& w, std::size_t m) {
  if (w.chains.empty()) throw std::invalid_argument("TT network needs at least one chain");
  Layout out;
  out.mode = w.chains.size() == 1 ? ClassMode::shared : ClassMode::per_class;
  out.length = w.chains.front().size();
  for (std::size_t c = 0; c < w.chains.size(); ++c) {
    const auto& chain = w.chains[c];
    if (chain.size() != out.length) throw std::invalid_argument("TT chains differ in length");
    const auto modes = validate_tt_cores(chain, out.mode == ClassMode::per_class ? 1 : 0);
    for (std::size_t k = 0; k < modes.size(); ++k) {
      if (modes[k] != m) {
        throw std::invalid_argument("core " + std::to_string(k + 1) + " has mode size " +
                                    std::to_string(modes[k]) + ", feature map has " + std::to_string(m));
      }
    }
    out.classes += chain.back().dim2();
  }
  return out;
}

Layout check_cp(const CPWeights& w, std::size_t m) {
  if (w.chains.empty()) throw std::invalid_argument("CP network needs at least one chain");
  Layout out;
  out.mode = w.chains.size() == 1 ? ClassMode::shared : ClassMode::per_class;
  out.length = w.chains.front().factors.size() + 1;
  for (const auto& chain : w.chains) {
    if (chain.factors.size() + 1 != out.length) throw std::invalid_argument("CP chains differ in length");
    const std::size_t r = chain.head.dim1();
    if (r == 0 || chain.head.dim0() != m || chain.head.dim2() == 0) {
      throw std::invalid_argument("CP head has dims " + dims3(chain.head) + ", expected (" +
                                  std::to_string(m) + ",r,classes)");
    }
    if (out.mode == ClassMode::per_class && chain.head.dim2() != 1) {
      throw std::invalid_argument("per-class CP heads must have one output");
    }
    for (std::size_t k = 0; k < chain.factors.size(); ++k) {
      const Matrix& v = chain.factors[k];
      if (v.rows() != m || v.cols() != r) {
        throw std::invalid_argument("CP factor " + std::to_string(k + 1) + " is " + std::to_string(v.rows()) +
                                    "x" + std::to_string(v.cols()) + ", expected " + std::to_string(m) +
                                    "x" + std::to_string(r));
      }
    }
    out.classes += chain.head.dim2();
  }
  return out;
}

Layout check_ht(const HTWeights& w, std::size_t m) {
  if (w.trees.empty()) throw std::invalid_argument("HT network needs at least one tree");
  Layout out;
  out.mode = w.trees.size() == 1 ? ClassMode::shared : ClassMode::per_class;
  out.length = w.trees.front().order();
  for (const auto& tree : w.trees) {
    tree.validate();
    if (tree.order() != out.length) throw std::invalid_argument("HT trees differ in length");
    for (std::size_t k = 0; k < tree.order(); ++k) {
      if (tree.leaves[k].rows() != m) {
        throw std::invalid_argument("leaf " + std::to_string(k + 1) + " has " +
                                    std::to_string(tree.leaves[k].rows()) + " rows, feature map has " +
                                    std::to_string(m));
      }
    }
    if (out.mode == ClassMode::per_class && tree.outputs() != 1) {
      throw std::invalid_argument("per-class HT trees must have one output");
    }
    out.classes += tree.outputs();
  }
  return out;
}

std::vector<double> matvec_t(const Matrix& v, std::span<const double> x) {
  std::vector<double> out(v.cols(), 0.0);
  for (std::size_t i = 0; i < v.rows(); ++i) {
    const double xi = x[i];
    for (std::size_t a = 0; a < v.cols(); ++a) out[a] += v(i, a) * xi;
  }
  return out;
}

// Feature vectors together with the preactivations needed by backprop.
struct FeatureCache {
  Matrix phi;  // d x m
  Matrix pre;  // d x m
};

FeatureCache compute_features(const ScoreNetwork& net, const Matrix& inputs) {
  const std::size_t d = net.length(), m = net.features();
  if (inputs.rows() != d || inputs.cols() != net.input_dim()) {
    throw std::invalid_argument("network expects " + std::to_string(d) + " inputs of length " +
                                std::to_string(net.input_dim()) + ", got " + std::to_string(inputs.rows()) +
                                " of length " + std::to_string(inputs.cols()));
  }
  FeatureCache cache{Matrix(d, m), Matrix(d, m)};
  const FeatureMap& fm = net.feature_map();
  for (std::size_t k = 0; k < d; ++k) {
    const auto z = fm.preactivation(inputs.row(net.input_order()[k]));
    for (std::size_t j = 0; j < m; ++j) {
      cache.pre(k, j) = z[j];
      cache.phi(k, j) = activate(fm.activation(), z[j]);
    }
  }
  return cache;
}

std::vector<double> tt_scores(const TTWeights& w, const Matrix& phi) {
  std::vector<double> out;
  for (const auto& chain : w.chains) {
    const auto s = tt_contract(chain, phi);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

// prod_k V_k^T phi_k over the first d-1 modes, one entry per CP term.
std::vector<double> cp_prefix_product(const CPChain& chain, const Matrix& phi) {
  std::vector<double> z(chain.head.dim1(), 1.0);
  for (std::size_t k = 0; k < chain.factors.size(); ++k) {
    const auto p = matvec_t(chain.factors[k], phi.row(k));
    for (std::size_t a = 0; a < z.size(); ++a) z[a] *= p[a];
  }
  return z;
}

std::vector<double> cp_scores(const CPWeights& w, const Matrix& phi) {
  std::vector<double> out;
  const std::size_t last = phi.rows() - 1;
  for (const auto& chain : w.chains) {
    const auto z = cp_prefix_product(chain, phi);
    const Tensor3& h = chain.head;
    std::vector<double> s(h.dim2(), 0.0);
    for (std::size_t i = 0; i < h.dim0(); ++i)
      for (std::size_t a = 0; a < h.dim1(); ++a) {
        const double w_ia = phi(last, i) * z[a];
        for (std::size_t y = 0; y < h.dim2(); ++y) s[y] += h(i, a, y) * w_ia;
      }
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

std::vector<double> ht_scores(const HTWeights& w, const Matrix& phi) {
  std::vector<double> out;
  for (const auto& tree : w.trees) {
    const auto s = ht_contract(tree, phi);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

// Backward through one TT chain; adds dL/dphi into dphi and core gradients
// into grads[first .. first + d).
void tt_backward(const std::vector<Tensor3>& chain, const Matrix& phi, std::span<const double> upstream,
                 double scale, Matrix& dphi, std::vector<std::vector<double>>& grads, std::size_t first) {
  const std::size_t d = chain.size();
  std::vector<std::vector<double>> h(d + 1);
  h[0] = {1.0};
  for (std::size_t k = 0; k < d; ++k) {
    const Tensor3& g = chain[k];
    h[k + 1].assign(g.dim2(), 0.0);
    for (std::size_t a = 0; a < g.dim0(); ++a)
      for (std::size_t i = 0; i < g.dim1(); ++i) {
        const double w = h[k][a] * phi(k, i);
        for (std::size_t b = 0; b < g.dim2(); ++b) h[k + 1][b] += w * g(a, i, b);
      }
  }
  std::vector<double> gout(upstream.begin(), upstream.end());
  for (std::size_t k = d; k-- > 0;) {
    const Tensor3& g = chain[k];
    auto& dg = grads[first + k];
    std::vector<double> gin(g.dim0(), 0.0);
    for (std::size_t a = 0; a < g.dim0(); ++a) {
      const double ha = h[k][a];
      for (std::size_t i = 0; i < g.dim1(); ++i) {
        const double p = phi(k, i);
        double acc = 0.0;  // sum_b G(a,i,b) gout[b]
        double* dgp = dg.data() + (a * g.dim1() + i) * g.dim2();
        for (std::size_t b = 0; b < g.dim2(); ++b) {
          acc += g(a, i, b) * gout[b];
          dgp[b] += scale * ha * p * gout[b];
        }
        dphi(k, i) += ha * acc;
        gin[a] += p * acc;
      }
    }
    gout = std::move(gin);
  }
}

void cp_backward(const CPChain& chain, const Matrix& phi, std::span<const double> upstream, double scale,
                 Matrix& dphi, std::vector<std::vector<double>>& grads, std::size_t first) {
  const std::size_t nf = chain.factors.size();
  const std::size_t r = chain.head.dim1();
  const Tensor3& h = chain.head;
  std::vector<std::vector<double>> p(nf);
  for (std::size_t k = 0; k < nf; ++k) p[k] = matvec_t(chain.factors[k], phi.row(k));
  // prefix[k] = prod_{j<k} p_j, suffix[k] = prod_{j>=k} p_j; avoids division.
  std::vector<std::vector<double>> prefix(nf + 1, std::vector<double>(r, 1.0));
  std::vector<std::vector<double>> suffix(nf + 1, std::vector<double>(r, 1.0));
  for (std::size_t k = 0; k < nf; ++k)
    for (std::size_t a = 0; a < r; ++a) prefix[k + 1][a] = prefix[k][a] * p[k][a];
  for (std::size_t k = nf; k-- > 0;)
    for (std::size_t a = 0; a < r; ++a) suffix[k][a] = suffix[k + 1][a] * p[k][a];
  const std::vector<double>& z = prefix[nf];

  const std::size_t last = nf;
  auto& dh = grads[first + nf];
  std::vector<double> q(r, 0.0);  // dL/dz
  for (std::size_t i = 0; i < h.dim0(); ++i)
    for (std::size_t a = 0; a < r; ++a) {
      double acc = 0.0;  // sum_y H(i,a,y) g_y
      double* dhp = dh.data() + (i * r + a) * h.dim2();
      for (std::size_t y = 0; y < h.dim2(); ++y) {
        acc += h(i, a, y) * upstream[y];
        dhp[y] += scale * phi(last, i) * z[a] * upstream[y];
      }
      q[a] += phi(last, i) * acc;
      dphi(last, i) += z[a] * acc;
    }
  for (std::size_t k = 0; k < nf; ++k) {
    const Matrix& v = chain.factors[k];
    auto& dv = grads[first + k];
    std::vector<double> dp(r);
    for (std::size_t a = 0; a < r; ++a) dp[a] = q[a] * prefix[k][a] * suffix[k + 1][a];
    for (std::size_t i = 0; i < v.rows(); ++i) {
      double acc = 0.0;
      for (std::size_t a = 0; a < r; ++a) {
        dv[i * r + a] += scale * phi(k, i) * dp[a];
        acc += v(i, a) * dp[a];
      }
      dphi(k, i) += acc;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Enumerations

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::identity:
      break;
  }
  return "identity";
}

Activation parse_activation(const std::string& text) {
  if (text == "relu") return Activation::relu;
  if (text == "identity") return Activation::identity;
  if (text == "sigmoid") return Activation::sigmoid;
  throw std::invalid_argument("activation must be relu, identity or sigmoid, got '" + text + "'");
}

std::string to_string(Format f) {
  switch (f) {
    case Format::tt:
      return "tt";
    case Format::cp:
      return "cp";
    case Format::ht:
      break;
  }
  return "ht";
}

Format parse_format(const std::string& text) {
  if (text == "tt") return Format::tt;
  if (text == "cp") return Format::cp;
  if (text == "ht") return Format::ht;
  throw std::invalid_argument("network format must be tt, cp or ht, got '" + text + "'");
}

std::string to_string(ClassMode mode) { return mode == ClassMode::shared ? "shared" : "per-class"; }

ClassMode parse_class_mode(const std::string& text) {
  if (text == "shared") return ClassMode::shared;
  if (text == "per-class") return ClassMode::per_class;
  throw std::invalid_argument("class mode must be shared or per-class, got '" + text + "'");
}

// ---------------------------------------------------------------------------
// FeatureMap

FeatureMap::FeatureMap(Matrix weight, std::vector<double> bias, Activation activation)
    : weight_(std::move(weight)), bias_(std::move(bias)), activation_(activation) {
  if (weight_.rows() == 0 || weight_.cols() == 0) throw std::invalid_argument("feature map needs m, n >= 1");
  if (bias_.size() != weight_.rows()) {
    throw std::invalid_argument("bias has length " + std::to_string(bias_.size()) + ", A has " +
                                std::to_string(weight_.rows()) + " rows");
  }
}

FeatureMap FeatureMap::identity(std::size_t n) {
  return FeatureMap(Matrix::identity(n), std::vector<double>(n, 0.0), Activation::identity);
}

std::vector<double> FeatureMap::preactivation(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw std::invalid_argument("feature map expects input of length " + std::to_string(input_dim()) +
                                ", got " + std::to_string(x.size()));
  }
  std::vector<double> z(bias_);
  for (std::size_t j = 0; j < weight_.rows(); ++j) {
    auto a = weight_.row(j);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += a[i] * x[i];
    z[j] += acc;
  }
  return z;
}

std::vector<double> FeatureMap::apply(std::span<const double> x) const {
  auto z = preactivation(x);
  for (double& v : z) v = activate(activation_, v);
  return z;
}

std::vector<double> apply_feature_map(const FeatureMap& fm, std::span<const double> x) { return fm.apply(x); }

// ---------------------------------------------------------------------------
// ScoreNetwork

ScoreNetwork::ScoreNetwork(FeatureMap feature_map, NetworkWeights weights, std::vector<std::size_t> input_order)
    : feature_map_(std::move(feature_map)), weights_(std::move(weights)), input_order_(std::move(input_order)) {
  const std::size_t m = feature_map_.features();
  const Layout layout = std::visit(Overloaded{[m](const TTWeights& w) { return check_tt(w, m); },
                                              [m](const CPWeights& w) { return check_cp(w, m); },
                                              [m](const HTWeights& w) { return check_ht(w, m); }},
                                   weights_);
  class_mode_ = layout.mode;
  num_classes_ = layout.classes;
  if (input_order_.empty()) {
    input_order_.resize(layout.length);
    std::iota(input_order_.begin(), input_order_.end(), std::size_t{0});
  }
  if (input_order_.size() != layout.length) {
    throw std::invalid_argument("input order has " + std::to_string(input_order_.size()) +
                                " entries, network has " + std::to_string(layout.length) + " positions");
  }
  std::vector<bool> seen(layout.length, false);
  for (std::size_t k : input_order_) {
    if (k >= layout.length || seen[k]) throw std::invalid_argument("input order is not a permutation");
    seen[k] = true;
  }
}

Format ScoreNetwork::format() const noexcept {
  return static_cast<Format>(weights_.index());
}

std::size_t ScoreNetwork::rank() const {
  std::size_t r = 0;
  std::visit(Overloaded{[&](const TTWeights& w) {
                          for (const auto& chain : w.chains)
                            for (std::size_t k = 0; k + 1 < chain.size(); ++k) r = std::max(r, chain[k].dim2());
                        },
                        [&](const CPWeights& w) {
                          for (const auto& chain : w.chains) r = std::max(r, chain.head.dim1());
                        },
                        [&](const HTWeights& w) {
                          for (const auto& tree : w.trees)
                            for (std::size_t j = 1; j < 2 * tree.order() - 1; ++j) r = std::max(r, tree.node_rank(j));
                        }},
             weights_);
  return r;
}

Matrix ScoreNetwork::feature_vectors(const Matrix& inputs) const { return compute_features(*this, inputs).phi; }

std::vector<double> ScoreNetwork::scores(const Matrix& inputs) const {
  const Matrix phi = feature_vectors(inputs);
  return std::visit(Overloaded{[&](const TTWeights& w) { return tt_scores(w, phi); },
                               [&](const CPWeights& w) { return cp_scores(w, phi); },
                               [&](const HTWeights& w) { return ht_scores(w, phi); }},
                    weights_);
}

std::vector<std::span<double>> ScoreNetwork::parameter_blocks() {
  std::vector<std::span<double>> blocks{feature_map_.weight().data(), std::span<double>(feature_map_.bias())};
  std::visit(Overloaded{[&](TTWeights& w) {
                          for (auto& chain : w.chains)
                            for (auto& core : chain) blocks.push_back(core.data());
                        },
                        [&](CPWeights& w) {
                          for (auto& chain : w.chains) {
                            for (auto& f : chain.factors) blocks.push_back(f.data());
                            blocks.push_back(chain.head.data());
                          }
                        },
                        [&](HTWeights& w) {
                          for (auto& tree : w.trees) {
                            for (auto& u : tree.leaves) blocks.push_back(u.data());
                            for (auto& b : tree.transfers) blocks.push_back(b.data());
                          }
                        }},
             weights_);
  return blocks;
}

std::vector<std::size_t> ScoreNetwork::parameter_block_sizes() const {
  auto blocks = const_cast<ScoreNetwork*>(this)->parameter_blocks();
  std::vector<std::size_t> sizes;
  for (const auto& b : blocks) sizes.push_back(b.size());
  return sizes;
}

std::size_t ScoreNetwork::parameter_count() const {
  const auto sizes = parameter_block_sizes();
  return std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
}

std::vector<double> tt_forward(const ScoreNetwork& net, const Matrix& inputs) {
  if (net.format() != Format::tt) throw std::invalid_argument("tt_forward needs a TT network");
  return net.scores(inputs);
}

std::vector<double> cp_forward(const ScoreNetwork& net, const Matrix& inputs) {
  if (net.format() != Format::cp) throw std::invalid_argument("cp_forward needs a CP network");
  return net.scores(inputs);
}

std::vector<double> ht_forward(const ScoreNetwork& net, const Matrix& inputs) {
  if (net.format() != Format::ht) throw std::invalid_argument("ht_forward needs an HT network");
  return net.scores(inputs);
}

// ---------------------------------------------------------------------------
// Gradients

void Gradients::set_zero() {
  for (auto& b : blocks) std::fill(b.begin(), b.end(), 0.0);
}

void Gradients::scale(double factor) {
  for (auto& b : blocks)
    for (double& v : b) v *= factor;
}

double Gradients::max_abs() const {
  double m = 0.0;
  for (const auto& b : blocks)
    for (double v : b) m = std::max(m, std::abs(v));
  return m;
}

Gradients zero_gradients(const ScoreNetwork& net) {
  Gradients g;
  for (std::size_t s : net.parameter_block_sizes()) g.blocks.emplace_back(s, 0.0);
  return g;
}

std::vector<double> accumulate_gradients(const ScoreNetwork& net, const Matrix& inputs,
                                         const UpstreamFn& upstream_of, Gradients& acc, double scale) {
  if (net.format() == Format::ht) throw std::invalid_argument("gradients are available for TT and CP networks only");
  const auto expected = net.parameter_block_sizes();
  if (acc.blocks.size() != expected.size()) throw std::invalid_argument("gradient buffer does not match network");
  for (std::size_t b = 0; b < expected.size(); ++b) {
    if (acc.blocks[b].size() != expected[b]) throw std::invalid_argument("gradient buffer does not match network");
  }

  const FeatureCache cache = compute_features(net, inputs);
  std::vector<double> scores = std::visit(
      Overloaded{[&](const TTWeights& w) { return tt_scores(w, cache.phi); },
                 [&](const CPWeights& w) { return cp_scores(w, cache.phi); },
                 [&](const HTWeights& w) { return ht_scores(w, cache.phi); }},
      net.weights());
  const std::vector<double> upstream = upstream_of(scores);
  if (upstream.size() != scores.size()) {
    throw std::invalid_argument("upstream gradient has length " + std::to_string(upstream.size()) + ", network has " +
                                std::to_string(scores.size()) + " classes");
  }

  Matrix dphi(cache.phi.rows(), cache.phi.cols());
  std::size_t block = 2;
  std::size_t offset = 0;  // position of the chain's first class in the score vector
  if (const auto* tt = std::get_if<TTWeights>(&net.weights())) {
    for (const auto& chain : tt->chains) {
      const std::size_t c = chain.back().dim2();
      tt_backward(chain, cache.phi, std::span(upstream).subspan(offset, c), scale, dphi, acc.blocks, block);
      block += chain.size();
      offset += c;
    }
  } else {
    const auto& cp = std::get<CPWeights>(net.weights());
    for (const auto& chain : cp.chains) {
      const std::size_t c = chain.head.dim2();
      cp_backward(chain, cache.phi, std::span(upstream).subspan(offset, c), scale, dphi, acc.blocks, block);
      block += chain.factors.size() + 1;
      offset += c;
    }
  }

  // Feature map: phi_k = sigma(A x + b) with x = inputs[input_order[k]].
  const FeatureMap& fm = net.feature_map();
  const std::size_t n = fm.input_dim();
  auto& da = acc.blocks[0];
  auto& db = acc.blocks[1];
  for (std::size_t k = 0; k < cache.phi.rows(); ++k) {
    auto x = inputs.row(net.input_order()[k]);
    for (std::size_t j = 0; j < fm.features(); ++j) {
      const double dz = scale * dphi(k, j) * activate_grad(fm.activation(), cache.pre(k, j));
      if (dz == 0.0) continue;
      db[j] += dz;
      double* row = da.data() + j * n;
      for (std::size_t i = 0; i < n; ++i) row[i] += dz * x[i];
    }
  }
  return scores;
}

Gradients network_gradients(const ScoreNetwork& net, const Matrix& inputs, std::span<const double> upstream) {
  Gradients g = zero_gradients(net);
  const std::vector<double> up(upstream.begin(), upstream.end());
  accumulate_gradients(net, inputs, [&](std::span<const double>) { return up; }, g);
  return g;
}

// ---------------------------------------------------------------------------
// Class weight tensors

namespace {

void check_class(const ScoreNetwork& net, std::size_t y) {
  if (y >= net.num_classes()) {
    throw std::out_of_range("class " + std::to_string(y) + " out of range for " +
                            std::to_string(net.num_classes()) + " classes");
  }
}

}  // namespace

TTTensor class_tt_tensor(const ScoreNetwork& net, std::size_t y) {
  check_class(net, y);
  const auto* w = std::get_if<TTWeights>(&net.weights());
  if (w == nullptr) throw std::invalid_argument("class_tt_tensor needs a TT network");
  if (net.class_mode() == ClassMode::per_class) return TTTensor(w->chains[y]);
  std::vector<Tensor3> cores = w->chains.front();
  const Tensor3& last = cores.back();
  Tensor3 sliced(last.dim0(), last.dim1(), 1);
  for (std::size_t a = 0; a < last.dim0(); ++a)
    for (std::size_t i = 0; i < last.dim1(); ++i) sliced(a, i, 0) = last(a, i, y);
  cores.back() = std::move(sliced);
  return TTTensor(std::move(cores));
}

CPTensor class_cp_tensor(const ScoreNetwork& net, std::size_t y) {
  check_class(net, y);
  const auto* w = std::get_if<CPWeights>(&net.weights());
  if (w == nullptr) throw std::invalid_argument("class_cp_tensor needs a CP network");
  const bool shared = net.class_mode() == ClassMode::shared;
  const CPChain& chain = shared ? w->chains.front() : w->chains[y];
  const std::size_t col = shared ? y : 0;
  std::vector<Matrix> factors = chain.factors;
  Matrix last(chain.head.dim0(), chain.head.dim1());
  for (std::size_t i = 0; i < last.rows(); ++i)
    for (std::size_t a = 0; a < last.cols(); ++a) last(i, a) = chain.head(i, a, col);
  factors.push_back(std::move(last));
  return CPTensor(std::move(factors));
}

HTTensor class_ht_tensor(const ScoreNetwork& net, std::size_t y) {
  check_class(net, y);
  const auto* w = std::get_if<HTWeights>(&net.weights());
  if (w == nullptr) throw std::invalid_argument("class_ht_tensor needs an HT network");
  if (net.class_mode() == ClassMode::per_class) return HTTensor(w->trees[y]);
  HTTree tree = w->trees.front();
  if (tree.transfers.empty()) {
    Matrix& u = tree.leaves.front();
    Matrix col(u.rows(), 1);
    for (std::size_t i = 0; i < u.rows(); ++i) col(i, 0) = u(i, y);
    u = std::move(col);
  } else {
    const Tensor3& root = tree.transfers.front();
    Tensor3 sliced(root.dim0(), root.dim1(), 1);
    for (std::size_t a = 0; a < root.dim0(); ++a)
      for (std::size_t b = 0; b < root.dim1(); ++b) sliced(a, b, 0) = root(a, b, y);
    tree.transfers.front() = std::move(sliced);
  }
  return HTTensor(std::move(tree));
}

DenseTensor class_weight_tensor(const ScoreNetwork& net, std::size_t y) {
  switch (net.format()) {
    case Format::tt:
      return tt_to_dense(class_tt_tensor(net, y));
    case Format::cp:
      return cp_to_dense(class_cp_tensor(net, y));
    case Format::ht:
      break;
  }
  return ht_to_dense(class_ht_tensor(net, y));
}

// ---------------------------------------------------------------------------
// Construction

namespace {

void fill(Rng& rng, std::span<double> out, double sd) { rng.fill_normal(out, sd); }

}  // namespace

ScoreNetwork make_network(const NetworkSpec& spec, std::uint64_t seed) {
  const std::size_t d = spec.length, m = spec.features, n = spec.input_dim, r = spec.rank, c = spec.classes;
  if (d == 0 || m == 0 || n == 0 || r == 0 || c == 0) {
    throw std::invalid_argument("length, input_dim, features, rank and classes must be positive");
  }
  Rng rng(seed);
  Matrix a(m, n);
  fill(rng, a.data(), 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> b(m);
  for (double& v : b) v = rng.normal(0.5, 0.1);
  FeatureMap fm(std::move(a), std::move(b), spec.activation);

  const bool shared = spec.class_mode == ClassMode::shared;
  const std::size_t chains = shared ? 1 : c;
  const std::size_t outputs = shared ? c : 1;
  const double core_sd = 1.0 / std::sqrt(static_cast<double>(r));
  // Makes V^T phi close to 1 when phi is near its initial value relu(b) = 0.5.
  const double cp_mean = 2.0 / static_cast<double>(m);

  switch (spec.format) {
    case Format::tt: {
      TTWeights w;
      for (std::size_t ch = 0; ch < chains; ++ch) {
        std::vector<Tensor3> cores;
        for (std::size_t k = 0; k < d; ++k) {
          Tensor3 g(k == 0 ? 1 : r, m, k + 1 == d ? outputs : r);
          fill(rng, g.data(), core_sd);
          cores.push_back(std::move(g));
        }
        w.chains.push_back(std::move(cores));
      }
      return ScoreNetwork(std::move(fm), std::move(w));
    }
    case Format::cp: {
      CPWeights w;
      for (std::size_t ch = 0; ch < chains; ++ch) {
        CPChain chain;
        for (std::size_t k = 0; k + 1 < d; ++k) {
          Matrix v(m, r);
          for (double& x : v.data()) x = rng.normal(cp_mean, 0.25 * cp_mean);
          chain.factors.push_back(std::move(v));
        }
        chain.head = Tensor3(m, r, outputs);
        fill(rng, chain.head.data(), core_sd);
        w.chains.push_back(std::move(chain));
      }
      return ScoreNetwork(std::move(fm), std::move(w));
    }
    case Format::ht:
      break;
  }
  if (!is_power_of_two(d)) throw std::invalid_argument("HT network needs a power-of-two length, got " + std::to_string(d));
  HTWeights w;
  for (std::size_t ch = 0; ch < chains; ++ch) {
    HTTree tree;
    for (std::size_t k = 0; k < d; ++k) {
      Matrix u(m, d == 1 ? outputs : r);
      fill(rng, u.data(), core_sd);
      tree.leaves.push_back(std::move(u));
    }
    for (std::size_t j = 0; j + 1 < d; ++j) {
      Tensor3 t(r, r, j == 0 ? outputs : r);
      fill(rng, t.data(), core_sd);
      tree.transfers.push_back(std::move(t));
    }
    w.trees.push_back(std::move(tree));
  }
  return ScoreNetwork(std::move(fm), std::move(w));
}

ScoreNetwork build_similarity_network(std::size_t d, std::size_t n) {
  if (d < 2 || d % 2 != 0) throw std::invalid_argument("d must be even and >= 2, got " + std::to_string(d));
  if (n == 0) throw std::invalid_argument("n must be positive");
  TTWeights w;
  w.chains.push_back(tt_delta_example(d, n, n).cores());
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < d / 2; ++k) {
    order.push_back(k);
    order.push_back(d / 2 + k);
  }
  return ScoreNetwork(FeatureMap::identity(n), std::move(w), std::move(order));
}

}  // namespace ttnet
