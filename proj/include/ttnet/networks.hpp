#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ttnet/decompositions.hpp"
#include "ttnet/tensor_core.hpp"

namespace ttnet {

enum class Activation { relu, identity, sigmoid };

std::string to_string(Activation a);
Activation parse_activation(const std::string& text);

/// f(x) = sigma(A x + b), shared by every patch. A is m x n.
class FeatureMap {
 public:
  FeatureMap(Matrix weight, std::vector<double> bias, Activation activation);
  /// A = I_n, b = 0, identity activation.
  static FeatureMap identity(std::size_t n);

  std::size_t features() const noexcept { return weight_.rows(); }
  std::size_t input_dim() const noexcept { return weight_.cols(); }
  Activation activation() const noexcept { return activation_; }
  const Matrix& weight() const noexcept { return weight_; }
  const std::vector<double>& bias() const noexcept { return bias_; }
  Matrix& weight() noexcept { return weight_; }
  std::vector<double>& bias() noexcept { return bias_; }

  std::vector<double> apply(std::span<const double> x) const;
  /// A x + b, before the activation.
  std::vector<double> preactivation(std::span<const double> x) const;

 private:
  Matrix weight_;
  std::vector<double> bias_;
  Activation activation_;
};

std::vector<double> apply_feature_map(const FeatureMap& fm, std::span<const double> x);

enum class Format { tt, cp, ht };
enum class ClassMode { shared, per_class };

std::string to_string(Format f);
Format parse_format(const std::string& text);
std::string to_string(ClassMode mode);
ClassMode parse_class_mode(const std::string& text);

/// Recurrent weights. With one chain the last core is (r_{d-1}, m, C) and all
/// classes share G_1..G_{d-1}; with C chains each ends in (r_{d-1}, m, 1).
struct TTWeights {
  std::vector<std::vector<Tensor3>> chains;
};

/// Shallow weights: factors for modes 1..d-1 (m x r each) and a head for
/// mode d with dims (m, r, classes in this chain).
struct CPChain {
  std::vector<Matrix> factors;
  Tensor3 head;
};
struct CPWeights {
  std::vector<CPChain> chains;
};

/// Tree weights; the root's output dimension counts the classes of the tree.
struct HTWeights {
  std::vector<HTTree> trees;
};

using NetworkWeights = std::variant<TTWeights, CPWeights, HTWeights>;

/// Score functions l_y(X) = <W_y, Phi(X)> with W_y in TT, CP or HT form.
/// Phi is built from phi_k = f(x_{input_order[k]}).
class ScoreNetwork {
 public:
  ScoreNetwork(FeatureMap feature_map, NetworkWeights weights, std::vector<std::size_t> input_order = {});

  Format format() const noexcept;
  ClassMode class_mode() const noexcept { return class_mode_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  /// d, the number of input vectors.
  std::size_t length() const noexcept { return input_order_.size(); }
  /// m, the number of feature maps.
  std::size_t features() const noexcept { return feature_map_.features(); }
  /// n, the length of each input vector.
  std::size_t input_dim() const noexcept { return feature_map_.input_dim(); }
  /// Largest rank in the decomposition.
  std::size_t rank() const;

  const FeatureMap& feature_map() const noexcept { return feature_map_; }
  const NetworkWeights& weights() const noexcept { return weights_; }
  const std::vector<std::size_t>& input_order() const noexcept { return input_order_; }

  /// d x m matrix whose row k is phi_k.
  Matrix feature_vectors(const Matrix& inputs) const;
  std::vector<double> scores(const Matrix& inputs) const;

  /// Views over every trainable array in a fixed order: A, b, then each
  /// chain's cores (TT), factors and head (CP), or leaves and transfers (HT).
  std::vector<std::span<double>> parameter_blocks();
  std::vector<std::size_t> parameter_block_sizes() const;
  std::size_t parameter_count() const;

 private:
  FeatureMap feature_map_;
  NetworkWeights weights_;
  std::vector<std::size_t> input_order_;
  ClassMode class_mode_ = ClassMode::shared;
  std::size_t num_classes_ = 1;
};

/// Forward passes; each checks that the network has the matching format.
/// `inputs` is d x n with row k = x_k.
std::vector<double> tt_forward(const ScoreNetwork& net, const Matrix& inputs);
std::vector<double> cp_forward(const ScoreNetwork& net, const Matrix& inputs);
std::vector<double> ht_forward(const ScoreNetwork& net, const Matrix& inputs);

/// Gradient arrays aligned with ScoreNetwork::parameter_blocks().
struct Gradients {
  std::vector<std::vector<double>> blocks;

  void set_zero();
  void scale(double factor);
  double max_abs() const;
};

Gradients zero_gradients(const ScoreNetwork& net);

/// Gradient of sum_y upstream[y] * l_y(X) with respect to every parameter.
/// Available for TT and CP networks.
Gradients network_gradients(const ScoreNetwork& net, const Matrix& inputs, std::span<const double> upstream);

using UpstreamFn = std::function<std::vector<double>(std::span<const double> scores)>;

/// One forward and one backward pass: computes the scores, asks
/// `upstream_of` for dLoss/dscores, and adds scale * gradient into `acc`.
/// Returns the scores.
std::vector<double> accumulate_gradients(const ScoreNetwork& net, const Matrix& inputs,
                                         const UpstreamFn& upstream_of, Gradients& acc,
                                         double scale = 1.0);

/// Weight tensor of class y over the feature positions (mode k <-> phi_k).
TTTensor class_tt_tensor(const ScoreNetwork& net, std::size_t y);
CPTensor class_cp_tensor(const ScoreNetwork& net, std::size_t y);
HTTensor class_ht_tensor(const ScoreNetwork& net, std::size_t y);
DenseTensor class_weight_tensor(const ScoreNetwork& net, std::size_t y);

struct NetworkSpec {
  Format format = Format::tt;
  std::size_t length = 2;      // d
  std::size_t input_dim = 1;   // n
  std::size_t features = 4;    // m
  std::size_t rank = 4;
  std::size_t classes = 2;
  ClassMode class_mode = ClassMode::shared;
  Activation activation = Activation::relu;
};

/// Random initialization. Feature map: A ~ N(0, 1/n), b ~ N(0.5, 0.1^2).
/// TT cores and HT leaves/transfers ~ N(0, 1/r). CP factors ~ N(2/m, (0.5/m)^2)
/// so each factor product V^T phi starts near 1; the CP head ~ N(0, 1/r).
ScoreNetwork make_network(const NetworkSpec& spec, std::uint64_t seed);

/// Computes prod_{k<=d/2} x_k^T x_{d/2+k} with a width-n TT network: identity
/// feature map, delta-core weights, inputs consumed as x_1, x_{d/2+1}, x_2, ...
ScoreNetwork build_similarity_network(std::size_t d, std::size_t n);

}  // namespace ttnet
