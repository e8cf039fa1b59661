#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hedge/random.hpp"

namespace hedge::neural {

using Matrix = Eigen::MatrixXd;  // one sample per column
using Vector = Eigen::VectorXd;

enum class Activation { identity, relu, leaky_relu, sigmoid, softmax };

inline constexpr double kLeakySlope = 0.2;

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view text);

/// Logistic function, stable for large |x|.
double sigmoid(double x);

struct Layer {
  Matrix weights;  // out x in
  Vector bias;     // out

  bool operator==(const Layer& other) const { return weights == other.weights && bias == other.bias; }
};

/// Activations recorded by a training-mode forward pass.
struct ForwardCache {
  std::vector<Matrix> inputs;   // input of each layer (after the previous layer's dropout)
  std::vector<Matrix> outputs;  // activation output of each layer, before dropout
  std::vector<Matrix> masks;    // inverted-dropout scale per hidden layer; empty when inactive
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Matrix input;  // gradient with respect to the network input
};

/// Fully connected feed-forward network. Dropout with probability `dropout`
/// is applied to every hidden layer's output in training-mode passes.
class DenseNet {
 public:
  DenseNet() = default;
  DenseNet(std::vector<int> layer_dims, Activation hidden, Activation output, double dropout);

  /// Uniform fan-based initialisation (He for rectifiers, Glorot otherwise), zero biases.
  void initialise(Rng& rng);

  /// Inference: dropout off. Never mutates the network.
  [[nodiscard]] Matrix predict(const Matrix& x) const;

  /// Training pass; `dropout_rng` == nullptr disables dropout.
  Matrix forward(const Matrix& x, ForwardCache& cache, Rng* dropout_rng) const;

  /// Exact gradients under the cached dropout masks for an upstream gradient
  /// with respect to the network output.
  [[nodiscard]] Gradients backward(const ForwardCache& cache, const Matrix& grad_output) const;

  [[nodiscard]] const std::vector<int>& layer_dims() const { return dims_; }
  [[nodiscard]] int input_dim() const { return dims_.front(); }
  [[nodiscard]] int output_dim() const { return dims_.back(); }
  [[nodiscard]] Activation hidden_activation() const { return hidden_; }
  [[nodiscard]] Activation output_activation() const { return output_; }
  [[nodiscard]] double dropout() const { return dropout_; }
  [[nodiscard]] const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  bool operator==(const DenseNet&) const = default;

 private:
  std::vector<int> dims_;
  Activation hidden_ = Activation::relu;
  Activation output_ = Activation::identity;
  double dropout_ = 0.0;
  std::vector<Layer> layers_;
};

/// Adaptive moment estimation; the step size is supplied per call so a
/// schedule can drive it.
class Adam {
 public:
  explicit Adam(const DenseNet& net, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);
  void step(DenseNet& net, const Gradients& grads, double learning_rate);

 private:
  double beta1_;
  double beta2_;
  double epsilon_;
  long steps_ = 0;
  std::vector<Matrix> m_w_, v_w_;
  std::vector<Vector> m_b_, v_b_;
};

/// Mean cross-entropy of softmax outputs against integer labels, and its
/// gradient with respect to the probabilities.
double cross_entropy(const Matrix& probabilities, const std::vector<int>& labels, Matrix* grad = nullptr);

}  // namespace hedge::neural
