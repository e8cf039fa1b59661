#include "hedge/neural.hpp"

#include <algorithm>
#include <cmath>

#include "hedge/types.hpp"

namespace hedge::neural {

namespace {

Matrix activate(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::identity: return z;
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::leaky_relu: return z.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
    case Activation::sigmoid: return z.unaryExpr([](double v) { return sigmoid(v); });
    case Activation::softmax: {
      Matrix out(z.rows(), z.cols());
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double shift = z.col(j).maxCoeff();
        out.col(j) = (z.col(j).array() - shift).exp().matrix();
        out.col(j) /= out.col(j).sum();
      }
      return out;
    }
  }
  return z;
}

// Gradient with respect to the pre-activation, given the activation output.
Matrix activate_backward(Activation a, const Matrix& out, const Matrix& g) {
  switch (a) {
    case Activation::identity: return g;
    case Activation::relu: return (out.array() > 0.0).select(g, 0.0);
    case Activation::leaky_relu: return (out.array() > 0.0).select(g, kLeakySlope * g);
    case Activation::sigmoid: return (g.array() * out.array() * (1.0 - out.array())).matrix();
    case Activation::softmax: {
      Matrix dz(out.rows(), out.cols());
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double dot = out.col(j).dot(g.col(j));
        dz.col(j) = (out.col(j).array() * (g.col(j).array() - dot)).matrix();
      }
      return dz;
    }
  }
  return g;
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

Activation parse_activation(std::string_view text) {
  for (auto a : {Activation::identity, Activation::relu, Activation::leaky_relu, Activation::sigmoid,
                 Activation::softmax}) {
    if (to_string(a) == text) return a;
  }
  throw InvalidArgument("activation", "unknown activation '" + std::string(text) + "'");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

DenseNet::DenseNet(std::vector<int> layer_dims, Activation hidden, Activation output, double dropout)
    : dims_(std::move(layer_dims)), hidden_(hidden), output_(output), dropout_(dropout) {
  if (dims_.size() < 2) throw InvalidArgument("layer_dims", "need at least input and output dimensions");
  if (std::any_of(dims_.begin(), dims_.end(), [](int d) { return d < 1; })) {
    throw InvalidArgument("layer_dims", "dimensions must be positive");
  }
  if (!(dropout_ >= 0.0 && dropout_ < 1.0)) throw InvalidArgument("dropout", "must lie in [0, 1)");
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    layers_.push_back({Matrix::Zero(dims_[l + 1], dims_[l]), Vector::Zero(dims_[l + 1])});
  }
}

void DenseNet::initialise(Rng& rng) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto& layer = layers_[l];
    const bool last = l + 1 == layers_.size();
    const Activation act = last ? output_ : hidden_;
    const double fan_in = static_cast<double>(layer.weights.cols());
    const double fan_out = static_cast<double>(layer.weights.rows());
    const double limit = (act == Activation::relu || act == Activation::leaky_relu) ? std::sqrt(6.0 / fan_in)
                                                                                    : std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) layer.weights(i, j) = rng.uniform(-limit, limit);
    }
    layer.bias.setZero();
  }
}

Matrix DenseNet::predict(const Matrix& x) const {
  if (x.rows() != input_dim()) throw InvalidArgument("input", "expected " + std::to_string(input_dim()) + " rows");
  Matrix a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const bool last = l + 1 == layers_.size();
    Matrix z = layers_[l].weights * a;
    z.colwise() += layers_[l].bias;
    a = activate(last ? output_ : hidden_, z);
  }
  return a;
}

Matrix DenseNet::forward(const Matrix& x, ForwardCache& cache, Rng* dropout_rng) const {
  if (x.rows() != input_dim()) throw InvalidArgument("input", "expected " + std::to_string(input_dim()) + " rows");
  const std::size_t n_layers = layers_.size();
  cache.inputs.assign(n_layers, Matrix{});
  cache.outputs.assign(n_layers, Matrix{});
  cache.masks.assign(n_layers, Matrix{});
  Matrix a = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const bool last = l + 1 == n_layers;
    cache.inputs[l] = a;
    Matrix z = layers_[l].weights * a;
    z.colwise() += layers_[l].bias;
    cache.outputs[l] = activate(last ? output_ : hidden_, z);
    a = cache.outputs[l];
    if (!last && dropout_rng != nullptr && dropout_ > 0.0) {
      const double keep_scale = 1.0 / (1.0 - dropout_);
      Matrix mask(a.rows(), a.cols());
      for (Eigen::Index j = 0; j < mask.cols(); ++j) {
        for (Eigen::Index i = 0; i < mask.rows(); ++i) {
          mask(i, j) = dropout_rng->uniform() < dropout_ ? 0.0 : keep_scale;
        }
      }
      a = a.cwiseProduct(mask);
      cache.masks[l] = std::move(mask);
    }
  }
  return a;
}

Gradients DenseNet::backward(const ForwardCache& cache, const Matrix& grad_output) const {
  const std::size_t n_layers = layers_.size();
  if (cache.outputs.size() != n_layers || cache.inputs.size() != n_layers) {
    throw InvalidArgument("cache", "forward cache does not match the network");
  }
  const Matrix& out = cache.outputs.back();
  if (grad_output.rows() != out.rows() || grad_output.cols() != out.cols()) {
    throw InvalidArgument("grad_output", "shape does not match the cached output");
  }
  Gradients grads;
  grads.weights.resize(n_layers);
  grads.biases.resize(n_layers);
  Matrix g = grad_output;
  for (std::size_t l = n_layers; l-- > 0;) {
    const bool last = l + 1 == n_layers;
    if (!last && cache.masks[l].size() > 0) g = g.cwiseProduct(cache.masks[l]);
    const Matrix dz = activate_backward(last ? output_ : hidden_, cache.outputs[l], g);
    grads.weights[l] = dz * cache.inputs[l].transpose();
    grads.biases[l] = dz.rowwise().sum();
    g = layers_[l].weights.transpose() * dz;
  }
  grads.input = std::move(g);
  return grads;
}

Adam::Adam(const DenseNet& net, double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (const auto& layer : net.layers()) {
    m_w_.push_back(Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
    v_w_.push_back(Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
    m_b_.push_back(Vector::Zero(layer.bias.size()));
    v_b_.push_back(Vector::Zero(layer.bias.size()));
  }
}

void Adam::step(DenseNet& net, const Gradients& grads, double learning_rate) {
  auto& layers = net.layers();
  if (grads.weights.size() != layers.size()) throw InvalidArgument("grads", "layer count mismatch");
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    m_w_[l] = beta1_ * m_w_[l] + (1.0 - beta1_) * grads.weights[l];
    v_w_[l] = beta2_ * v_w_[l] + (1.0 - beta2_) * grads.weights[l].cwiseAbs2();
    m_b_[l] = beta1_ * m_b_[l] + (1.0 - beta1_) * grads.biases[l];
    v_b_[l] = beta2_ * v_b_[l] + (1.0 - beta2_) * grads.biases[l].cwiseAbs2();
    layers[l].weights.array() -=
        learning_rate * (m_w_[l].array() / c1) / ((v_w_[l].array() / c2).sqrt() + epsilon_);
    layers[l].bias.array() -= learning_rate * (m_b_[l].array() / c1) / ((v_b_[l].array() / c2).sqrt() + epsilon_);
  }
}

double cross_entropy(const Matrix& probabilities, const std::vector<int>& labels, Matrix* grad) {
  const auto n = probabilities.cols();
  if (static_cast<std::size_t>(n) != labels.size()) throw InvalidArgument("labels", "count mismatch");
  constexpr double kFloor = 1e-12;
  double loss = 0.0;
  if (grad != nullptr) *grad = Matrix::Zero(probabilities.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto y = labels[static_cast<std::size_t>(j)];
    if (y < 0 || y >= probabilities.rows()) throw InvalidArgument("labels", "label out of range");
    const double p = std::max(probabilities(y, j), kFloor);
    loss -= std::log(p);
    if (grad != nullptr) (*grad)(y, j) = -1.0 / (p * static_cast<double>(n));
  }
  return loss / static_cast<double>(n);
}

}  // namespace hedge::neural
