#pragma once

/**
 * Minimal dense-network substrate: batched forward, exact layer-wise
 * reverse-mode gradients, Adam, Polyak soft updates, and a text checkpoint
 * format.  Architectures are fixed and small, so backprop is hand-rolled per
 * layer rather than going through a general autodiff graph — every gradient
 * here is cross-checked against central finite differences in the tests.
 *
 * Convention: weights are (out × in), a batch is a matrix whose COLUMNS are
 * samples, and parameter gradients are SUMS over the batch (callers divide by
 * the batch size when they want means).
 */

#include <Eigen/Dense>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nomarl/rng.hpp"

namespace nomarl {

enum class Activation { Identity, Relu, Tanh };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
  }
  throw std::logic_error("unknown activation");
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::Identity;
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation name: " + s);
}

struct DenseLayer {
  Eigen::MatrixXd weights;  // out × in
  Eigen::VectorXd bias;     // out
  Activation activation = Activation::Identity;
};

/** Feedforward stack of dense layers. */
class DenseNet {
 public:
  DenseNet() = default;

  /**
   * Glorot-uniform initialized network.  `sizes` runs input → output, so it
   * has one more entry than there are layers; `activations` has one entry per
   * layer.  Draw order is fixed (layer by layer, column-major within a
   * weight matrix) so a seed pins the parameters exactly.
   */
  DenseNet(const std::vector<int>& sizes, const std::vector<Activation>& activations,
           RngStream& rng) {
    if (sizes.size() < 2) throw std::invalid_argument("need at least input and output sizes");
    if (activations.size() != sizes.size() - 1)
      throw std::invalid_argument("one activation per layer required");
    for (int s : sizes)
      if (s < 1) throw std::invalid_argument("layer sizes must be >= 1");
    layers_.resize(sizes.size() - 1);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const int in = sizes[l], out = sizes[l + 1];
      const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
      auto& layer = layers_[l];
      layer.weights.resize(out, in);
      for (int c = 0; c < in; ++c)
        for (int r = 0; r < out; ++r) layer.weights(r, c) = rng.uniform(-limit, limit);
      layer.bias = Eigen::VectorXd::Zero(out);
      layer.activation = activations[l];
    }
  }

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  int input_size() const {
    require_nonempty();
    return static_cast<int>(layers_.front().weights.cols());
  }
  int output_size() const {
    require_nonempty();
    return static_cast<int>(layers_.back().weights.rows());
  }

  /** Batched forward pass; columns are samples. */
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const {
    require_nonempty();
    if (input.rows() != input_size())
      throw std::invalid_argument("input rows do not match network input size");
    Eigen::MatrixXd x = input;
    for (const auto& layer : layers_) {
      Eigen::MatrixXd z = (layer.weights * x).colwise() + layer.bias;
      x = apply_activation(z, layer.activation);
    }
    return x;
  }

 private:
  void require_nonempty() const {
    if (layers_.empty()) throw std::logic_error("network has no layers");
  }

  static Eigen::MatrixXd apply_activation(const Eigen::MatrixXd& z, Activation a) {
    switch (a) {
      case Activation::Identity: return z;
      case Activation::Relu: return z.cwiseMax(0.0);
      case Activation::Tanh: return z.array().tanh().matrix();
    }
    throw std::logic_error("unknown activation");
  }

  std::vector<DenseLayer> layers_;
};

/** Per-layer activations retained by a forward pass for use in backward. */
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;   // input to each layer
  std::vector<Eigen::MatrixXd> preacts;  // W x + b per layer
  Eigen::MatrixXd output;
};

inline ForwardCache forward_cached(const DenseNet& net, const Eigen::MatrixXd& input) {
  if (input.rows() != net.input_size())
    throw std::invalid_argument("input rows do not match network input size");
  ForwardCache cache;
  Eigen::MatrixXd x = input;
  for (const auto& layer : net.layers()) {
    cache.inputs.push_back(x);
    Eigen::MatrixXd z = (layer.weights * x).colwise() + layer.bias;
    cache.preacts.push_back(z);
    switch (layer.activation) {
      case Activation::Identity: x = z; break;
      case Activation::Relu: x = z.cwiseMax(0.0); break;
      case Activation::Tanh: x = z.array().tanh().matrix(); break;
    }
  }
  cache.output = x;
  return cache;
}

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;  // same shapes as the layer weights
  std::vector<Eigen::VectorXd> biases;
  Eigen::MatrixXd input;  // gradient w.r.t. the network input, per column
};

/**
 * Exact reverse-mode pass.  `upstream` is dLoss/dOutput with the same shape
 * as the forward output; parameter gradients come back summed over the batch.
 */
inline Gradients backward(const DenseNet& net, const ForwardCache& cache,
                          const Eigen::MatrixXd& upstream) {
  const auto& layers = net.layers();
  if (cache.inputs.size() != layers.size())
    throw std::invalid_argument("cache does not match network depth");
  if (upstream.rows() != cache.output.rows() || upstream.cols() != cache.output.cols())
    throw std::invalid_argument("upstream gradient shape mismatch");

  Gradients grads;
  grads.weights.resize(layers.size());
  grads.biases.resize(layers.size());

  Eigen::MatrixXd delta = upstream;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const Eigen::MatrixXd& z = cache.preacts[l];
    switch (layer.activation) {
      case Activation::Identity: break;
      case Activation::Relu:
        delta = delta.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
        break;
      case Activation::Tanh:
        delta = delta.cwiseProduct((1.0 - z.array().tanh().square()).matrix());
        break;
    }
    grads.weights[l] = delta * cache.inputs[l].transpose();
    grads.biases[l] = delta.rowwise().sum();
    delta = (layer.weights.transpose() * delta).eval();
  }
  grads.input = delta;
  return grads;
}

/** Adam with bias correction; moments live layer-by-layer beside the net. */
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step_count = 0;
  std::vector<Eigen::MatrixXd> m_weights, v_weights;
  std::vector<Eigen::VectorXd> m_biases, v_biases;

  AdamState() = default;

  explicit AdamState(const DenseNet& net, double lr = 1e-3) : learning_rate(lr) {
    for (const auto& layer : net.layers()) {
      m_weights.push_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
      v_weights.push_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
      m_biases.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
      v_biases.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
    }
  }
};

inline void adam_step(AdamState& state, DenseNet& net, const Gradients& grads) {
  auto& layers = net.layers();
  if (grads.weights.size() != layers.size() || state.m_weights.size() != layers.size())
    throw std::invalid_argument("adam_step: state/gradient depth mismatch");
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto update = [&](auto& m, auto& v, auto& param, const auto& g) {
      m = state.beta1 * m + (1.0 - state.beta1) * g;
      v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
      param.array() -= state.learning_rate * (m / bc1).array() /
                       ((v / bc2).array().sqrt() + state.epsilon);
    };
    update(state.m_weights[l], state.v_weights[l], layers[l].weights, grads.weights[l]);
    update(state.m_biases[l], state.v_biases[l], layers[l].bias, grads.biases[l]);
  }
}

/** target ← tau·online + (1−tau)·target, elementwise. */
inline void soft_update(DenseNet& target, const DenseNet& online, double tau) {
  if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("tau must be in [0, 1]");
  auto& t = target.layers();
  const auto& o = online.layers();
  if (t.size() != o.size()) throw std::invalid_argument("soft_update: depth mismatch");
  for (std::size_t l = 0; l < t.size(); ++l) {
    if (t[l].weights.rows() != o[l].weights.rows() || t[l].weights.cols() != o[l].weights.cols())
      throw std::invalid_argument("soft_update: shape mismatch");
    t[l].weights = tau * o[l].weights + (1.0 - tau) * t[l].weights;
    t[l].bias = tau * o[l].bias + (1.0 - tau) * t[l].bias;
  }
}

/**
 * Text checkpoint: a header line, then per layer its shape, activation,
 * row-major weights, and biases.  Values are printed with 17 significant
 * digits, which round-trips IEEE doubles exactly.
 */
inline void save_network(const DenseNet& net, std::ostream& os) {
  os << "densenet 1 " << net.layers().size() << "\n";
  char buf[64];
  for (const auto& layer : net.layers()) {
    os << layer.weights.rows() << " " << layer.weights.cols() << " "
       << to_string(layer.activation) << "\n";
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", layer.weights(r, c));
        os << buf << (c + 1 < layer.weights.cols() ? " " : "");
      }
      os << "\n";
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      std::snprintf(buf, sizeof buf, "%.17g", layer.bias(r));
      os << buf << (r + 1 < layer.bias.size() ? " " : "");
    }
    os << "\n";
  }
}

inline DenseNet load_network(std::istream& is) {
  std::string magic;
  int version = 0;
  std::size_t depth = 0;
  if (!(is >> magic >> version >> depth) || magic != "densenet" || version != 1)
    throw std::runtime_error("not a recognizable network checkpoint");
  DenseNet net;
  net.layers().resize(depth);
  for (auto& layer : net.layers()) {
    Eigen::Index rows = 0, cols = 0;
    std::string act;
    if (!(is >> rows >> cols >> act) || rows < 1 || cols < 1)
      throw std::runtime_error("corrupt layer header in checkpoint");
    layer.activation = activation_from_string(act);
    layer.weights.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        if (!(is >> layer.weights(r, c))) throw std::runtime_error("truncated weight block");
    layer.bias.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r)
      if (!(is >> layer.bias(r))) throw std::runtime_error("truncated bias block");
  }
  return net;
}

inline std::string save_network_string(const DenseNet& net) {
  std::ostringstream os;
  save_network(net, os);
  return os.str();
}

inline DenseNet load_network_string(const std::string& text) {
  std::istringstream is(text);
  return load_network(is);
}

}  // namespace nomarl
