#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "scfn/layers.hpp"
#include "scfn/rng.hpp"
#include "scfn/tensor.hpp"

namespace scfn {

/// Raised for unreadable or corrupt model files (magic, version,
/// truncation, checksum).
struct ModelFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a model file parses but its parameter table does not match
/// the expected layer stack.
struct ModelShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The fixed classifier stack:
///   Conv3x3(1->c1)+ReLU, Conv3x3(c1->c2)+ReLU, Conv3x3(c2->c3)+ReLU,
///   GlobalAvgPool, Dropout(rate), Dense(c3->hidden)+ReLU, Dropout(rate),
///   Dense(hidden->1)+Sigmoid.
/// Default widths are the production configuration (32,32,64,32) on
/// 128x128 single-channel input; reduced widths back the gradient-check
/// harness. Parameters are plain tensors; copying a Network deep-copies.
template <typename T>
class Network {
public:
  ConvParams<T> conv1, conv2, conv3;
  DenseParams<T> fc1, fc2;
  double dropout_rate = 0.5;
  int in_h = 128, in_w = 128;

  struct Config {
    int in_h = 128, in_w = 128;
    int c1 = 32, c2 = 32, c3 = 64, hidden = 32;
    double dropout_rate = 0.5;
  };

  /// Deterministic initialization from a stream: He draws
  /// (std = sqrt(2/fan_in)) for the ReLU layers, std = sqrt(1/fan_in) for
  /// the sigmoid output, zero biases.
  static Network init(RngStream rng, const Config& cfg = Config{}) {
    if (cfg.in_h < 7 || cfg.in_w < 7)
      throw std::invalid_argument("Network: input must be at least 7x7");
    Network net;
    net.in_h = cfg.in_h;
    net.in_w = cfg.in_w;
    net.dropout_rate = cfg.dropout_rate;
    net.conv1 = init_conv(rng.derive(1), 1, cfg.c1);
    net.conv2 = init_conv(rng.derive(2), cfg.c1, cfg.c2);
    net.conv3 = init_conv(rng.derive(3), cfg.c2, cfg.c3);
    net.fc1 = init_dense(rng.derive(4), cfg.c3, cfg.hidden, 2.0);
    net.fc2 = init_dense(rng.derive(5), cfg.hidden, 1, 1.0);
    return net;
  }

  /// Saved forward values needed by backward.
  struct Cache {
    Tensor<T> x;            // network input
    Tensor<T> a1, a2, a3;   // ReLU outputs of the conv blocks
    Tensor<T> d1_in;        // dropout(pooled), input to fc1
    Tensor<T> mask1;
    Tensor<T> h1;           // ReLU output of fc1
    Tensor<T> d2_in;        // dropout(h1), input to fc2
    Tensor<T> mask2;
  };

  struct ForwardResult {
    Tensor<T> probs;   // [N,1], strictly inside (0,1)
    Tensor<T> logits;  // [N,1] pre-sigmoid, consumed by the loss
  };

  /// Runs the stack on a batch [N, in_h, in_w, 1]. Train mode draws the
  /// dropout masks from streams derived from rng and fills cache; eval
  /// mode is a pure function of the input and consumes no randomness.
  ForwardResult forward(const Tensor<T>& batch, Mode mode, RngStream rng,
                        Cache* cache = nullptr) const {
    if (batch.rank() != 4 || batch.extent(1) != in_h || batch.extent(2) != in_w ||
        batch.extent(3) != 1)
      throw std::invalid_argument(
          "Network: input must be [N," + std::to_string(in_h) + "," +
          std::to_string(in_w) + ",1]");
    const bool train = mode == Mode::kTrain;

    Tensor<T> a1 = relu_forward(conv2d_forward(batch, conv1));
    Tensor<T> a2 = relu_forward(conv2d_forward(a1, conv2));
    Tensor<T> a3 = relu_forward(conv2d_forward(a2, conv3));
    Tensor<T> pooled = gap_forward(a3);

    RngStream s1 = rng.derive(1), s2 = rng.derive(2);
    auto drop1 = dropout_forward(pooled, train ? dropout_rate : 0.0, mode, s1);
    Tensor<T> h1 = relu_forward(dense_forward(drop1.y, fc1));
    auto drop2 = dropout_forward(h1, train ? dropout_rate : 0.0, mode, s2);
    Tensor<T> logits = dense_forward(drop2.y, fc2);

    ForwardResult out{sigmoid_forward(logits), logits};
    if (train && cache != nullptr) {
      cache->x = batch;
      cache->a1 = std::move(a1);
      cache->a2 = std::move(a2);
      cache->a3 = std::move(a3);
      cache->d1_in = std::move(drop1.y);
      cache->mask1 = std::move(drop1.mask);
      cache->h1 = std::move(h1);
      cache->d2_in = std::move(drop2.y);
      cache->mask2 = std::move(drop2.mask);
    }
    return out;
  }

  ForwardResult forward_eval(const Tensor<T>& batch) const {
    return forward(batch, Mode::kEval, RngStream::root(0), nullptr);
  }

  /// Gradients for every parameter, in parameters() order, from the loss
  /// gradient with respect to the logits.
  std::vector<Tensor<T>> backward(const Cache& cache, const Tensor<T>& dlogit) const {
    if (cache.x.empty())
      throw std::invalid_argument("Network: backward requires a train-mode cache");
    DenseGrads<T> g5 = dense_backward(cache.d2_in, fc2, dlogit);
    Tensor<T> d_h1 = dropout_backward(cache.mask2, g5.dx);
    Tensor<T> d_fc1 = relu_backward(cache.h1, d_h1);
    DenseGrads<T> g4 = dense_backward(cache.d1_in, fc1, d_fc1);
    Tensor<T> d_pooled = dropout_backward(cache.mask1, g4.dx);
    Tensor<T> d_a3 = gap_backward(cache.a3.shape(), d_pooled);
    Tensor<T> d_z3 = relu_backward(cache.a3, d_a3);
    ConvGrads<T> g3 = conv2d_backward(cache.a2, conv3, d_z3);
    Tensor<T> d_z2 = relu_backward(cache.a2, g3.dx);
    ConvGrads<T> g2 = conv2d_backward(cache.a1, conv2, d_z2);
    Tensor<T> d_z1 = relu_backward(cache.a1, g2.dx);
    ConvGrads<T> g1 = conv2d_backward(cache.x, conv1, d_z1);

    std::vector<Tensor<T>> grads;
    grads.reserve(10);
    grads.push_back(std::move(g1.dw));
    grads.push_back(std::move(g1.db));
    grads.push_back(std::move(g2.dw));
    grads.push_back(std::move(g2.db));
    grads.push_back(std::move(g3.dw));
    grads.push_back(std::move(g3.db));
    grads.push_back(std::move(g4.dw));
    grads.push_back(std::move(g4.db));
    grads.push_back(std::move(g5.dw));
    grads.push_back(std::move(g5.db));
    return grads;
  }

  /// Parameter tensors in the fixed order used by gradients, the
  /// optimizer, and the model file: conv1 w/b, conv2 w/b, conv3 w/b,
  /// fc1 w/b, fc2 w/b.
  std::vector<Tensor<T>*> parameters() {
    return {&conv1.weights, &conv1.bias, &conv2.weights, &conv2.bias,
            &conv3.weights, &conv3.bias, &fc1.weights,   &fc1.bias,
            &fc2.weights,   &fc2.bias};
  }
  std::vector<const Tensor<T>*> parameters() const {
    return {&conv1.weights, &conv1.bias, &conv2.weights, &conv2.bias,
            &conv3.weights, &conv3.bias, &fc1.weights,   &fc1.bias,
            &fc2.weights,   &fc2.bias};
  }

  /// Precision conversion between normal (float) and check (double) mode.
  template <typename U>
  Network<U> cast() const {
    Network<U> out;
    out.dropout_rate = dropout_rate;
    out.in_h = in_h;
    out.in_w = in_w;
    out.conv1 = {conv1.weights.template cast<U>(), conv1.bias.template cast<U>()};
    out.conv2 = {conv2.weights.template cast<U>(), conv2.bias.template cast<U>()};
    out.conv3 = {conv3.weights.template cast<U>(), conv3.bias.template cast<U>()};
    out.fc1 = {fc1.weights.template cast<U>(), fc1.bias.template cast<U>()};
    out.fc2 = {fc2.weights.template cast<U>(), fc2.bias.template cast<U>()};
    return out;
  }

private:
  static ConvParams<T> init_conv(RngStream rng, int ci, int co) {
    const double std = std::sqrt(2.0 / (9.0 * ci));
    ConvParams<T> p{Tensor<T>({3, 3, ci, co}), Tensor<T>({co})};
    for (std::size_t i = 0; i < p.weights.size(); ++i)
      p.weights[i] = static_cast<T>(rng.next_normal(0.0, std));
    return p;
  }

  static DenseParams<T> init_dense(RngStream rng, int f, int u, double gain) {
    const double std = std::sqrt(gain / f);
    DenseParams<T> p{Tensor<T>({f, u}), Tensor<T>({u})};
    for (std::size_t i = 0; i < p.weights.size(); ++i)
      p.weights[i] = static_cast<T>(rng.next_normal(0.0, std));
    return p;
  }
};

/// Production network on 128x128 input with the (32,32,64,32) widths.
inline Network<float> init_network(RngStream rng) {
  return Network<float>::init(rng);
}

/// Binary model file ("SCFN"): save writes the parameter table, load
/// validates and reconstructs it. Round trips are bitwise.
void save_network(const Network<float>& net, const std::string& path);
Network<float> load_network(const std::string& path);

}  // namespace scfn
