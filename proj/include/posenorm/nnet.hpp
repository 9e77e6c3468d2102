#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "posenorm/common.hpp"
#include "posenorm/rng.hpp"
#include "posenorm/scoremap.hpp"

namespace posenorm {

/// Dense [channels][height][width] activation block. Float for speed in the
/// training path; double for the finite-difference verification path.
template <typename T>
struct Tensor {
  int c = 0, h = 0, w = 0;
  std::vector<T> v;

  Tensor() = default;
  Tensor(int c_, int h_, int w_, T fill = T(0))
      : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, fill) {}

  size_t size() const { return v.size(); }
  size_t plane_size() const { return static_cast<size_t>(h) * w; }
  T* plane(int ci) { return v.data() + plane_size() * ci; }
  const T* plane(int ci) const { return v.data() + plane_size() * ci; }
  bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }

  static Tensor from_scoremap(const ScoreMap& m) {
    Tensor t(m.channels, m.height, m.width);
    for (size_t i = 0; i < t.v.size(); ++i) t.v[i] = static_cast<T>(m.data[i]);
    return t;
  }
  ScoreMap to_scoremap() const {
    ScoreMap m(c, h, w);
    for (size_t i = 0; i < v.size(); ++i) m.data[i] = static_cast<float>(v[i]);
    return m;
  }
};

enum class LayerKind : uint8_t { conv2d = 1, relu = 2, upsample2x = 3, sigmoid_like = 4 };
enum class PadMode : uint8_t { same = 0, valid = 1 };

struct ConvShape {
  int kh = 0, kw = 0, cin = 0, cout = 0, stride = 1;
  PadMode pad = PadMode::same;
};

template <typename T>
struct Layer {
  LayerKind kind = LayerKind::relu;
  ConvShape conv;          // meaningful for conv2d only
  std::vector<T> w, b;     // conv: [cout][cin][kh][kw] weights + [cout] bias;
                           // sigmoid_like: one w and one b
  std::vector<T> gw, gb;   // parameter gradients, shapes mirror w / b
  std::vector<T> mw, mb;   // momentum state, allocated on first use
};

/// Plain sequential stack. in_c pins the expected input channel count
/// (0 = anything); spatial size is free, the stack is fully convolutional.
template <typename T>
struct TinyNet {
  std::vector<Layer<T>> layers;
  int in_c = 0;
  int in_h = 0, in_w = 0;  // advisory; 0 = any

  size_t param_count() const {
    size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }
};

template <typename T>
void add_conv(TinyNet<T>& net, int kh, int kw, int cin, int cout, int stride = 1,
              PadMode pad = PadMode::same);
template <typename T>
void add_relu(TinyNet<T>& net);
template <typename T>
void add_upsample2x(TinyNet<T>& net);
template <typename T>
void add_sigmoid_like(TinyNet<T>& net);

/// Everything backward needs: the input, every intermediate output, and the
/// unfolded conv patches from the forward pass.
template <typename T>
struct Activations {
  std::vector<Tensor<T>> a;            // a[0] = input, a[i+1] = layer i output
  std::vector<std::vector<T>> cols;    // per-layer im2col buffer (conv only)
  const Tensor<T>& output() const { return a.back(); }
};

template <typename T>
Activations<T> forward(const TinyNet<T>& net, const Tensor<T>& x);

enum class LossKind { softmax_xent_visible, sigmoid_xent_all };

/// How the summed loss is scaled: raw sum, per supervised pixel, or per
/// element. The scale also multiplies the gradients.
enum class LossNorm { sum, mean_pixels, mean_all };

template <typename T>
struct LossSpec {
  LossKind kind = LossKind::sigmoid_xent_all;
  const Tensor<T>* target = nullptr;
  const std::vector<uint8_t>* visible = nullptr;  // per joint channel; softmax loss only
  LossNorm norm = LossNorm::mean_pixels;
};

/// Loss value plus d(loss)/d(output) for the given network output.
template <typename T>
double loss_with_grad(const LossSpec<T>& loss, const Tensor<T>& y, Tensor<T>& dy);

/// Backprop an arbitrary output gradient; parameter gradients land in the
/// layers (accumulated or overwritten) and the input gradient is returned.
template <typename T>
Tensor<T> backprop(TinyNet<T>& net, const Activations<T>& acts, const Tensor<T>& grad_out,
                   bool accumulate = false);

/// Loss-driven backward pass; fills every parameter gradient and returns the
/// loss value.
template <typename T>
double backward(TinyNet<T>& net, const Activations<T>& acts, const LossSpec<T>& loss);

template <typename T>
void zero_grads(TinyNet<T>& net);

/// p <- p - lr * g, with optional classical momentum.
template <typename T>
void sgd_step(TinyNet<T>& net, double lr, double momentum = 0.0);

/// Conv weights ~ N(0, variance), biases 0, sigmoid_like starts at w=1, b=0.
template <typename T>
void init_gaussian(TinyNet<T>& net, double variance, uint64_t seed);

/// Nearest-neighbor x2 upsampling and its adjoint, exposed for multi-scale
/// fusion wiring outside a sequential stack.
template <typename T>
Tensor<T> upsample2x(const Tensor<T>& x);
template <typename T>
Tensor<T> upsample2x_backward(const Tensor<T>& grad_out);

/// Run a net over a score map (converts in and out).
template <typename T>
ScoreMap net_apply(const TinyNet<T>& net, const ScoreMap& m);

/// TNET1 checkpoint: magic "TNET", u32 version, u32 layer count, then per
/// layer a kind tag u8, a u8 dim count, the dims as u32, and float32
/// parameters in declaration order.
template <typename T>
void save_tnet(const std::string& path, const TinyNet<T>& net);
template <typename T>
TinyNet<T> load_tnet(const std::string& path);

extern template struct Tensor<float>;
extern template struct Tensor<double>;

}  // namespace posenorm
