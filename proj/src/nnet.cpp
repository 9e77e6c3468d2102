#include "posenorm/nnet.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace posenorm {

namespace {

template <typename T>
using MatCM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;
template <typename T>
using MapRM = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using CMapRM = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using MapCM = Eigen::Map<MatCM<T>>;
template <typename T>
using CMapCM = Eigen::Map<const MatCM<T>>;

int pad_of(const ConvShape& cs) { return cs.pad == PadMode::same ? (cs.kh - 1) / 2 : 0; }

void out_dims(const ConvShape& cs, int h, int w, int& oh, int& ow) {
  int p = pad_of(cs);
  oh = (h + 2 * p - cs.kh) / cs.stride + 1;
  ow = (w + 2 * p - cs.kw) / cs.stride + 1;
  if (oh <= 0 || ow <= 0) throw ShapeMismatch("conv output would be empty");
}

// Unfold input patches into a (cin*kh*kw) x (oh*ow) column-major matrix.
template <typename T>
void im2col(const Tensor<T>& x, const ConvShape& cs, std::vector<T>& col) {
  int oh, ow;
  out_dims(cs, x.h, x.w, oh, ow);
  const int p = pad_of(cs);
  const int krows = cs.cin * cs.kh * cs.kw;
  const size_t n = static_cast<size_t>(oh) * ow;
  col.assign(static_cast<size_t>(krows) * n, T(0));

  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      T* dst = col.data() + (static_cast<size_t>(oy) * ow + ox) * krows;
      int iy0 = oy * cs.stride - p;
      int ix0 = ox * cs.stride - p;
      size_t r = 0;
      for (int ci = 0; ci < cs.cin; ++ci) {
        const T* plane = x.plane(ci);
        for (int ky = 0; ky < cs.kh; ++ky) {
          int iy = iy0 + ky;
          if (iy < 0 || iy >= x.h) {
            r += cs.kw;
            continue;
          }
          const T* row = plane + static_cast<size_t>(iy) * x.w;
          for (int kx = 0; kx < cs.kw; ++kx, ++r) {
            int ix = ix0 + kx;
            if (ix >= 0 && ix < x.w) dst[r] = row[ix];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add patch gradients back onto the input grid.
template <typename T>
void col2im(const T* col, const ConvShape& cs, Tensor<T>& dx) {
  int oh, ow;
  out_dims(cs, dx.h, dx.w, oh, ow);
  const int p = pad_of(cs);
  const int krows = cs.cin * cs.kh * cs.kw;

  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const T* src = col + (static_cast<size_t>(oy) * ow + ox) * krows;
      int iy0 = oy * cs.stride - p;
      int ix0 = ox * cs.stride - p;
      size_t r = 0;
      for (int ci = 0; ci < cs.cin; ++ci) {
        T* plane = dx.plane(ci);
        for (int ky = 0; ky < cs.kh; ++ky) {
          int iy = iy0 + ky;
          if (iy < 0 || iy >= dx.h) {
            r += cs.kw;
            continue;
          }
          T* row = plane + static_cast<size_t>(iy) * dx.w;
          for (int kx = 0; kx < cs.kw; ++kx, ++r) {
            int ix = ix0 + kx;
            if (ix >= 0 && ix < dx.w) row[ix] += src[r];
          }
        }
      }
    }
  }
}

bool is_pointwise(const ConvShape& cs) { return cs.kh == 1 && cs.kw == 1 && cs.stride == 1; }

template <typename T>
Tensor<T> conv_forward(const Layer<T>& l, const Tensor<T>& x, std::vector<T>& col) {
  const ConvShape& cs = l.conv;
  if (x.c != cs.cin) throw ShapeMismatch("conv input channels mismatch");
  int oh, ow;
  out_dims(cs, x.h, x.w, oh, ow);
  Tensor<T> y(cs.cout, oh, ow);
  const size_t n = y.plane_size();
  const int krows = cs.cin * cs.kh * cs.kw;

  CMapRM<T> wm(l.w.data(), cs.cout, krows);
  MapRM<T> ym(y.v.data(), cs.cout, n);
  if (is_pointwise(cs)) {
    CMapRM<T> xm(x.v.data(), cs.cin, n);
    ym.noalias() = wm * xm;
  } else {
    im2col(x, cs, col);
    CMapCM<T> cm(col.data(), krows, n);
    ym.noalias() = wm * cm;
  }
  for (int co = 0; co < cs.cout; ++co) ym.row(co).array() += l.b[co];
  return y;
}

template <typename T>
Tensor<T> conv_backward(Layer<T>& l, const Tensor<T>& x, const std::vector<T>& col,
                        const Tensor<T>& dy, bool accumulate) {
  const ConvShape& cs = l.conv;
  const size_t n = dy.plane_size();
  const int krows = cs.cin * cs.kh * cs.kw;

  if (!accumulate) {
    std::fill(l.gw.begin(), l.gw.end(), T(0));
    std::fill(l.gb.begin(), l.gb.end(), T(0));
  }
  CMapRM<T> dym(dy.v.data(), cs.cout, n);
  MapRM<T> gwm(l.gw.data(), cs.cout, krows);
  for (int co = 0; co < cs.cout; ++co) l.gb[co] += dym.row(co).sum();

  Tensor<T> dx(x.c, x.h, x.w);
  CMapRM<T> wm(l.w.data(), cs.cout, krows);
  if (is_pointwise(cs)) {
    CMapRM<T> xm(x.v.data(), cs.cin, n);
    gwm.noalias() += dym * xm.transpose();
    MapRM<T> dxm(dx.v.data(), cs.cin, n);
    dxm.noalias() = wm.transpose() * dym;
  } else {
    CMapCM<T> cm(col.data(), krows, n);
    gwm.noalias() += dym * cm.transpose();
    MatCM<T> dcol(krows, n);
    dcol.noalias() = wm.transpose() * dym;
    col2im(dcol.data(), cs, dx);
  }
  return dx;
}

template <typename T>
inline T sigmoid_like_eval(T x, T w, T b) {
  return T(1) / (T(1) + std::exp(-(w * x + b)));
}

}  // namespace

template <typename T>
void add_conv(TinyNet<T>& net, int kh, int kw, int cin, int cout, int stride, PadMode pad) {
  if (pad == PadMode::same && (kh % 2 == 0 || kw % 2 == 0)) {
    throw ShapeMismatch("same padding requires odd kernels");
  }
  Layer<T> l;
  l.kind = LayerKind::conv2d;
  l.conv = {kh, kw, cin, cout, stride, pad};
  size_t nw = static_cast<size_t>(cout) * cin * kh * kw;
  l.w.assign(nw, T(0));
  l.b.assign(cout, T(0));
  l.gw.assign(nw, T(0));
  l.gb.assign(cout, T(0));
  net.layers.push_back(std::move(l));
  if (net.in_c == 0 && net.layers.size() == 1) net.in_c = cin;
}

template <typename T>
void add_relu(TinyNet<T>& net) {
  Layer<T> l;
  l.kind = LayerKind::relu;
  net.layers.push_back(std::move(l));
}

template <typename T>
void add_upsample2x(TinyNet<T>& net) {
  Layer<T> l;
  l.kind = LayerKind::upsample2x;
  net.layers.push_back(std::move(l));
}

template <typename T>
void add_sigmoid_like(TinyNet<T>& net) {
  Layer<T> l;
  l.kind = LayerKind::sigmoid_like;
  l.w.assign(1, T(1));
  l.b.assign(1, T(0));
  l.gw.assign(1, T(0));
  l.gb.assign(1, T(0));
  net.layers.push_back(std::move(l));
}

template <typename T>
Tensor<T> upsample2x(const Tensor<T>& x) {
  Tensor<T> y(x.c, x.h * 2, x.w * 2);
  for (int c = 0; c < x.c; ++c) {
    const T* in = x.plane(c);
    T* out = y.plane(c);
    for (int yy = 0; yy < y.h; ++yy) {
      const T* irow = in + static_cast<size_t>(yy / 2) * x.w;
      T* orow = out + static_cast<size_t>(yy) * y.w;
      for (int xx = 0; xx < y.w; ++xx) orow[xx] = irow[xx / 2];
    }
  }
  return y;
}

template <typename T>
Tensor<T> upsample2x_backward(const Tensor<T>& g) {
  if (g.h % 2 != 0 || g.w % 2 != 0) throw ShapeMismatch("upsample2x gradient must be even-sized");
  Tensor<T> dx(g.c, g.h / 2, g.w / 2, T(0));
  for (int c = 0; c < g.c; ++c) {
    const T* in = g.plane(c);
    T* out = dx.plane(c);
    for (int yy = 0; yy < g.h; ++yy) {
      const T* irow = in + static_cast<size_t>(yy) * g.w;
      T* orow = out + static_cast<size_t>(yy / 2) * dx.w;
      for (int xx = 0; xx < g.w; ++xx) orow[xx / 2] += irow[xx];
    }
  }
  return dx;
}

template <typename T>
Activations<T> forward(const TinyNet<T>& net, const Tensor<T>& x) {
  if (net.in_c != 0 && x.c != net.in_c) throw ShapeMismatch("network input channels mismatch");
  Activations<T> acts;
  acts.a.reserve(net.layers.size() + 1);
  acts.cols.resize(net.layers.size());
  acts.a.push_back(x);
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const Layer<T>& l = net.layers[i];
    const Tensor<T>& in = acts.a.back();
    switch (l.kind) {
      case LayerKind::conv2d:
        acts.a.push_back(conv_forward(l, in, acts.cols[i]));
        break;
      case LayerKind::relu: {
        Tensor<T> y = in;
        for (T& v : y.v) v = v > T(0) ? v : T(0);
        acts.a.push_back(std::move(y));
        break;
      }
      case LayerKind::upsample2x:
        acts.a.push_back(upsample2x(in));
        break;
      case LayerKind::sigmoid_like: {
        Tensor<T> y(in.c, in.h, in.w);
        const T w = l.w[0], b = l.b[0];
        for (size_t k = 0; k < in.v.size(); ++k) y.v[k] = sigmoid_like_eval(in.v[k], w, b);
        acts.a.push_back(std::move(y));
        break;
      }
    }
  }
  return acts;
}

template <typename T>
Tensor<T> backprop(TinyNet<T>& net, const Activations<T>& acts, const Tensor<T>& grad_out,
                   bool accumulate) {
  if (acts.a.size() != net.layers.size() + 1) throw ShapeMismatch("activations do not match net");
  if (!grad_out.same_shape(acts.a.back())) throw ShapeMismatch("output gradient shape mismatch");

  Tensor<T> g = grad_out;
  for (int i = static_cast<int>(net.layers.size()) - 1; i >= 0; --i) {
    Layer<T>& l = net.layers[i];
    const Tensor<T>& in = acts.a[i];
    switch (l.kind) {
      case LayerKind::conv2d:
        g = conv_backward(l, in, acts.cols[i], g, accumulate);
        break;
      case LayerKind::relu: {
        Tensor<T> dx = g;
        for (size_t k = 0; k < in.v.size(); ++k) {
          if (in.v[k] <= T(0)) dx.v[k] = T(0);
        }
        g = std::move(dx);
        break;
      }
      case LayerKind::upsample2x:
        g = upsample2x_backward(g);
        break;
      case LayerKind::sigmoid_like: {
        const T w = l.w[0], b = l.b[0];
        if (!accumulate) {
          l.gw[0] = T(0);
          l.gb[0] = T(0);
        }
        Tensor<T> dx(in.c, in.h, in.w);
        T gw = T(0), gb = T(0);
        for (size_t k = 0; k < in.v.size(); ++k) {
          T p = acts.a[i + 1].v[k];
          T dsig = p * (T(1) - p);  // d/dz of sigmoid at z = w x + b
          T gz = g.v[k] * dsig;
          dx.v[k] = gz * w;
          gw += gz * in.v[k];
          gb += gz;
        }
        l.gw[0] += gw;
        l.gb[0] += gb;
        g = std::move(dx);
        break;
      }
    }
  }
  return g;
}

template <typename T>
double loss_with_grad(const LossSpec<T>& loss, const Tensor<T>& y, Tensor<T>& dy) {
  if (loss.target == nullptr) throw ShapeMismatch("loss target missing");
  const Tensor<T>& t = *loss.target;
  if (!t.same_shape(y)) throw ShapeMismatch("loss target shape mismatch");
  dy = Tensor<T>(y.c, y.h, y.w, T(0));
  const size_t plane = y.plane_size();

  double sum = 0.0;
  double denom = 1.0;

  if (loss.kind == LossKind::sigmoid_xent_all) {
    const double eps = 1e-7;
    for (size_t k = 0; k < y.v.size(); ++k) {
      double p = static_cast<double>(y.v[k]);
      double tv = static_cast<double>(t.v[k]);
      bool clamped = p < eps || p > 1.0 - eps;
      double pc = std::min(std::max(p, eps), 1.0 - eps);
      sum -= tv * std::log(pc) + (1.0 - tv) * std::log(1.0 - pc);
      dy.v[k] = clamped ? T(0) : static_cast<T>((pc - tv) / (pc * (1.0 - pc)));
    }
    switch (loss.norm) {
      case LossNorm::sum: denom = 1.0; break;
      case LossNorm::mean_pixels: denom = static_cast<double>(plane); break;
      case LossNorm::mean_all: denom = static_cast<double>(y.v.size()); break;
    }
  } else {
    // Per-pixel multiclass cross-entropy against a one-hot target partition.
    // Pixels whose label channel is an occluded joint are excluded; the last
    // channel is treated as background and always supervised.
    size_t included = 0;
    std::vector<double> p(y.c);
    for (size_t px = 0; px < plane; ++px) {
      int label = 0;
      T best = t.v[px];
      for (int c = 1; c < y.c; ++c) {
        if (t.v[plane * c + px] > best) {
          best = t.v[plane * c + px];
          label = c;
        }
      }
      if (loss.visible != nullptr && label < y.c - 1 &&
          label < static_cast<int>(loss.visible->size()) && !(*loss.visible)[label]) {
        continue;
      }
      ++included;
      double mx = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < y.c; ++c) mx = std::max(mx, static_cast<double>(y.v[plane * c + px]));
      double z = 0.0;
      for (int c = 0; c < y.c; ++c) {
        p[c] = std::exp(static_cast<double>(y.v[plane * c + px]) - mx);
        z += p[c];
      }
      for (int c = 0; c < y.c; ++c) p[c] /= z;
      sum -= std::log(std::max(p[label], 1e-300));
      for (int c = 0; c < y.c; ++c) {
        dy.v[plane * c + px] = static_cast<T>(p[c] - (c == label ? 1.0 : 0.0));
      }
    }
    switch (loss.norm) {
      case LossNorm::sum: denom = 1.0; break;
      case LossNorm::mean_pixels: denom = std::max<double>(1.0, static_cast<double>(included)); break;
      case LossNorm::mean_all:
        denom = std::max<double>(1.0, static_cast<double>(included) * y.c);
        break;
    }
  }

  const T scale = static_cast<T>(1.0 / denom);
  for (T& g : dy.v) g *= scale;
  return sum / denom;
}

template <typename T>
double backward(TinyNet<T>& net, const Activations<T>& acts, const LossSpec<T>& loss) {
  Tensor<T> dy;
  double value = loss_with_grad(loss, acts.output(), dy);
  backprop(net, acts, dy, /*accumulate=*/false);
  return value;
}

template <typename T>
void zero_grads(TinyNet<T>& net) {
  for (Layer<T>& l : net.layers) {
    std::fill(l.gw.begin(), l.gw.end(), T(0));
    std::fill(l.gb.begin(), l.gb.end(), T(0));
  }
}

template <typename T>
void sgd_step(TinyNet<T>& net, double lr, double momentum) {
  for (Layer<T>& l : net.layers) {
    if (l.w.empty()) continue;
    if (momentum != 0.0) {
      if (l.mw.size() != l.w.size()) l.mw.assign(l.w.size(), T(0));
      if (l.mb.size() != l.b.size()) l.mb.assign(l.b.size(), T(0));
      for (size_t i = 0; i < l.w.size(); ++i) {
        l.mw[i] = static_cast<T>(momentum) * l.mw[i] + l.gw[i];
        l.w[i] -= static_cast<T>(lr) * l.mw[i];
      }
      for (size_t i = 0; i < l.b.size(); ++i) {
        l.mb[i] = static_cast<T>(momentum) * l.mb[i] + l.gb[i];
        l.b[i] -= static_cast<T>(lr) * l.mb[i];
      }
    } else {
      for (size_t i = 0; i < l.w.size(); ++i) l.w[i] -= static_cast<T>(lr) * l.gw[i];
      for (size_t i = 0; i < l.b.size(); ++i) l.b[i] -= static_cast<T>(lr) * l.gb[i];
    }
  }
}

template <typename T>
void init_gaussian(TinyNet<T>& net, double variance, uint64_t seed) {
  if (!(variance > 0.0)) throw Error("init variance must be positive");
  Rng rng(seed);
  const double stddev = std::sqrt(variance);
  for (Layer<T>& l : net.layers) {
    if (l.kind == LayerKind::conv2d) {
      for (T& w : l.w) w = static_cast<T>(rng.normal(0.0, stddev));
      std::fill(l.b.begin(), l.b.end(), T(0));
    } else if (l.kind == LayerKind::sigmoid_like) {
      l.w[0] = T(1);
      l.b[0] = T(0);
    }
    std::fill(l.gw.begin(), l.gw.end(), T(0));
    std::fill(l.gb.begin(), l.gb.end(), T(0));
    l.mw.clear();
    l.mb.clear();
  }
}

template <typename T>
ScoreMap net_apply(const TinyNet<T>& net, const ScoreMap& m) {
  Activations<T> acts = forward(net, Tensor<T>::from_scoremap(m));
  return acts.output().to_scoremap();
}

namespace {

void put_u32(std::ofstream& f, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::ifstream& f) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  if (!f) throw ParseError("truncated TNET file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

template <typename T>
void put_params(std::ofstream& f, const std::vector<T>& v) {
  for (T x : v) {
    float fx = static_cast<float>(x);
    f.write(reinterpret_cast<const char*>(&fx), 4);
  }
}

template <typename T>
void get_params(std::ifstream& f, std::vector<T>& v) {
  for (T& x : v) {
    float fx;
    f.read(reinterpret_cast<char*>(&fx), 4);
    if (!f) throw ParseError("truncated TNET parameters");
    x = static_cast<T>(fx);
  }
}

}  // namespace

template <typename T>
void save_tnet(const std::string& path, const TinyNet<T>& net) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  f.write("TNET", 4);
  put_u32(f, 1);
  put_u32(f, static_cast<uint32_t>(net.layers.size()));
  for (const Layer<T>& l : net.layers) {
    unsigned char kind = static_cast<unsigned char>(l.kind);
    f.write(reinterpret_cast<const char*>(&kind), 1);
    if (l.kind == LayerKind::conv2d) {
      unsigned char nd = 6;
      f.write(reinterpret_cast<const char*>(&nd), 1);
      put_u32(f, static_cast<uint32_t>(l.conv.kh));
      put_u32(f, static_cast<uint32_t>(l.conv.kw));
      put_u32(f, static_cast<uint32_t>(l.conv.cin));
      put_u32(f, static_cast<uint32_t>(l.conv.cout));
      put_u32(f, static_cast<uint32_t>(l.conv.stride));
      put_u32(f, static_cast<uint32_t>(l.conv.pad));
    } else {
      unsigned char nd = 0;
      f.write(reinterpret_cast<const char*>(&nd), 1);
    }
    put_params(f, l.w);
    put_params(f, l.b);
  }
  if (!f) throw IoError("short write: " + path);
}

template <typename T>
TinyNet<T> load_tnet(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for read: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "TNET", 4) != 0) throw ParseError("bad TNET magic in " + path, 0);
  uint32_t version = get_u32(f);
  if (version != 1) throw ParseError("unsupported TNET version", 4);
  uint32_t count = get_u32(f);
  TinyNet<T> net;
  for (uint32_t i = 0; i < count; ++i) {
    unsigned char kind_raw, nd;
    f.read(reinterpret_cast<char*>(&kind_raw), 1);
    f.read(reinterpret_cast<char*>(&nd), 1);
    if (!f) throw ParseError("truncated TNET layer header");
    std::vector<uint32_t> dims(nd);
    for (auto& d : dims) d = get_u32(f);
    switch (static_cast<LayerKind>(kind_raw)) {
      case LayerKind::conv2d: {
        if (nd != 6) throw ParseError("conv layer needs 6 dims");
        add_conv(net, static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                 static_cast<int>(dims[2]), static_cast<int>(dims[3]), static_cast<int>(dims[4]),
                 static_cast<PadMode>(dims[5]));
        break;
      }
      case LayerKind::relu:
        add_relu(net);
        break;
      case LayerKind::upsample2x:
        add_upsample2x(net);
        break;
      case LayerKind::sigmoid_like:
        add_sigmoid_like(net);
        break;
      default:
        throw ParseError("unknown TNET layer kind");
    }
    Layer<T>& l = net.layers.back();
    get_params(f, l.w);
    get_params(f, l.b);
  }
  return net;
}

// clang-format off
template void add_conv<float>(TinyNet<float>&, int, int, int, int, int, PadMode);
template void add_conv<double>(TinyNet<double>&, int, int, int, int, int, PadMode);
template void add_relu<float>(TinyNet<float>&);
template void add_relu<double>(TinyNet<double>&);
template void add_upsample2x<float>(TinyNet<float>&);
template void add_upsample2x<double>(TinyNet<double>&);
template void add_sigmoid_like<float>(TinyNet<float>&);
template void add_sigmoid_like<double>(TinyNet<double>&);
template Tensor<float> upsample2x<float>(const Tensor<float>&);
template Tensor<double> upsample2x<double>(const Tensor<double>&);
template Tensor<float> upsample2x_backward<float>(const Tensor<float>&);
template Tensor<double> upsample2x_backward<double>(const Tensor<double>&);
template Activations<float> forward<float>(const TinyNet<float>&, const Tensor<float>&);
template Activations<double> forward<double>(const TinyNet<double>&, const Tensor<double>&);
template double loss_with_grad<float>(const LossSpec<float>&, const Tensor<float>&, Tensor<float>&);
template double loss_with_grad<double>(const LossSpec<double>&, const Tensor<double>&, Tensor<double>&);
template Tensor<float> backprop<float>(TinyNet<float>&, const Activations<float>&, const Tensor<float>&, bool);
template Tensor<double> backprop<double>(TinyNet<double>&, const Activations<double>&, const Tensor<double>&, bool);
template double backward<float>(TinyNet<float>&, const Activations<float>&, const LossSpec<float>&);
template double backward<double>(TinyNet<double>&, const Activations<double>&, const LossSpec<double>&);
template void zero_grads<float>(TinyNet<float>&);
template void zero_grads<double>(TinyNet<double>&);
template void sgd_step<float>(TinyNet<float>&, double, double);
template void sgd_step<double>(TinyNet<double>&, double, double);
template void init_gaussian<float>(TinyNet<float>&, double, uint64_t);
template void init_gaussian<double>(TinyNet<double>&, double, uint64_t);
template ScoreMap net_apply<float>(const TinyNet<float>&, const ScoreMap&);
template ScoreMap net_apply<double>(const TinyNet<double>&, const ScoreMap&);
template void save_tnet<float>(const std::string&, const TinyNet<float>&);
template void save_tnet<double>(const std::string&, const TinyNet<double>&);
template TinyNet<float> load_tnet<float>(const std::string&);
template TinyNet<double> load_tnet<double>(const std::string&);
// clang-format on

template struct Tensor<float>;
template struct Tensor<double>;

}  // namespace posenorm
