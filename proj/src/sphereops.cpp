#include "icosph/sphereops.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace icosph {

SphereTensor make_sphere_tensor(int r, int channels) {
  if (r < 0 || r > 10 || channels <= 0)
    throw std::invalid_argument("make_sphere_tensor: bad arguments");
  SphereTensor t;
  t.r = r;
  t.channels = channels;
  const int W = 1 << r;
  for (auto& c : t.comp) c = Tensor({channels, 2 * W, W});
  return t;
}

namespace {

// Source of extended-lattice position (a,b) of component i: either an owned
// cell of some component, or a literal zero (pole corners and the two
// dead padding slots).
struct PadSource {
  bool zero;
  int comp, row, col;
};

PadSource pad_source(int i, int a, int b, int W) {
  if (a >= 1 && a <= 2 * W && b >= 1 && b <= W)
    return {false, i, a - 1, b - 1};
  const int west = (i + 4) % 5;
  const int east = (i + 1) % 5;
  if (a == 0 && b == W) return {true, 0, 0, 0};        // north pole slot
  if (a == 2 * W && b == 0) return {true, 0, 0, 0};    // south pole slot
  if (a == 0 && b >= 0 && b <= W - 1) return {false, west, W - b - 1, W - 1};
  if (b == 0 && a >= 1 && a <= W) return {false, west, W + a - 1, W - 1};
  if (b == 0 && a >= W + 1 && a <= 2 * W - 1)
    return {false, west, 2 * W - 1, 2 * W - a - 1};
  if (b == W + 1) {
    if (a == 0) return {true, 0, 0, 0};
    if (a >= 1 && a <= W) return {false, east, 0, W - a};
    if (a >= W + 1 && a <= 2 * W + 1) return {false, east, a - W - 1, 0};
  }
  if (a == 2 * W + 1) {
    if (b == 0) return {true, 0, 0, 0};
    if (b >= 1 && b <= W) return {false, east, 2 * W - b, 0};
  }
  throw std::logic_error("pad_source: position outside extended lattice");
}

}  // namespace

std::array<Tensor, 5> pad(const SphereTensor& t, PadMode mode) {
  const int W = t.W();
  const int ph = mode == PadMode::Full ? 2 * W + 2 : 2 * W + 1;
  const int pw = mode == PadMode::Full ? W + 2 : W + 1;
  std::array<Tensor, 5> out;
  for (int i = 0; i < 5; ++i) {
    Tensor p({t.channels, ph, pw});
    const Tensor& own = t.comp[static_cast<std::size_t>(i)];
    for (int c = 0; c < t.channels; ++c)
      for (int a = 1; a <= 2 * W; ++a)
        std::copy_n(
            own.data.data() + (static_cast<std::size_t>(c) * 2 * W + (a - 1)) * W,
            W,
            p.data.data() + (static_cast<std::size_t>(c) * ph + a) * pw + 1);
    auto fill = [&](int a, int b) {
      const PadSource s = pad_source(i, a, b, W);
      if (s.zero) return;  // already zero-initialized
      for (int c = 0; c < t.channels; ++c)
        p.at(c, a, b) = t.comp[static_cast<std::size_t>(s.comp)].at(c, s.row, s.col);
    };
    for (int b = 0; b < pw; ++b) fill(0, b);
    for (int a = 1; a < ph; ++a) fill(a, 0);
    if (mode == PadMode::Full) {
      for (int a = 1; a < ph; ++a) fill(a, W + 1);
      for (int b = 1; b <= W; ++b) fill(2 * W + 1, b);
    }
    out[static_cast<std::size_t>(i)] = std::move(p);
  }
  return out;
}

void hex_masks(const HexKernelBank& bank, int oc, int ic, float w1[9],
               float w2[9]) {
  const float a1 = bank.w(oc, ic, 1), a2 = bank.w(oc, ic, 2);
  const float a3 = bank.w(oc, ic, 3), a4 = bank.w(oc, ic, 4);
  const float a5 = bank.w(oc, ic, 5), a6 = bank.w(oc, ic, 6);
  const float a7 = bank.w(oc, ic, 7);
  const float m1[9] = {a2, a1, 0, a3, a7, a6, 0, a4, a5};
  const float m2[9] = {a3, a2, 0, a4, a7, a1, 0, a5, a6};
  for (int k = 0; k < 9; ++k) {
    w1[k] = m1[k];
    w2[k] = m2[k];
  }
}

SphereTensor hexconv(const SphereTensor& t, const HexKernelBank& bank,
                     const AlphaMaps& alphas) {
  if (bank.c_in != t.channels)
    throw std::invalid_argument("hexconv: channel mismatch");
  if (alphas.r != t.r) throw std::invalid_argument("hexconv: alpha level mismatch");
  if (!bank.bias.empty() &&
      bank.bias.size() != static_cast<std::size_t>(bank.c_out))
    throw std::invalid_argument("hexconv: bias length mismatch");
  Tensor k1({bank.c_out, bank.c_in, 3, 3}), k2({bank.c_out, bank.c_in, 3, 3});
  for (int oc = 0; oc < bank.c_out; ++oc)
    for (int ic = 0; ic < bank.c_in; ++ic)
      hex_masks(bank, oc, ic,
                &k1.data[((static_cast<std::size_t>(oc) * bank.c_in) + ic) * 9],
                &k2.data[((static_cast<std::size_t>(oc) * bank.c_in) + ic) * 9]);

  const auto padded = pad(t, PadMode::Full);
  SphereTensor out = make_sphere_tensor(t.r, bank.c_out);
  const int W = t.W();
  for (int i = 0; i < 5; ++i) {
    const Tensor f1 = conv2d_valid(padded[static_cast<std::size_t>(i)], k1);
    const Tensor f2 = conv2d_valid(padded[static_cast<std::size_t>(i)], k2);
    Tensor& o = out.comp[static_cast<std::size_t>(i)];
    const Tensor& a = alphas.alpha[static_cast<std::size_t>(i)];
    for (int c = 0; c < bank.c_out; ++c) {
      const float b = bank.bias.empty() ? 0.0f : bank.bias[static_cast<std::size_t>(c)];
      for (int y = 0; y < 2 * W; ++y)
        for (int x = 0; x < W; ++x) {
          const float al = a.at(0, y, x);
          o.at(c, y, x) = al * f1.at(c, y, x) + (1.0f - al) * f2.at(c, y, x) + b;
        }
    }
  }
  return out;
}

SphereTensor sphere_pool(const SphereTensor& t, PoolMode mode) {
  if (t.r < 1) throw std::invalid_argument("sphere_pool: level 0 input");
  SphereTensor out;
  out.r = t.r - 1;
  out.channels = t.channels;
  // Plain 2x2 stride-2 windows on the unpadded component: the window of
  // coarse cell (row,col) covers fine cells {2row,2row+1}x{2col,2col+1},
  // which is exactly the vertex set {v, n1, n2, n3} of the coarse vertex.
  for (int i = 0; i < 5; ++i)
    out.comp[static_cast<std::size_t>(i)] =
        pool2x2(t.comp[static_cast<std::size_t>(i)], mode);
  return out;
}

SphereTensor sphere_upsample(const SphereTensor& t) {
  if (t.r + 1 > 10) throw std::invalid_argument("sphere_upsample: level out of range");
  const auto padded = pad(t, PadMode::West);
  SphereTensor out = make_sphere_tensor(t.r + 1, t.channels);
  const int Wf = out.W();
  for (int i = 0; i < 5; ++i) {
    const Tensor up = upsample2x_bilinear(padded[static_cast<std::size_t>(i)]);
    Tensor& o = out.comp[static_cast<std::size_t>(i)];
    for (int c = 0; c < t.channels; ++c)
      for (int y = 0; y < 2 * Wf; ++y)
        for (int x = 0; x < Wf; ++x) o.at(c, y, x) = up.at(c, y + 1, x + 1);
  }
  return out;
}

SphereTensor pointwise_conv(const SphereTensor& t, const Tensor& weights,
                            const std::vector<float>& bias) {
  if (weights.shape.size() != 2 || weights.shape[1] != t.channels)
    throw std::invalid_argument("pointwise_conv: weight shape mismatch");
  const int cout = weights.shape[0];
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(cout))
    throw std::invalid_argument("pointwise_conv: bias length mismatch");
  SphereTensor out = make_sphere_tensor(t.r, cout);
  const int plane = 2 * t.W() * t.W();
  for (int i = 0; i < 5; ++i) {
    const Tensor& in = t.comp[static_cast<std::size_t>(i)];
    Tensor& o = out.comp[static_cast<std::size_t>(i)];
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < cout; ++oc) {
      float* op = &o.data[static_cast<std::size_t>(oc) * plane];
      const float b = bias.empty() ? 0.0f : bias[static_cast<std::size_t>(oc)];
      for (int p = 0; p < plane; ++p) op[p] = b;
      for (int ic = 0; ic < t.channels; ++ic) {
        const float wv = weights.data[static_cast<std::size_t>(oc) * t.channels + ic];
        const float* ip = &in.data[static_cast<std::size_t>(ic) * plane];
        for (int p = 0; p < plane; ++p) op[p] += wv * ip[p];
      }
    }
  }
  return out;
}

SphereTensor hexconv_transpose(const SphereTensor& t, const Tensor& weights,
                               const std::vector<float>& bias) {
  return pointwise_conv(sphere_upsample(t), weights, bias);
}

SphereTensor concat_channels(const SphereTensor& a, const SphereTensor& b) {
  if (a.r != b.r) throw std::invalid_argument("concat_channels: level mismatch");
  SphereTensor out = make_sphere_tensor(a.r, a.channels + b.channels);
  for (int i = 0; i < 5; ++i) {
    auto& o = out.comp[static_cast<std::size_t>(i)];
    const auto& ca = a.comp[static_cast<std::size_t>(i)];
    const auto& cb = b.comp[static_cast<std::size_t>(i)];
    std::copy(ca.data.begin(), ca.data.end(), o.data.begin());
    std::copy(cb.data.begin(), cb.data.end(), o.data.begin() + static_cast<std::ptrdiff_t>(ca.data.size()));
  }
  return out;
}

SphereTensor rotate_components(const SphereTensor& t, int shift) {
  SphereTensor out = t;
  for (int i = 0; i < 5; ++i)
    out.comp[static_cast<std::size_t>((i + shift) % 5 + 5) % 5] =
        t.comp[static_cast<std::size_t>(i)];
  return out;
}

bool all_finite(const SphereTensor& t) {
  for (const auto& c : t.comp)
    if (!all_finite(c)) return false;
  return true;
}

void write_sphere_file(const std::string& path, const SphereTensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  nlohmann::json h;
  h["r"] = t.r;
  h["channels"] = t.channels;
  os << h.dump() << "\n";
  for (const auto& c : t.comp) write_ten(os, c);
}

SphereTensor read_sphere_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("sphere file: missing header");
  const auto h = nlohmann::json::parse(line);
  SphereTensor t;
  t.r = h.at("r").get<int>();
  t.channels = h.at("channels").get<int>();
  const int W = 1 << t.r;
  for (auto& c : t.comp) {
    c = read_ten(is);
    if (c.shape != std::vector<int>{t.channels, 2 * W, W})
      throw std::runtime_error("sphere file: component shape mismatch");
  }
  return t;
}

}  // namespace icosph
