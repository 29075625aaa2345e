#include "icosph/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace icosph {

static std::size_t shape_product(const std::vector<int>& s) {
  std::size_t n = 1;
  for (int d : s) {
    if (d <= 0) throw std::invalid_argument("tensor dims must be positive");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  data.assign(shape_product(shape), 0.0f);
}

float& Tensor::at(int c, int h, int w) {
  return data[(static_cast<std::size_t>(c) * shape[1] + h) * shape[2] + w];
}

float Tensor::at(int c, int h, int w) const {
  return data[(static_cast<std::size_t>(c) * shape[1] + h) * shape[2] + w];
}

Tensor conv2d_valid(const Tensor& input, const Tensor& kernel,
                    const float* bias) {
  if (input.shape.size() != 3 || kernel.shape.size() != 4)
    throw std::invalid_argument("conv2d_valid: rank mismatch");
  const int cin = input.shape[0], h = input.shape[1], w = input.shape[2];
  const int cout = kernel.shape[0];
  if (kernel.shape[1] != cin || kernel.shape[2] != 3 || kernel.shape[3] != 3)
    throw std::invalid_argument("conv2d_valid: kernel shape mismatch");
  if (h < 3 || w < 3) throw std::invalid_argument("conv2d_valid: input too small");
  const int oh = h - 2, ow = w - 2;
  Tensor out({cout, oh, ow});
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < cout; ++oc) {
    const float b = bias ? bias[oc] : 0.0f;
    for (int ic = 0; ic < cin; ++ic) {
      const float* kp = &kernel.data[((static_cast<std::size_t>(oc) * cin) + ic) * 9];
      const float* ip = &input.data[static_cast<std::size_t>(ic) * h * w];
      float* op = &out.data[static_cast<std::size_t>(oc) * oh * ow];
      for (int y = 0; y < oh; ++y) {
        const float* r0 = ip + static_cast<std::size_t>(y) * w;
        const float* r1 = r0 + w;
        const float* r2 = r1 + w;
        float* orow = op + static_cast<std::size_t>(y) * ow;
        for (int x = 0; x < ow; ++x) {
          float acc = kp[0] * r0[x] + kp[1] * r0[x + 1] + kp[2] * r0[x + 2] +
                      kp[3] * r1[x] + kp[4] * r1[x + 1] + kp[5] * r1[x + 2] +
                      kp[6] * r2[x] + kp[7] * r2[x + 1] + kp[8] * r2[x + 2];
          orow[x] += acc;
        }
      }
    }
    if (bias) {
      float* op = &out.data[static_cast<std::size_t>(oc) * oh * ow];
      for (int i = 0; i < oh * ow; ++i) op[i] += b;
    }
  }
  return out;
}

Tensor pool2x2(const Tensor& input, PoolMode mode) {
  if (input.shape.size() != 3)
    throw std::invalid_argument("pool2x2: rank mismatch");
  const int c = input.shape[0], h = input.shape[1], w = input.shape[2];
  if (h % 2 || w % 2) throw std::invalid_argument("pool2x2: odd spatial dims");
  Tensor out({c, h / 2, w / 2});
  for (int ic = 0; ic < c; ++ic)
    for (int y = 0; y < h / 2; ++y)
      for (int x = 0; x < w / 2; ++x) {
        const float a = input.at(ic, 2 * y, 2 * x);
        const float b = input.at(ic, 2 * y, 2 * x + 1);
        const float d = input.at(ic, 2 * y + 1, 2 * x);
        const float e = input.at(ic, 2 * y + 1, 2 * x + 1);
        out.at(ic, y, x) = mode == PoolMode::Max
                               ? std::max(std::max(a, b), std::max(d, e))
                               : (a + b + d + e) * 0.25f;
      }
  return out;
}

Tensor upsample2x_bilinear(const Tensor& input) {
  if (input.shape.size() != 3)
    throw std::invalid_argument("upsample2x_bilinear: rank mismatch");
  const int c = input.shape[0], h = input.shape[1], w = input.shape[2];
  if (h < 1 || w < 1)
    throw std::invalid_argument("upsample2x_bilinear: empty input");
  Tensor out({c, 2 * h, 2 * w});
  // Precompute 1-D source taps; same for rows and columns.
  auto taps = [](int n, int k, int& i0, int& i1, float& f) {
    float src = (k + 0.5f) / 2.0f - 0.5f;
    src = std::clamp(src, 0.0f, static_cast<float>(n - 1));
    i0 = static_cast<int>(src);
    i1 = std::min(i0 + 1, n - 1);
    f = src - static_cast<float>(i0);
  };
  std::vector<int> y0(2 * h), y1(2 * h), x0(2 * w), x1(2 * w);
  std::vector<float> fy(2 * h), fx(2 * w);
  for (int y = 0; y < 2 * h; ++y) taps(h, y, y0[y], y1[y], fy[y]);
  for (int x = 0; x < 2 * w; ++x) taps(w, x, x0[x], x1[x], fx[x]);
  for (int ic = 0; ic < c; ++ic)
    for (int y = 0; y < 2 * h; ++y)
      for (int x = 0; x < 2 * w; ++x) {
        const float v00 = input.at(ic, y0[y], x0[x]);
        const float v01 = input.at(ic, y0[y], x1[x]);
        const float v10 = input.at(ic, y1[y], x0[x]);
        const float v11 = input.at(ic, y1[y], x1[x]);
        const float top = v00 + (v01 - v00) * fx[x];
        const float bot = v10 + (v11 - v10) * fx[x];
        out.at(ic, y, x) = top + (bot - top) * fy[y];
      }
  return out;
}

Tensor batchnorm_inference(const Tensor& input, const std::vector<float>& gamma,
                           const std::vector<float>& beta,
                           const std::vector<float>& mean,
                           const std::vector<float>& var, float eps) {
  const int c = input.shape[0];
  const std::size_t plane = input.size() / static_cast<std::size_t>(c);
  if (gamma.size() != static_cast<std::size_t>(c) || beta.size() != gamma.size() ||
      mean.size() != gamma.size() || var.size() != gamma.size())
    throw std::invalid_argument("batchnorm: parameter length mismatch");
  Tensor out = input;
  for (int ic = 0; ic < c; ++ic) {
    const float scale = gamma[ic] / std::sqrt(var[ic] + eps);
    const float shift = beta[ic] - mean[ic] * scale;
    float* p = &out.data[static_cast<std::size_t>(ic) * plane];
    for (std::size_t i = 0; i < plane; ++i) p[i] = p[i] * scale + shift;
  }
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (float& v : out.data) v = std::max(v, 0.0f);
  return out;
}

std::vector<float> dense(const std::vector<float>& input, const Tensor& weights,
                         const std::vector<float>& bias) {
  if (weights.shape.size() != 2 ||
      weights.shape[1] != static_cast<int>(input.size()) ||
      bias.size() != static_cast<std::size_t>(weights.shape[0]))
    throw std::invalid_argument("dense: shape mismatch");
  const int out_n = weights.shape[0], in_n = weights.shape[1];
  std::vector<float> out(static_cast<std::size_t>(out_n));
  for (int o = 0; o < out_n; ++o) {
    float acc = bias[o];
    const float* wp = &weights.data[static_cast<std::size_t>(o) * in_n];
    for (int i = 0; i < in_n; ++i) acc += wp[i] * input[i];
    out[o] = acc;
  }
  return out;
}

bool all_finite(const Tensor& t) {
  return std::all_of(t.data.begin(), t.data.end(),
                     [](float v) { return std::isfinite(v); });
}

void write_ten(std::ostream& os, const Tensor& t) {
  nlohmann::json h;
  h["shape"] = t.shape;
  h["dtype"] = "f32";
  os << h.dump() << "\n";
  os.write(reinterpret_cast<const char*>(t.data.data()),
           static_cast<std::streamsize>(t.data.size() * sizeof(float)));
}

Tensor read_ten(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("ten: missing header");
  auto h = nlohmann::json::parse(line);
  if (h.at("dtype").get<std::string>() != "f32")
    throw std::runtime_error("ten: unsupported dtype");
  Tensor t(h.at("shape").get<std::vector<int>>());
  is.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  if (!is) throw std::runtime_error("ten: truncated payload");
  return t;
}

void write_ten_file(const std::string& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  write_ten(os, t);
}

Tensor read_ten_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_ten(is);
}

}  // namespace icosph
