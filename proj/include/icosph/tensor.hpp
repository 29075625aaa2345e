#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace icosph {

// Dense row-major float32 array. Feature maps are channels-first (C,H,W).
struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);

  std::size_t size() const { return data.size(); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  float& at(int c, int h, int w);
  float at(int c, int h, int w) const;

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

enum class PoolMode { Max, Average };

// Valid-mode cross-correlation, stride 1. input (Cin,H,W), kernel
// (Cout,Cin,3,3), optional bias of length Cout. Output (Cout,H-2,W-2).
Tensor conv2d_valid(const Tensor& input, const Tensor& kernel,
                    const float* bias = nullptr);

// Non-overlapping 2x2 windows; H and W must be even.
Tensor pool2x2(const Tensor& input, PoolMode mode);

// Align-corners-false bilinear, output sample k reads source (k+0.5)/2-0.5
// clamped to the valid range. (C,H,W) -> (C,2H,2W).
Tensor upsample2x_bilinear(const Tensor& input);

// Channel-wise inference-time affine normalization.
Tensor batchnorm_inference(const Tensor& input, const std::vector<float>& gamma,
                           const std::vector<float>& beta,
                           const std::vector<float>& mean,
                           const std::vector<float>& var, float eps = 1e-5f);

Tensor relu(const Tensor& input);

// weights (out,in) row-major, bias length out.
std::vector<float> dense(const std::vector<float>& input,
                         const Tensor& weights,
                         const std::vector<float>& bias);

bool all_finite(const Tensor& t);

// ".ten" container: one JSON header line {"shape":[...],"dtype":"f32"}
// followed by the raw little-endian payload.
void write_ten(std::ostream& os, const Tensor& t);
Tensor read_ten(std::istream& is);
void write_ten_file(const std::string& path, const Tensor& t);
Tensor read_ten_file(const std::string& path);

}  // namespace icosph
