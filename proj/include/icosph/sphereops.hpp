#pragma once

#include <array>
#include <string>

#include "icosph/mesh.hpp"
#include "icosph/tensor.hpp"

namespace icosph {

// A signal on the sphere as 5 dense component rasters of C x 2W x W.
struct SphereTensor {
  int r = 0;
  int channels = 0;
  std::array<Tensor, 5> comp;

  int W() const { return 1 << r; }
};

SphereTensor make_sphere_tensor(int r, int channels);

enum class PadMode { Full, West };

// Seam padding. West mode adds the top row and left column from the western
// component: C x (2W+1) x (W+1). Full mode also adds the bottom row and
// right column from the eastern component: C x (2W+2) x (W+2). The pole
// corner slots hold literal zero.
std::array<Tensor, 5> pad(const SphereTensor& t, PadMode mode);

// 7 hexagon weights per (out,in) channel pair; w7 is the center tap.
struct HexKernelBank {
  int c_out = 0;
  int c_in = 0;
  std::vector<float> weights;  // c_out * c_in * 7, order w1..w7
  std::vector<float> bias;     // empty or c_out

  float w(int oc, int ic, int j) const {  // j in 1..7
    return weights[(static_cast<std::size_t>(oc) * c_in + ic) * 7 + (j - 1)];
  }
};

// North-aligned hexagonal convolution: full padding, two masked 3x3
// convolutions blended per cell by the alpha map, bias added after blending.
SphereTensor hexconv(const SphereTensor& t, const HexKernelBank& bank,
                     const AlphaMaps& alphas);

// Expand the 7 weights of one (out,in) pair into the two masked 3x3 kernels.
void hex_masks(const HexKernelBank& bank, int oc, int ic, float w1[9],
               float w2[9]);

// 2x2 stride-2 pooling of each component; level r -> r-1. Each window
// aggregates {v, n1, n2, n3} of the surviving coarse vertex.
SphereTensor sphere_pool(const SphereTensor& t, PoolMode mode);

// WestPad, 2x bilinear up-sampling, crop one cell from all sides;
// level r -> r+1.
SphereTensor sphere_upsample(const SphereTensor& t);

// 1x1 convolution per component, no padding. weights (c_out, c_in).
SphereTensor pointwise_conv(const SphereTensor& t, const Tensor& weights,
                            const std::vector<float>& bias);

// sphere_upsample followed by pointwise_conv.
SphereTensor hexconv_transpose(const SphereTensor& t, const Tensor& weights,
                               const std::vector<float>& bias);

SphereTensor concat_channels(const SphereTensor& a, const SphereTensor& b);
SphereTensor rotate_components(const SphereTensor& t, int shift);
bool all_finite(const SphereTensor& t);

// SphereTensor file: one JSON header line {"r":..,"channels":..} followed by
// five ".ten" blocks in component order.
void write_sphere_file(const std::string& path, const SphereTensor& t);
SphereTensor read_sphere_file(const std::string& path);

}  // namespace icosph
