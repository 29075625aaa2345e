#pragma once

#include <string>
#include <vector>

#include "icosph/mesh.hpp"
#include "icosph/sphereops.hpp"

namespace icosph {

// Equirectangular image, W = 2H enforced. Pixels row-major, channel-minor
// floats. Longitude in [-pi, pi) maps to columns, zenith (0 at the +y north
// pole) to rows.
struct EquirectImage {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> pixels;  // height * width * channels

  float& at(int y, int x, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

EquirectImage make_equirect(int height, int channels);

enum class SampleMode { Bilinear, Nearest };

SphereTensor equirect_to_sphere(const EquirectImage& img, const MeshLevel& mesh,
                                SampleMode mode);

// Per output pixel: locate the containing mesh triangle by recursive descent
// from the base icosahedron and interpolate barycentrically. Pole pixels use
// the nearest non-pole vertex ring.
EquirectImage sphere_to_equirect(const SphereTensor& t, const MeshLevel& mesh,
                                 int height);

// The 5 component rasters side by side: (C, 2W, 5W) plus a 1-cell gap
// between tiles filled with zero.
Tensor export_unfolded(const SphereTensor& t);

// Equirectangular resolutions matched to mesh levels for perspective
// comparisons: level 6 -> 48x80, 7 -> 96x160, 8 -> 192x320.
bool level_resolution(int level, int& height, int& width);

// 8-bit binary PPM (3 channel) / PGM (1 channel); values scaled [0,1]<->[0,255].
EquirectImage read_pnm(const std::string& path);
void write_pnm(const std::string& path, const EquirectImage& img);
void write_pnm_raster(const std::string& path, const Tensor& raster);

}  // namespace icosph
