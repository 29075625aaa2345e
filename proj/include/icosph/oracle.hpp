#pragma once

#include <vector>

#include "icosph/mesh.hpp"
#include "icosph/sphereops.hpp"

namespace icosph {

// Per-vertex signal indexed by vertex id, n_r x C. Pole entries are present;
// the reference convolution outputs 0 there.
struct VertexSignal {
  int n = 0;
  int channels = 0;
  std::vector<float> values;  // n * channels, vertex-major

  float& at(int v, int c) { return values[static_cast<std::size_t>(v) * channels + c]; }
  float at(int v, int c) const { return values[static_cast<std::size_t>(v) * channels + c]; }
};

VertexSignal make_vertex_signal(int n, int channels);

// Lossless for non-pole vertices; pole entries of the signal become 0.
VertexSignal to_vertex_signal(const SphereTensor& t, const MeshLevel& mesh);
SphereTensor from_vertex_signal(const VertexSignal& sig, const MeshLevel& mesh);

// Literal per-vertex evaluation of the alpha-blended hexagonal convolution
// over the neighbor table. Straight-line loops, no grid layout.
VertexSignal graph_hexconv_ref(const VertexSignal& sig, const HexKernelBank& bank,
                               const MeshLevel& mesh, const AlphaMaps& alphas);

// Per-neighbor interpolation weights for the un-unified form: theta[v][j]
// (j = 0..5 for neighbors n1..n6).
std::vector<std::array<double, 6>> compute_thetas(const MeshLevel& mesh);

// Un-simplified per-neighbor form: each rotated tap j interpolates between
// two cyclically adjacent neighbors with weight theta. Setting all thetas to
// alpha reproduces graph_hexconv_ref exactly.
VertexSignal graph_eq1_ref(const VertexSignal& sig, const HexKernelBank& bank,
                           const MeshLevel& mesh,
                           const std::vector<std::array<double, 6>>& thetas);

// Pooling aggregates {v, n1, n2, n3} per surviving coarse vertex.
VertexSignal graph_pool_ref(const VertexSignal& sig, const MeshLevel& fine,
                            const MeshLevel& coarse, PoolMode mode);

// Bilinear up-sampling reference sharing the grid convention: each fine
// vertex reads the west-padded coarse raster at align-corners-false
// coordinates.
VertexSignal graph_upsample_ref(const VertexSignal& sig, const MeshLevel& coarse,
                                const MeshLevel& fine);

}  // namespace icosph
