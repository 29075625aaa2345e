#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "icosph/tensor.hpp"

namespace icosph {

using Vec3 = std::array<double, 3>;

// Subdivided icosahedron at level r, unfolded into 5 gore components of
// 2W x W cells (W = 2^r). Non-pole vertex ids are laid out per component in
// row-major order; the poles take the last two ids.
struct MeshLevel {
  int r = 0;
  int W = 1;
  std::vector<Vec3> positions;  // unit vectors, n_r entries
  int north_pole_id = 0;
  int south_pole_id = 0;

  int vertex_count() const { return static_cast<int>(positions.size()); }
  int nonpole_count() const { return vertex_count() - 2; }
  long long face_count() const { return 20LL * (1LL << (2 * r)); }

  int grid_to_vertex(int comp, int row, int col) const;
  // false for poles.
  bool vertex_to_grid(int v, int& comp, int& row, int& col) const;

  // Extended-lattice resolution: gore-local coordinates a in 0..2W+1,
  // b in 0..W+1 where the owned block is a in 1..2W, b in 1..W. Returns the
  // vertex id supplying that position under the seam-padding rules, the pole
  // ids at the two pole corners, or -1 for the padding slots that hold a
  // literal zero.
  int resolve(int comp, int a, int b) const;

  // n1..n6 ordered by the padded-grid offsets
  // (-1,0),(-1,-1),(0,-1),(+1,0),(+1,+1),(0,+1). Valence-5 vertices repeat
  // one entry (equal to its cyclic predecessor). Throws for poles.
  std::array<int, 6> neighbors(int v) const;

  // Triangles as vertex-id triples; 20*4^r entries.
  std::vector<std::array<int, 3>> faces() const;
};

MeshLevel build_mesh(int r);

// Per-vertex north-alignment blend weights in component layout, one grid of
// 2W x W per component. Values clamped to [1e-6, 1-1e-6]. Component 0 is
// computed from geometry and replicated to the other four so the five grids
// are bit-identical.
struct AlphaMaps {
  int r = 0;
  std::array<Tensor, 5> alpha;  // each (1,2W,W)
};

AlphaMaps compute_alpha_maps(const MeshLevel& mesh);

// Binary cache: magic "ICOM", u32 r, f64 position triples, u32x6 neighbor
// table (non-pole vertices in id order), u32 (comp,row,col) triples, then
// the five alpha grids as f32.
void write_mesh_cache(const std::string& path, const MeshLevel& mesh,
                      const AlphaMaps& alphas);
bool read_mesh_cache(const std::string& path, MeshLevel& mesh,
                     AlphaMaps& alphas);

// Builds (or loads via ICO_CACHE_DIR when set) the mesh and alpha maps.
void get_mesh_and_alphas(int r, MeshLevel& mesh, AlphaMaps& alphas);

}  // namespace icosph
