#include "icosph/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace icosph {

namespace {

Vec3 normalized(const Vec3& v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

Vec3 mid(const Vec3& a, const Vec3& b) {
  return normalized({a[0] + b[0], a[1] + b[1], a[2] + b[2]});
}

struct LatticeCoord {
  int a, b;
};

// Recursively fill a gore-lattice triangle: corners c0,c1,c2 at positions
// p0,p1,p2, subdividing `depth` more times via renormalized edge midpoints.
void fill_triangle(std::vector<Vec3>& lat, int stride, LatticeCoord c0,
                   LatticeCoord c1, LatticeCoord c2, const Vec3& p0,
                   const Vec3& p1, const Vec3& p2, int depth) {
  lat[static_cast<std::size_t>(c0.a) * stride + c0.b] = p0;
  lat[static_cast<std::size_t>(c1.a) * stride + c1.b] = p1;
  lat[static_cast<std::size_t>(c2.a) * stride + c2.b] = p2;
  if (depth == 0) return;
  const Vec3 m01 = mid(p0, p1), m12 = mid(p1, p2), m02 = mid(p0, p2);
  const LatticeCoord c01{(c0.a + c1.a) / 2, (c0.b + c1.b) / 2};
  const LatticeCoord c12{(c1.a + c2.a) / 2, (c1.b + c2.b) / 2};
  const LatticeCoord c02{(c0.a + c2.a) / 2, (c0.b + c2.b) / 2};
  fill_triangle(lat, stride, c0, c01, c02, p0, m01, m02, depth - 1);
  fill_triangle(lat, stride, c01, c1, c12, m01, p1, m12, depth - 1);
  fill_triangle(lat, stride, c02, c12, c2, m02, m12, p2, depth - 1);
  fill_triangle(lat, stride, c01, c12, c02, m01, m12, m02, depth - 1);
}

}  // namespace

int MeshLevel::grid_to_vertex(int comp, int row, int col) const {
  if (comp < 0 || comp > 4 || row < 0 || row >= 2 * W || col < 0 || col >= W)
    throw std::out_of_range("grid_to_vertex: indices out of bounds");
  return comp * (2 * W * W) + row * W + col;
}

bool MeshLevel::vertex_to_grid(int v, int& comp, int& row, int& col) const {
  if (v < 0 || v >= nonpole_count()) return false;
  comp = v / (2 * W * W);
  const int rem = v % (2 * W * W);
  row = rem / W;
  col = rem % W;
  return true;
}

int MeshLevel::resolve(int comp, int a, int b) const {
  if (a >= 1 && a <= 2 * W && b >= 1 && b <= W)
    return comp * (2 * W * W) + (a - 1) * W + (b - 1);
  if (a == 0 && b == W) return north_pole_id;
  if (a == 2 * W && b == 0) return south_pole_id;
  const int west = (comp + 4) % 5;
  const int east = (comp + 1) % 5;
  auto vid = [this](int c, int row, int col) {
    return c * (2 * W * W) + row * W + col;
  };
  if (a == 0 && b >= 0 && b <= W - 1) return vid(west, W - b - 1, W - 1);
  if (b == 0 && a >= 1 && a <= W) return vid(west, W + a - 1, W - 1);
  if (b == 0 && a >= W + 1 && a <= 2 * W - 1)
    return vid(west, 2 * W - 1, 2 * W - a - 1);
  if (b == W + 1) {
    if (a == 0) return -1;
    if (a >= 1 && a <= W) return vid(east, 0, W - a);
    if (a >= W + 1 && a <= 2 * W + 1) return vid(east, a - W - 1, 0);
  }
  if (a == 2 * W + 1) {
    if (b == 0) return -1;
    if (b >= 1 && b <= W) return vid(east, 2 * W - b, 0);
  }
  return -1;
}

std::array<int, 6> MeshLevel::neighbors(int v) const {
  int comp, row, col;
  if (!vertex_to_grid(v, comp, row, col))
    throw std::invalid_argument("neighbors: pole or invalid vertex");
  const int a = row + 1, b = col + 1;
  static constexpr int offs[6][2] = {{-1, 0}, {-1, -1}, {0, -1},
                                     {1, 0},  {1, 1},   {0, 1}};
  std::array<int, 6> out{};
  for (int i = 0; i < 6; ++i)
    out[i] = resolve(comp, a + offs[i][0], b + offs[i][1]);
  return out;
}

std::vector<std::array<int, 3>> MeshLevel::faces() const {
  std::vector<std::array<int, 3>> out;
  out.reserve(static_cast<std::size_t>(face_count()));
  for (int i = 0; i < 5; ++i)
    for (int a = 0; a < 2 * W; ++a)
      for (int b = 0; b < W; ++b) {
        const int q00 = resolve(i, a, b), q01 = resolve(i, a, b + 1);
        const int q10 = resolve(i, a + 1, b), q11 = resolve(i, a + 1, b + 1);
        out.push_back({q00, q10, q11});
        out.push_back({q00, q01, q11});
      }
  return out;
}

MeshLevel build_mesh(int r) {
  if (r < 0 || r > 10) throw std::invalid_argument("build_mesh: level out of range");
  MeshLevel m;
  m.r = r;
  m.W = 1 << r;
  const int W = m.W;
  const int nonpole = 5 * 2 * W * W;
  m.north_pole_id = nonpole;
  m.south_pole_id = nonpole + 1;
  m.positions.assign(static_cast<std::size_t>(nonpole) + 2, Vec3{0, 0, 0});

  const Vec3 north{0.0, 1.0, 0.0}, south{0.0, -1.0, 0.0};
  m.positions[static_cast<std::size_t>(m.north_pole_id)] = north;
  m.positions[static_cast<std::size_t>(m.south_pole_id)] = south;

  const double lat = std::atan(0.5);
  std::array<Vec3, 5> ups, los;
  for (int k = 0; k < 5; ++k) {
    const double lam = 2.0 * M_PI * k / 5.0;
    ups[k] = {std::cos(lat) * std::cos(lam), std::sin(lat),
              std::cos(lat) * std::sin(lam)};
    const double lam2 = lam + M_PI / 5.0;
    los[k] = {std::cos(lat) * std::cos(lam2), -std::sin(lat),
              std::cos(lat) * std::sin(lam2)};
  }

  // Gore i lattice (a,b), a in 0..2W southward, b in 0..W eastward.
  // Corners: (0,W)=N, (0,0)=u_i, (W,0)=l_i, (W,W)=u_{i+1}, (2W,0)=S,
  // (2W,W)=l_{i+1}. Diagonal of each lattice square runs along (+1,+1).
  const int stride = W + 1;
  std::vector<Vec3> lattice;
  for (int i = 0; i < 5; ++i) {
    lattice.assign(static_cast<std::size_t>(2 * W + 1) * stride, Vec3{0, 0, 0});
    const Vec3 &u0 = ups[i], &u1 = ups[(i + 1) % 5];
    const Vec3 &l0 = los[i], &l1 = los[(i + 1) % 5];
    fill_triangle(lattice, stride, {0, W}, {0, 0}, {W, W}, north, u0, u1, r);
    fill_triangle(lattice, stride, {0, 0}, {W, 0}, {W, W}, u0, l0, u1, r);
    fill_triangle(lattice, stride, {W, W}, {W, 0}, {2 * W, W}, u1, l0, l1, r);
    fill_triangle(lattice, stride, {W, 0}, {2 * W, 0}, {2 * W, W}, l0, south, l1, r);
    for (int a = 1; a <= 2 * W; ++a)
      for (int b = 1; b <= W; ++b)
        m.positions[static_cast<std::size_t>(m.grid_to_vertex(i, a - 1, b - 1))] =
            lattice[static_cast<std::size_t>(a) * stride + b];
  }
  return m;
}

namespace {

double alpha_angle(const Vec3& edge, const Vec3& n) {
  // Angle between edge and its projection onto the plane with normal n.
  const double dot_en = edge[0] * n[0] + edge[1] * n[1] + edge[2] * n[2];
  const Vec3 proj{edge[0] - dot_en * n[0], edge[1] - dot_en * n[1],
                  edge[2] - dot_en * n[2]};
  const double ne = std::sqrt(edge[0] * edge[0] + edge[1] * edge[1] + edge[2] * edge[2]);
  const double np = std::sqrt(proj[0] * proj[0] + proj[1] * proj[1] + proj[2] * proj[2]);
  double c = (edge[0] * proj[0] + edge[1] * proj[1] + edge[2] * proj[2]) / (ne * np);
  c = std::min(1.0, std::max(-1.0, c));
  return std::acos(c);
}

}  // namespace

AlphaMaps compute_alpha_maps(const MeshLevel& mesh) {
  AlphaMaps out;
  out.r = mesh.r;
  const int W = mesh.W;
  Tensor g({1, 2 * W, W});
  for (int row = 0; row < 2 * W; ++row)
    for (int col = 0; col < W; ++col) {
      const int v = mesh.grid_to_vertex(0, row, col);
      const Vec3& vi = mesh.positions[static_cast<std::size_t>(v)];
      const auto ns = mesh.neighbors(v);
      // Pole neighbors still have positions; only the literal-zero pad slots
      // resolve to -1, and those never appear among n1/n6.
      const Vec3& p1 = mesh.positions[static_cast<std::size_t>(ns[0])];
      const Vec3& p6 = mesh.positions[static_cast<std::size_t>(ns[5])];
      // n = v x a / |v x a| with a = (0,1,0).
      Vec3 n{vi[1] * 0.0 - vi[2] * 1.0, vi[2] * 0.0 - vi[0] * 0.0,
             vi[0] * 1.0 - vi[1] * 0.0};
      const double nn = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
      if (nn < 1e-9)
        throw std::runtime_error("compute_alpha_maps: degenerate vertex " +
                                 std::to_string(v));
      n = {n[0] / nn, n[1] / nn, n[2] / nn};
      const Vec3 e1{vi[0] - p1[0], vi[1] - p1[1], vi[2] - p1[2]};
      const Vec3 e6{vi[0] - p6[0], vi[1] - p6[1], vi[2] - p6[2]};
      const double psi = alpha_angle(e1, n);
      const double phi = alpha_angle(e6, n);
      double alpha = phi / (phi + psi);
      alpha = std::min(1.0 - 1e-6, std::max(1e-6, alpha));
      g.at(0, row, col) = static_cast<float>(alpha);
    }
  // Replicate gore 0: the five gores are related by exact 72-degree
  // rotations, and sharing one grid makes the symmetry bit-exact.
  for (int i = 0; i < 5; ++i) out.alpha[static_cast<std::size_t>(i)] = g;
  return out;
}

namespace {

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return static_cast<bool>(is);
}

}  // namespace

void write_mesh_cache(const std::string& path, const MeshLevel& mesh,
                      const AlphaMaps& alphas) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os.write("ICOM", 4);
  put(os, static_cast<std::uint32_t>(mesh.r));
  for (const auto& p : mesh.positions)
    for (double c : p) put(os, c);
  for (int v = 0; v < mesh.nonpole_count(); ++v) {
    const auto ns = mesh.neighbors(v);
    for (int n : ns) put(os, static_cast<std::uint32_t>(n));
  }
  for (int v = 0; v < mesh.nonpole_count(); ++v) {
    int comp, row, col;
    mesh.vertex_to_grid(v, comp, row, col);
    put(os, static_cast<std::uint32_t>(comp));
    put(os, static_cast<std::uint32_t>(row));
    put(os, static_cast<std::uint32_t>(col));
  }
  for (const auto& g : alphas.alpha)
    os.write(reinterpret_cast<const char*>(g.data.data()),
             static_cast<std::streamsize>(g.data.size() * sizeof(float)));
}

bool read_mesh_cache(const std::string& path, MeshLevel& mesh,
                     AlphaMaps& alphas) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "ICOM", 4) != 0) return false;
  std::uint32_t r;
  if (!get(is, r) || r > 10) return false;
  mesh.r = static_cast<int>(r);
  mesh.W = 1 << mesh.r;
  const int nonpole = 5 * 2 * mesh.W * mesh.W;
  mesh.north_pole_id = nonpole;
  mesh.south_pole_id = nonpole + 1;
  mesh.positions.assign(static_cast<std::size_t>(nonpole) + 2, Vec3{0, 0, 0});
  for (auto& p : mesh.positions)
    for (double& c : p)
      if (!get(is, c)) return false;
  // Neighbor table and grid map are recomputable index arithmetic; validate
  // presence by skipping them.
  const std::streamoff skip =
      static_cast<std::streamoff>(nonpole) * (6 + 3) * sizeof(std::uint32_t);
  is.seekg(skip, std::ios::cur);
  alphas.r = mesh.r;
  for (auto& g : alphas.alpha) {
    g = Tensor({1, 2 * mesh.W, mesh.W});
    is.read(reinterpret_cast<char*>(g.data.data()),
            static_cast<std::streamsize>(g.data.size() * sizeof(float)));
    if (!is) return false;
  }
  return true;
}

void get_mesh_and_alphas(int r, MeshLevel& mesh, AlphaMaps& alphas) {
  const char* dir = std::getenv("ICO_CACHE_DIR");
  if (dir && *dir) {
    const std::string path =
        std::string(dir) + "/mesh_level_" + std::to_string(r) + ".icom";
    if (read_mesh_cache(path, mesh, alphas) && mesh.r == r) return;
    mesh = build_mesh(r);
    alphas = compute_alpha_maps(mesh);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (!ec) write_mesh_cache(path, mesh, alphas);
    return;
  }
  mesh = build_mesh(r);
  alphas = compute_alpha_maps(mesh);
}

}  // namespace icosph
