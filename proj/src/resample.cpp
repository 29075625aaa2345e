#include "icosph/resample.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace icosph {

EquirectImage make_equirect(int height, int channels) {
  if (height <= 0 || channels <= 0)
    throw std::invalid_argument("make_equirect: bad dims");
  EquirectImage img;
  img.height = height;
  img.width = 2 * height;
  img.channels = channels;
  img.pixels.assign(
      static_cast<std::size_t>(height) * img.width * channels, 0.0f);
  return img;
}

namespace {

void dir_to_pixel(const Vec3& p, int h, int w, double& row, double& col) {
  const double lam = std::atan2(p[2], p[0]);           // [-pi, pi]
  const double zen = std::acos(std::clamp(p[1], -1.0, 1.0));  // [0, pi]
  col = (lam + M_PI) / (2.0 * M_PI) * w - 0.5;
  row = zen / M_PI * h - 0.5;
}

}  // namespace

SphereTensor equirect_to_sphere(const EquirectImage& img, const MeshLevel& mesh,
                                SampleMode mode) {
  if (img.width != 2 * img.height)
    throw std::invalid_argument("equirect_to_sphere: width must equal 2*height");
  SphereTensor out = make_sphere_tensor(mesh.r, img.channels);
  const int h = img.height, w = img.width;
  for (int v = 0; v < mesh.nonpole_count(); ++v) {
    int comp, row, col;
    mesh.vertex_to_grid(v, comp, row, col);
    double fr, fc;
    dir_to_pixel(mesh.positions[static_cast<std::size_t>(v)], h, w, fr, fc);
    Tensor& o = out.comp[static_cast<std::size_t>(comp)];
    if (mode == SampleMode::Nearest) {
      int y = static_cast<int>(std::lround(fr));
      int x = static_cast<int>(std::lround(fc));
      y = std::clamp(y, 0, h - 1);
      x = ((x % w) + w) % w;
      for (int c = 0; c < img.channels; ++c) o.at(c, row, col) = img.at(y, x, c);
    } else {
      const double ry = std::clamp(fr, 0.0, static_cast<double>(h - 1));
      const int y0 = static_cast<int>(ry);
      const int y1 = std::min(y0 + 1, h - 1);
      const double fy = ry - y0;
      const int x0r = static_cast<int>(std::floor(fc));
      const double fx = fc - x0r;
      const int x0 = ((x0r % w) + w) % w;
      const int x1 = (x0 + 1) % w;
      for (int c = 0; c < img.channels; ++c) {
        const double top = img.at(y0, x0, c) * (1 - fx) + img.at(y0, x1, c) * fx;
        const double bot = img.at(y1, x0, c) * (1 - fx) + img.at(y1, x1, c) * fx;
        o.at(c, row, col) = static_cast<float>(top * (1 - fy) + bot * fy);
      }
    }
  }
  return out;
}

namespace {

struct TriRef {
  Vec3 p[3];   // corner positions (unit)
  long a[3];   // gore-lattice coordinates at the finest level
  long b[3];
  int gore;
};

double det3(const Vec3& u, const Vec3& v, const Vec3& w) {
  return u[0] * (v[1] * w[2] - v[2] * w[1]) -
         u[1] * (v[0] * w[2] - v[2] * w[0]) +
         u[2] * (v[0] * w[1] - v[1] * w[0]);
}

// Smallest signed side-ness of d against the triangle's three planes
// through the origin; positive inside.
double inside_score(const TriRef& t, const Vec3& d) {
  const double s0 = det3(t.p[0], t.p[1], d);
  const double s1 = det3(t.p[1], t.p[2], d);
  const double s2 = det3(t.p[2], t.p[0], d);
  return std::min({s0, s1, s2});
}

Vec3 mid3(const Vec3& x, const Vec3& y) {
  const Vec3 s{x[0] + y[0], x[1] + y[1], x[2] + y[2]};
  const double n = std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
  return {s[0] / n, s[1] / n, s[2] / n};
}

void orient(TriRef& t) {
  if (det3(t.p[0], t.p[1], t.p[2]) < 0) {
    std::swap(t.p[1], t.p[2]);
    std::swap(t.a[1], t.a[2]);
    std::swap(t.b[1], t.b[2]);
  }
}

}  // namespace

EquirectImage sphere_to_equirect(const SphereTensor& t, const MeshLevel& mesh,
                                 int height) {
  if (mesh.r != t.r) throw std::invalid_argument("sphere_to_equirect: level mismatch");
  EquirectImage img = make_equirect(height, t.channels);
  const int W = mesh.W;

  // Base triangles with corner lattice coordinates in finest-level units.
  std::vector<TriRef> base;
  for (int i = 0; i < 5; ++i) {
    // Gore corners: (0,W)=north, (0,0) and (W,W) the upper ring, (W,0) and
    // (2W,W) the lower ring, (2W,0)=south; resolve maps each to its owner.
    auto at = [&](int a, int b) -> Vec3 {
      const int v = mesh.resolve(i, a, b);
      return mesh.positions[static_cast<std::size_t>(v)];
    };
    const long cw = W;
    auto tri = [&](long a0, long b0, long a1, long b1, long a2, long b2) {
      TriRef tr;
      tr.gore = i;
      tr.p[0] = at(static_cast<int>(a0), static_cast<int>(b0));
      tr.p[1] = at(static_cast<int>(a1), static_cast<int>(b1));
      tr.p[2] = at(static_cast<int>(a2), static_cast<int>(b2));
      tr.a[0] = a0; tr.b[0] = b0;
      tr.a[1] = a1; tr.b[1] = b1;
      tr.a[2] = a2; tr.b[2] = b2;
      base.push_back(tr);
    };
    tri(0, cw, 0, 0, cw, cw);
    tri(0, 0, cw, 0, cw, cw);
    tri(cw, cw, cw, 0, 2 * cw, cw);
    tri(cw, 0, 2 * cw, 0, 2 * cw, cw);
  }

  auto locate = [&](const Vec3& d) -> TriRef {
    const TriRef* best = &base[0];
    double bs = -1e9;
    for (const auto& tr : base) {
      TriRef o = tr;
      orient(o);
      const double s = inside_score(o, d);
      if (s > bs) {
        bs = s;
        best = &tr;
      }
    }
    TriRef cur = *best;
    for (int depth = 0; depth < mesh.r; ++depth) {
      const Vec3 m01 = mid3(cur.p[0], cur.p[1]);
      const Vec3 m12 = mid3(cur.p[1], cur.p[2]);
      const Vec3 m02 = mid3(cur.p[0], cur.p[2]);
      const long a01 = (cur.a[0] + cur.a[1]) / 2, b01 = (cur.b[0] + cur.b[1]) / 2;
      const long a12 = (cur.a[1] + cur.a[2]) / 2, b12 = (cur.b[1] + cur.b[2]) / 2;
      const long a02 = (cur.a[0] + cur.a[2]) / 2, b02 = (cur.b[0] + cur.b[2]) / 2;
      TriRef children[4];
      auto mk = [&](int k, Vec3 q0, long qa0, long qb0, Vec3 q1, long qa1,
                    long qb1, Vec3 q2, long qa2, long qb2) {
        children[k].gore = cur.gore;
        children[k].p[0] = q0; children[k].a[0] = qa0; children[k].b[0] = qb0;
        children[k].p[1] = q1; children[k].a[1] = qa1; children[k].b[1] = qb1;
        children[k].p[2] = q2; children[k].a[2] = qa2; children[k].b[2] = qb2;
      };
      mk(0, cur.p[0], cur.a[0], cur.b[0], m01, a01, b01, m02, a02, b02);
      mk(1, m01, a01, b01, cur.p[1], cur.a[1], cur.b[1], m12, a12, b12);
      mk(2, m02, a02, b02, m12, a12, b12, cur.p[2], cur.a[2], cur.b[2]);
      mk(3, m01, a01, b01, m12, a12, b12, m02, a02, b02);
      int bestk = 0;
      double bestsc = -1e9;
      for (int k = 0; k < 4; ++k) {
        TriRef o = children[k];
        orient(o);
        const double s = inside_score(o, d);
        if (s > bestsc) {
          bestsc = s;
          bestk = k;
        }
      }
      cur = children[bestk];
    }
    return cur;
  };

  const int h = img.height, w = img.width;
#pragma omp parallel for schedule(dynamic, 8)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double zen = (y + 0.5) / h * M_PI;
      const double lam = (x + 0.5) / w * 2.0 * M_PI - M_PI;
      const Vec3 d{std::sin(zen) * std::cos(lam), std::cos(zen),
                   std::sin(zen) * std::sin(lam)};
      const TriRef tr = locate(d);
      // Planar barycentric of the ray-plane intersection.
      const double den = det3(tr.p[0], tr.p[1], tr.p[2]);
      double bc[3] = {det3(d, tr.p[1], tr.p[2]) / den,
                      det3(tr.p[0], d, tr.p[2]) / den,
                      det3(tr.p[0], tr.p[1], d) / den};
      double bs = bc[0] + bc[1] + bc[2];
      for (double& v : bc) v /= bs;
      // Corner vertex ids; a pole corner borrows the nearest non-pole corner.
      int ids[3];
      for (int k = 0; k < 3; ++k)
        ids[k] = mesh.resolve(tr.gore, static_cast<int>(tr.a[k]),
                              static_cast<int>(tr.b[k]));
      for (int k = 0; k < 3; ++k) {
        if (ids[k] < mesh.nonpole_count()) continue;
        int sub = -1;
        double bestd = 1e9;
        for (int j = 0; j < 3; ++j) {
          if (j == k || ids[j] >= mesh.nonpole_count()) continue;
          const Vec3& pj = tr.p[j];
          const double dd = (pj[0] - d[0]) * (pj[0] - d[0]) +
                            (pj[1] - d[1]) * (pj[1] - d[1]) +
                            (pj[2] - d[2]) * (pj[2] - d[2]);
          if (dd < bestd) {
            bestd = dd;
            sub = j;
          }
        }
        ids[k] = ids[sub];
      }
      for (int c = 0; c < t.channels; ++c) {
        double acc = 0.0;
        for (int k = 0; k < 3; ++k) {
          int comp, row, col;
          if (!mesh.vertex_to_grid(ids[k], comp, row, col)) continue;
          acc += bc[k] *
                 t.comp[static_cast<std::size_t>(comp)].at(c, row, col);
        }
        img.at(y, x, c) = static_cast<float>(acc);
      }
    }
  }
  return img;
}

Tensor export_unfolded(const SphereTensor& t) {
  const int W = t.W();
  const int gap = 1;
  Tensor out({t.channels, 2 * W, 5 * W + 4 * gap});
  for (int i = 0; i < 5; ++i) {
    const int x0 = i * (W + gap);
    const Tensor& comp = t.comp[static_cast<std::size_t>(i)];
    for (int c = 0; c < t.channels; ++c)
      for (int y = 0; y < 2 * W; ++y)
        for (int x = 0; x < W; ++x) out.at(c, y, x0 + x) = comp.at(c, y, x);
  }
  return out;
}

bool level_resolution(int level, int& height, int& width) {
  switch (level) {
    case 6: height = 48; width = 80; return true;
    case 7: height = 96; width = 160; return true;
    case 8: height = 192; width = 320; return true;
    default: return false;
  }
}

EquirectImage read_pnm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::string magic;
  is >> magic;
  if (magic != "P5" && magic != "P6")
    throw std::runtime_error("unsupported image format (need binary PGM/PPM)");
  auto next_int = [&]() {
    int v;
    while (is >> std::ws) {
      if (is.peek() == '#') {
        std::string line;
        std::getline(is, line);
        continue;
      }
      break;
    }
    is >> v;
    return v;
  };
  const int w = next_int(), h = next_int(), maxv = next_int();
  if (maxv != 255) throw std::runtime_error("only 8-bit PNM supported");
  is.get();  // single whitespace after header
  const int c = magic == "P6" ? 3 : 1;
  EquirectImage img;
  img.height = h;
  img.width = w;
  img.channels = c;
  img.pixels.resize(static_cast<std::size_t>(h) * w * c);
  std::vector<unsigned char> raw(img.pixels.size());
  is.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (!is) throw std::runtime_error("truncated image: " + path);
  for (std::size_t i = 0; i < raw.size(); ++i)
    img.pixels[i] = static_cast<float>(raw[i]) / 255.0f;
  return img;
}

void write_pnm(const std::string& path, const EquirectImage& img) {
  if (img.channels != 1 && img.channels != 3)
    throw std::runtime_error("write_pnm: need 1 or 3 channels");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << (img.channels == 3 ? "P6" : "P5") << "\n"
     << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.pixels.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const float v = std::clamp(img.pixels[i], 0.0f, 1.0f);
    raw[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
  }
  os.write(reinterpret_cast<const char*>(raw.data()),
           static_cast<std::streamsize>(raw.size()));
}

void write_pnm_raster(const std::string& path, const Tensor& raster) {
  const int c = raster.shape[0], h = raster.shape[1], w = raster.shape[2];
  if (c != 1 && c != 3) throw std::runtime_error("raster must have 1 or 3 channels");
  EquirectImage img;
  img.height = h;
  img.width = w;
  img.channels = c;
  img.pixels.resize(static_cast<std::size_t>(h) * w * c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch)
        img.pixels[(static_cast<std::size_t>(y) * w + x) * c + ch] =
            raster.at(ch, y, x);
  write_pnm(path, img);
}

}  // namespace icosph
