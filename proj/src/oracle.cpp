#include "icosph/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace icosph {

VertexSignal make_vertex_signal(int n, int channels) {
  VertexSignal s;
  s.n = n;
  s.channels = channels;
  s.values.assign(static_cast<std::size_t>(n) * channels, 0.0f);
  return s;
}

VertexSignal to_vertex_signal(const SphereTensor& t, const MeshLevel& mesh) {
  if (mesh.r != t.r) throw std::invalid_argument("to_vertex_signal: level mismatch");
  VertexSignal s = make_vertex_signal(mesh.vertex_count(), t.channels);
  for (int v = 0; v < mesh.nonpole_count(); ++v) {
    int comp, row, col;
    mesh.vertex_to_grid(v, comp, row, col);
    for (int c = 0; c < t.channels; ++c)
      s.at(v, c) = t.comp[static_cast<std::size_t>(comp)].at(c, row, col);
  }
  return s;
}

SphereTensor from_vertex_signal(const VertexSignal& sig, const MeshLevel& mesh) {
  if (sig.n != mesh.vertex_count())
    throw std::invalid_argument("from_vertex_signal: size mismatch");
  SphereTensor t = make_sphere_tensor(mesh.r, sig.channels);
  for (int v = 0; v < mesh.nonpole_count(); ++v) {
    int comp, row, col;
    mesh.vertex_to_grid(v, comp, row, col);
    for (int c = 0; c < sig.channels; ++c)
      t.comp[static_cast<std::size_t>(comp)].at(c, row, col) = sig.at(v, c);
  }
  return t;
}

static float alpha_of(const AlphaMaps& alphas, const MeshLevel& mesh, int v) {
  int comp, row, col;
  mesh.vertex_to_grid(v, comp, row, col);
  return alphas.alpha[static_cast<std::size_t>(comp)].at(0, row, col);
}

VertexSignal graph_hexconv_ref(const VertexSignal& sig, const HexKernelBank& bank,
                               const MeshLevel& mesh, const AlphaMaps& alphas) {
  if (sig.channels != bank.c_in)
    throw std::invalid_argument("graph_hexconv_ref: channel mismatch");
  if (sig.n != mesh.vertex_count() || alphas.r != mesh.r)
    throw std::invalid_argument("graph_hexconv_ref: level mismatch");
  VertexSignal out = make_vertex_signal(sig.n, bank.c_out);
  for (int v = 0; v < mesh.nonpole_count(); ++v) {
    const auto ns = mesh.neighbors(v);
    const float al = alpha_of(alphas, mesh, v);
    for (int oc = 0; oc < bank.c_out; ++oc) {
      float north = 0.0f, south = 0.0f;
      for (int ic = 0; ic < bank.c_in; ++ic) {
        const float center = sig.at(v, ic);
        float sn = bank.w(oc, ic, 7) * center;
        float ss = bank.w(oc, ic, 7) * center;
        for (int j = 1; j <= 6; ++j) {
          sn += bank.w(oc, ic, j) * sig.at(ns[static_cast<std::size_t>(j - 1)], ic);
          // rotated taps: w_j reads the cyclic predecessor, w1 wraps to n6
          const int src = j == 1 ? ns[5] : ns[static_cast<std::size_t>(j - 2)];
          ss += bank.w(oc, ic, j) * sig.at(src, ic);
        }
        north += sn;
        south += ss;
      }
      float val = al * north + (1.0f - al) * south;
      if (!bank.bias.empty()) val += bank.bias[static_cast<std::size_t>(oc)];
      out.at(v, oc) = val;
    }
  }
  return out;
}

std::vector<std::array<double, 6>> compute_thetas(const MeshLevel& mesh) {
  std::vector<std::array<double, 6>> out(
      static_cast<std::size_t>(mesh.nonpole_count()));
  auto angle = [](const Vec3& e, const Vec3& n) {
    const double d = e[0] * n[0] + e[1] * n[1] + e[2] * n[2];
    const Vec3 p{e[0] - d * n[0], e[1] - d * n[1], e[2] - d * n[2]};
    const double ne = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
    const double np2 = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    double c = (e[0] * p[0] + e[1] * p[1] + e[2] * p[2]) / (ne * np2);
    return std::acos(std::clamp(c, -1.0, 1.0));
  };
  for (int v = 0; v < mesh.nonpole_count(); ++v) {
    const Vec3& vi = mesh.positions[static_cast<std::size_t>(v)];
    Vec3 n{-vi[2], 0.0, vi[0]};
    const double nn = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    n = {n[0] / nn, n[1] / nn, n[2] / nn};
    const auto ns = mesh.neighbors(v);
    for (int j = 1; j <= 6; ++j) {
      const int cur = ns[static_cast<std::size_t>(j - 1)];
      const int pred = j == 1 ? ns[5] : ns[static_cast<std::size_t>(j - 2)];
      const Vec3& pc = mesh.positions[static_cast<std::size_t>(cur)];
      const Vec3& pp = mesh.positions[static_cast<std::size_t>(pred)];
      const double psi = angle({vi[0] - pc[0], vi[1] - pc[1], vi[2] - pc[2]}, n);
      const double phi = angle({vi[0] - pp[0], vi[1] - pp[1], vi[2] - pp[2]}, n);
      double th = phi / (phi + psi);
      out[static_cast<std::size_t>(v)][static_cast<std::size_t>(j - 1)] =
          std::clamp(th, 1e-6, 1.0 - 1e-6);
    }
  }
  return out;
}

VertexSignal graph_eq1_ref(const VertexSignal& sig, const HexKernelBank& bank,
                           const MeshLevel& mesh,
                           const std::vector<std::array<double, 6>>& thetas) {
  if (sig.channels != bank.c_in || sig.n != mesh.vertex_count() ||
      thetas.size() != static_cast<std::size_t>(mesh.nonpole_count()))
    throw std::invalid_argument("graph_eq1_ref: input mismatch");
  VertexSignal out = make_vertex_signal(sig.n, bank.c_out);
  for (int v = 0; v < mesh.nonpole_count(); ++v) {
    const auto ns = mesh.neighbors(v);
    const auto& th = thetas[static_cast<std::size_t>(v)];
    for (int oc = 0; oc < bank.c_out; ++oc) {
      float acc = 0.0f;
      for (int ic = 0; ic < bank.c_in; ++ic) {
        acc += bank.w(oc, ic, 7) * sig.at(v, ic);
        for (int j = 1; j <= 6; ++j) {
          const int cur = ns[static_cast<std::size_t>(j - 1)];
          const int pred = j == 1 ? ns[5] : ns[static_cast<std::size_t>(j - 2)];
          const float t = static_cast<float>(th[static_cast<std::size_t>(j - 1)]);
          acc += bank.w(oc, ic, j) *
                 (t * sig.at(cur, ic) + (1.0f - t) * sig.at(pred, ic));
        }
      }
      if (!bank.bias.empty()) acc += bank.bias[static_cast<std::size_t>(oc)];
      out.at(v, oc) = acc;
    }
  }
  return out;
}

VertexSignal graph_pool_ref(const VertexSignal& sig, const MeshLevel& fine,
                            const MeshLevel& coarse, PoolMode mode) {
  if (fine.r != coarse.r + 1 || sig.n != fine.vertex_count())
    throw std::invalid_argument("graph_pool_ref: level mismatch");
  VertexSignal out = make_vertex_signal(coarse.vertex_count(), sig.channels);
  for (int vc = 0; vc < coarse.nonpole_count(); ++vc) {
    int comp, row, col;
    coarse.vertex_to_grid(vc, comp, row, col);
    const int vf = fine.grid_to_vertex(comp, 2 * row + 1, 2 * col + 1);
    const auto ns = fine.neighbors(vf);
    const int members[4] = {vf, ns[0], ns[1], ns[2]};
    for (int c = 0; c < sig.channels; ++c) {
      if (mode == PoolMode::Max) {
        float m = sig.at(members[0], c);
        for (int k = 1; k < 4; ++k) m = std::max(m, sig.at(members[k], c));
        out.at(vc, c) = m;
      } else {
        float s = 0.0f;
        for (int k = 0; k < 4; ++k) s += sig.at(members[k], c);
        out.at(vc, c) = s * 0.25f;
      }
    }
  }
  return out;
}

VertexSignal graph_upsample_ref(const VertexSignal& sig, const MeshLevel& coarse,
                                const MeshLevel& fine) {
  if (fine.r != coarse.r + 1 || sig.n != coarse.vertex_count())
    throw std::invalid_argument("graph_upsample_ref: level mismatch");
  const int Wc = coarse.W;
  // West-padded coarse raster value, pole slots zero like the grid path.
  auto padded = [&](int comp, int a, int b, int c) -> float {
    const int v = coarse.resolve(comp, a, b);
    if (v < 0 || v >= coarse.nonpole_count()) return 0.0f;
    return sig.at(v, c);
  };
  VertexSignal out = make_vertex_signal(fine.vertex_count(), sig.channels);
  for (int vf = 0; vf < fine.nonpole_count(); ++vf) {
    int comp, row, col;
    fine.vertex_to_grid(vf, comp, row, col);
    // Fine cell (row,col) sits at index (row+1,col+1) of the un-cropped 2x
    // raster; align-corners-false maps it to padded coordinate k/2 + 0.25.
    auto taps = [&](int k, int n, int& i0, int& i1, float& f) {
      float src = (k + 0.5f) / 2.0f - 0.5f;
      src = std::clamp(src, 0.0f, static_cast<float>(n - 1));
      i0 = static_cast<int>(src);
      i1 = std::min(i0 + 1, n - 1);
      f = src - static_cast<float>(i0);
    };
    int a0, a1, b0, b1;
    float fa, fb;
    taps(row + 1, 2 * Wc + 1, a0, a1, fa);
    taps(col + 1, Wc + 1, b0, b1, fb);
    for (int c = 0; c < sig.channels; ++c) {
      const float v00 = padded(comp, a0, b0, c), v01 = padded(comp, a0, b1, c);
      const float v10 = padded(comp, a1, b0, c), v11 = padded(comp, a1, b1, c);
      const float top = v00 + (v01 - v00) * fb;
      const float bot = v10 + (v11 - v10) * fb;
      out.at(vf, c) = top + (bot - top) * fa;
    }
  }
  return out;
}

}  // namespace icosph
