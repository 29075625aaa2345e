#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "icosph/mesh.hpp"
#include "icosph/sphereops.hpp"

using namespace icosph;

namespace {

SphereTensor id_tensor(const MeshLevel& m) {
  SphereTensor t = make_sphere_tensor(m.r, 1);
  for (int comp = 0; comp < 5; ++comp)
    for (int row = 0; row < 2 * m.W; ++row)
      for (int col = 0; col < m.W; ++col)
        t.comp[static_cast<std::size_t>(comp)].at(0, row, col) =
            static_cast<float>(m.grid_to_vertex(comp, row, col));
  return t;
}

SphereTensor random_tensor(int r, int channels, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  SphereTensor t = make_sphere_tensor(r, channels);
  for (auto& comp : t.comp)
    for (float& v : comp.data) v = dist(rng);
  return t;
}

HexKernelBank random_bank(int cout, int cin, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  HexKernelBank bank;
  bank.c_out = cout;
  bank.c_in = cin;
  bank.weights.resize(static_cast<std::size_t>(cout) * cin * 7);
  bank.bias.resize(static_cast<std::size_t>(cout));
  for (float& v : bank.weights) v = dist(rng);
  for (float& v : bank.bias) v = dist(rng);
  return bank;
}

}  // namespace

TEST_CASE("pad shapes") {
  for (int r = 0; r <= 3; ++r) {
    const int W = 1 << r;
    SphereTensor t = make_sphere_tensor(r, 2);
    auto west = pad(t, PadMode::West);
    auto full = pad(t, PadMode::Full);
    for (int i = 0; i < 5; ++i) {
      CHECK(west[static_cast<std::size_t>(i)].shape ==
            std::vector<int>{2, 2 * W + 1, W + 1});
      CHECK(full[static_cast<std::size_t>(i)].shape ==
            std::vector<int>{2, 2 * W + 2, W + 2});
    }
  }
}

TEST_CASE("padding pulls the exact seam values, exhaustively") {
  for (int r = 0; r <= 3; ++r) {
    MeshLevel m = build_mesh(r);
    const int W = m.W;
    SphereTensor t = id_tensor(m);
    auto full = pad(t, PadMode::Full);
    for (int comp = 0; comp < 5; ++comp) {
      const Tensor& p = full[static_cast<std::size_t>(comp)];
      for (int a = 0; a <= 2 * W + 1; ++a)
        for (int b = 0; b <= W + 1; ++b) {
          const bool border = a == 0 || a == 2 * W + 1 || b == 0 || b == W + 1;
          const float got = p.at(0, a, b);
          if (!border) {
            CHECK(got == static_cast<float>(m.grid_to_vertex(comp, a - 1, b - 1)));
            continue;
          }
          const int v = m.resolve(comp, a, b);
          if (v < 0 || v >= m.nonpole_count()) {
            CHECK(got == 0.0f);  // poles and dead corners hold zero
          } else {
            CHECK(got == static_cast<float>(v));
          }
        }
    }
  }
}

TEST_CASE("west padding is the matching sub-block of full padding") {
  MeshLevel m = build_mesh(2);
  SphereTensor t = id_tensor(m);
  auto west = pad(t, PadMode::West);
  auto full = pad(t, PadMode::Full);
  for (int comp = 0; comp < 5; ++comp) {
    const Tensor& wp = west[static_cast<std::size_t>(comp)];
    const Tensor& fp = full[static_cast<std::size_t>(comp)];
    for (int a = 0; a <= 2 * m.W; ++a)
      for (int b = 0; b <= m.W; ++b) CHECK(wp.at(0, a, b) == fp.at(0, a, b));
  }
}

TEST_CASE("hex_masks place the seven taps in the documented pattern") {
  HexKernelBank bank;
  bank.c_out = 1;
  bank.c_in = 1;
  bank.weights = {1, 2, 3, 4, 5, 6, 7};  // w1..w7
  float w1[9], w2[9];
  hex_masks(bank, 0, 0, w1, w2);
  // W1 = [[w2,w1,0],[w3,w7,w6],[0,w4,w5]]
  const float e1[9] = {2, 1, 0, 3, 7, 6, 0, 4, 5};
  // W2 = [[w3,w2,0],[w4,w7,w1],[0,w5,w6]]
  const float e2[9] = {3, 2, 0, 4, 7, 1, 0, 5, 6};
  for (int i = 0; i < 9; ++i) {
    CHECK(w1[i] == e1[i]);
    CHECK(w2[i] == e2[i]);
  }
}

TEST_CASE("hexconv of a constant is constant away from the poles") {
  MeshLevel m = build_mesh(3);
  AlphaMaps alphas = compute_alpha_maps(m);
  SphereTensor t = make_sphere_tensor(3, 2);
  for (auto& comp : t.comp)
    for (float& v : comp.data) v = 1.5f;
  HexKernelBank bank = random_bank(3, 2, 7);
  SphereTensor out = hexconv(t, bank, alphas);
  for (int oc = 0; oc < 3; ++oc) {
    float expect = bank.bias[static_cast<std::size_t>(oc)];
    for (int ic = 0; ic < 2; ++ic)
      for (int j = 1; j <= 7; ++j) expect += 1.5f * bank.w(oc, ic, j);
    for (int v = 0; v < m.nonpole_count(); ++v) {
      bool pole_adj = false;
      for (int nb : m.neighbors(v)) pole_adj = pole_adj || nb >= m.nonpole_count();
      if (pole_adj) continue;
      int comp, row, col;
      REQUIRE(m.vertex_to_grid(v, comp, row, col));
      CHECK(out.comp[static_cast<std::size_t>(comp)].at(oc, row, col) ==
            doctest::Approx(expect).epsilon(1e-5));
    }
  }
}

TEST_CASE("pooling aggregates the expected two-level groups") {
  MeshLevel fine = build_mesh(3);
  MeshLevel coarse = build_mesh(2);
  SphereTensor t = id_tensor(fine);
  SphereTensor mx = sphere_pool(t, PoolMode::Max);
  SphereTensor av = sphere_pool(t, PoolMode::Average);
  for (int comp = 0; comp < 5; ++comp)
    for (int row = 0; row < 2 * coarse.W; ++row)
      for (int col = 0; col < coarse.W; ++col) {
        const int vf = fine.grid_to_vertex(comp, 2 * row + 1, 2 * col + 1);
        const auto ns = fine.neighbors(vf);
        const int members[4] = {vf, ns[0], ns[1], ns[2]};
        float expect_max = -1.0f, expect_avg = 0.0f;
        for (int k = 0; k < 4; ++k) {
          expect_max = std::max(expect_max, static_cast<float>(members[k]));
          expect_avg += static_cast<float>(members[k]) * 0.25f;
        }
        CHECK(mx.comp[static_cast<std::size_t>(comp)].at(0, row, col) ==
              expect_max);
        CHECK(av.comp[static_cast<std::size_t>(comp)].at(0, row, col) ==
              doctest::Approx(expect_avg));
      }
}

TEST_CASE("sphere_pool halves the level and keeps constants") {
  SphereTensor t = make_sphere_tensor(3, 2);
  for (auto& comp : t.comp)
    for (float& v : comp.data) v = -2.25f;
  for (PoolMode mode : {PoolMode::Max, PoolMode::Average}) {
    SphereTensor out = sphere_pool(t, mode);
    CHECK(out.r == 2);
    CHECK(out.channels == 2);
    for (const auto& comp : out.comp)
      for (float v : comp.data) CHECK(v == doctest::Approx(-2.25f));
  }
}

TEST_CASE("sphere_upsample doubles the level") {
  SphereTensor t = random_tensor(2, 3, 11);
  SphereTensor out = sphere_upsample(t);
  CHECK(out.r == 3);
  CHECK(out.channels == 3);
  CHECK(all_finite(out));
}

TEST_CASE("pointwise_conv mixes channels per cell") {
  SphereTensor t = make_sphere_tensor(1, 2);
  for (int i = 0; i < 5; ++i) {
    for (float& v : t.comp[static_cast<std::size_t>(i)].data) v = 0.0f;
    t.comp[static_cast<std::size_t>(i)].at(0, 0, 0) = 2.0f;
    t.comp[static_cast<std::size_t>(i)].at(1, 0, 0) = 3.0f;
  }
  Tensor w({1, 2});
  w.data = {10.0f, 100.0f};
  SphereTensor out = pointwise_conv(t, w, {1.0f});
  CHECK(out.channels == 1);
  for (int i = 0; i < 5; ++i) {
    CHECK(out.comp[static_cast<std::size_t>(i)].at(0, 0, 0) ==
          doctest::Approx(321.0f));
    CHECK(out.comp[static_cast<std::size_t>(i)].at(0, 1, 0) ==
          doctest::Approx(1.0f));
  }
}

TEST_CASE("concat and rotation behave structurally") {
  SphereTensor a = random_tensor(2, 2, 1);
  SphereTensor b = random_tensor(2, 3, 2);
  SphereTensor c = concat_channels(a, b);
  CHECK(c.channels == 5);
  CHECK(c.comp[0].at(0, 1, 1) == a.comp[0].at(0, 1, 1));
  CHECK(c.comp[0].at(2, 1, 1) == b.comp[0].at(0, 1, 1));

  SphereTensor r1 = rotate_components(a, 1);
  CHECK(r1.comp[1].data == a.comp[0].data);
  CHECK(r1.comp[0].data == a.comp[4].data);
  SphereTensor r0 = rotate_components(r1, 4);
  for (int i = 0; i < 5; ++i)
    CHECK(r0.comp[static_cast<std::size_t>(i)].data ==
          a.comp[static_cast<std::size_t>(i)].data);
}

TEST_CASE("hexconv commutes with component rotation bit-exactly") {
  MeshLevel m = build_mesh(3);
  AlphaMaps alphas = compute_alpha_maps(m);
  SphereTensor t = random_tensor(3, 2, 21);
  HexKernelBank bank = random_bank(2, 2, 22);
  SphereTensor a = rotate_components(hexconv(t, bank, alphas), 1);
  SphereTensor b = hexconv(rotate_components(t, 1), bank, alphas);
  for (int i = 0; i < 5; ++i)
    CHECK(a.comp[static_cast<std::size_t>(i)].data ==
          b.comp[static_cast<std::size_t>(i)].data);
}

TEST_CASE("sphere tensor file round trips") {
  SphereTensor t = random_tensor(2, 3, 33);
  const std::string path = "sphere_roundtrip.sph";
  write_sphere_file(path, t);
  SphereTensor u = read_sphere_file(path);
  CHECK(u.r == t.r);
  CHECK(u.channels == t.channels);
  for (int i = 0; i < 5; ++i)
    CHECK(u.comp[static_cast<std::size_t>(i)].data ==
          t.comp[static_cast<std::size_t>(i)].data);
  std::remove(path.c_str());
}

TEST_CASE("degenerate level 0 ops run") {
  SphereTensor t = random_tensor(1, 1, 5);
  SphereTensor pooled = sphere_pool(t, PoolMode::Max);
  CHECK(pooled.r == 0);
  SphereTensor up = sphere_upsample(pooled);
  CHECK(up.r == 1);
  MeshLevel m = build_mesh(0);
  AlphaMaps alphas = compute_alpha_maps(m);
  SphereTensor zero = make_sphere_tensor(0, 1);
  HexKernelBank bank = random_bank(1, 1, 6);
  SphereTensor conv = hexconv(zero, bank, alphas);
  CHECK(conv.r == 0);
  CHECK(all_finite(conv));
}
