#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>

#include "icosph.h"

TEST_CASE("version and error strings are always available") {
  CHECK(ico_version() != nullptr);
  CHECK(ico_last_error() != nullptr);
}

TEST_CASE("mesh handle reports the closed-form counts") {
  ico_mesh* m = ico_mesh_open(3);
  REQUIRE(m != nullptr);
  CHECK(ico_mesh_level(m) == 3);
  CHECK(ico_mesh_vertex_count(m) == 642);
  CHECK(ico_mesh_face_count(m) == 1280);
  CHECK(ico_mesh_edge_count(m) == 1920);
  CHECK(ico_mesh_grid_width(m) == 8);
  char* json = nullptr;
  REQUIRE(ico_mesh_info_json(m, &json) == ICO_OK);
  CHECK(std::strstr(json, "\"vertices\":642") != nullptr);
  ico_string_free(json);
  ico_mesh_free(m);
}

TEST_CASE("invalid level fails with a message") {
  CHECK(ico_mesh_open(-1) == nullptr);
  CHECK(std::strlen(ico_last_error()) > 0);
}

TEST_CASE("sphere tensor handles round trip through files") {
  ico_stensor* t = ico_stensor_create(2, 3);
  REQUIRE(t != nullptr);
  CHECK(ico_stensor_level(t) == 2);
  CHECK(ico_stensor_channels(t) == 3);
  float* data = ico_stensor_data(t, 0);
  REQUIRE(data != nullptr);
  data[0] = 1.5f;
  data[1] = -2.0f;
  const char* path = "capi_tensor.sph";
  REQUIRE(ico_stensor_write(t, path) == ICO_OK);
  ico_stensor* u = ico_stensor_read(path);
  REQUIRE(u != nullptr);
  CHECK(ico_stensor_level(u) == 2);
  CHECK(ico_stensor_data(u, 0)[0] == 1.5f);
  CHECK(ico_stensor_data(u, 0)[1] == -2.0f);
  ico_stensor_free(t);
  ico_stensor_free(u);
  std::remove(path);
  CHECK(ico_stensor_read("missing.sph") == nullptr);
}

TEST_CASE("alpha maps export as a single-channel sphere tensor") {
  ico_mesh* m = ico_mesh_open(2);
  REQUIRE(m != nullptr);
  const char* path = "capi_alpha.sph";
  REQUIRE(ico_mesh_write_alpha(m, path) == ICO_OK);
  ico_stensor* t = ico_stensor_read(path);
  REQUIRE(t != nullptr);
  CHECK(ico_stensor_channels(t) == 1);
  for (int comp = 0; comp < 5; ++comp) {
    const float* d = ico_stensor_data(t, comp);
    for (int i = 0; i < 2 * 4 * 4; ++i) {
      CHECK(d[i] > 0.0f);
      CHECK(d[i] < 1.0f);
    }
  }
  ico_stensor_free(t);
  ico_mesh_free(m);
  std::remove(path);
}

TEST_CASE("network handles expose counts and audits") {
  ico_net* n = ico_net_build("hexrunet-c", 16);
  REQUIRE(n != nullptr);
  CHECK(ico_net_param_count(n) == 74730);
  int64_t pub = 0;
  REQUIRE(ico_net_published_total(n, &pub) == 1);
  CHECK(pub == 74730);
  char* json = nullptr;
  REQUIRE(ico_net_audit_json(n, &json) == ICO_OK);
  CHECK(std::strstr(json, "\"total\":74730") != nullptr);
  ico_string_free(json);
  ico_net_free(n);
  CHECK(ico_net_build("no-such-net", 16) == nullptr);
}

TEST_CASE("end-to-end inference through the C interface") {
  ico_net* n = ico_net_build("hexrunet-c", 16);
  REQUIRE(n != nullptr);
  const char* wdir = "capi_weights";
  REQUIRE(ico_net_init_weights(n, 11, wdir) == ICO_OK);

  ico_stensor* in = ico_stensor_create(4, 1);
  for (int comp = 0; comp < 5; ++comp) {
    float* d = ico_stensor_data(in, comp);
    for (int i = 0; i < 2 * 16 * 16; ++i)
      d[i] = 0.01f * static_cast<float>((i * 7 + comp) % 101 - 50);
  }
  const char* in_path = "capi_in.sph";
  REQUIRE(ico_stensor_write(in, in_path) == ICO_OK);
  ico_stensor_free(in);

  char* json = nullptr;
  REQUIRE(ico_net_forward(n, wdir, in_path, "capi_out.ten", &json) == ICO_OK);
  REQUIRE(json != nullptr);
  CHECK(std::strstr(json, "\"argmax\"") != nullptr);
  ico_string_free(json);
  ico_net_free(n);
  std::remove(in_path);
  std::remove("capi_out.ten");
  std::filesystem::remove_all(wdir);
}

TEST_CASE("kernel transfer through the C interface") {
  const double p[9] = {0, 0, 0, 0, 1, 0, 0, 0, 0};
  double w[7] = {0};
  REQUIRE(ico_transfer_kernel(p, w) == ICO_OK);
  CHECK(w[6] == doctest::Approx(1.0));
  CHECK(w[1] == doctest::Approx(0.0669873).epsilon(1e-4));
}

TEST_CASE("oracle check passes at a small level") {
  int pass = 0;
  char* json = nullptr;
  REQUIRE(ico_oracle_check(2, 0, &pass, &json) == ICO_OK);
  CHECK(pass == 1);
  REQUIRE(json != nullptr);
  CHECK(std::strstr(json, "hexconv_max_rel_err") != nullptr);
  ico_string_free(json);
}
