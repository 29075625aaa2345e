#include "icosph.h"

#include <cmath>
#include <cstring>
#include <random>
#include <string>

#include <json.hpp>

#include "icosph/mesh.hpp"
#include "icosph/nn.hpp"
#include "icosph/oracle.hpp"
#include "icosph/resample.hpp"
#include "icosph/sphereops.hpp"

using nlohmann::json;

struct ico_mesh {
  icosph::MeshLevel mesh;
  icosph::AlphaMaps alphas;
};

struct ico_stensor {
  icosph::SphereTensor t;
};

struct ico_net {
  icosph::NetworkSpec spec;
};

namespace {

thread_local std::string g_error;

void set_error(const std::string& msg) { g_error = msg; }

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return ICO_ERR_INVALID;
  } catch (const std::exception& e) {
    set_error(e.what());
    return ICO_ERR_IO;
  } catch (...) {
    set_error("unknown failure");
    return ICO_ERR_INTERNAL;
  }
}

icosph::EquirectImage load_panorama(const char* path) {
  icosph::EquirectImage img = icosph::read_pnm(path);
  if (img.width != 2 * img.height)
    throw std::invalid_argument("panorama width must be twice its height");
  return img;
}

}  // namespace

extern "C" {

const char* ico_version(void) { return "1.0.0"; }

const char* ico_last_error(void) { return g_error.c_str(); }

void ico_string_free(char* s) { delete[] s; }

/* ---- mesh ---- */

ico_mesh* ico_mesh_open(int level) {
  if (level < 0 || level > 10) {
    set_error("level must be in 0..10");
    return nullptr;
  }
  try {
    auto* m = new ico_mesh;
    icosph::get_mesh_and_alphas(level, m->mesh, m->alphas);
    return m;
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

void ico_mesh_free(ico_mesh* m) { delete m; }

int ico_mesh_level(const ico_mesh* m) { return m->mesh.r; }

int64_t ico_mesh_vertex_count(const ico_mesh* m) {
  return m->mesh.vertex_count();
}

int64_t ico_mesh_face_count(const ico_mesh* m) { return m->mesh.face_count(); }

int64_t ico_mesh_edge_count(const ico_mesh* m) {
  return 30LL * (1LL << (2 * m->mesh.r));
}

int ico_mesh_grid_width(const ico_mesh* m) { return m->mesh.W; }

int ico_mesh_info_json(const ico_mesh* m, char** json_out) {
  return guarded([&] {
    const int W = m->mesh.W;
    json j{{"level", m->mesh.r},
           {"vertices", m->mesh.vertex_count()},
           {"faces", m->mesh.face_count()},
           {"edges", 30LL * (1LL << (2 * m->mesh.r))},
           {"components", 5},
           {"component_shape", {2 * W, W}}};
    *json_out = dup_string(j.dump());
    return ICO_OK;
  });
}

int ico_mesh_write_alpha(const ico_mesh* m, const char* path) {
  return guarded([&] {
    icosph::SphereTensor t = icosph::make_sphere_tensor(m->mesh.r, 1);
    for (int i = 0; i < 5; ++i)
      t.comp[static_cast<std::size_t>(i)] =
          m->alphas.alpha[static_cast<std::size_t>(i)];
    icosph::write_sphere_file(path, t);
    return ICO_OK;
  });
}

/* ---- sphere tensors ---- */

ico_stensor* ico_stensor_create(int level, int channels) {
  try {
    auto* t = new ico_stensor;
    t->t = icosph::make_sphere_tensor(level, channels);
    return t;
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

ico_stensor* ico_stensor_read(const char* path) {
  try {
    auto* t = new ico_stensor;
    t->t = icosph::read_sphere_file(path);
    return t;
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

int ico_stensor_write(const ico_stensor* t, const char* path) {
  return guarded([&] {
    icosph::write_sphere_file(path, t->t);
    return ICO_OK;
  });
}

void ico_stensor_free(ico_stensor* t) { delete t; }

int ico_stensor_level(const ico_stensor* t) { return t->t.r; }

int ico_stensor_channels(const ico_stensor* t) { return t->t.channels; }

float* ico_stensor_data(ico_stensor* t, int component) {
  if (component < 0 || component > 4) {
    set_error("component must be in 0..4");
    return nullptr;
  }
  return t->t.comp[static_cast<std::size_t>(component)].data.data();
}

/* ---- resampling ---- */

int ico_resample_to_sphere(int level, const char* image_path, int mode,
                           const char* out_path, char** json_out) {
  return guarded([&] {
    const icosph::EquirectImage img = load_panorama(image_path);
    icosph::MeshLevel mesh;
    icosph::AlphaMaps alphas;
    icosph::get_mesh_and_alphas(level, mesh, alphas);
    const icosph::SampleMode sm = mode == ICO_SAMPLE_NEAREST
                                      ? icosph::SampleMode::Nearest
                                      : icosph::SampleMode::Bilinear;
    const icosph::SphereTensor t = icosph::equirect_to_sphere(img, mesh, sm);
    icosph::write_sphere_file(out_path, t);
    if (json_out) {
      json j{{"level", level},
             {"channels", t.channels},
             {"image", {img.height, img.width}},
             {"mode", mode == ICO_SAMPLE_NEAREST ? "nearest" : "bilinear"},
             {"out", out_path}};
      *json_out = dup_string(j.dump());
    }
    return ICO_OK;
  });
}

int ico_resample_to_equirect(const char* sphere_path, int height,
                             const char* image_path, char** json_out) {
  return guarded([&] {
    if (height <= 0) throw std::invalid_argument("height must be positive");
    const icosph::SphereTensor t = icosph::read_sphere_file(sphere_path);
    if (t.channels != 1 && t.channels != 3)
      throw std::invalid_argument("image export needs 1 or 3 channels");
    icosph::MeshLevel mesh;
    icosph::AlphaMaps alphas;
    icosph::get_mesh_and_alphas(t.r, mesh, alphas);
    const icosph::EquirectImage img =
        icosph::sphere_to_equirect(t, mesh, height);
    icosph::write_pnm(image_path, img);
    if (json_out) {
      json j{{"level", t.r},
             {"channels", t.channels},
             {"image", {img.height, img.width}},
             {"out", image_path}};
      *json_out = dup_string(j.dump());
    }
    return ICO_OK;
  });
}

int ico_export_unfolded(const char* sphere_path, const char* image_path) {
  return guarded([&] {
    const icosph::SphereTensor t = icosph::read_sphere_file(sphere_path);
    if (t.channels != 1 && t.channels != 3)
      throw std::invalid_argument("image export needs 1 or 3 channels");
    icosph::write_pnm_raster(image_path, icosph::export_unfolded(t));
    return ICO_OK;
  });
}

/* ---- networks ---- */

ico_net* ico_net_build(const char* arch, int base) {
  try {
    auto* n = new ico_net;
    n->spec = icosph::build_network(arch, base);
    return n;
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

void ico_net_free(ico_net* n) { delete n; }

int64_t ico_net_param_count(const ico_net* n) {
  return icosph::count_params(n->spec);
}

int ico_net_published_total(const ico_net* n, int64_t* total_out) {
  const auto pub = icosph::published_total(n->spec);
  if (!pub) return 0;
  if (total_out) *total_out = *pub;
  return 1;
}

int ico_net_audit_json(const ico_net* n, char** json_out) {
  return guarded([&] {
    json rows = json::array();
    for (const auto& row : icosph::param_audit(n->spec))
      rows.push_back({{"name", row.name},
                      {"kind", row.kind},
                      {"in", row.a},
                      {"mid", row.b},
                      {"out", row.c},
                      {"params", row.params}});
    json j{{"arch", n->spec.arch},
           {"layers", rows},
           {"total", icosph::count_params(n->spec)}};
    const auto pub = icosph::published_total(n->spec);
    if (pub) {
      j["reference_total"] = *pub;
      j["delta"] = icosph::count_params(n->spec) - *pub;
    }
    *json_out = dup_string(j.dump());
    return ICO_OK;
  });
}

int ico_net_init_weights(const ico_net* n, unsigned seed, const char* dir) {
  return guarded([&] {
    const icosph::WeightStore store = icosph::init_random(n->spec, seed);
    icosph::save_weights(dir, n->spec, store);
    return ICO_OK;
  });
}

int ico_net_forward(const ico_net* n, const char* weights_dir,
                    const char* input_path, const char* out_path,
                    char** json_out) {
  return guarded([&] {
    const icosph::WeightStore store =
        icosph::load_weights(weights_dir, n->spec);
    const icosph::SphereTensor input = icosph::read_sphere_file(input_path);
    if (input.channels != n->spec.in_channels)
      throw std::invalid_argument(
          "input has " + std::to_string(input.channels) +
          " channels, network expects " +
          std::to_string(n->spec.in_channels));
    icosph::AlphaCache alphas;
    const icosph::ForwardResult res =
        icosph::forward(n->spec, store, input, alphas);
    json j{{"arch", n->spec.arch}, {"level", input.r}, {"out", out_path}};
    if (res.is_logits) {
      icosph::Tensor t;
      t.shape = {static_cast<int>(res.logits.size())};
      t.data = res.logits;
      icosph::write_ten_file(out_path, t);
      j["logits"] = res.logits;
      int best = 0;
      for (int k = 1; k < static_cast<int>(res.logits.size()); ++k)
        if (res.logits[static_cast<std::size_t>(k)] >
            res.logits[static_cast<std::size_t>(best)])
          best = k;
      j["argmax"] = best;
    } else {
      icosph::write_sphere_file(out_path, res.sphere);
      float lo = res.sphere.comp[0].data[0], hi = lo;
      for (const auto& comp : res.sphere.comp)
        for (float v : comp.data) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      j["channels"] = res.sphere.channels;
      j["min"] = lo;
      j["max"] = hi;
    }
    if (json_out) *json_out = dup_string(j.dump());
    return ICO_OK;
  });
}

/* ---- weight transfer ---- */

int ico_transfer_kernel(const double p[9], double w[7]) {
  return guarded([&] {
    icosph::transfer_weights(p, w);
    return ICO_OK;
  });
}

int ico_transfer_container(const char* in_dir, const char* out_dir) {
  return guarded([&] {
    icosph::transfer_container(in_dir, out_dir);
    return ICO_OK;
  });
}

/* ---- reference-oracle comparison ---- */

int ico_oracle_check(int level, unsigned seed, int* pass_out,
                     char** json_out) {
  return guarded([&] {
    if (level < 1 || level > 6)
      throw std::invalid_argument("oracle check supports levels 1..6");
    icosph::MeshLevel mesh;
    icosph::AlphaMaps alphas;
    icosph::get_mesh_and_alphas(level, mesh, alphas);
    icosph::MeshLevel coarse;
    icosph::AlphaMaps calphas;
    icosph::get_mesh_and_alphas(level - 1, coarse, calphas);

    std::mt19937 rng(seed);
    std::normal_distribution<float> dist(0.0f, 1.0f);
    const int cin = 3, cout = 4;

    icosph::SphereTensor input = icosph::make_sphere_tensor(level, cin);
    for (auto& comp : input.comp)
      for (float& v : comp.data) v = dist(rng);
    icosph::HexKernelBank bank;
    bank.c_out = cout;
    bank.c_in = cin;
    bank.weights.resize(static_cast<std::size_t>(cout) * cin * 7);
    bank.bias.resize(static_cast<std::size_t>(cout));
    for (float& v : bank.weights) v = dist(rng);
    for (float& v : bank.bias) v = dist(rng);

    // pole-adjacent vertices see a zero pad slot in place of the pole and
    // are excluded from the convolution comparison
    std::vector<char> pole_adjacent(
        static_cast<std::size_t>(mesh.nonpole_count()), 0);
    for (int v = 0; v < mesh.nonpole_count(); ++v)
      for (int nb : mesh.neighbors(v))
        if (nb >= mesh.nonpole_count())
          pole_adjacent[static_cast<std::size_t>(v)] = 1;

    const icosph::VertexSignal sig = icosph::to_vertex_signal(input, mesh);
    const icosph::VertexSignal conv_ref =
        icosph::graph_hexconv_ref(sig, bank, mesh, alphas);
    const icosph::VertexSignal conv_grid =
        icosph::to_vertex_signal(icosph::hexconv(input, bank, alphas), mesh);
    double conv_err = 0.0;
    for (int v = 0; v < mesh.nonpole_count(); ++v) {
      if (pole_adjacent[static_cast<std::size_t>(v)]) continue;
      for (int c = 0; c < cout; ++c) {
        const double ref = conv_ref.at(v, c);
        const double got = conv_grid.at(v, c);
        conv_err = std::max(
            conv_err, std::abs(got - ref) / std::max(1.0, std::abs(ref)));
      }
    }

    double pool_err = 0.0;
    for (const icosph::PoolMode mode :
         {icosph::PoolMode::Max, icosph::PoolMode::Average}) {
      const icosph::VertexSignal ref =
          icosph::graph_pool_ref(sig, mesh, coarse, mode);
      const icosph::VertexSignal got = icosph::to_vertex_signal(
          icosph::sphere_pool(input, mode), coarse);
      for (int v = 0; v < coarse.nonpole_count(); ++v)
        for (int c = 0; c < cin; ++c)
          pool_err = std::max(
              pool_err,
              std::abs(static_cast<double>(got.at(v, c)) - ref.at(v, c)) /
                  std::max(1.0, std::abs(static_cast<double>(ref.at(v, c)))));
    }

    icosph::SphereTensor cin_t = icosph::make_sphere_tensor(level - 1, cin);
    for (auto& comp : cin_t.comp)
      for (float& v : comp.data) v = dist(rng);
    const icosph::VertexSignal csig = icosph::to_vertex_signal(cin_t, coarse);
    const icosph::VertexSignal up_ref =
        icosph::graph_upsample_ref(csig, coarse, mesh);
    const icosph::VertexSignal up_got =
        icosph::to_vertex_signal(icosph::sphere_upsample(cin_t), mesh);
    double up_err = 0.0;
    for (int v = 0; v < mesh.nonpole_count(); ++v)
      for (int c = 0; c < cin; ++c)
        up_err = std::max(
            up_err, std::abs(static_cast<double>(up_got.at(v, c)) -
                             up_ref.at(v, c)) /
                        std::max(1.0, std::abs(static_cast<double>(
                                          up_ref.at(v, c)))));

    const double tol = 1e-5;
    const bool pass = conv_err <= tol && pool_err <= tol && up_err <= tol;
    if (pass_out) *pass_out = pass ? 1 : 0;
    if (json_out) {
      json j{{"level", level},
             {"seed", seed},
             {"tolerance", tol},
             {"hexconv_max_rel_err", conv_err},
             {"pool_max_rel_err", pool_err},
             {"upsample_max_rel_err", up_err},
             {"pass", pass}};
      *json_out = dup_string(j.dump());
    }
    return ICO_OK;
  });
}

}  // extern "C"
