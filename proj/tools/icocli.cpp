#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "icosph.h"

namespace {

int fail(int code) {
  std::fprintf(stderr, "error: %s\n", ico_last_error());
  return code == 0 ? 1 : 1;
}

int emit(char* json) {
  if (json) {
    std::printf("%s\n", json);
    ico_string_free(json);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"icosph: spherical CNN grids, networks and resampling"};
  app.require_subcommand(1);

  // mesh
  auto* mesh = app.add_subcommand("mesh", "grid construction and blend maps");
  mesh->require_subcommand(1);

  int level = 0;
  std::string out_path, in_path, arch = "hexrunet-c", mode = "bilinear";
  std::string weights_dir;
  int base = 16, height = 0;
  unsigned seed = 0;

  auto* mesh_info = mesh->add_subcommand("info", "print grid counts");
  mesh_info->add_option("--level", level, "subdivision level")->required();
  mesh_info->callback([&] {
    ico_mesh* m = ico_mesh_open(level);
    if (!m) std::exit(fail(1));
    char* json = nullptr;
    if (ico_mesh_info_json(m, &json) != ICO_OK) {
      ico_mesh_free(m);
      std::exit(fail(1));
    }
    ico_mesh_free(m);
    std::exit(emit(json));
  });

  auto* mesh_alpha = mesh->add_subcommand("alpha", "write blend-weight maps");
  mesh_alpha->add_option("--level", level)->required();
  mesh_alpha->add_option("--out", out_path, "output sphere tensor file")
      ->required();
  mesh_alpha->callback([&] {
    ico_mesh* m = ico_mesh_open(level);
    if (!m) std::exit(fail(1));
    const int rc = ico_mesh_write_alpha(m, out_path.c_str());
    ico_mesh_free(m);
    if (rc != ICO_OK) std::exit(fail(rc));
    std::printf("{\"level\":%d,\"out\":\"%s\"}\n", level, out_path.c_str());
    std::exit(0);
  });

  // resample
  auto* rs = app.add_subcommand("resample", "panorama <-> sphere transport");
  rs->require_subcommand(1);

  auto* to_sphere = rs->add_subcommand("to-sphere", "sample a panorama onto the grid");
  to_sphere->add_option("--level", level)->required();
  to_sphere->add_option("--mode", mode, "bilinear or nearest")
      ->check(CLI::IsMember({"bilinear", "nearest"}));
  to_sphere->add_option("--in", in_path, "input PGM/PPM")->required();
  to_sphere->add_option("--out", out_path, "output sphere tensor")->required();
  to_sphere->callback([&] {
    char* json = nullptr;
    const int sm =
        mode == "nearest" ? ICO_SAMPLE_NEAREST : ICO_SAMPLE_BILINEAR;
    if (ico_resample_to_sphere(level, in_path.c_str(), sm, out_path.c_str(),
                               &json) != ICO_OK)
      std::exit(fail(1));
    std::exit(emit(json));
  });

  auto* to_eq = rs->add_subcommand("to-equirect", "render the grid to a panorama");
  to_eq->add_option("--in", in_path, "input sphere tensor")->required();
  to_eq->add_option("--height", height, "output image height")->required();
  to_eq->add_option("--out", out_path, "output PGM/PPM")->required();
  to_eq->callback([&] {
    char* json = nullptr;
    if (ico_resample_to_equirect(in_path.c_str(), height, out_path.c_str(),
                                 &json) != ICO_OK)
      std::exit(fail(1));
    std::exit(emit(json));
  });

  auto* unfold = rs->add_subcommand("unfold", "tile the 5 components into one image");
  unfold->add_option("--in", in_path, "input sphere tensor")->required();
  unfold->add_option("--out", out_path, "output PGM/PPM")->required();
  unfold->callback([&] {
    if (ico_export_unfolded(in_path.c_str(), out_path.c_str()) != ICO_OK)
      std::exit(fail(1));
    std::printf("{\"in\":\"%s\",\"out\":\"%s\"}\n", in_path.c_str(),
                out_path.c_str());
    std::exit(0);
  });

  // net
  auto* net = app.add_subcommand("net", "network construction and inference");
  net->require_subcommand(1);

  auto add_arch = [&](CLI::App* cmd) {
    cmd->add_option("--arch", arch, "hexrunet-c, hexrunet or hexunet")
        ->required();
    cmd->add_option("--base", base, "hexrunet ladder width (8, 16 or 32)");
  };

  auto* params = net->add_subcommand("params", "per-layer parameter table");
  add_arch(params);
  params->callback([&] {
    ico_net* n = ico_net_build(arch.c_str(), base);
    if (!n) std::exit(fail(1));
    char* json = nullptr;
    if (ico_net_audit_json(n, &json) != ICO_OK) {
      ico_net_free(n);
      std::exit(fail(1));
    }
    ico_net_free(n);
    std::exit(emit(json));
  });

  auto* init = net->add_subcommand("init", "write random weights");
  add_arch(init);
  init->add_option("--seed", seed);
  init->add_option("--out", out_path, "weight container directory")->required();
  init->callback([&] {
    ico_net* n = ico_net_build(arch.c_str(), base);
    if (!n) std::exit(fail(1));
    const int rc = ico_net_init_weights(n, seed, out_path.c_str());
    ico_net_free(n);
    if (rc != ICO_OK) std::exit(fail(rc));
    std::printf("{\"arch\":\"%s\",\"seed\":%u,\"out\":\"%s\"}\n", arch.c_str(),
                seed, out_path.c_str());
    std::exit(0);
  });

  auto* fwd = net->add_subcommand("forward", "run inference");
  add_arch(fwd);
  fwd->add_option("--weights", weights_dir, "weight container directory")
      ->required();
  fwd->add_option("--input", in_path, "input sphere tensor")->required();
  fwd->add_option("--out", out_path, "output file")->required();
  fwd->callback([&] {
    ico_net* n = ico_net_build(arch.c_str(), base);
    if (!n) std::exit(fail(1));
    char* json = nullptr;
    const int rc = ico_net_forward(n, weights_dir.c_str(), in_path.c_str(),
                                   out_path.c_str(), &json);
    ico_net_free(n);
    if (rc != ICO_OK) std::exit(fail(rc));
    std::exit(emit(json));
  });

  auto* transfer = net->add_subcommand(
      "transfer", "convert 3x3 perspective kernels to hexagon kernels");
  transfer->add_option("--in", in_path, "perspective weight container")
      ->required();
  transfer->add_option("--out", out_path, "hexagon weight container")
      ->required();
  transfer->callback([&] {
    if (ico_transfer_container(in_path.c_str(), out_path.c_str()) != ICO_OK)
      std::exit(fail(1));
    std::printf("{\"in\":\"%s\",\"out\":\"%s\"}\n", in_path.c_str(),
                out_path.c_str());
    std::exit(0);
  });

  // oracle
  auto* oracle = app.add_subcommand("oracle", "grid-vs-graph reference checks");
  auto* check = oracle->add_subcommand("check", "compare against the vertex-graph reference");
  check->add_option("--level", level)->required();
  check->add_option("--seed", seed);
  check->callback([&] {
    int pass = 0;
    char* json = nullptr;
    if (ico_oracle_check(level, seed, &pass, &json) != ICO_OK)
      std::exit(fail(1));
    const int rc = emit(json);
    if (!pass) {
      std::fprintf(stderr, "error: deviation above tolerance\n");
      std::exit(1);
    }
    std::exit(rc);
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}
