#include "icosph/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace icosph {

namespace {

std::string layer_name(int idx, const char* kind) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "L%02d_%s", idx, kind);
  return buf;
}

LayerSpec hexconv_layer(int idx, int level, int a, int c, bool bn) {
  LayerSpec l;
  l.kind = LayerKind::HexConv;
  l.level = level;
  l.a = a;
  l.c = c;
  l.bn = bn;
  l.name = layer_name(idx, "hexconv");
  return l;
}

LayerSpec resblock_layer(int idx, int level, int a, int b, int c, double s,
                         bool concat, bool push) {
  LayerSpec l;
  l.kind = LayerKind::ResBlock;
  l.level = level;
  l.a = a;
  l.b = b;
  l.c = c;
  l.s = s;
  l.concat_skip = concat;
  l.push_skip = push;
  l.name = layer_name(idx, "resblock");
  return l;
}

}  // namespace

NetworkSpec build_hexrunet_c() {
  NetworkSpec n;
  n.arch = "hexrunet-c";
  n.in_channels = 1;
  n.out_channels = 10;
  n.classifier = true;
  int i = 0;
  n.layers.push_back(hexconv_layer(i++, 4, 1, 16, false));
  // The printed rows give b = c, but the published parameter total only
  // holds with the bottleneck equal to the input width (as in the
  // segmentation table's encoder rows), so that is what is built.
  n.layers.push_back(resblock_layer(i++, 4, 16, 16, 64, 2.0, false, false));
  n.layers.push_back(resblock_layer(i++, 3, 64, 64, 256, 2.0, false, false));
  LayerSpec mp;
  mp.kind = LayerKind::GlobalMaxPool;
  mp.level = 2;
  mp.a = mp.c = 256;
  mp.name = layer_name(i++, "maxpool");
  n.layers.push_back(mp);
  LayerSpec d;
  d.kind = LayerKind::Dense;
  d.a = 256;
  d.c = 10;
  d.name = layer_name(i++, "dense");
  n.layers.push_back(d);
  return n;
}

NetworkSpec build_hexrunet(int in_ch, int base, int out_ch) {
  if (base % 16 != 0 && base != 8)
    throw std::invalid_argument("build_hexrunet: unsupported base");
  auto ch = [&](int x) { return std::max(1, x * base / 16); };
  const int c1 = ch(16), c2 = ch(32), c3 = ch(64), c4 = ch(128), c5 = ch(256),
            c6 = ch(256);
  NetworkSpec n;
  n.arch = "hexrunet";
  n.in_channels = in_ch;
  n.out_channels = out_ch;
  int i = 0;
  n.layers.push_back(hexconv_layer(i++, 5, in_ch, c1, false));
  const int enc_in[5] = {c1, c2, c3, c4, c5};
  const int enc_out[5] = {c2, c3, c4, c5, c6};
  for (int k = 0; k < 5; ++k)
    n.layers.push_back(resblock_layer(i++, 5 - k, enc_in[k], enc_in[k],
                                      enc_out[k], 2.0, false, true));
  LayerSpec t;
  t.kind = LayerKind::HexConvT;
  t.level = 0;
  t.a = c6;
  t.c = c6;
  t.s = 0.5;
  t.name = layer_name(i++, "hexconvt");
  n.layers.push_back(t);
  const int dec_out[4] = {c4, c3, c2, c1};
  int prev = c6;
  for (int k = 0; k < 4; ++k) {
    const int skip = k == 0 ? c5 : enc_in[4 - k];
    n.layers.push_back(resblock_layer(i++, 1 + k, prev + skip, dec_out[k],
                                      dec_out[k], 0.5, true, false));
    prev = dec_out[k];
  }
  n.layers.push_back(resblock_layer(i++, 5, prev + c1, c1, c1, 1.0, true, false));
  n.layers.push_back(hexconv_layer(i++, 5, c1, out_ch, false));
  return n;
}

NetworkSpec build_hexunet(int in_ch, int out_ch) {
  NetworkSpec n;
  n.arch = "hexunet";
  n.in_channels = in_ch;
  n.out_channels = out_ch;
  int i = 0;
  const int enc_in[4] = {in_ch, 32, 64, 128};
  const int enc_out[4] = {32, 64, 128, 256};
  for (int k = 0; k < 4; ++k) {
    LayerSpec l;
    l.kind = LayerKind::Encoder;
    l.level = 6 - k;
    l.a = enc_in[k];
    l.c = enc_out[k];
    l.s = 2.0;
    l.push_skip = true;
    l.name = layer_name(i++, "encoder");
    n.layers.push_back(l);
  }
  const int dec_a[4] = {256, 512, 256, 128};
  const int dec_b[4] = {512, 256, 128, 64};
  const int dec_c[4] = {256, 128, 64, 32};
  for (int k = 0; k < 4; ++k) {
    LayerSpec l;
    l.kind = LayerKind::Decoder;
    l.level = 2 + k;
    l.a = dec_a[k];
    l.b = dec_b[k];
    l.c = dec_c[k];
    l.s = 0.5;
    l.concat_skip = k > 0;
    l.name = layer_name(i++, "decoder");
    n.layers.push_back(l);
  }
  LayerSpec f1 = hexconv_layer(i, 6, 64, 32, true);
  f1.concat_skip = true;
  f1.name = layer_name(i, "hexconv");
  ++i;
  n.layers.push_back(f1);
  n.layers.push_back(hexconv_layer(i++, 6, 32, 32, true));
  n.layers.push_back(hexconv_layer(i++, 6, 32, out_ch, false));
  return n;
}

NetworkSpec build_network(const std::string& arch, int base) {
  if (arch == "hexrunet-c") return build_hexrunet_c();
  if (arch == "hexunet") return build_hexunet();
  if (arch == "hexrunet") {
    if (base == 16) return build_hexrunet(4, 16, 13);
    return build_hexrunet(16, base, 3);  // climate variants
  }
  throw std::invalid_argument("unknown architecture: " + arch);
}

namespace {

using Shapes = std::vector<std::pair<std::string, std::vector<int>>>;

void add_bn(Shapes& out, const std::string& prefix, int c) {
  out.push_back({prefix + ".gamma", {c}});
  out.push_back({prefix + ".beta", {c}});
  out.push_back({prefix + ".mean", {c}});
  out.push_back({prefix + ".var", {c}});
}

void add_hex(Shapes& out, const std::string& prefix, int cin, int cout) {
  out.push_back({prefix + ".w", {cout, cin, 7}});
  out.push_back({prefix + ".b", {cout}});
}

void add_1x1(Shapes& out, const std::string& prefix, int cin, int cout) {
  out.push_back({prefix + ".w", {cout, cin}});
  out.push_back({prefix + ".b", {cout}});
}

}  // namespace

Shapes param_shapes(const NetworkSpec& spec) {
  Shapes out;
  for (const auto& l : spec.layers) {
    const std::string& p = l.name;
    switch (l.kind) {
      case LayerKind::HexConv:
        add_hex(out, p + ".hex", l.a, l.c);
        if (l.bn) add_bn(out, p + ".bn", l.c);
        break;
      case LayerKind::ResBlock:
        add_1x1(out, p + ".b2c1", l.a, l.b);
        add_bn(out, p + ".b2bn1", l.b);
        add_hex(out, p + ".hex", l.b, l.b);
        add_bn(out, p + ".b2bn2", l.b);
        add_1x1(out, p + ".b2c2", l.b, l.c);
        add_bn(out, p + ".b2bn3", l.c);
        add_1x1(out, p + ".b1c", l.a, l.c);
        add_bn(out, p + ".b1bn", l.c);
        break;
      case LayerKind::Encoder:
        add_hex(out, p + ".hex1", l.a, l.c);
        add_bn(out, p + ".bn1", l.c);
        add_hex(out, p + ".hex2", l.c, l.c);
        add_bn(out, p + ".bn2", l.c);
        break;
      case LayerKind::Decoder:
        add_hex(out, p + ".hex1", l.a, l.b);
        add_bn(out, p + ".bn1", l.b);
        add_hex(out, p + ".hex2", l.b, l.b);
        add_bn(out, p + ".bn2", l.b);
        add_1x1(out, p + ".pw", l.b, l.c);
        add_bn(out, p + ".bn3", l.c);
        break;
      case LayerKind::HexConvT:
        add_1x1(out, p + ".pw", l.a, l.c);
        break;
      case LayerKind::GlobalMaxPool:
        break;
      case LayerKind::Dense:
        out.push_back({p + ".dense.w", {l.c, l.a}});
        out.push_back({p + ".dense.b", {l.c}});
        break;
    }
  }
  return out;
}

namespace {

// BN running statistics are stored but not counted as parameters.
bool counted_param(const std::string& name) {
  const auto ends_with = [&](const char* suf) {
    const std::size_t n = std::strlen(suf);
    return name.size() >= n && name.compare(name.size() - n, n, suf) == 0;
  };
  return !ends_with(".mean") && !ends_with(".var");
}

long long numel(const std::vector<int>& shape) {
  long long n = 1;
  for (int d : shape) n *= d;
  return n;
}

}  // namespace

long long count_params(const NetworkSpec& spec) {
  long long total = 0;
  for (const auto& [name, shape] : param_shapes(spec))
    if (counted_param(name)) total += numel(shape);
  return total;
}

std::vector<AuditRow> param_audit(const NetworkSpec& spec) {
  std::vector<AuditRow> rows;
  const auto shapes = param_shapes(spec);
  for (const auto& l : spec.layers) {
    AuditRow row;
    row.name = l.name;
    switch (l.kind) {
      case LayerKind::HexConv: row.kind = "HexConv"; break;
      case LayerKind::ResBlock: row.kind = "ResBlock"; break;
      case LayerKind::Encoder: row.kind = "Encoder"; break;
      case LayerKind::Decoder: row.kind = "Decoder"; break;
      case LayerKind::HexConvT: row.kind = "HexConvT"; break;
      case LayerKind::GlobalMaxPool: row.kind = "GlobalMaxPool"; break;
      case LayerKind::Dense: row.kind = "Dense"; break;
    }
    row.a = l.a;
    row.b = l.b;
    row.c = l.c;
    row.params = 0;
    for (const auto& [name, shape] : shapes)
      if (name.rfind(l.name + ".", 0) == 0 && counted_param(name))
        row.params += numel(shape);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<long long> published_total(const NetworkSpec& spec) {
  if (spec.arch == "hexrunet-c") return 74730;
  if (spec.arch == "hexunet" && spec.in_channels == 3 && spec.out_channels == 13)
    return 7245101;
  if (spec.arch == "hexrunet") {
    // Identify the variant by its first-layer output width.
    const int c1 = spec.layers.at(0).c;
    if (spec.in_channels == 4 && spec.out_channels == 13 && c1 == 16)
      return 1585885;
    if (spec.in_channels == 16 && spec.out_channels == 3 && c1 == 8)
      return 476747;
    if (spec.in_channels == 16 && spec.out_channels == 3 && c1 == 32)
      return 7543331;
  }
  return std::nullopt;
}

WeightStore init_random(const NetworkSpec& spec, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<float> dist(0.0f, 0.1f);
  WeightStore store;
  for (const auto& [name, shape] : param_shapes(spec)) {
    Tensor t(shape);
    const bool is_weight =
        name.size() >= 2 && name.compare(name.size() - 2, 2, ".w") == 0;
    if (is_weight) {
      for (float& v : t.data) v = dist(rng);
    } else if (name.size() >= 6 &&
               name.compare(name.size() - 6, 6, ".gamma") == 0) {
      std::fill(t.data.begin(), t.data.end(), 1.0f);
    } else if (name.size() >= 4 && name.compare(name.size() - 4, 4, ".var") == 0) {
      std::fill(t.data.begin(), t.data.end(), 1.0f);
    }
    // biases, beta, mean stay zero
    store.emplace(name, std::move(t));
  }
  return store;
}

void save_weights(const std::string& dir, const NetworkSpec& spec,
                  const WeightStore& store) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["arch"] = spec.arch;
  manifest["in_channels"] = spec.in_channels;
  manifest["out_channels"] = spec.out_channels;
  auto& params = manifest["params"];
  params = nlohmann::json::array();
  for (const auto& [name, shape] : param_shapes(spec)) {
    const auto it = store.find(name);
    if (it == store.end())
      throw std::runtime_error("save_weights: missing blob " + name);
    std::string file = name + ".ten";
    std::replace(file.begin(), file.end(), '.', '_');
    file.replace(file.size() - 4, 4, ".ten");
    write_ten_file(dir + "/" + file, it->second);
    params.push_back({{"name", name}, {"file", file}, {"shape", shape}});
  }
  std::ofstream os(dir + "/manifest.json");
  os << manifest.dump(2) << "\n";
}

WeightStore load_weights(const std::string& dir, const NetworkSpec& spec) {
  std::ifstream is(dir + "/manifest.json");
  if (!is) throw std::runtime_error("load_weights: missing manifest in " + dir);
  nlohmann::json manifest;
  is >> manifest;
  WeightStore store;
  for (const auto& e : manifest.at("params")) {
    const std::string name = e.at("name").get<std::string>();
    Tensor t = read_ten_file(dir + "/" + e.at("file").get<std::string>());
    store.emplace(name, std::move(t));
  }
  for (const auto& [name, shape] : param_shapes(spec)) {
    const auto it = store.find(name);
    if (it == store.end())
      throw std::runtime_error("load_weights: missing blob " + name);
    if (it->second.shape != shape)
      throw std::runtime_error("load_weights: shape mismatch for " + name);
  }
  return store;
}

const AlphaMaps& AlphaCache::get(int r) {
  auto it = maps.find(r);
  if (it != maps.end()) return it->second;
  MeshLevel mesh;
  AlphaMaps a;
  get_mesh_and_alphas(r, mesh, a);
  return maps.emplace(r, std::move(a)).first->second;
}

namespace {

struct Ctx {
  const WeightStore& store;
  AlphaCache& alphas;

  const Tensor& blob(const std::string& name) const {
    const auto it = store.find(name);
    if (it == store.end()) throw std::runtime_error("missing weight " + name);
    return it->second;
  }
  std::vector<float> vec(const std::string& name) const {
    const Tensor& t = blob(name);
    return t.data;
  }

  SphereTensor hex(const SphereTensor& x, const std::string& prefix) const {
    const Tensor& w = blob(prefix + ".w");
    HexKernelBank bank;
    bank.c_out = w.shape[0];
    bank.c_in = w.shape[1];
    bank.weights = w.data;
    bank.bias = vec(prefix + ".b");
    return hexconv(x, bank, alphas.get(x.r));
  }

  SphereTensor bn(const SphereTensor& x, const std::string& prefix) const {
    SphereTensor out = x;
    const auto g = vec(prefix + ".gamma"), be = vec(prefix + ".beta");
    const auto m = vec(prefix + ".mean"), v = vec(prefix + ".var");
    for (auto& c : out.comp) c = batchnorm_inference(c, g, be, m, v);
    return out;
  }

  SphereTensor pw(const SphereTensor& x, const std::string& prefix) const {
    return pointwise_conv(x, blob(prefix + ".w"), vec(prefix + ".b"));
  }
};

SphereTensor relu_st(const SphereTensor& x) {
  SphereTensor out = x;
  for (auto& c : out.comp) c = relu(c);
  return out;
}

SphereTensor resample(const SphereTensor& x, double s) {
  if (s == 2.0) return sphere_pool(x, PoolMode::Max);
  if (s == 0.5) return sphere_upsample(x);
  return x;
}

SphereTensor resblock_forward(const Ctx& ctx, const SphereTensor& x,
                              const LayerSpec& l) {
  // Branch 2: 1x1 (a->b), resample, BN, ReLU; HexConv (b->b), BN, ReLU;
  // 1x1 (b->c), BN.
  SphereTensor b2 = ctx.pw(x, l.name + ".b2c1");
  b2 = resample(b2, l.s);
  b2 = relu_st(ctx.bn(b2, l.name + ".b2bn1"));
  b2 = relu_st(ctx.bn(ctx.hex(b2, l.name + ".hex"), l.name + ".b2bn2"));
  b2 = ctx.bn(ctx.pw(b2, l.name + ".b2c2"), l.name + ".b2bn3");
  // Branch 1: 1x1 (a->c), resample, BN.
  SphereTensor b1 = ctx.pw(x, l.name + ".b1c");
  b1 = resample(b1, l.s);
  b1 = ctx.bn(b1, l.name + ".b1bn");
  SphereTensor out = b1;
  for (int i = 0; i < 5; ++i)
    for (std::size_t k = 0; k < out.comp[static_cast<std::size_t>(i)].data.size(); ++k)
      out.comp[static_cast<std::size_t>(i)].data[k] +=
          b2.comp[static_cast<std::size_t>(i)].data[k];
  return relu_st(out);
}

}  // namespace

ForwardResult forward(const NetworkSpec& spec, const WeightStore& store,
                      const SphereTensor& input, AlphaCache& alphas) {
  if (input.channels != spec.in_channels)
    throw std::invalid_argument("forward: input channel mismatch");
  Ctx ctx{store, alphas};
  SphereTensor x = input;
  std::vector<SphereTensor> skips;
  std::vector<float> pooled;
  bool have_pooled = false;
  for (std::size_t li = 0; li < spec.layers.size(); ++li) {
    const LayerSpec& l = spec.layers[li];
    try {
      if (l.concat_skip) {
        if (skips.empty()) throw std::runtime_error("skip stack empty");
        x = concat_channels(x, skips.back());
        skips.pop_back();
      }
      if (l.kind != LayerKind::Encoder && l.push_skip) skips.push_back(x);
      if (x.channels != l.a && l.kind != LayerKind::GlobalMaxPool &&
          l.kind != LayerKind::Dense)
        throw std::runtime_error("channel mismatch: have " +
                                 std::to_string(x.channels) + ", expect " +
                                 std::to_string(l.a));
      switch (l.kind) {
        case LayerKind::HexConv: {
          x = ctx.hex(x, l.name + ".hex");
          if (l.bn) x = relu_st(ctx.bn(x, l.name + ".bn"));
          break;
        }
        case LayerKind::ResBlock:
          x = resblock_forward(ctx, x, l);
          break;
        case LayerKind::Encoder: {
          x = relu_st(ctx.bn(ctx.hex(x, l.name + ".hex1"), l.name + ".bn1"));
          x = relu_st(ctx.bn(ctx.hex(x, l.name + ".hex2"), l.name + ".bn2"));
          if (l.push_skip) skips.push_back(x);
          x = sphere_pool(x, PoolMode::Max);
          break;
        }
        case LayerKind::Decoder: {
          x = relu_st(ctx.bn(ctx.hex(x, l.name + ".hex1"), l.name + ".bn1"));
          x = relu_st(ctx.bn(ctx.hex(x, l.name + ".hex2"), l.name + ".bn2"));
          x = sphere_upsample(x);
          x = relu_st(ctx.bn(ctx.pw(x, l.name + ".pw"), l.name + ".bn3"));
          break;
        }
        case LayerKind::HexConvT:
          x = hexconv_transpose(x, ctx.blob(l.name + ".pw.w"),
                                ctx.vec(l.name + ".pw.b"));
          break;
        case LayerKind::GlobalMaxPool: {
          pooled.assign(static_cast<std::size_t>(x.channels),
                        -std::numeric_limits<float>::infinity());
          for (const auto& comp : x.comp) {
            const std::size_t plane = comp.data.size() / x.channels;
            for (int c = 0; c < x.channels; ++c)
              for (std::size_t k = 0; k < plane; ++k)
                pooled[static_cast<std::size_t>(c)] =
                    std::max(pooled[static_cast<std::size_t>(c)],
                             comp.data[static_cast<std::size_t>(c) * plane + k]);
          }
          have_pooled = true;
          break;
        }
        case LayerKind::Dense: {
          if (!have_pooled) throw std::runtime_error("dense without pooled input");
          ForwardResult res;
          res.is_logits = true;
          res.logits = dense(pooled, ctx.blob(l.name + ".dense.w"),
                             ctx.vec(l.name + ".dense.b"));
          for (float v : res.logits)
            if (!std::isfinite(v)) throw std::runtime_error("non-finite logits");
          return res;
        }
      }
      if (have_pooled) {
        for (float v : pooled)
          if (!std::isfinite(v))
            throw std::runtime_error("non-finite pooled activation");
      } else if (!all_finite(x)) {
        throw std::runtime_error("non-finite activation");
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("layer " + std::to_string(li) + " (" + l.name +
                               "): " + e.what());
    }
  }
  ForwardResult res;
  res.sphere = std::move(x);
  return res;
}

void transfer_weights(const double p[9], double w[7]) {
  const double s = std::sin(M_PI / 3.0);
  w[0] = p[1];  // w1 = p2
  w[1] = s * (p[0] + p[3]) / 2.0 + (1.0 - s) * (p[1] + p[4]) / 2.0;
  w[2] = s * (p[3] + p[6]) / 2.0 + (1.0 - s) * (p[4] + p[7]) / 2.0;
  w[3] = p[7];  // w4 = p8
  w[4] = s * (p[5] + p[8]) / 2.0 + (1.0 - s) * (p[4] + p[7]) / 2.0;
  w[5] = s * (p[2] + p[5]) / 2.0 + (1.0 - s) * (p[1] + p[4]) / 2.0;
  w[6] = p[4];  // w7 = p5
}

void transfer_container(const std::string& in_dir, const std::string& out_dir) {
  std::ifstream is(in_dir + "/manifest.json");
  if (!is) throw std::runtime_error("transfer: missing manifest in " + in_dir);
  nlohmann::json manifest;
  is >> manifest;
  std::filesystem::create_directories(out_dir);
  for (auto& e : manifest.at("params")) {
    const std::string file = e.at("file").get<std::string>();
    Tensor t = read_ten_file(in_dir + "/" + file);
    if (t.shape.size() == 4 && t.shape[2] == 3 && t.shape[3] == 3) {
      const int cout = t.shape[0], cin = t.shape[1];
      Tensor h({cout, cin, 7});
      for (int oc = 0; oc < cout; ++oc)
        for (int ic = 0; ic < cin; ++ic) {
          double p[9], w[7];
          for (int k = 0; k < 9; ++k)
            p[k] = t.data[((static_cast<std::size_t>(oc) * cin) + ic) * 9 + k];
          transfer_weights(p, w);
          for (int k = 0; k < 7; ++k)
            h.data[((static_cast<std::size_t>(oc) * cin) + ic) * 7 + k] =
                static_cast<float>(w[k]);
        }
      t = std::move(h);
      e["shape"] = t.shape;
    }
    write_ten_file(out_dir + "/" + file, t);
  }
  std::ofstream os(out_dir + "/manifest.json");
  os << manifest.dump(2) << "\n";
}

}  // namespace icosph
