#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "icosph/mesh.hpp"
#include "icosph/sphereops.hpp"

namespace icosph {

enum class LayerKind {
  HexConv,       // 7-weight hexagonal conv, bias; optional BN+ReLU
  ResBlock,      // bottleneck residual block, stride 1, 2 or 0.5
  Encoder,       // two HexConv+BN+ReLU then max pool; exports the skip
  Decoder,       // two HexConv+BN+ReLU, up-sample, 1x1+BN+ReLU
  HexConvT,      // up-sample then pointwise conv
  GlobalMaxPool, // max over all component cells per channel
  Dense,         // classifier head on the pooled vector
};

struct LayerSpec {
  LayerKind kind;
  int level = 0;   // table row level, relative to the printed input level
  int a = 0;       // input channels (after any skip concatenation)
  int b = 0;       // bottleneck / middle channels
  int c = 0;       // output channels
  double s = 1.0;  // 1, 2 (down) or 0.5 (up)
  bool concat_skip = false;  // concatenate a saved skip before this layer
  bool push_skip = false;    // save this layer's input (ResBlock nets) or
                             // pre-pool activation (Encoder) as a skip
  bool bn = false;           // HexConv-only: BN+ReLU after the conv
  std::string name;
};

struct NetworkSpec {
  std::string arch;  // "hexrunet-c", "hexrunet", "hexunet"
  int in_channels = 0;
  int out_channels = 0;
  bool classifier = false;
  std::vector<LayerSpec> layers;
};

NetworkSpec build_hexrunet_c();
NetworkSpec build_hexrunet(int in_ch, int base, int out_ch);
NetworkSpec build_hexunet(int in_ch = 3, int out_ch = 13);
NetworkSpec build_network(const std::string& arch, int base = 16);

using WeightStore = std::map<std::string, Tensor>;

// Every parameter blob of the network with its shape, in deterministic order.
std::vector<std::pair<std::string, std::vector<int>>> param_shapes(
    const NetworkSpec& spec);

long long count_params(const NetworkSpec& spec);

struct AuditRow {
  std::string name;
  std::string kind;
  int a, b, c;
  long long params;
};
std::vector<AuditRow> param_audit(const NetworkSpec& spec);

// Reference total on record for the matching configuration, when one exists.
std::optional<long long> published_total(const NetworkSpec& spec);

WeightStore init_random(const NetworkSpec& spec, unsigned seed);
void save_weights(const std::string& dir, const NetworkSpec& spec,
                  const WeightStore& store);
WeightStore load_weights(const std::string& dir, const NetworkSpec& spec);

struct ForwardResult {
  bool is_logits = false;
  SphereTensor sphere;
  std::vector<float> logits;
};

// Lazily built alpha maps per level (honors ICO_CACHE_DIR).
struct AlphaCache {
  const AlphaMaps& get(int r);
  std::map<int, AlphaMaps> maps;
};

ForwardResult forward(const NetworkSpec& spec, const WeightStore& store,
                      const SphereTensor& input, AlphaCache& alphas);

// Perspective 3x3 -> 7 hexagon weights (p row-major p1..p9).
void transfer_weights(const double p[9], double w[7]);

// Convert every (cout,cin,3,3) blob of a weight container to (cout,cin,7);
// all other blobs are copied unchanged.
void transfer_container(const std::string& in_dir, const std::string& out_dir);

}  // namespace icosph
