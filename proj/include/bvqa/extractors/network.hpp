#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bvqa/dataset/clip.hpp"
#include "bvqa/tensorkit/conv.hpp"
#include "bvqa/tensorkit/tensor.hpp"

namespace bvqa::extract {

enum class Variant { Sharpness2d, Spatial2d, Slowfast3d };
enum class Scale { Canonical, Tiny };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);
const char* scale_name(Scale s);
Scale parse_scale(const std::string& name);

/// One convolution followed (optionally) by ReLU. Parameters are
/// `<name>.weight` and `<name>.bias`.
struct ConvLayer {
  std::string name;
  ConvSpec spec;
  bool relu = true;
};

/// Residual block: body convs applied in order, the last without ReLU, then
/// relu(body + shortcut). Shortcut is a projection conv or the identity.
struct BlockSpec {
  std::string name;
  std::vector<ConvLayer> body;
  std::optional<ConvLayer> projection;
};

struct StageSpec {
  enum class Kind { Conv, Pool, Residual };
  std::string name;
  Kind kind = Kind::Conv;
  ConvLayer conv;               // Kind::Conv
  PoolSpec pool;                // Kind::Pool
  std::vector<BlockSpec> blocks;  // Kind::Residual
};

/// A chain of stages fed by frames sampled at `temporal_stride`. 2D
/// pathways run frames independently with temporal_stride 1.
struct PathwaySpec {
  std::string name;  // parameter-name prefix; empty for 2D networks
  std::size_t temporal_stride = 1;
  std::vector<StageSpec> stages;
};

struct NetworkSpec {
  Variant variant = Variant::Sharpness2d;
  Scale scale = Scale::Canonical;
  std::vector<PathwaySpec> pathways;
  std::size_t min_size = 32;       // smallest accepted H and W
  std::size_t feature_width = 0;   // output vector length
  std::size_t feature_pathway = 0; // pathway whose final map is pooled

  bool is_2d() const { return variant != Variant::Slowfast3d; }
  /// Clip length must be a multiple of this (1 for 2D networks).
  std::size_t temporal_multiple() const;
};

/// Named parameters with per-parameter freeze flags. Frozen parameters do
/// not track gradients.
struct NetworkParams {
  std::vector<std::string> names;
  std::vector<Tensor> tensors;
  std::vector<bool> frozen;

  std::size_t size() const { return names.size(); }
  std::size_t index_of(const std::string& name) const;
  const Tensor& at(const std::string& name) const { return tensors[index_of(name)]; }
  void add(std::string name, Tensor value);
  /// Independent copy of values and flags.
  NetworkParams clone() const;
  std::vector<Tensor> trainable() const;
};

struct Extractor {
  NetworkSpec spec;
  NetworkParams params;
};

/// Builds the topology and seeded He-uniform weights (bound sqrt(6 / fan_in))
/// with zero biases. Nothing is frozen.
Extractor build_extractor(Variant variant, Scale scale, std::uint64_t seed);
NetworkSpec network_spec(Variant variant, Scale scale);

/// Output shape of every stage, recorded during a forward pass.
struct StageTrace {
  std::string name;  // e.g. "fast.res5"
  Shape shape;
};

/// Per-frame features of a 2D network: frames [N, 3, H, W] -> [N, D].
Tensor frame_features(const NetworkSpec& spec, const NetworkParams& params, const Tensor& frames,
                      std::vector<StageTrace>* trace = nullptr);

/// [T, D] from a 2D network applied to each frame.
Tensor extract_sharpness(const NetworkSpec& spec, const NetworkParams& params,
                         const VideoClip& clip, std::vector<StageTrace>* trace = nullptr);

/// [T/2, D] from the fast pathway's final map, pooled per temporal index.
Tensor extract_motion(const NetworkSpec& spec, const NetworkParams& params, const VideoClip& clip,
                      std::vector<StageTrace>* trace = nullptr);

/// Unfreezes parameters under the given stage prefixes (matched at dot
/// boundaries) and freezes everything else. Unknown prefixes throw.
void set_freeze(NetworkParams& params, const std::vector<std::string>& unfrozen_prefixes);

/// Stage names of the last `count` residual stages of a 2D network.
std::vector<std::string> last_residual_stages(const NetworkSpec& spec, std::size_t count);

}  // namespace bvqa::extract
