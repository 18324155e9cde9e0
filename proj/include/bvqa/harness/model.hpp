#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "bvqa/dataset/clip.hpp"
#include "bvqa/extractors/network.hpp"
#include "bvqa/fusion/fusion.hpp"

namespace bvqa::harness {

/// Full pipeline: 2D per-frame extractor, frozen motion extractor, head.
struct Model {
  extract::Variant variant = extract::Variant::Sharpness2d;
  extract::Scale scale = extract::Scale::Tiny;
  extract::Extractor frame;
  extract::Extractor motion;
  fusion::QualityHead head;

  /// Unfrozen 2D parameters followed by the head.
  std::vector<Tensor> trainable() const;
  std::size_t fused_width() const;
};

/// Seeds are derived per component from `seed`. The motion extractor is
/// fully frozen; the 2D extractor has no mask until the caller sets one.
Model build_model(extract::Variant variant, extract::Scale scale, std::uint64_t seed);

/// A clip with its cached motion features.
struct PreparedClip {
  VideoClip clip;
  Tensor motion;  // [T/2, Dm]
};

std::vector<PreparedClip> prepare_clips(const Model& model, std::vector<VideoClip> clips);

/// Scores for the given clips, [N]. Differentiable in the trainable params
/// when grad mode is on.
Tensor predict_scores(const Model& model, std::span<const PreparedClip* const> clips);
std::vector<double> predict_all(const Model& model, std::span<const PreparedClip> clips);

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kParamsMagic[8] = {'B', 'V', 'Q', 'A', 'P', 'R', 'M', '1'};

/// FNV-1a over variant, scale and every parameter name and shape.
std::uint64_t topology_hash(const Model& model);

/// Little-endian: magic, u64 topology hash, u32 count, then per tensor
/// u32 name length, name, u32 rank, u64 dims, f64 values.
void save_params(const std::filesystem::path& path, const Model& model);
/// Overwrites the model's values. Throws TopologyError when the file was
/// written for a different topology.
void load_params(const std::filesystem::path& path, Model& model);

}  // namespace bvqa::harness
