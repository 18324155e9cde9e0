#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "bvqa/dataset/distort.hpp"
#include "bvqa/dataset/manifest.hpp"

namespace bvqa::data {

/// 5 - 4 level: level 0 is pristine (5), level 1 is the worst (1).
double pseudo_mos(double level);

struct SynthOptions {
  std::size_t n_clips = 54;
  std::size_t frames = 8;
  std::size_t size = 32;  // square frames
  std::uint64_t seed = 0;
  std::vector<DistortionKind> kinds{DistortionKind::GaussianBlur};
};

/// Procedural content: a background (gradient or grating) with a few
/// hard-edged moving shapes. Returns [T, 3, size, size].
Tensor base_clip(std::size_t frames, std::size_t size, std::uint64_t seed);

/// Levels stratified over [0, 1]: one draw from each of n equal bins, shuffled.
std::vector<double> sample_levels(std::size_t n, std::uint64_t seed);

/// Writes <out>/<id>/frame_%06d.ppm for each clip and <out>/manifest.csv.
/// `out` must be missing or empty. Returns the manifest records.
std::vector<ManifestRecord> synth_corpus(const std::filesystem::path& out,
                                         const SynthOptions& options);

struct LabeledImage {
  Tensor image;  // [3, size, size]
  double level = 0.0;
  double mos = 5.0;
};

/// Distorted stills for sharpness pretraining, drawn like corpus frames.
std::vector<LabeledImage> synth_stills(std::size_t count, std::size_t size, std::uint64_t seed,
                                       const std::vector<DistortionKind>& kinds = {
                                           DistortionKind::GaussianBlur});

}  // namespace bvqa::data
