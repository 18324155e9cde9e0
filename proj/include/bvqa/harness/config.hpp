#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bvqa/dataset/distort.hpp"
#include "bvqa/dataset/split.hpp"
#include "bvqa/extractors/network.hpp"

namespace bvqa::harness {

struct RunConfig {
  std::string corpus = "corpus";
  extract::Scale scale = extract::Scale::Tiny;
  extract::Variant variant = extract::Variant::Sharpness2d;
  std::size_t epochs = 20;
  std::size_t batch_size = 8;
  double lr = 1e-3;
  double alpha = 0.5;
  double tau = 0.1;
  std::uint64_t seed = 0;
  std::string out = "run";
  std::array<double, 3> ratios{0.6, 0.2, 0.2};

  // sharpness pretraining
  std::size_t pretrain_epochs = 100;
  double pretrain_lr = 0.01;
  std::size_t pretrain_images = 512;

  // synthetic corpus
  std::size_t clips = 54;
  std::size_t frames = 8;
  std::size_t size = 32;
  std::vector<data::DistortionKind> kinds{data::DistortionKind::GaussianBlur};

  // evaluation
  data::Split split = data::Split::Test;
  std::string params;  // empty: <out>/params.bin

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
  std::filesystem::path params_path() const;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sets one key from its text value.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Flat `key = value` lines; `#` starts a comment. Errors name the line.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Text form accepted by parse_config.
std::string format_config(const RunConfig& config);

}  // namespace bvqa::harness
