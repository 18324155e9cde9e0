#pragma once

#include <filesystem>
#include <stdexcept>

#include "bvqa/tensorkit/tensor.hpp"

namespace bvqa::data {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a binary P6 file with maxval 255 into [3, H, W] values in [0, 1].
Tensor read_ppm(const std::filesystem::path& path);

/// Writes [3, H, W] values as `P6\n<w> <h>\n255\n` followed by RGB bytes.
/// Values are clamped to [0, 1] and rounded to the nearest 8-bit level.
void write_ppm(const std::filesystem::path& path, const Tensor& image);

/// The 8-bit level a value is stored as.
unsigned char quantize(double value);

}  // namespace bvqa::data
