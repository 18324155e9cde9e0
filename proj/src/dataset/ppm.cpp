#include "bvqa/dataset/ppm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace bvqa::data {

namespace {

class HeaderReader {
 public:
  HeaderReader(const std::vector<unsigned char>& bytes, const std::filesystem::path& path)
      : bytes_(bytes), path_(path) {}

  std::size_t number() {
    skip_space_and_comments();
    std::size_t start = pos_;
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1u << 24)) fail("header value too large");
      ++pos_;
    }
    if (pos_ == start) fail("malformed header");
    return value;
  }

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }
  [[noreturn]] void fail(const std::string& why) const {
    throw FormatError(path_.string() + ": " + why);
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
    if (pos_ >= bytes_.size()) fail("short file (truncated header)");
  }

  const std::vector<unsigned char>& bytes_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 2;
};

}  // namespace

unsigned char quantize(double value) {
  const double v = std::clamp(value, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(v * 255.0));
}

Tensor read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw FormatError(path.string() + ": bad magic bytes (expected P6)");
  }
  HeaderReader header(bytes, path);
  const std::size_t width = header.number();
  const std::size_t height = header.number();
  const std::size_t maxval = header.number();
  if (width == 0 || height == 0) header.fail("zero image extent");
  if (maxval != 255) {
    header.fail("unsupported maxval " + std::to_string(maxval) + " (only 255 is supported)");
  }
  if (header.pos() >= bytes.size() || !std::isspace(bytes[header.pos()])) {
    header.fail("short file (missing raster)");
  }
  header.advance();
  const std::size_t start = header.pos();
  const std::size_t plane = width * height;
  if (bytes.size() - start < 3 * plane) {
    header.fail("short file: expected " + std::to_string(3 * plane) + " raster bytes, found " +
                std::to_string(bytes.size() - start));
  }
  std::vector<double> values(3 * plane);
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t c = 0; c < 3; ++c) {
      values[c * plane + p] = double(bytes[start + 3 * p + c]) / 255.0;
    }
  }
  return Tensor(Shape{3, height, width}, std::move(values));
}

void write_ppm(const std::filesystem::path& path, const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw ShapeError("write_ppm: expected [3, H, W], got " + shape_str(image.shape()));
  }
  const std::size_t height = image.dim(1);
  const std::size_t width = image.dim(2);
  const std::size_t plane = width * height;
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + 3 * plane);
  auto v = image.data();
  for (std::size_t p = 0; p < plane; ++p)
    for (std::size_t c = 0; c < 3; ++c)
      out[header + 3 * p + c] = static_cast<char>(quantize(v[c * plane + p]));
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error(path.string() + ": cannot open for writing");
  os.write(out.data(), std::streamsize(out.size()));
  if (!os) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace bvqa::data
