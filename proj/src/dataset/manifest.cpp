#include "bvqa/dataset/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "bvqa/dataset/ppm.hpp"

namespace bvqa::data {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

[[noreturn]] void row_error(std::size_t row, const std::string& why) {
  throw ManifestError("manifest row " + std::to_string(row) + ": " + why);
}

std::size_t parse_count(const std::string& s, std::size_t row, const char* column) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    row_error(row, std::string("column '") + column + "' is not a non-negative integer: '" + s +
                       "'");
  }
  return v;
}

double parse_real(const std::string& s, std::size_t row, const char* column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    row_error(row, std::string("column '") + column + "' is not a number: '" + s + "'");
  }
}

}  // namespace

std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError(path.string() + ": cannot open manifest");
  std::string line;
  if (!std::getline(in, line)) throw ManifestError(path.string() + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kManifestHeader) {
    const auto got = split_fields(line);
    for (const auto& want : split_fields(kManifestHeader)) {
      if (std::find(got.begin(), got.end(), want) == got.end()) {
        throw ManifestError(path.string() + ": missing column '" + want + "'");
      }
    }
    throw ManifestError(path.string() + ": header must be exactly '" + kManifestHeader + "'");
  }

  std::vector<ManifestRecord> records;
  std::set<std::string> ids;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const auto f = split_fields(line);
    if (f.size() != 6) {
      row_error(row, "expected 6 fields, found " + std::to_string(f.size()));
    }
    ManifestRecord r;
    r.id = f[0];
    r.path = f[1];
    if (r.id.empty()) row_error(row, "empty id");
    if (r.path.empty()) row_error(row, "empty path");
    r.frames = parse_count(f[2], row, "frames");
    r.width = parse_count(f[3], row, "width");
    r.height = parse_count(f[4], row, "height");
    r.mos = parse_real(f[5], row, "mos");
    if (r.frames < 2 || r.frames % 2 != 0) {
      row_error(row, "frame count " + std::to_string(r.frames) + " must be even and >= 2");
    }
    if (r.width == 0 || r.height == 0) row_error(row, "zero frame extent");
    if (!(r.mos >= 1.0 && r.mos <= 5.0)) {
      row_error(row, "mos " + f[5] + " outside [1, 5]");
    }
    if (!ids.insert(r.id).second) row_error(row, "duplicate id '" + r.id + "'");
    records.push_back(std::move(r));
  }
  return records;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
  std::ostringstream os;
  os << kManifestHeader << '\n';
  for (const auto& r : records) {
    char mos[32];
    std::snprintf(mos, sizeof mos, "%.6f", r.mos);
    os << r.id << ',' << r.path << ',' << r.frames << ',' << r.width << ',' << r.height << ','
       << mos << '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << os.str();
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string frame_file_name(std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%06zu.ppm", index);
  return name;
}

VideoClip read_frames(const std::filesystem::path& root, const ManifestRecord& record) {
  const std::filesystem::path dir = root / record.path;
  const std::size_t plane = record.width * record.height;
  std::vector<double> values;
  values.reserve(record.frames * 3 * plane);
  for (std::size_t i = 1; i <= record.frames; ++i) {
    const auto file = dir / frame_file_name(i);
    if (!std::filesystem::exists(file)) {
      throw FormatError(file.string() + ": missing frame file");
    }
    Tensor frame = read_ppm(file);
    if (frame.dim(1) != record.height || frame.dim(2) != record.width) {
      throw FormatError(file.string() + ": frame is " + std::to_string(frame.dim(2)) + "x" +
                        std::to_string(frame.dim(1)) + ", manifest says " +
                        std::to_string(record.width) + "x" + std::to_string(record.height));
    }
    values.insert(values.end(), frame.data().begin(), frame.data().end());
  }
  // Extra frames beyond the declared count are a count mismatch too.
  if (std::filesystem::exists(dir / frame_file_name(record.frames + 1))) {
    throw FormatError(dir.string() + ": holds more than the declared " +
                      std::to_string(record.frames) + " frames");
  }
  VideoClip clip{record.id,
                 Tensor(Shape{record.frames, 3, record.height, record.width}, std::move(values)),
                 record.mos};
  clip.validate();
  return clip;
}

}  // namespace bvqa::data
