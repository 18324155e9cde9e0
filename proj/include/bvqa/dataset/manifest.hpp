#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "bvqa/dataset/clip.hpp"

namespace bvqa::data {

/// One manifest row. `path` is the frame directory relative to the manifest.
struct ManifestRecord {
  std::string id;
  std::string path;
  std::size_t frames = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  double mos = 0.0;
};

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kManifestHeader = "id,path,frames,width,height,mos";
inline constexpr const char* kManifestFile = "manifest.csv";

/// Parses a manifest CSV. The header must be exactly kManifestHeader; errors
/// name the offending data row (1-based).
std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

/// Frame file name for a 1-based index: frame_000001.ppm.
std::string frame_file_name(std::size_t index);

/// Loads frame_000001.ppm ... from root / record.path into a validated clip.
VideoClip read_frames(const std::filesystem::path& root, const ManifestRecord& record);

}  // namespace bvqa::data
