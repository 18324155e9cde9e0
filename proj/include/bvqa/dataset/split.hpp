#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bvqa/dataset/manifest.hpp"

namespace bvqa::data {

enum class Split { Train, Val, Test };

const char* split_name(Split s);
Split parse_split(const std::string& name);

/// Total, disjoint map from clip id to split.
struct SplitAssignment {
  std::map<std::string, Split> by_id;

  /// Records of one split, in manifest order.
  std::vector<ManifestRecord> select(const std::vector<ManifestRecord>& records, Split s) const;
  std::size_t count(Split s) const;
};

/// Seeded shuffle, then train = round(r0 n), val = round(r1 n), test = rest.
SplitAssignment split(const std::vector<ManifestRecord>& records,
                      std::array<double, 3> ratios = {0.6, 0.2, 0.2}, std::uint64_t seed = 0);

}  // namespace bvqa::data
