#include "bvqa/dataset/split.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bvqa/dataset/rng.hpp"

namespace bvqa::data {

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw std::invalid_argument("unknown split '" + name + "' (expected train, val or test)");
}

std::vector<ManifestRecord> SplitAssignment::select(const std::vector<ManifestRecord>& records,
                                                    Split s) const {
  std::vector<ManifestRecord> out;
  for (const auto& r : records) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) throw std::out_of_range("split: id '" + r.id + "' is not assigned");
    if (it->second == s) out.push_back(r);
  }
  return out;
}

std::size_t SplitAssignment::count(Split s) const {
  std::size_t n = 0;
  for (const auto& [id, which] : by_id) n += which == s;
  return n;
}

SplitAssignment split(const std::vector<ManifestRecord>& records, std::array<double, 3> ratios,
                      std::uint64_t seed) {
  const std::size_t n = records.size();
  if (n < 3) throw std::invalid_argument("split: need at least 3 records, got " + std::to_string(n));
  for (double r : ratios) {
    if (!(r >= 0.0)) throw std::invalid_argument("split: ratios must be non-negative");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw std::invalid_argument("split: ratios must sum to 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "split"));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  const std::size_t n_train = std::min<std::size_t>(n, std::lround(ratios[0] * double(n)));
  const std::size_t n_val = std::min<std::size_t>(n - n_train, std::lround(ratios[1] * double(n)));
  SplitAssignment out;
  for (std::size_t k = 0; k < n; ++k) {
    const Split s = k < n_train ? Split::Train : (k < n_train + n_val ? Split::Val : Split::Test);
    out.by_id[records[order[k]].id] = s;
  }
  return out;
}

}  // namespace bvqa::data
