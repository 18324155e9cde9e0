#include "bvqa/harness/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "bvqa/dataset/rng.hpp"
#include "bvqa/tensorkit/ops.hpp"

namespace bvqa::harness {

namespace {

using extract::Scale;
using extract::Variant;

struct Named {
  std::string name;
  Tensor tensor;
};

std::vector<Named> all_params(const Model& m) {
  std::vector<Named> out;
  for (std::size_t i = 0; i < m.frame.params.size(); ++i) {
    out.push_back({"frame." + m.frame.params.names[i], m.frame.params.tensors[i]});
  }
  for (std::size_t i = 0; i < m.motion.params.size(); ++i) {
    out.push_back({"motion." + m.motion.params.names[i], m.motion.params.tensors[i]});
  }
  out.push_back({"head.weight", m.head.weight});
  out.push_back({"head.bias", m.head.bias});
  return out;
}

void fnv(std::uint64_t& h, const void* bytes, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
}

void fnv_str(std::uint64_t& h, const std::string& s) {
  fnv(h, s.data(), s.size());
  fnv(h, "\0", 1);
}

class Writer {
 public:
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const void* p, std::size_t n) { buf.append(static_cast<const char*>(p), n); }
  std::string buf;

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf += char((v >> (8 * i)) & 0xff);
  }
};

class Reader {
 public:
  Reader(std::string data, std::filesystem::path path) : d_(std::move(data)), path_(std::move(path)) {}
  std::uint32_t u32() { return std::uint32_t(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string str(std::size_t n) {
    need(n);
    std::string s = d_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == d_.size(); }
  [[noreturn]] void fail(const std::string& why) const {
    throw TopologyError(path_.string() + ": " + why);
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > d_.size()) fail("file is truncated");
  }
  std::uint64_t le(int n) {
    need(std::size_t(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t(static_cast<unsigned char>(d_[pos_ + i])) << (8 * i);
    pos_ += std::size_t(n);
    return v;
  }
  std::string d_;
  std::filesystem::path path_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<Tensor> Model::trainable() const {
  std::vector<Tensor> out = frame.params.trainable();
  out.push_back(head.weight);
  out.push_back(head.bias);
  return out;
}

std::size_t Model::fused_width() const {
  return frame.spec.feature_width + motion.spec.feature_width;
}

Model build_model(Variant variant, Scale scale, std::uint64_t seed) {
  if (variant == Variant::Slowfast3d) {
    throw std::invalid_argument("build_model: the per-frame extractor must be a 2D variant");
  }
  Model m;
  m.variant = variant;
  m.scale = scale;
  // Both 2D variants share initial weights for a given seed.
  m.frame = extract::build_extractor(variant, scale, data::derive_seed(seed, "frame_extractor"));
  m.motion = extract::build_extractor(Variant::Slowfast3d, scale,
                                      data::derive_seed(seed, "motion_extractor"));
  extract::set_freeze(m.motion.params, {});
  m.head = fusion::QualityHead::init(m.fused_width(), data::derive_seed(seed, "quality_head"));
  return m;
}

std::vector<PreparedClip> prepare_clips(const Model& model, std::vector<VideoClip> clips) {
  NoGradGuard no_grad;
  std::vector<PreparedClip> out;
  out.reserve(clips.size());
  for (auto& c : clips) {
    Tensor motion = extract::extract_motion(model.motion.spec, model.motion.params, c);
    out.push_back({std::move(c), std::move(motion)});
  }
  return out;
}

Tensor predict_scores(const Model& model, std::span<const PreparedClip* const> clips) {
  std::vector<Tensor> scores;
  scores.reserve(clips.size());
  for (const PreparedClip* c : clips) {
    const Tensor sharp = extract::extract_sharpness(model.frame.spec, model.frame.params, c->clip);
    scores.push_back(reshape(fusion::predict_quality(fusion::fuse(sharp, c->motion), model.head), {1}));
  }
  return concat(scores, 0);
}

std::vector<double> predict_all(const Model& model, std::span<const PreparedClip> clips) {
  NoGradGuard no_grad;
  std::vector<double> out;
  out.reserve(clips.size());
  for (const auto& c : clips) {
    const PreparedClip* one[] = {&c};
    out.push_back(predict_scores(model, one).item());
  }
  return out;
}

std::uint64_t topology_hash(const Model& model) {
  std::uint64_t h = 1469598103934665603ull;
  fnv_str(h, extract::variant_name(model.variant));
  fnv_str(h, extract::scale_name(model.scale));
  for (const auto& p : all_params(model)) {
    fnv_str(h, p.name);
    for (std::size_t d : p.tensor.shape()) {
      const std::uint64_t v = d;
      fnv(h, &v, sizeof v);
    }
  }
  return h;
}

void save_params(const std::filesystem::path& path, const Model& model) {
  Writer w;
  w.bytes(kParamsMagic, sizeof kParamsMagic);
  w.u64(topology_hash(model));
  const auto params = all_params(model);
  w.u32(std::uint32_t(params.size()));
  for (const auto& p : params) {
    w.u32(std::uint32_t(p.name.size()));
    w.bytes(p.name.data(), p.name.size());
    w.u32(std::uint32_t(p.tensor.rank()));
    for (std::size_t d : p.tensor.shape()) w.u64(d);
    for (double v : p.tensor.data()) w.f64(v);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.write(w.buf.data(), std::streamsize(w.buf.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void load_params(const std::filesystem::path& path, Model& model) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open params file");
  Reader r({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()}, path);
  if (r.str(sizeof kParamsMagic) != std::string(kParamsMagic, sizeof kParamsMagic)) {
    r.fail("not a params file (bad magic)");
  }
  if (r.u64() != topology_hash(model)) {
    r.fail(std::string("topology mismatch: file was not written for a ") +
           extract::variant_name(model.variant) + "/" + extract::scale_name(model.scale) +
           " model");
  }
  const auto params = all_params(model);
  if (r.u32() != params.size()) r.fail("topology mismatch: parameter count differs");
  for (const auto& p : params) {
    if (r.str(r.u32()) != p.name) r.fail("topology mismatch at parameter " + p.name);
    if (r.u32() != p.tensor.rank()) r.fail("rank mismatch for " + p.name);
    for (std::size_t d : p.tensor.shape()) {
      if (r.u64() != d) r.fail("shape mismatch for " + p.name);
    }
    auto values = p.tensor.mutable_data();
    for (double& v : values) v = r.f64();
  }
  if (!r.done()) r.fail("trailing bytes after the last parameter");
}

}  // namespace bvqa::harness
