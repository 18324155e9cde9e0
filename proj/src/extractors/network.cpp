#include "bvqa/extractors/network.hpp"

#include <cmath>
#include <stdexcept>

#include "bvqa/dataset/rng.hpp"
#include "bvqa/tensorkit/ops.hpp"

namespace bvqa::extract {

namespace {

using Kind = StageSpec::Kind;
using A3 = std::array<std::size_t, 3>;

ConvLayer conv3(std::string name, std::size_t in, std::size_t out, A3 k, A3 s, A3 p,
                bool relu = true) {
  return {std::move(name), ConvSpec::conv3d(in, out, k, s, p), relu};
}

StageSpec conv_stage(std::string name, ConvLayer layer) {
  StageSpec st;
  st.name = std::move(name);
  st.kind = Kind::Conv;
  st.conv = std::move(layer);
  return st;
}

StageSpec pool_stage(std::string name) {
  StageSpec st;
  st.name = std::move(name);
  st.kind = Kind::Pool;
  st.pool.kernel = {1, 3, 3};
  st.pool.stride = {1, 2, 2};
  st.pool.padding = {0, 1, 1};
  return st;
}

// ResNet basic blocks: 3x3 -> 3x3, stride on the first conv of block 0.
StageSpec basic_stage(const std::string& name, std::size_t in, std::size_t out,
                      std::size_t blocks, std::size_t stride) {
  StageSpec st;
  st.name = name;
  st.kind = Kind::Residual;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::string bn = name + "." + std::to_string(b);
    const std::size_t s = b == 0 ? stride : 1;
    const std::size_t cin = b == 0 ? in : out;
    BlockSpec blk;
    blk.name = bn;
    blk.body.push_back({bn + ".conv1", ConvSpec::conv2d(cin, out, 3, s, 1), true});
    blk.body.push_back({bn + ".conv2", ConvSpec::conv2d(out, out, 3, 1, 1), false});
    if (s != 1 || cin != out) blk.projection = ConvLayer{bn + ".proj", ConvSpec::conv2d(cin, out, 1, s, 0), false};
    st.blocks.push_back(std::move(blk));
  }
  return st;
}

// Bottleneck blocks: kt x 1^2 -> 1 x 3^2 (strided) -> 1 x 1^2.
StageSpec bottleneck_stage(const std::string& prefix, const std::string& name, std::size_t in,
                           std::size_t inner, std::size_t out, std::size_t blocks,
                           std::size_t kt, std::size_t stride) {
  StageSpec st;
  st.name = name;
  st.kind = Kind::Residual;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::string bn = prefix + name + "." + std::to_string(b);
    const std::size_t s = b == 0 ? stride : 1;
    const std::size_t cin = b == 0 ? in : out;
    BlockSpec blk;
    blk.name = bn;
    blk.body.push_back(conv3(bn + ".a", cin, inner, {kt, 1, 1}, {1, 1, 1}, {kt / 2, 0, 0}));
    blk.body.push_back(conv3(bn + ".b", inner, inner, {1, 3, 3}, {1, s, s}, {0, 1, 1}));
    blk.body.push_back(conv3(bn + ".c", inner, out, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}, false));
    if (s != 1 || cin != out) {
      blk.projection = conv3(bn + ".proj", cin, out, {1, 1, 1}, {1, s, s}, {0, 0, 0}, false);
    }
    st.blocks.push_back(std::move(blk));
  }
  return st;
}

NetworkSpec resnet2d(Variant variant, Scale scale) {
  NetworkSpec spec;
  spec.variant = variant;
  spec.scale = scale;
  PathwaySpec p;
  if (scale == Scale::Canonical) {
    p.stages.push_back(conv_stage("stem", {"stem", ConvSpec::conv2d(3, 64, 7, 2, 3), true}));
    p.stages.push_back(pool_stage("pool"));
    p.stages.push_back(basic_stage("stage1", 64, 64, 2, 1));
    p.stages.push_back(basic_stage("stage2", 64, 128, 2, 2));
    p.stages.push_back(basic_stage("stage3", 128, 256, 2, 2));
    p.stages.push_back(basic_stage("stage4", 256, 512, 2, 2));
    spec.min_size = 32;
    spec.feature_width = 1024;
  } else {
    p.stages.push_back(conv_stage("stem", {"stem", ConvSpec::conv2d(3, 8, 3, 1, 1), true}));
    p.stages.push_back(pool_stage("pool"));
    p.stages.push_back(basic_stage("stage1", 8, 8, 2, 1));
    p.stages.push_back(basic_stage("stage2", 8, 16, 2, 2));
    spec.min_size = 16;
    spec.feature_width = 32;
  }
  spec.pathways.push_back(std::move(p));
  return spec;
}

struct BottleneckPlan {
  std::size_t inner, out, blocks, kt, stride;
};

PathwaySpec pathway3d(const std::string& name, std::size_t temporal_stride, std::size_t stem_out,
                      std::size_t stem_kt, const std::vector<BottleneckPlan>& plan) {
  PathwaySpec p;
  p.name = name;
  p.temporal_stride = temporal_stride;
  const std::string pre = name + ".";
  p.stages.push_back(conv_stage(
      "conv1", conv3(pre + "conv1", 3, stem_out, {stem_kt, 7, 7}, {1, 2, 2}, {stem_kt / 2, 3, 3})));
  p.stages.push_back(pool_stage("pool1"));
  std::size_t in = stem_out;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& r = plan[i];
    p.stages.push_back(bottleneck_stage(pre, "res" + std::to_string(i + 2), in, r.inner, r.out,
                                        r.blocks, r.kt, r.stride));
    in = r.out;
  }
  return p;
}

NetworkSpec slowfast(Scale scale) {
  NetworkSpec spec;
  spec.variant = Variant::Slowfast3d;
  spec.scale = scale;
  spec.feature_pathway = 1;
  if (scale == Scale::Canonical) {
    spec.pathways.push_back(pathway3d("slow", 16, 64, 1,
                                      {{64, 256, 3, 1, 1},
                                       {128, 512, 4, 1, 2},
                                       {256, 1024, 6, 3, 2},
                                       {512, 2048, 3, 3, 2}}));
    spec.pathways.push_back(pathway3d("fast", 2, 8, 5,
                                      {{8, 32, 3, 3, 1},
                                       {16, 64, 4, 3, 2},
                                       {32, 128, 6, 3, 2},
                                       {64, 256, 3, 3, 2}}));
    spec.min_size = 32;
    spec.feature_width = 512;
  } else {
    spec.pathways.push_back(pathway3d("slow", 4, 8, 1, {{8, 16, 1, 1, 1}, {16, 32, 1, 3, 2}}));
    spec.pathways.push_back(pathway3d("fast", 2, 4, 5, {{4, 8, 1, 3, 1}, {8, 16, 1, 3, 2}}));
    spec.min_size = 16;
    spec.feature_width = 32;
  }
  return spec;
}

std::vector<const ConvLayer*> all_layers(const NetworkSpec& spec) {
  std::vector<const ConvLayer*> out;
  for (const auto& p : spec.pathways) {
    for (const auto& st : p.stages) {
      if (st.kind == Kind::Conv) out.push_back(&st.conv);
      for (const auto& b : st.blocks) {
        for (const auto& l : b.body) out.push_back(&l);
        if (b.projection) out.push_back(&*b.projection);
      }
    }
  }
  return out;
}

Shape layer_weight_shape(const NetworkSpec& spec, const ConvSpec& cs) {
  Shape s = cs.weight_shape();
  if (spec.is_2d()) s.erase(s.begin() + 2);
  return s;
}

Tensor apply(const NetworkParams& params, const ConvLayer& layer, const Tensor& x) {
  Tensor y = conv(x, layer.spec, params.at(layer.name + ".weight"), params.at(layer.name + ".bias"));
  return layer.relu ? relu(y) : y;
}

Tensor run_pathway(const PathwaySpec& p, const NetworkParams& params, Tensor x,
                   std::vector<StageTrace>* trace) {
  const std::string prefix = p.name.empty() ? "" : p.name + ".";
  if (trace) trace->push_back({prefix + "data", x.shape()});
  for (const auto& st : p.stages) {
    switch (st.kind) {
      case Kind::Conv: x = apply(params, st.conv, x); break;
      case Kind::Pool: x = max_pool(x, st.pool); break;
      case Kind::Residual:
        for (const auto& b : st.blocks) {
          Tensor h = x;
          for (const auto& l : b.body) h = apply(params, l, h);
          const Tensor shortcut = b.projection ? apply(params, *b.projection, x) : x;
          x = relu(add(h, shortcut));
        }
        break;
    }
    if (trace) trace->push_back({prefix + st.name, x.shape()});
  }
  return x;
}

void check_frames(const NetworkSpec& spec, const Tensor& frames, const char* who) {
  if (frames.rank() != 4 || frames.dim(1) != 3) {
    throw ShapeError(std::string(who) + ": frames must be [T, 3, H, W], got " +
                     shape_str(frames.shape()));
  }
  if (frames.dim(2) < spec.min_size || frames.dim(3) < spec.min_size) {
    throw std::invalid_argument(std::string(who) + ": frames are " + std::to_string(frames.dim(3)) +
                                "x" + std::to_string(frames.dim(2)) + ", the " +
                                scale_name(spec.scale) + " network needs at least " +
                                std::to_string(spec.min_size) + "x" +
                                std::to_string(spec.min_size));
  }
}

bool under_prefix(const std::string& name, const std::string& prefix) {
  return name.size() > prefix.size() && name.compare(0, prefix.size(), prefix) == 0 &&
         name[prefix.size()] == '.';
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Sharpness2d: return "sharpness2d";
    case Variant::Spatial2d: return "spatial2d";
    case Variant::Slowfast3d: return "slowfast3d";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  if (name == "sharpness2d") return Variant::Sharpness2d;
  if (name == "spatial2d") return Variant::Spatial2d;
  if (name == "slowfast3d") return Variant::Slowfast3d;
  throw std::invalid_argument("unknown variant '" + name +
                              "' (expected sharpness2d, spatial2d or slowfast3d)");
}

const char* scale_name(Scale s) { return s == Scale::Canonical ? "canonical" : "tiny"; }

Scale parse_scale(const std::string& name) {
  if (name == "canonical") return Scale::Canonical;
  if (name == "tiny") return Scale::Tiny;
  throw std::invalid_argument("unknown scale '" + name + "' (expected canonical or tiny)");
}

std::size_t NetworkSpec::temporal_multiple() const {
  std::size_t m = 1;
  for (const auto& p : pathways) m = std::max(m, p.temporal_stride);
  return is_2d() ? 1 : std::max<std::size_t>(m, 2);
}

std::size_t NetworkParams::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw std::out_of_range("no parameter named '" + name + "'");
}

void NetworkParams::add(std::string name, Tensor value) {
  for (const auto& n : names) {
    if (n == name) throw std::invalid_argument("duplicate parameter '" + name + "'");
  }
  names.push_back(std::move(name));
  tensors.push_back(std::move(value));
  frozen.push_back(false);
}

NetworkParams NetworkParams::clone() const {
  NetworkParams out;
  out.names = names;
  out.frozen = frozen;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& t = tensors[i];
    out.tensors.emplace_back(t.shape(), std::vector<double>(t.data().begin(), t.data().end()),
                             !frozen[i]);
  }
  return out;
}

std::vector<Tensor> NetworkParams::trainable() const {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (!frozen[i]) out.push_back(tensors[i]);
  }
  return out;
}

NetworkSpec network_spec(Variant variant, Scale scale) {
  return variant == Variant::Slowfast3d ? slowfast(scale) : resnet2d(variant, scale);
}

Extractor build_extractor(Variant variant, Scale scale, std::uint64_t seed) {
  Extractor ex{network_spec(variant, scale), {}};
  for (const ConvLayer* layer : all_layers(ex.spec)) {
    const Shape ws = layer_weight_shape(ex.spec, layer->spec);
    data::Rng rng(data::derive_seed(seed, layer->name));
    const double bound = std::sqrt(6.0 / double(layer->spec.fan_in()));
    std::vector<double> w(shape_numel(ws));
    for (double& v : w) v = rng.uniform(-bound, bound);
    ex.params.add(layer->name + ".weight", Tensor(ws, std::move(w), true));
    ex.params.add(layer->name + ".bias", Tensor::zeros({layer->spec.out_channels}, true));
  }
  return ex;
}

Tensor frame_features(const NetworkSpec& spec, const NetworkParams& params, const Tensor& frames,
                      std::vector<StageTrace>* trace) {
  if (!spec.is_2d()) throw std::invalid_argument("frame_features: needs a 2D network");
  check_frames(spec, frames, "frame_features");
  return gap_gsp_rows(run_pathway(spec.pathways[0], params, frames, trace));
}

Tensor extract_sharpness(const NetworkSpec& spec, const NetworkParams& params,
                         const VideoClip& clip, std::vector<StageTrace>* trace) {
  clip.validate();
  return frame_features(spec, params, clip.frames, trace);
}

Tensor extract_motion(const NetworkSpec& spec, const NetworkParams& params, const VideoClip& clip,
                      std::vector<StageTrace>* trace) {
  if (spec.is_2d()) throw std::invalid_argument("extract_motion: needs the slowfast3d network");
  clip.validate();
  check_frames(spec, clip.frames, "extract_motion");
  const std::size_t t = clip.frame_count();
  const std::size_t multiple = spec.temporal_multiple();
  if (t % multiple != 0) {
    throw std::invalid_argument("extract_motion: clip length " + std::to_string(t) +
                                " is not a multiple of " + std::to_string(multiple));
  }
  // [T, 3, H, W] -> [1, 3, T, H, W]
  const Tensor video = reshape(permute(clip.frames, {1, 0, 2, 3}),
                               {1, 3, t, clip.height(), clip.width()});
  Tensor pooled;
  for (std::size_t i = 0; i < spec.pathways.size(); ++i) {
    const auto& p = spec.pathways[i];
    const Tensor input = temporal_subsample(video, p.temporal_stride, 2);
    const Tensor map = run_pathway(p, params, input, trace);
    if (i == spec.feature_pathway) {
      // [1, C, T', h, w] -> [T', C, h, w] -> [T', 2C]
      const Shape& s = map.shape();
      pooled = gap_gsp_rows(permute(reshape(map, {s[1], s[2], s[3], s[4]}), {1, 0, 2, 3}));
    }
  }
  return pooled;
}

void set_freeze(NetworkParams& params, const std::vector<std::string>& unfrozen_prefixes) {
  for (const auto& prefix : unfrozen_prefixes) {
    bool found = false;
    for (const auto& n : params.names) found = found || under_prefix(n, prefix);
    if (!found) throw std::invalid_argument("set_freeze: no stage named '" + prefix + "'");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    bool open = false;
    for (const auto& prefix : unfrozen_prefixes) open = open || under_prefix(params.names[i], prefix);
    params.frozen[i] = !open;
    params.tensors[i].set_requires_grad(open);
  }
}

std::vector<std::string> last_residual_stages(const NetworkSpec& spec, std::size_t count) {
  std::vector<std::string> names;
  for (const auto& st : spec.pathways[0].stages) {
    if (st.kind == Kind::Residual) names.push_back(st.name);
  }
  if (count > names.size()) throw std::invalid_argument("last_residual_stages: too few stages");
  return {names.end() - std::ptrdiff_t(count), names.end()};
}

}  // namespace bvqa::extract
