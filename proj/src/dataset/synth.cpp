#include "bvqa/dataset/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "bvqa/dataset/ppm.hpp"
#include "bvqa/dataset/rng.hpp"

namespace bvqa::data {

namespace {

constexpr double kPi = std::numbers::pi;

struct Shape2d {
  bool disc;
  double cx, cy, r;     // centre and half extent, in units of frame size
  double vx, vy;        // per-frame motion
  double rgb[3];
};

struct Scene {
  bool grating;
  double c0[3], c1[3];
  double angle, freq, phase_speed;
  std::vector<Shape2d> shapes;
};

Scene make_scene(Rng& rng) {
  Scene s;
  s.grating = rng.uniform() < 0.5;
  for (int k = 0; k < 3; ++k) {
    s.c0[k] = rng.uniform(0.0, 0.5);
    s.c1[k] = rng.uniform(0.5, 1.0);
  }
  s.angle = rng.uniform(0.0, kPi);
  s.freq = rng.uniform(2.0, 5.0);
  s.phase_speed = rng.uniform(-0.4, 0.4);
  const std::size_t count = 2 + rng.below(3);
  for (std::size_t i = 0; i < count; ++i) {
    Shape2d sh;
    sh.disc = rng.uniform() < 0.5;
    sh.cx = rng.uniform(0.2, 0.8);
    sh.cy = rng.uniform(0.2, 0.8);
    sh.r = rng.uniform(0.08, 0.2);
    sh.vx = rng.uniform(-0.03, 0.03);
    sh.vy = rng.uniform(-0.03, 0.03);
    for (double& c : sh.rgb) c = rng.uniform() < 0.5 ? rng.uniform(0.0, 0.2) : rng.uniform(0.8, 1.0);
    s.shapes.push_back(sh);
  }
  return s;
}

void render(const Scene& s, std::size_t t, std::size_t size, double* out) {
  const std::size_t plane = size * size;
  const double ca = std::cos(s.angle), sa = std::sin(s.angle);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double u = (double(x) + 0.5) / double(size);
      const double v = (double(y) + 0.5) / double(size);
      const double along = ca * u + sa * v;
      double mix;
      if (s.grating) {
        mix = 0.5 + 0.5 * std::sin(2.0 * kPi * (s.freq * along + s.phase_speed * double(t)));
      } else {
        mix = std::fmod(std::abs(along + 0.05 * s.phase_speed * double(t)), 1.0);
      }
      double px[3];
      for (int k = 0; k < 3; ++k) px[k] = s.c0[k] + (s.c1[k] - s.c0[k]) * mix;
      for (const auto& sh : s.shapes) {
        const double dx = u - (sh.cx + sh.vx * double(t));
        const double dy = v - (sh.cy + sh.vy * double(t));
        const bool inside =
            sh.disc ? dx * dx + dy * dy <= sh.r * sh.r : std::abs(dx) <= sh.r && std::abs(dy) <= sh.r;
        if (inside) {
          for (int k = 0; k < 3; ++k) px[k] = sh.rgb[k];
        }
      }
      for (int k = 0; k < 3; ++k) out[k * plane + y * size + x] = px[k];
    }
  }
}

std::string clip_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "clip_%04zu", index + 1);
  return buf;
}

}  // namespace

double pseudo_mos(double level) { return 5.0 - 4.0 * level; }

Tensor base_clip(std::size_t frames, std::size_t size, std::uint64_t seed) {
  if (frames == 0 || size == 0) throw std::invalid_argument("base_clip: empty clip");
  Rng rng(seed);
  const Scene scene = make_scene(rng);
  std::vector<double> values(frames * 3 * size * size);
  for (std::size_t t = 0; t < frames; ++t) render(scene, t, size, values.data() + t * 3 * size * size);
  return Tensor(Shape{frames, 3, size, size}, std::move(values));
}

std::vector<double> sample_levels(std::size_t n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "levels"));
  std::vector<double> levels(n);
  for (std::size_t k = 0; k < n; ++k) levels[k] = (double(k) + rng.uniform()) / double(n);
  for (std::size_t i = n; i > 1; --i) std::swap(levels[i - 1], levels[rng.below(i)]);
  return levels;
}

std::vector<ManifestRecord> synth_corpus(const std::filesystem::path& out,
                                         const SynthOptions& options) {
  namespace fs = std::filesystem;
  if (options.frames < 2 || options.frames % 2 != 0) {
    throw std::invalid_argument("synth_corpus: frames per clip must be even and >= 2");
  }
  if (options.size < 8) throw std::invalid_argument("synth_corpus: frame size must be >= 8");
  if (options.n_clips == 0) throw std::invalid_argument("synth_corpus: need at least one clip");
  if (options.kinds.empty()) throw std::invalid_argument("synth_corpus: no distortion kinds");
  if (fs::exists(out) && !(fs::is_directory(out) && fs::is_empty(out))) {
    throw std::runtime_error(out.string() + ": output directory exists and is not empty");
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error(out.string() + ": cannot create directory: " + ec.message());

  const auto levels = sample_levels(options.n_clips, options.seed);
  const std::size_t size = options.size;
  const std::size_t frame_numel = 3 * size * size;
  std::vector<ManifestRecord> records;
  for (std::size_t i = 0; i < options.n_clips; ++i) {
    ManifestRecord r;
    r.id = clip_id(i);
    r.path = r.id;
    r.frames = options.frames;
    r.width = size;
    r.height = size;
    r.mos = pseudo_mos(levels[i]);

    const fs::path dir = out / r.path;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error(dir.string() + ": cannot create directory: " + ec.message());
    const Tensor clip = base_clip(options.frames, size, derive_seed(options.seed, "content", i));
    const DistortionKind kind = options.kinds[i % options.kinds.size()];
    for (std::size_t t = 0; t < options.frames; ++t) {
      auto src = clip.data().subspan(t * frame_numel, frame_numel);
      const Tensor frame(Shape{3, size, size}, {src.begin(), src.end()});
      const DistortionSpec spec{kind, levels[i], derive_seed(options.seed, r.id, t)};
      write_ppm(dir / frame_file_name(t + 1), distort_image(frame, spec));
    }
    records.push_back(std::move(r));
  }
  write_manifest(out / kManifestFile, records);
  return records;
}

std::vector<LabeledImage> synth_stills(std::size_t count, std::size_t size, std::uint64_t seed,
                                       const std::vector<DistortionKind>& kinds) {
  if (kinds.empty()) throw std::invalid_argument("synth_stills: no distortion kinds");
  const auto levels = sample_levels(count, derive_seed(seed, "stills"));
  std::vector<LabeledImage> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Tensor base = base_clip(1, size, derive_seed(seed, "still", i));
    const Tensor image(Shape{3, size, size}, {base.data().begin(), base.data().end()});
    const DistortionSpec spec{kinds[i % kinds.size()], levels[i], derive_seed(seed, "still_noise", i)};
    // Stored through 8 bits like corpus frames.
    Tensor d = distort_image(image, spec);
    auto v = d.mutable_data();
    for (double& x : v) x = double(quantize(x)) / 255.0;
    out.push_back({d, levels[i], pseudo_mos(levels[i])});
  }
  return out;
}

}  // namespace bvqa::data
