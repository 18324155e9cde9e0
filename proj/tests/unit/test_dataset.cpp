#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "bvqa/dataset/distort.hpp"
#include "bvqa/dataset/manifest.hpp"
#include "bvqa/dataset/ppm.hpp"
#include "bvqa/dataset/rng.hpp"
#include "bvqa/dataset/split.hpp"
#include "bvqa/dataset/synth.hpp"
#include "support/tempdir.hpp"

using namespace bvqa;
using namespace bvqa::data;
using bvqa::testing::read_bytes;
using bvqa::testing::TempDir;
using bvqa::testing::write_bytes;

namespace {

std::string ppm_bytes(std::size_t w, std::size_t h, unsigned char r, unsigned char g,
                      unsigned char b, int maxval = 255) {
  std::string s = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n" +
                  std::to_string(maxval) + "\n";
  for (std::size_t i = 0; i < w * h; ++i) {
    s += char(r);
    s += char(g);
    s += char(b);
  }
  return s;
}

std::vector<ManifestRecord> fake_records(std::size_t n) {
  std::vector<ManifestRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"v" + std::to_string(i), "v" + std::to_string(i), 2, 4, 4, 3.0});
  }
  return out;
}

std::string manifest_text(std::size_t rows) {
  std::string s = std::string(kManifestHeader) + "\n";
  for (std::size_t i = 0; i < rows; ++i) {
    s += "c" + std::to_string(i) + ",c" + std::to_string(i) + ",8,32,32," +
         std::to_string(1.0 + double(i % 5)) + "\n";
  }
  return s;
}

Tensor texture(std::uint64_t seed, std::size_t size = 32) {
  const Tensor clip = base_clip(1, size, seed);
  return Tensor(Shape{3, size, size}, {clip.data().begin(), clip.data().end()});
}

}  // namespace

TEST_CASE("ppm: 2x2 red fixture reads as constant red") {
  TempDir dir;
  write_bytes(dir / "red.ppm", ppm_bytes(2, 2, 255, 0, 0));
  const Tensor img = read_ppm(dir / "red.ppm");
  REQUIRE(img.shape() == Shape{3, 2, 2});
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(img[i] == 1.0);
    CHECK(img[4 + i] == 0.0);
    CHECK(img[8 + i] == 0.0);
  }
}

TEST_CASE("ppm: malformed files are rejected") {
  TempDir dir;
  write_bytes(dir / "m.ppm", ppm_bytes(2, 2, 1, 2, 3, 65535));
  CHECK_THROWS_WITH_AS(read_ppm(dir / "m.ppm"), doctest::Contains("maxval"), FormatError);
  write_bytes(dir / "p3.ppm", "P3\n2 2\n255\n");
  CHECK_THROWS_WITH_AS(read_ppm(dir / "p3.ppm"), doctest::Contains("magic"), FormatError);
  std::string shortfile = ppm_bytes(2, 2, 9, 9, 9);
  shortfile.pop_back();
  write_bytes(dir / "s.ppm", shortfile);
  CHECK_THROWS_AS(read_ppm(dir / "s.ppm"), FormatError);
  write_bytes(dir / "c.ppm", "P6\n# comment\n1 1\n255\n\x01\x02\x03");
  CHECK(read_ppm(dir / "c.ppm")[2] == doctest::Approx(3.0 / 255.0));
}

TEST_CASE("ppm: write then read is exact after one quantization") {
  TempDir dir;
  const Tensor img = texture(7, 9);
  write_ppm(dir / "t.ppm", img);
  const std::string bytes = read_bytes(dir / "t.ppm");
  CHECK(bytes.rfind("P6\n9 9\n255\n", 0) == 0);
  CHECK(bytes.size() == 11 + 3 * 81);
  const Tensor back = read_ppm(dir / "t.ppm");
  for (std::size_t i = 0; i < img.numel(); ++i) {
    CHECK(back[i] == double(quantize(img[i])) / 255.0);
  }
  // A second trip is the identity.
  write_ppm(dir / "u.ppm", back);
  CHECK(read_bytes(dir / "u.ppm") == bytes);
}

TEST_CASE("manifest: row counts and validation") {
  TempDir dir;
  write_bytes(dir / "m.csv", manifest_text(54));
  CHECK(load_manifest(dir / "m.csv").size() == 54);

  write_bytes(dir / "e.csv", manifest_text(0));
  CHECK(load_manifest(dir / "e.csv").empty());

  std::string bad = std::string(kManifestHeader) + "\na,a,8,4,4,3\nb,b,8,4,4,2\nc,c,8,4,4,7\n";
  write_bytes(dir / "b.csv", bad);
  CHECK_THROWS_WITH_AS(load_manifest(dir / "b.csv"), doctest::Contains("row 3"), ManifestError);

  write_bytes(dir / "d.csv", std::string(kManifestHeader) + "\na,a,8,4,4,3\na,b,8,4,4,2\n");
  CHECK_THROWS_WITH_AS(load_manifest(dir / "d.csv"), doctest::Contains("duplicate"), ManifestError);

  write_bytes(dir / "h.csv", "id,path,frames,width,height\n");
  CHECK_THROWS_WITH_AS(load_manifest(dir / "h.csv"), doctest::Contains("mos"), ManifestError);

  write_bytes(dir / "o.csv", std::string(kManifestHeader) + "\na,a,7,4,4,3\n");
  CHECK_THROWS_WITH_AS(load_manifest(dir / "o.csv"), doctest::Contains("row 1"), ManifestError);
}

TEST_CASE("manifest: write and load round trip") {
  TempDir dir;
  std::vector<ManifestRecord> recs = {{"a", "x/a", 4, 16, 8, 1.5}, {"b", "b", 2, 3, 3, 5.0}};
  write_manifest(dir / "m.csv", recs);
  const auto back = load_manifest(dir / "m.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].path == "x/a");
  CHECK(back[0].width == 16);
  CHECK(back[0].height == 8);
  CHECK(back[1].mos == 5.0);
}

TEST_CASE("read_frames: missing file is named") {
  TempDir dir;
  std::filesystem::create_directories(dir / "c");
  write_bytes(dir.path() / "c" / "frame_000001.ppm", ppm_bytes(2, 2, 255, 0, 0));
  const ManifestRecord rec{"c", "c", 2, 2, 2, 3.0};
  CHECK_THROWS_WITH_AS(read_frames(dir.path(), rec), doctest::Contains("frame_000002.ppm"),
                       FormatError);
  write_bytes(dir.path() / "c" / "frame_000002.ppm", ppm_bytes(3, 2, 0, 0, 0));
  CHECK_THROWS_WITH_AS(read_frames(dir.path(), rec), doctest::Contains("frame_000002.ppm"),
                       FormatError);
  write_bytes(dir.path() / "c" / "frame_000002.ppm", ppm_bytes(2, 2, 0, 255, 0));
  const VideoClip clip = read_frames(dir.path(), rec);
  CHECK(clip.frames.shape() == Shape{2, 3, 2, 2});
  CHECK(clip.frames[0] == 1.0);
  CHECK(clip.frames[12 + 4] == 1.0);
  CHECK(clip.mos == 3.0);
}

TEST_CASE("split: sizes follow the rounding rule") {
  auto sizes = [](std::size_t n) {
    const auto a = split(fake_records(n), {0.6, 0.2, 0.2}, 11);
    return std::array<std::size_t, 3>{a.count(Split::Train), a.count(Split::Val),
                                      a.count(Split::Test)};
  };
  CHECK(sizes(54) == std::array<std::size_t, 3>{32, 11, 11});
  CHECK(sizes(5) == std::array<std::size_t, 3>{3, 1, 1});
  CHECK_THROWS_AS(split(fake_records(2)), std::invalid_argument);
  CHECK_THROWS_AS(split(fake_records(5), {0.5, 0.2, 0.2}), std::invalid_argument);
}

TEST_CASE("split: determinism and seed sensitivity") {
  const auto recs = fake_records(54);
  CHECK(split(recs, {0.6, 0.2, 0.2}, 3).by_id == split(recs, {0.6, 0.2, 0.2}, 3).by_id);
  CHECK(split(recs, {0.6, 0.2, 0.2}, 3).by_id != split(recs, {0.6, 0.2, 0.2}, 4).by_id);
  const auto train = split(recs, {0.6, 0.2, 0.2}, 3).select(recs, Split::Train);
  CHECK(std::is_sorted(train.begin(), train.end(), [&](const auto& a, const auto& b) {
    return std::stoi(a.id.substr(1)) < std::stoi(b.id.substr(1));
  }));
}

TEST_CASE("split: partition law over 500 random (n, seed) pairs") {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 3 + rng.below(120);
    const std::uint64_t seed = rng.below(1u << 30);
    const auto recs = fake_records(n);
    const auto a = split(recs, {0.6, 0.2, 0.2}, seed);
    REQUIRE(a.by_id.size() == n);
    std::multiset<std::string> seen;
    for (Split s : {Split::Train, Split::Val, Split::Test}) {
      for (const auto& r : a.select(recs, s)) seen.insert(r.id);
    }
    REQUIRE(seen.size() == n);
    for (const auto& r : recs) REQUIRE(seen.count(r.id) == 1);
    REQUIRE(a.count(Split::Train) == std::size_t(std::lround(0.6 * double(n))));
  }
}

TEST_CASE("distort: level 0 is the identity for every kind") {
  const Tensor img = texture(3);
  for (auto kind : {DistortionKind::GaussianBlur, DistortionKind::GaussianNoise,
                    DistortionKind::ContrastReduction}) {
    const Tensor out = distort_image(img, {kind, 0.0, 5});
    CHECK(std::equal(out.data().begin(), out.data().end(), img.data().begin()));
  }
}

TEST_CASE("distort: constant image is a fixed point of blur") {
  const Tensor flat = Tensor::full({3, 12, 10}, 0.37);
  for (double level : {0.1, 0.5, 1.0}) {
    const Tensor out = distort_image(flat, {DistortionKind::GaussianBlur, level, 0});
    for (double v : out.data()) CHECK(v == 0.37);
  }
}

TEST_CASE("distort: noise is seeded and bounded, contrast is affine") {
  const Tensor img = texture(4);
  const Tensor a = distort_image(img, {DistortionKind::GaussianNoise, 0.7, 123});
  const Tensor b = distort_image(img, {DistortionKind::GaussianNoise, 0.7, 123});
  const Tensor c = distort_image(img, {DistortionKind::GaussianNoise, 0.7, 124});
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  CHECK_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));
  for (double v : a.data()) CHECK((v >= 0.0 && v <= 1.0));

  const Tensor d = distort_image(img, {DistortionKind::ContrastReduction, 0.25, 0});
  for (std::size_t i = 0; i < img.numel(); ++i) {
    CHECK(d[i] == doctest::Approx(0.5 + 0.75 * (img[i] - 0.5)).epsilon(1e-15));
  }
  const Tensor e = distort_image(img, {DistortionKind::ContrastReduction, 1.0, 0});
  for (double v : e.data()) CHECK(v == 0.5);
}

TEST_CASE("distort: level outside [0, 1] is rejected") {
  const Tensor img = texture(1, 8);
  CHECK_THROWS_AS(distort_image(img, {DistortionKind::GaussianBlur, -0.1, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(distort_image(img, {DistortionKind::GaussianNoise, 1.5, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_kind("jpeg"), std::invalid_argument);
}

TEST_CASE("distort: blur Laplacian energy is non-increasing in level") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tensor img = texture(seed, 48);
    double prev = mean_abs_laplacian(img);
    for (int k = 1; k <= 20; ++k) {
      const double level = k / 20.0;
      const double now = mean_abs_laplacian(distort_image(img, {DistortionKind::GaussianBlur, level, 0}));
      CHECK(now <= prev + 1e-12);
      prev = now;
    }
  }
}

TEST_CASE("synth: pseudo-MOS endpoints and stratified levels") {
  CHECK(pseudo_mos(0.0) == 5.0);
  CHECK(pseudo_mos(1.0) == 1.0);
  const auto levels = sample_levels(54, 1);
  std::vector<double> sorted = levels;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    CHECK(sorted[k] >= double(k) / 54.0);
    CHECK(sorted[k] < double(k + 1) / 54.0);
  }
  CHECK(levels != sorted);
}

TEST_CASE("synth: corpus is byte-identical for a seed and round-trips") {
  TempDir a, b;
  SynthOptions opt;
  opt.n_clips = 6;
  opt.frames = 4;
  opt.size = 16;
  opt.seed = 42;
  const auto recs = synth_corpus(a / "corpus", opt);
  synth_corpus(b / "corpus", opt);
  CHECK(recs.size() == 6);
  const auto loaded = load_manifest(a / "corpus" / kManifestFile);
  REQUIRE(loaded.size() == 6);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(loaded[i].id == recs[i].id);
    CHECK(std::abs(loaded[i].mos - recs[i].mos) < 1e-6);
    for (std::size_t t = 1; t <= 4; ++t) {
      const std::string rel = recs[i].path + "/" + frame_file_name(t);
      CHECK(read_bytes(a.path() / "corpus" / rel) == read_bytes(b.path() / "corpus" / rel));
    }
    const VideoClip clip = read_frames(a / "corpus", loaded[i]);
    CHECK(clip.frames.shape() == Shape{4, 3, 16, 16});
  }
  CHECK(read_bytes(a / "corpus/manifest.csv") == read_bytes(b / "corpus/manifest.csv"));
  CHECK(read_bytes(a / "corpus/manifest.csv").rfind("id,path,frames,width,height,mos\n", 0) == 0);

  // Refuses to overwrite.
  CHECK_THROWS_AS(synth_corpus(a / "corpus", opt), std::runtime_error);
  opt.frames = 3;
  CHECK_THROWS_AS(synth_corpus(a / "other", opt), std::invalid_argument);
}

TEST_CASE("synth: 54 clips give 54 manifest rows") {
  TempDir dir;
  SynthOptions opt;
  opt.frames = 2;
  opt.size = 8;
  CHECK(synth_corpus(dir / "c", opt).size() == 54);
  CHECK(load_manifest(dir / "c" / kManifestFile).size() == 54);
}

TEST_CASE("synth: stills carry levels and pseudo-MOS") {
  const auto stills = synth_stills(10, 16, 5);
  REQUIRE(stills.size() == 10);
  for (const auto& s : stills) {
    CHECK(s.image.shape() == Shape{3, 16, 16});
    CHECK(s.mos == doctest::Approx(5.0 - 4.0 * s.level));
  }
}
