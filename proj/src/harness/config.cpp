#include "bvqa/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bvqa::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) out.push_back(trim(cur));
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

std::string real_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void apply_setting(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  try {
    if (key == "corpus") c.corpus = v;
    else if (key == "scale") c.scale = extract::parse_scale(v);
    else if (key == "variant") c.variant = extract::parse_variant(v);
    else if (key == "epochs") c.epochs = to_u64(key, v);
    else if (key == "batch_size") c.batch_size = to_u64(key, v);
    else if (key == "lr") c.lr = to_real(key, v);
    else if (key == "alpha") c.alpha = to_real(key, v);
    else if (key == "tau") c.tau = to_real(key, v);
    else if (key == "seed") c.seed = to_u64(key, v);
    else if (key == "out") c.out = v;
    else if (key == "ratios") {
      const auto parts = split_list(v);
      if (parts.size() != 3) throw ConfigError("ratios: expected three comma-separated numbers");
      for (int i = 0; i < 3; ++i) c.ratios[i] = to_real(key, parts[i]);
    } else if (key == "pretrain_epochs") c.pretrain_epochs = to_u64(key, v);
    else if (key == "pretrain_lr") c.pretrain_lr = to_real(key, v);
    else if (key == "pretrain_images") c.pretrain_images = to_u64(key, v);
    else if (key == "clips") c.clips = to_u64(key, v);
    else if (key == "frames") c.frames = to_u64(key, v);
    else if (key == "size") c.size = to_u64(key, v);
    else if (key == "kinds") {
      c.kinds.clear();
      for (const auto& k : split_list(v)) c.kinds.push_back(data::parse_kind(k));
    } else if (key == "split") c.split = data::parse_split(v);
    else if (key == "params") c.params = v;
    else throw ConfigError("unknown config key '" + key + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void RunConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs: must be >= 1");
  if (batch_size < 2) throw ConfigError("batch_size: must be >= 2 (correlations need two scores)");
  if (!(lr > 0.0)) throw ConfigError("lr: must be > 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha: must lie in [0, 1]");
  if (!(tau > 0.0)) throw ConfigError("tau: must be > 0");
  if (!(pretrain_lr >= 0.0)) throw ConfigError("pretrain_lr: must be >= 0");
  if (kinds.empty()) throw ConfigError("kinds: need at least one distortion kind");
  if (variant == extract::Variant::Slowfast3d) {
    throw ConfigError("variant: must be spatial2d or sharpness2d");
  }
  double total = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ConfigError("ratios: must be non-negative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("ratios: must sum to 1");
}

std::filesystem::path RunConfig::params_path() const {
  return params.empty() ? std::filesystem::path(out) / "params.bin" : std::filesystem::path(params);
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value'");
    }
    try {
      apply_setting(base, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str(), std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_config(const RunConfig& c) {
  std::ostringstream os;
  os << "corpus = " << c.corpus << "\n"
     << "scale = " << extract::scale_name(c.scale) << "\n"
     << "variant = " << extract::variant_name(c.variant) << "\n"
     << "epochs = " << c.epochs << "\n"
     << "batch_size = " << c.batch_size << "\n"
     << "lr = " << real_text(c.lr) << "\n"
     << "alpha = " << real_text(c.alpha) << "\n"
     << "tau = " << real_text(c.tau) << "\n"
     << "seed = " << c.seed << "\n"
     << "out = " << c.out << "\n"
     << "ratios = " << real_text(c.ratios[0]) << ", " << real_text(c.ratios[1]) << ", "
     << real_text(c.ratios[2]) << "\n"
     << "pretrain_epochs = " << c.pretrain_epochs << "\n"
     << "pretrain_lr = " << real_text(c.pretrain_lr) << "\n"
     << "pretrain_images = " << c.pretrain_images << "\n"
     << "clips = " << c.clips << "\n"
     << "frames = " << c.frames << "\n"
     << "size = " << c.size << "\n"
     << "kinds = ";
  for (std::size_t i = 0; i < c.kinds.size(); ++i) {
    os << (i ? ", " : "") << data::kind_name(c.kinds[i]);
  }
  os << "\nsplit = " << data::split_name(c.split) << "\n";
  if (!c.params.empty()) os << "params = " << c.params << "\n";
  return os.str();
}

}  // namespace bvqa::harness
