// bvqa: synth | train | eval | compare

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "bvqa/harness/commands.hpp"

namespace {

struct Flags {
  std::string config;
  std::map<std::string, std::string> overrides;  // config key -> value
};

// Every config key is also a flag; flags beat the config file.
void add_common(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config, "key = value config file");
  const std::pair<const char*, const char*> keys[] = {
      {"corpus", "corpus directory"},
      {"variant", "spatial2d or sharpness2d"},
      {"scale", "tiny or canonical"},
      {"epochs", "training epochs"},
      {"batch_size", "clips per minibatch"},
      {"lr", "SGD learning rate"},
      {"alpha", "PLCC loss weight in [0, 1]"},
      {"tau", "soft-rank temperature"},
      {"seed", "root seed"},
      {"out", "output directory"},
      {"ratios", "train,val,test fractions"},
      {"pretrain_epochs", "sharpness pretraining epochs"},
      {"pretrain_lr", "sharpness pretraining learning rate"},
      {"pretrain_images", "synthetic stills for pretraining"},
      {"clips", "clips to synthesize"},
      {"frames", "frames per synthesized clip"},
      {"size", "synthesized frame size"},
      {"kinds", "distortion kinds, comma separated"},
      {"split", "split to evaluate"},
      {"params", "params file (default <out>/params.bin)"},
  };
  for (const auto& [key, help] : keys) {
    std::string flag = std::string("--") + key;
    for (char& c : flag) {
      if (c == '_') c = '-';
    }
    const std::string k = key;
    cmd->add_option_function<std::string>(
        flag, [&flags, k](const std::string& v) { flags.overrides[k] = v; }, help);
  }
}

bvqa::harness::RunConfig resolve(const Flags& flags) {
  bvqa::harness::RunConfig config;
  if (!flags.config.empty()) config = bvqa::harness::load_config(flags.config);
  for (const auto& [key, value] : flags.overrides) bvqa::harness::apply_setting(config, key, value);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind video quality assessment harness"};
  app.require_subcommand(1);
  Flags synth_flags, train_flags, eval_flags, compare_flags;
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
  auto* train = app.add_subcommand("train", "train and log per-epoch metrics");
  auto* eval = app.add_subcommand("eval", "score a split with a trained params file");
  auto* compare = app.add_subcommand("compare", "train both 2D variants and report");
  add_common(synth, synth_flags);
  add_common(train, train_flags);
  add_common(eval, eval_flags);
  add_common(compare, compare_flags);

  CLI11_PARSE(app, argc, argv);
  using namespace bvqa::harness;
  try {
    if (*synth) {
      cmd_synth(resolve(synth_flags), std::cout);
    } else if (*train) {
      const auto r = cmd_train(resolve(train_flags), std::cout);
      std::cout << r.log_path.string() << "\n" << r.params_path.string() << "\n";
    } else if (*eval) {
      cmd_eval(resolve(eval_flags), std::cout);
    } else if (*compare) {
      cmd_compare(resolve(compare_flags), std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
