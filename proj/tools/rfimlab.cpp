// Command-line front end: one subcommand per engine, options generated from
// the engine schemas. Values come from the INI file given with --config
// (section named after the subcommand) and are overridden by flags.

#include <algorithm>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "rfimlab/experiment.hpp"

namespace {

struct Subcommand {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> opts;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace rfimlab;
  CLI::App app{"Random-field Ising and bootstrap percolation experiments"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI file with one section per subcommand");

  std::string out_dir = "rfimlab-out";
  bool quiet = false;
  app.add_option("-o,--out", out_dir, "output directory")->capture_default_str();
  app.add_flag("-q,--quiet", quiet, "print nothing on success");

  std::map<std::string, Subcommand> subs;
  for (const auto& engine : engine_names()) {
    auto& sub = subs[engine];
    sub.app = app.add_subcommand(engine, "run the " + engine + " engine");
    for (const auto& k : engine_schema(engine)) {
      std::string help = k.help;
      if (k.default_value) help += " [default: " + (k.default_value->empty() ? "none" : *k.default_value) + "]";
      else help += " [required]";
      // The INI reader splits "a, b" into several values; join them back into a list.
      sub.opts[k.name] = sub.app->add_option("--" + k.name, sub.raw[k.name], help)
                             ->multi_option_policy(CLI::MultiOptionPolicy::Join);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (auto& [engine, sub] : subs) {
    if (!sub.app->parsed()) continue;
    std::map<std::string, std::string> given;
    for (const auto& [name, opt] : sub.opts)
      if (opt->count() > 0) {
        std::string v = sub.raw[name];
        std::replace(v.begin(), v.end(), '\n', ',');
        given[name] = v;
      }
    try {
      const auto cfg = ExperimentConfig::resolve(engine, given);
      const auto artifacts = run_experiment(cfg);
      write_artifacts(out_dir, cfg, artifacts);
      for (const auto& v : artifacts.violations) std::cerr << "invariant violated: " << v << "\n";
      if (!quiet) {
        std::cout << engine << " config_hash=" << cfg.hash_hex() << " status=" << artifacts.status << "\n";
        for (const auto& [name, content] : artifacts.files)
          std::cout << "  " << out_dir << "/" << name << " (" << content.size() << " bytes)\n";
      }
      return artifacts.status;
    } catch (const ConfigError& e) {
      std::cerr << "rfimlab " << engine << ": " << e.what() << "\n";
      return kExitUsage;
    }
  }
  return kExitUsage;
}
