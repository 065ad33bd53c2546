#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "cmfomp/experiment.hpp"

namespace {

int dispatch(const std::string& cmd, const std::string& config_path, const cmfomp::CliOptions& opt) {
  using namespace cmfomp;
  if (cmd == "paper-examples") return cmd_paper_examples(opt, std::cout, std::cerr);
  if (config_path.empty()) throw ConfigError(cmd + ": --config is required");
  const ExperimentConfig cfg = load_config(config_path);
  if (cmd == "run") return cmd_run(cfg, opt, std::cout, std::cerr);
  if (cmd == "trial") return cmd_trial(cfg, opt, std::cout, std::cerr);
  return cmd_certify(cfg, opt, std::cout, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-dictionary OMP with CMF kernels"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  cmfomp::CliOptions opt;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path, "JSON experiment configuration");
    if (needs_config) c->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out_path, "output file (default stdout)");
    sub->add_option("--format", opt.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  };

  auto* run = app.add_subcommand("run", "single OMP run on an explicit signal");
  add_common(run, true);
  auto* trial = app.add_subcommand("trial", "Monte-Carlo trials over generated instances");
  add_common(trial, true);
  trial->add_flag("--timing", opt.timing, "fill the ms column");
  auto* certify = app.add_subcommand("certify", "evaluate recovery certificates on a support");
  add_common(certify, true);
  auto* examples = app.add_subcommand("paper-examples", "reproduce the worked examples");
  add_common(examples, false);
  examples->add_option("--simplex-scale", opt.simplex_scale,
                       "simplex distance as a multiple of the Laplace crossover");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cmfomp::kExitConfig;
  }
  opt.seed = seed;

  std::string cmd;
  for (const auto* sub : app.get_subcommands()) cmd = sub->get_name();

  try {
    return dispatch(cmd, config_path, opt);
  } catch (const cmfomp::ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cmfomp::kExitConfig;
  } catch (const cmfomp::DegenerateSupportError& e) {
    std::cerr << "degenerate: " << e.what() << "\n";
    return cmfomp::kExitDegenerate;
  } catch (const cmfomp::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return cmfomp::kExitDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cmfomp::kExitDegenerate;
  }
}
