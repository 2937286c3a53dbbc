// Command-line front end: loads an experiment spec, applies overrides and
// writes results.
//
//   cfad --config exp.yaml --mode compare --trials 200 --seed 7 --out results/
//   cfad geometry.K=200 detector.T=20

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cfad/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Activity detection in cell-free and co-located massive MIMO"};
  std::string config;
  std::string mode;
  std::string out;
  long long seed = -1;
  int trials = -1;
  int workers = -1;
  bool print_spec = false;
  std::vector<std::string> overrides;

  app.add_option("-c,--config", config, "YAML experiment spec")->check(CLI::ExistingFile);
  app.add_option("-m,--mode", mode, "roc | snr-survey | compare | validate");
  app.add_option("-s,--seed", seed, "master seed")->check(CLI::NonNegativeNumber);
  app.add_option("-n,--trials", trials, "number of Monte Carlo trials");
  app.add_option("-w,--workers", workers, "worker threads (0 = all cores)");
  app.add_option("-o,--out", out, "output directory");
  app.add_flag("--print-spec", print_spec, "print the resolved spec and exit");
  app.add_option("overrides", overrides, "dotted overrides such as geometry.K=200");
  CLI11_PARSE(app, argc, argv);

  // Flags take precedence over positional overrides, which take precedence
  // over the file.
  if (!mode.empty()) overrides.push_back("mode=" + mode);
  if (seed >= 0) overrides.push_back("geometry.seed=" + std::to_string(seed));
  if (trials >= 0) overrides.push_back("n_trials=" + std::to_string(trials));
  if (workers >= 0) overrides.push_back("workers=" + std::to_string(workers));
  if (!out.empty()) overrides.push_back("output_dir=\"" + out + "\"");

  try {
    const cfad::ExperimentSpec spec = config.empty() ? cfad::parse_spec("", overrides)
                                                     : cfad::parse_spec_file(config, overrides);
    if (print_spec) {
      std::cout << cfad::emit_spec(spec);
      return 0;
    }
    return cfad::run(spec, std::cout);
  } catch (const cfad::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const cfad::ValidationError& e) {
    std::cerr << "invalid spec: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
