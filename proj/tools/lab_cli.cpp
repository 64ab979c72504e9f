// lab: command-line entry point for the experiment suites, atom validation,
// and symbol norm computations.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lab/harness.hpp"
#include "lab/io.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SuiteArgs {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  int trials = 0;
  int threads = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale laboratory for product-dyadic geometry, "
               "Littlewood-Paley analysis, atoms, and Hankel sections"};
  app.require_subcommand(1);
  int exit_code = 0;

  SuiteArgs args;
  static const char* kSuites[] = {"journe",    "counting", "annular",
                                  "geometric", "pairing",  "besov-schatten"};
  for (const char* name : kSuites) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " suite");
    sub->add_option("--config", args.config_path, "JSON config file");
    sub->add_option("--seed", args.seed, "corpus seed");
    sub->add_option("--trials", args.trials, "trial count");
    sub->add_option("--threads", args.threads, "worker threads (0 = hardware)");
    sub->add_option("--out", args.out, "output base path (.csv and .json)");
    sub->callback([&, name, sub] {
      lab::harness::ExperimentConfig cfg =
          args.config_path.empty()
              ? lab::harness::default_config(name)
              : lab::harness::config_from_json(read_file(args.config_path));
      if (cfg.suite != name)
        throw CLI::ValidationError(std::string("config is for suite ") + cfg.suite);
      if (sub->count("--seed")) cfg.seed = args.seed;
      if (sub->count("--trials")) cfg.trials = args.trials;
      if (sub->count("--threads")) cfg.threads = args.threads;
      if (sub->count("--out")) cfg.out = args.out;
      const auto report = lab::harness::run_suite(cfg);
      lab::harness::write_report(report, cfg.out);
      std::cout << report.summary_json << '\n';
      std::cerr << "wrote " << cfg.out << ".csv and " << cfg.out << ".json ("
                << report.failures << " failures)\n";
      exit_code = report.failures > 0 ? 1 : 0;
    });
  }

  std::string atom_path;
  auto* validate = app.add_subcommand("validate-atom", "validate an atom manifest");
  validate->add_option("--in", atom_path, "atom manifest JSON")->required();
  validate->callback([&] {
    const auto atom = lab::io::load_atom(atom_path);
    const auto rep = lab::atoms::validate_atom(atom);
    nlohmann::json j;
    j["support_ok"] = rep.support_ok;
    j["global_ok"] = rep.global_ok;
    j["weighted_ok"] = rep.weighted_ok;
    j["cancellation_ok"] = rep.cancellation_ok;
    j["stray_measure"] = rep.stray_measure;
    j["omega_discrepancy"] = rep.omega_discrepancy;
    j["global_margin"] = rep.global_margin;
    j["weighted_margin"] = rep.weighted_margin;
    j["cancellation_worst"] = rep.cancellation_worst;
    auto sweep = nlohmann::json::array();
    for (const auto& [d, frac] : rep.delta_sweep)
      sweep.push_back({{"delta", d}, {"normalized_sum", frac}});
    j["delta_sweep"] = std::move(sweep);
    std::cout << j.dump(2) << '\n';
    exit_code = rep.ok() ? 0 : 1;
  });

  std::string symbol_path;
  double norm_p = 2.0;
  int norm_L = 0, norm_Kp = 7;
  bool force_large = false;
  auto* norms = app.add_subcommand("norms", "Schatten and Besov norms of a symbol");
  norms->add_option("--symbol", symbol_path, "symbol file")->required();
  norms->add_option("--p", norm_p, "Schatten/Besov exponent")->required();
  norms->add_option("--L", norm_L, "embedding window exponent");
  norms->add_option("--Kp", norm_Kp, "spectral resolution exponent");
  norms->add_flag("--force-large", force_large,
                  "allow sections above the default N = 32 cap");
  norms->callback([&] {
    const auto phi = lab::io::load_symbol(symbol_path);
    if (phi.N > 32 && !force_large)
      throw CLI::ValidationError(
          "N > 32 needs --force-large (dense decomposition)");
    const auto H = lab::hankel::hankel_matrix(phi);
    nlohmann::json j;
    j["N"] = phi.N;
    j["p"] = norm_p;
    j["schatten"] = lab::hankel::schatten_norm(H, norm_p);
    if (phi.zero_axis_excluded) {
      const double besov = lab::hankel::besov_lattice_norm(phi, norm_p, norm_L, norm_Kp);
      j["besov"] = besov;
      if (besov > 0) j["ratio"] = j["schatten"].get<double>() / besov;
    }
    std::cout << j.dump(2) << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return exit_code;
}
