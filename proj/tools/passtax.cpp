// Command-line driver: solve, stats, generate, verify, bench.
//
// Exit codes: 0 success, 1 validation failure, 2 non-convergence or
// singular system, 3 IO/format error, 4 verification mismatch.

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "passtax/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;
constexpr int kExitMismatch = 4;

passtax::Algorithm parse_algorithm(const std::string& name) {
  if (name == "naive") return passtax::Algorithm::Naive;
  if (name == "global") return passtax::Algorithm::Global;
  if (name == "decomp") return passtax::Algorithm::Decomp;
  throw CLI::ValidationError("--algorithm", "unknown algorithm '" + name + "'");
}

void print_findings(const passtax::ValidationReport& report) {
  for (const auto& f : report.findings) {
    std::cerr << (f.severity == passtax::Severity::Error ? "error" : "warning") << " [" << f.code
              << "] " << f.subject << ": " << f.message << "\n";
  }
}

// Parse + optional normalization + validation. Returns false when
// validation fails (caller exits 1).
bool load(const std::string& ownership, const std::string& incomes, bool normalize,
          passtax::ParsedInput& out) {
  out = passtax::parse_inputs(ownership, incomes);
  for (const auto& w : out.warnings)
    std::cerr << "warning [" << w.code << "] " << w.subject << ": " << w.message << "\n";
  if (normalize) out.net = out.net.normalized();
  auto report = passtax::validate_network(out.net);
  print_findings(report);
  return report.pass();
}

double relative_l1(const passtax::IncomeVector& a, const passtax::IncomeVector& b, double scale) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d / std::max(1.0, scale);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pass-through income attribution over ownership networks"};
  app.require_subcommand(1);

  std::string ownership, incomes, out_path, report_path, config_path, algorithm = "decomp";
  std::string out_ownership, out_incomes, algorithms = "naive,decomp";
  double epsilon = 0.0, tolerance = 1e-6;
  bool normalize = false;
  std::uint64_t seed = 1, max_iter = 1'000'000;
  std::size_t dense_cap = passtax::kDefaultDenseCap;

  auto* solve_cmd = app.add_subcommand("solve", "Compute final attributed incomes");
  solve_cmd->add_option("--ownership", ownership)->required();
  solve_cmd->add_option("--incomes", incomes)->required();
  solve_cmd->add_option("--algorithm", algorithm, "naive|global|decomp");
  solve_cmd->add_option("--epsilon", epsilon, "naive termination threshold (currency)");
  solve_cmd->add_option("--max-iter", max_iter);
  solve_cmd->add_option("--dense-cap", dense_cap);
  solve_cmd->add_flag("--normalize", normalize, "rescale corporate rows to sum exactly to 1");
  solve_cmd->add_option("--out", out_path, "result CSV");
  solve_cmd->add_option("--report", report_path, "JSON solve report");

  auto* stats_cmd = app.add_subcommand("stats", "Structural statistics of a network");
  stats_cmd->add_option("--ownership", ownership)->required();
  stats_cmd->add_option("--incomes", incomes);
  stats_cmd->add_option("--out", out_path, "JSON stats document");

  auto* gen_cmd = app.add_subcommand("generate", "Generate a synthetic network");
  gen_cmd->add_option("--config", config_path)->required();
  gen_cmd->add_option("--seed", seed);
  gen_cmd->add_option("--out-ownership", out_ownership)->required();
  gen_cmd->add_option("--out-incomes", out_incomes)->required();

  auto* verify_cmd = app.add_subcommand("verify", "Cross-check two or more solvers");
  verify_cmd->add_option("--ownership", ownership)->required();
  verify_cmd->add_option("--incomes", incomes)->required();
  verify_cmd->add_option("--algorithms", algorithms, "comma-separated list");
  verify_cmd->add_option("--tolerance", tolerance, "max relative L1 deviation");
  verify_cmd->add_flag("--normalize", normalize);

  auto* bench_cmd = app.add_subcommand("bench", "Generate a network and time a solve");
  bench_cmd->add_option("--config", config_path)->required();
  bench_cmd->add_option("--seed", seed);
  bench_cmd->add_option("--algorithm", algorithm, "naive|global|decomp");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitIo;
  }

  try {
    if (solve_cmd->parsed()) {
      passtax::ParsedInput input;
      if (!load(ownership, incomes, normalize, input)) return kExitValidation;
      passtax::SolverConfig cfg;
      cfg.algorithm = parse_algorithm(algorithm);
      cfg.epsilon = epsilon;
      cfg.max_iterations = max_iter;
      cfg.dense_cap = dense_cap;
      auto result = passtax::solve(input.net, input.incomes, cfg);
      std::cout << passtax::render_text(result.report);
      if (!out_path.empty())
        passtax::write_results(input.net, input.incomes, result.incomes, out_path);
      if (!report_path.empty()) passtax::write_json(passtax::to_json(result.report), report_path);
      return result.report.converged ? kExitOk : kExitNumeric;
    }

    if (stats_cmd->parsed()) {
      passtax::ParsedInput input = passtax::parse_inputs(ownership, incomes);
      auto st = passtax::network_stats(input.net);
      std::cout << passtax::render_text(st);
      if (!out_path.empty()) passtax::write_json(passtax::to_json(st), out_path);
      return kExitOk;
    }

    if (gen_cmd->parsed()) {
      auto cfg = passtax::load_generator_config(config_path);
      if (gen_cmd->count("--seed") > 0) cfg.seed = seed;
      auto [net, e0] = passtax::generate(cfg);
      passtax::write_network(net, out_ownership);
      passtax::write_incomes(net, e0, out_incomes);
      std::cout << "generated " << net.corporation_count() << " corporations, "
                << net.individual_count() << " individuals, " << net.link_count() << " links\n";
      return kExitOk;
    }

    if (verify_cmd->parsed()) {
      passtax::ParsedInput input;
      if (!load(ownership, incomes, normalize, input)) return kExitValidation;
      std::vector<std::string> names;
      std::stringstream ss(algorithms);
      for (std::string item; std::getline(ss, item, ',');) names.push_back(item);
      if (names.size() < 2) throw CLI::ValidationError("--algorithms", "need at least two");
      double scale = 0.0;
      for (double x : input.incomes) scale += std::abs(x);
      std::vector<passtax::IncomeVector> results;
      for (const auto& name : names) {
        passtax::SolverConfig cfg;
        cfg.algorithm = parse_algorithm(name);
        if (cfg.algorithm == passtax::Algorithm::Naive) cfg.epsilon = tolerance * scale * 1e-2;
        results.push_back(passtax::solve(input.net, input.incomes, cfg).incomes);
      }
      double worst = 0.0;
      for (std::size_t i = 0; i < results.size(); ++i)
        for (std::size_t j = i + 1; j < results.size(); ++j)
          worst = std::max(worst, relative_l1(results[i], results[j], scale));
      std::cout << "max relative deviation: " << worst << " (tolerance " << tolerance << ")\n";
      return worst <= tolerance ? kExitOk : kExitMismatch;
    }

    if (bench_cmd->parsed()) {
      auto cfg = passtax::load_generator_config(config_path);
      if (bench_cmd->count("--seed") > 0) cfg.seed = seed;
      auto [net, e0] = passtax::generate(cfg);
      std::cout << "generated " << net.corporation_count() << " corporations, "
                << net.individual_count() << " individuals, " << net.link_count() << " links\n";
      passtax::SolverConfig scfg;
      scfg.algorithm = parse_algorithm(algorithm);
      auto result = passtax::solve(net, e0, scfg);
      std::cout << passtax::render_text(result.report);
      return result.report.converged ? kExitOk : kExitNumeric;
    }
  } catch (const passtax::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const passtax::SolveError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
