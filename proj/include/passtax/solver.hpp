#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "passtax/absorption.hpp"
#include "passtax/network.hpp"
#include "passtax/scc.hpp"

namespace passtax {

enum class Algorithm { Naive, Global, Decomp };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Naive: return "naive";
    case Algorithm::Global: return "global";
    case Algorithm::Decomp: return "decomp";
  }
  return "unknown";
}

struct SolverConfig {
  Algorithm algorithm = Algorithm::Decomp;
  double epsilon = 0.0;  // naive termination; <= 0 picks 1e-6 * max(1, sum|E0|)
  std::uint64_t max_iterations = 1'000'000;
  std::size_t dense_cap = kDefaultDenseCap;
  std::uint64_t seed = 0;
  double time_budget_ms = 0.0;  // naive only; 0 disables the wall-clock cutoff
};

struct SolveReport {
  std::string algorithm;
  bool converged = true;
  std::uint64_t outer_iterations = 0;
  std::uint64_t redo_count = 0;                      // total across components
  std::vector<std::uint32_t> component_redos;        // matrix-path components, processing order
  std::uint64_t solve_count = 0;                     // dense linear solves performed
  std::map<std::size_t, std::uint64_t> solve_sizes;  // solve dimension -> count
  double residual = 0.0;                             // fixed-point defect, currency
  double conservation_error = 0.0;                   // |sum(E_final) - sum(E0)|
  double wall_time_ms = 0.0;
};

struct SolveResult {
  IncomeVector incomes;
  SolveReport report;
};

/// L1 defect of the fixed-point condition: how much income a single further
/// distribution round (withholding every corporation at or below zero)
/// would still move. Zero iff E is the final attributed income.
inline double verify_fixed_point(const OwnershipNetwork& net, const IncomeVector& incomes) {
  std::vector<TaxpayerIndex> withheld;
  for (TaxpayerIndex c : net.corporations())
    if (incomes[c] <= 0.0) withheld.push_back(c);
  IncomeVector next = distribute_step(incomes, restrict_shares(net, withheld));
  double defect = 0.0;
  for (std::size_t i = 0; i < incomes.size(); ++i) defect += std::abs(incomes[i] - next[i]);
  return defect;
}

namespace detail {

inline double sum_abs(const IncomeVector& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

inline double sum(const IncomeVector& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void finish_report(const OwnershipNetwork& net, const IncomeVector& initial,
                          const IncomeVector& final_incomes, const Stopwatch& timer,
                          SolveReport& report) {
  report.residual = verify_fixed_point(net, final_incomes);
  report.conservation_error = std::abs(sum(final_incomes) - sum(initial));
  report.wall_time_ms = timer.elapsed_ms();
}

}  // namespace detail

/// Round-by-round distribution, withholding the currently negative
/// corporations each round, until no corporation holds more than epsilon.
/// Exact only in the limit; kept as the reference iteration and as the slow
/// baseline for benchmarks.
inline SolveResult solve_naive(const OwnershipNetwork& net, const IncomeVector& initial,
                               const SolverConfig& cfg = {}) {
  detail::Stopwatch timer;
  SolveReport report;
  report.algorithm = "naive";

  const double epsilon =
      cfg.epsilon > 0.0 ? cfg.epsilon : 1e-6 * std::max(1.0, detail::sum_abs(initial));
  IncomeVector incomes = initial;
  report.converged = false;
  for (std::uint64_t n = 0; n < cfg.max_iterations; ++n) {
    double max_corporate = 0.0;
    for (TaxpayerIndex c : net.corporations())
      max_corporate = std::max(max_corporate, incomes[c]);
    if (max_corporate < epsilon) {
      report.converged = true;
      break;
    }
    if (cfg.time_budget_ms > 0.0 && timer.elapsed_ms() > cfg.time_budget_ms) break;
    incomes = distribute_step(incomes, restrict_shares(net, negative_set(incomes, net)));
    ++report.outer_iterations;
  }
  detail::finish_report(net, initial, incomes, timer, report);
  return {std::move(incomes), std::move(report)};
}

/// Whole-network fixed point: repeatedly absorbs the full nonnegative
/// corporate set until the negative set stabilizes. At most n_S + 1 outer
/// iterations; each builds a dense system over all distributing
/// corporations, so it only scales up to the dense cap. Reference oracle
/// for solve_decomp.
inline SolveResult solve_global(const OwnershipNetwork& net, const IncomeVector& initial,
                                const SolverConfig& cfg = {}) {
  detail::Stopwatch timer;
  SolveReport report;
  report.algorithm = "global";

  IncomeVector incomes = initial;
  while (true) {
    ++report.outer_iterations;
    auto negatives_before = negative_set(incomes, net);
    std::vector<TaxpayerIndex> transients;
    for (TaxpayerIndex c : net.corporations())
      if (incomes[c] >= 0.0) transients.push_back(c);
    if (!transients.empty()) {
      TransientSystem sys = build_transient_system(net, transients, cfg.dense_cap);
      absorb(incomes, sys);
      ++report.solve_count;
      ++report.solve_sizes[transients.size()];
    }
    if (negative_set(incomes, net) == negatives_before) break;
  }
  detail::finish_report(net, initial, incomes, timer, report);
  return {std::move(incomes), std::move(report)};
}

/// Component-wise solver: processes strongly connected components in
/// income-flow order. Singletons without self-shares distribute in one
/// sparse pass; cyclic components get dense absorption over their
/// nonnegative members, redone whenever a previously negative member turns
/// positive. Scales to large networks because the dense work never exceeds
/// the largest component.
inline SolveResult solve_decomp(const OwnershipNetwork& net, const IncomeVector& initial,
                                const SolverConfig& cfg = {}) {
  detail::Stopwatch timer;
  SolveReport report;
  report.algorithm = "decomp";

  IncomeVector incomes = initial;
  ComponentDecomposition dec = decompose(net);
  report.outer_iterations = 1;

  for (const Component& comp : dec.components) {
    if (comp.members.size() == 1 && !comp.has_internal_edge) {
      const TaxpayerIndex v = comp.members.front();
      const double amount = incomes[v];
      if (amount > 0.0) {
        for (const Share& s : net.owners_of(v)) incomes[s.owner] += amount * s.fraction;
        incomes[v] = 0.0;
      }
      continue;
    }

    std::uint32_t redos = 0;
    while (true) {
      std::vector<TaxpayerIndex> transients;
      for (TaxpayerIndex v : comp.members)
        if (incomes[v] >= 0.0) transients.push_back(v);
      if (transients.empty()) break;

      TransientSystem sys = build_transient_system(net, transients, cfg.dense_cap);
      absorb(incomes, sys);
      ++report.solve_count;
      ++report.solve_sizes[transients.size()];

      bool redo = false;
      std::size_t next = 0;
      for (TaxpayerIndex v : comp.members) {
        while (next < transients.size() && transients[next] < v) ++next;
        const bool was_transient = next < transients.size() && transients[next] == v;
        if (!was_transient && incomes[v] > 0.0) redo = true;
      }
      if (!redo) break;
      ++report.redo_count;
      if (++redos > comp.members.size() + 1)
        throw SolveError(SolveErrorCode::RedoOverflow,
                         "component redo loop exceeded its termination bound");
    }
    report.component_redos.push_back(redos);
  }
  detail::finish_report(net, initial, incomes, timer, report);
  return {std::move(incomes), std::move(report)};
}

inline SolveResult solve(const OwnershipNetwork& net, const IncomeVector& initial,
                         const SolverConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::Naive: return solve_naive(net, initial, cfg);
    case Algorithm::Global: return solve_global(net, initial, cfg);
    case Algorithm::Decomp: return solve_decomp(net, initial, cfg);
  }
  throw std::invalid_argument("unknown algorithm");
}

/// Runs k admissible but otherwise arbitrary withholding rounds (always
/// covering the current negative set, plus a random extra subset), then
/// hands over to solve_decomp. The final income must match a plain
/// solve_decomp run; this is the order-invariance result made executable.
inline SolveResult solve_randomized_schedule(const OwnershipNetwork& net,
                                             const IncomeVector& initial, std::uint64_t steps,
                                             std::uint64_t seed, const SolverConfig& cfg = {}) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);

  IncomeVector incomes = initial;
  for (std::uint64_t j = 0; j < steps; ++j) {
    std::vector<TaxpayerIndex> withheld = negative_set(incomes, net);
    for (TaxpayerIndex c : net.corporations())
      if (incomes[c] >= 0.0 && coin(rng)) withheld.push_back(c);
    std::sort(withheld.begin(), withheld.end());
    incomes = distribute_step(incomes, restrict_shares(net, withheld));
  }
  SolveResult result = solve_decomp(net, incomes, cfg);
  result.report.algorithm = "randomized+decomp";
  result.report.outer_iterations += steps;
  // conservation is judged against the caller's starting point
  result.report.conservation_error =
      std::abs(detail::sum(result.incomes) - detail::sum(initial));
  return result;
}

}  // namespace passtax
