#pragma once

#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "passtax/errors.hpp"
#include "passtax/generator.hpp"
#include "passtax/network.hpp"
#include "passtax/scc.hpp"
#include "passtax/solver.hpp"

namespace passtax {

inline constexpr const char* kOwnershipHeader = "owned_id,owner_id,share";
inline constexpr const char* kIncomeHeader = "taxpayer_id,kind,income";
inline constexpr const char* kResultHeader = "taxpayer_id,kind,initial_income,final_income";

struct ParsedInput {
  OwnershipNetwork net;
  IncomeVector incomes;
  std::vector<Finding> warnings;
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

inline double parse_number(const std::string& text, const std::string& path, std::size_t line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw IoError(path + ":" + std::to_string(line) + ": unparsable number '" + text + "'");
  return value;
}

[[noreturn]] inline void row_error(const std::string& path, std::size_t line,
                                   const std::string& message) {
  throw IoError(path + ":" + std::to_string(line) + ": " + message);
}

}  // namespace detail

/// Reads the ownership and income files into a network plus initial
/// incomes. Ids seen only in the ownership file are registered with
/// inferred kind (owned -> corporation, owner-only -> individual) at income
/// zero, each with a warning. Structural defects beyond that are left for
/// validate_network.
inline ParsedInput parse_inputs(const std::string& ownership_path,
                                const std::string& incomes_path = {}) {
  struct OwnershipRow {
    std::string owned, owner;
    double share;
  };
  std::vector<OwnershipRow> rows;
  {
    std::ifstream in(ownership_path);
    if (!in) throw IoError("cannot open " + ownership_path);
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw IoError(ownership_path + ": empty file");
    if (auto f = detail::split_csv_line(line); line.find(kOwnershipHeader) != 0)
      detail::row_error(ownership_path, 1, "expected header '" + std::string(kOwnershipHeader) + "'");
    std::set<std::pair<std::string, std::string>> seen;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line == "\r") continue;
      auto fields = detail::split_csv_line(line);
      if (fields.size() != 3) detail::row_error(ownership_path, lineno, "expected 3 fields");
      if (fields[0].empty() || fields[1].empty())
        detail::row_error(ownership_path, lineno, "empty taxpayer id");
      double share = detail::parse_number(fields[2], ownership_path, lineno);
      if (share < 0.0 || share > 1.0)
        detail::row_error(ownership_path, lineno, "share outside [0, 1]");
      if (!seen.emplace(fields[0], fields[1]).second)
        detail::row_error(ownership_path, lineno,
                          "duplicate ownership pair (" + fields[0] + ", " + fields[1] + ")");
      rows.push_back({std::move(fields[0]), std::move(fields[1]), share});
    }
  }

  NetworkBuilder builder;
  struct IncomeRow {
    std::string id;
    double income;
  };
  std::vector<IncomeRow> income_rows;
  if (!incomes_path.empty()) {
    std::ifstream in(incomes_path);
    if (!in) throw IoError("cannot open " + incomes_path);
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw IoError(incomes_path + ": empty file");
    if (line.find(kIncomeHeader) != 0)
      detail::row_error(incomes_path, 1, "expected header '" + std::string(kIncomeHeader) + "'");
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line == "\r") continue;
      auto fields = detail::split_csv_line(line);
      if (fields.size() != 3) detail::row_error(incomes_path, lineno, "expected 3 fields");
      TaxpayerKind kind;
      if (fields[1] == "corp")
        kind = TaxpayerKind::Corporation;
      else if (fields[1] == "individual")
        kind = TaxpayerKind::Individual;
      else
        detail::row_error(incomes_path, lineno, "unknown kind token '" + fields[1] + "'");
      if (builder.has(fields[0]))
        detail::row_error(incomes_path, lineno, "duplicate taxpayer '" + fields[0] + "'");
      builder.add_taxpayer(fields[0], kind);
      income_rows.push_back({fields[0], detail::parse_number(fields[2], incomes_path, lineno)});
    }
  }

  std::vector<Finding> warnings;
  // register every owned id first: an id can show up as an owner before its
  // own ownership row, and anything owned is a corporation
  for (const auto& r : rows) {
    if (!builder.has(r.owned)) {
      builder.add_taxpayer(r.owned, TaxpayerKind::Corporation);
      warnings.push_back({Severity::Warning, "MISSING_INCOME", r.owned,
                          "corporation appears only in ownership file; income 0 assumed"});
    }
  }
  for (const auto& r : rows) {
    if (!builder.has(r.owner)) {
      builder.add_taxpayer(r.owner, TaxpayerKind::Individual);
      warnings.push_back({Severity::Warning, "INFERRED_INDIVIDUAL", r.owner,
                          "owner not in income file; assumed individual with income 0"});
    }
  }
  for (const auto& r : rows) builder.add_share(r.owned, r.owner, r.share);

  ParsedInput out{builder.finalize(), {}, std::move(warnings)};
  out.incomes.assign(out.net.size(), 0.0);
  for (const auto& r : income_rows) out.incomes[*out.net.find(r.id)] = r.income;
  return out;
}

/// Full-precision serialization; parse_inputs reads these back bit-equal.
inline void write_network(const OwnershipNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << kOwnershipHeader << "\n";
  char buf[32];
  for (TaxpayerIndex c : net.corporations()) {
    for (const Share& s : net.owners_of(c)) {
      std::snprintf(buf, sizeof(buf), "%.17g", s.fraction);
      out << net.id(c) << ',' << net.id(s.owner) << ',' << buf << "\n";
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

inline void write_incomes(const OwnershipNetwork& net, const IncomeVector& incomes,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << kIncomeHeader << "\n";
  char buf[32];
  for (TaxpayerIndex i = 0; i < net.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", incomes[i]);
    out << net.id(i) << ',' << (net.is_corporation(i) ? "corp" : "individual") << ',' << buf
        << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

/// Final attribution per taxpayer, rounded to cents only here.
inline void write_results(const OwnershipNetwork& net, const IncomeVector& initial,
                          const IncomeVector& final_incomes, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << kResultHeader << "\n";
  char a[32], b[32];
  for (TaxpayerIndex i = 0; i < net.size(); ++i) {
    std::snprintf(a, sizeof(a), "%.2f", initial[i]);
    std::snprintf(b, sizeof(b), "%.2f", final_incomes[i]);
    out << net.id(i) << ',' << (net.is_corporation(i) ? "corp" : "individual") << ',' << a << ','
        << b << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

inline nlohmann::json to_json(const SolveReport& r) {
  nlohmann::json sizes = nlohmann::json::object();
  for (auto& [dim, count] : r.solve_sizes) sizes[std::to_string(dim)] = count;
  return {{"algorithm", r.algorithm},
          {"converged", r.converged},
          {"outer_iterations", r.outer_iterations},
          {"redo_count", r.redo_count},
          {"solve_count", r.solve_count},
          {"solve_sizes", sizes},
          {"residual", r.residual},
          {"conservation_error", r.conservation_error},
          {"wall_time_ms", r.wall_time_ms}};
}

inline nlohmann::json to_json(const NetworkStats& s) {
  auto hist = [](const std::map<std::size_t, std::size_t>& h) {
    nlohmann::json j = nlohmann::json::object();
    for (auto& [k, v] : h) j[std::to_string(k)] = v;
    return j;
  };
  return {{"individuals", s.individuals},
          {"corporations", s.corporations},
          {"links", s.links},
          {"fraction_links_to_individuals", s.fraction_links_to_individuals},
          {"mean_corporations_owned_per_corporation", s.mean_corporations_owned_per_corporation},
          {"mean_owners_per_corporation", s.mean_owners_per_corporation},
          {"mean_individual_owners_per_corporation", s.mean_individual_owners_per_corporation},
          {"mean_corporate_owners_per_corporation", s.mean_corporate_owners_per_corporation},
          {"corporate_in_degree_histogram", hist(s.corporate_in_degree_histogram)},
          {"corporate_out_degree_histogram", hist(s.corporate_out_degree_histogram)},
          {"scc_size_histogram", hist(s.scc_size_histogram)},
          {"scc_count", s.scc_count},
          {"nontrivial_scc_count", s.nontrivial_scc_count},
          {"largest_scc", s.largest_scc},
          {"weak_components_all", s.weak_components_all},
          {"largest_weak_all", s.largest_weak_all},
          {"weak_components_corporate", s.weak_components_corporate},
          {"largest_weak_corporate", s.largest_weak_corporate},
          {"trivial_component_count", s.trivial_component_count}};
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

inline std::string render_text(const SolveReport& r) {
  std::ostringstream os;
  os << "algorithm:          " << r.algorithm << "\n"
     << "converged:          " << (r.converged ? "yes" : "no") << "\n"
     << "outer iterations:   " << r.outer_iterations << "\n"
     << "component redos:    " << r.redo_count << "\n"
     << "linear solves:      " << r.solve_count << "\n";
  if (!r.solve_sizes.empty()) {
    os << "solve sizes:        ";
    for (auto& [dim, count] : r.solve_sizes) os << dim << "x" << count << " ";
    os << "\n";
  }
  os << "fixed-point residual: " << r.residual << "\n"
     << "conservation error:   " << r.conservation_error << "\n"
     << "wall time:            " << r.wall_time_ms << " ms\n";
  return os.str();
}

inline std::string render_text(const NetworkStats& s) {
  std::ostringstream os;
  os << "individuals:                 " << s.individuals << "\n"
     << "corporations:                " << s.corporations << "\n"
     << "links:                       " << s.links << "\n"
     << "links to individuals:        " << 100.0 * s.fraction_links_to_individuals << "%\n"
     << "corporations owned per corp: " << s.mean_corporations_owned_per_corporation << "\n"
     << "owners per corporation:      " << s.mean_owners_per_corporation << " ("
     << s.mean_individual_owners_per_corporation << " individual, "
     << s.mean_corporate_owners_per_corporation << " corporate)\n"
     << "strongly connected comps:    " << s.scc_count << " (" << s.nontrivial_scc_count
     << " nontrivial, largest " << s.largest_scc << ")\n"
     << "weak components:             " << s.weak_components_all << " with individuals (largest "
     << s.largest_weak_all << "), " << s.weak_components_corporate
     << " corporate-only (largest " << s.largest_weak_corporate << ")\n"
     << "trivial components:          " << s.trivial_component_count << "\n";
  return os.str();
}

inline GeneratorConfig load_generator_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  GeneratorConfig cfg;
  cfg.n_corporations = j.value("n_corporations", cfg.n_corporations);
  cfg.n_individuals = j.value("n_individuals", cfg.n_individuals);
  cfg.nontrivial_scc_count = j.value("nontrivial_scc_count", cfg.nontrivial_scc_count);
  cfg.scc_power_exponent = j.value("scc_power_exponent", cfg.scc_power_exponent);
  cfg.scc_max_size = j.value("scc_max_size", cfg.scc_max_size);
  cfg.corporate_weight_scale = j.value("corporate_weight_scale", cfg.corporate_weight_scale);
  cfg.mean_corporate_owners = j.value("mean_corporate_owners", cfg.mean_corporate_owners);
  cfg.mean_individual_owners = j.value("mean_individual_owners", cfg.mean_individual_owners);
  cfg.internal_degree_target = j.value("internal_degree_target", cfg.internal_degree_target);
  cfg.individual_share_floor = j.value("individual_share_floor", cfg.individual_share_floor);
  cfg.income_log_location = j.value("income_log_location", cfg.income_log_location);
  cfg.income_log_scale = j.value("income_log_scale", cfg.income_log_scale);
  cfg.negative_income_probability =
      j.value("negative_income_probability", cfg.negative_income_probability);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

}  // namespace passtax
