#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "passtax/network.hpp"

namespace passtax {

/// Knobs for synthetic network construction. Defaults are calibrated to
/// the degree and component statistics of a national corporate filing
/// network: mostly singleton corporations, a few hundred small ownership
/// cycles, roughly three quarters of all links held by individuals.
struct GeneratorConfig {
  std::size_t n_corporations = 1000;
  std::size_t n_individuals = 2500;
  std::size_t nontrivial_scc_count = 5;
  double scc_power_exponent = 3.9;  // size law P(s) ~ s^-a over [2, scc_max_size]
  std::size_t scc_max_size = 12;    // the first sampled component is pinned to this size
  double mean_corporate_owners = 1.75;
  double mean_individual_owners = 5.48;
  double internal_degree_target = 8.21;  // mean in-component degree for large cycles
  double individual_share_floor = 0.05;  // min row mass on individuals, keeps Q substochastic
  double corporate_weight_scale = 1.0;   // relative pull of corporate links on row mass;
                                         // >1 models concentrated cross-holdings
  double income_log_location = 9.0;      // magnitudes ~ LogNormal(location, scale)
  double income_log_scale = 1.0;
  double negative_income_probability = 0.3;  // corporations only
  std::uint64_t seed = 1;
};

namespace detail {

inline std::string corp_id(std::size_t k) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "C%07zu", k);
  return buf;
}

inline std::string individual_id(std::size_t k) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "P%07zu", k);
  return buf;
}

}  // namespace detail

/// Builds a valid network plus initial incomes, deterministically from the
/// seed. Nontrivial components are planted as directed cycles with random
/// chords; everything across components flows strictly from earlier to
/// later in a random component order, so the planted component structure
/// is exactly what decompose() recovers.
inline std::pair<OwnershipNetwork, IncomeVector> generate(const GeneratorConfig& cfg) {
  if (cfg.n_corporations > 0 && cfg.n_individuals == 0)
    throw std::invalid_argument("corporations need individual owners");
  if (!(cfg.individual_share_floor > 0.0 && cfg.individual_share_floor < 1.0))
    throw std::invalid_argument("individual_share_floor must be in (0, 1)");
  if (cfg.nontrivial_scc_count > 0 && cfg.scc_max_size < 2)
    throw std::invalid_argument("nontrivial components need scc_max_size >= 2");
  if (!(cfg.corporate_weight_scale > 0.0))
    throw std::invalid_argument("corporate_weight_scale must be positive");

  std::mt19937_64 rng(cfg.seed);

  // 1. component sizes: pin the first to the configured max, draw the rest
  // from the truncated power law
  std::vector<std::size_t> sizes;
  if (cfg.nontrivial_scc_count > 0) {
    std::vector<double> weights;
    for (std::size_t s = 2; s <= cfg.scc_max_size; ++s)
      weights.push_back(std::pow(static_cast<double>(s), -cfg.scc_power_exponent));
    std::discrete_distribution<std::size_t> size_dist(weights.begin(), weights.end());
    sizes.push_back(cfg.scc_max_size);
    for (std::size_t k = 1; k < cfg.nontrivial_scc_count; ++k)
      sizes.push_back(2 + size_dist(rng));
  }
  std::size_t planted = 0;
  for (std::size_t s : sizes) planted += s;
  if (planted > cfg.n_corporations)
    throw std::invalid_argument("planted component sizes exceed the corporation budget");

  // 2./3. assign corporations to components: nontrivial blocks first, the
  // rest singletons
  const std::size_t n_components = sizes.size() + (cfg.n_corporations - planted);
  std::vector<std::vector<std::uint32_t>> members(n_components);
  {
    std::uint32_t next = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k)
      for (std::size_t j = 0; j < sizes[k]; ++j) members[k].push_back(next++);
    for (std::size_t k = sizes.size(); k < n_components; ++k) members[k].push_back(next++);
  }

  std::vector<std::vector<std::uint32_t>> corp_owners(cfg.n_corporations);
  auto add_corp_edge = [&](std::uint32_t owned, std::uint32_t owner) {
    corp_owners[owned].push_back(owner);
  };

  // internal structure: a cycle guarantees strong connectivity, chords set
  // the density
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const auto& m = members[k];
    const std::size_t s = m.size();
    for (std::size_t j = 0; j < s; ++j) add_corp_edge(m[j], m[(j + 1) % s]);
    const double target = std::min(cfg.internal_degree_target, static_cast<double>(s - 1));
    const auto extra = static_cast<std::size_t>(
        std::llround(static_cast<double>(s) * std::max(0.0, target - 1.0)));
    std::uniform_int_distribution<std::size_t> pick(0, s - 1);
    std::unordered_set<std::uint64_t> seen;
    for (std::size_t j = 0; j < s; ++j) seen.insert(m[j] * 0x100000000ULL + m[(j + 1) % s]);
    for (std::size_t e = 0; e < extra; ++e) {
      std::uint32_t u = m[pick(rng)], v = m[pick(rng)];
      if (u == v) continue;
      if (!seen.insert(u * 0x100000000ULL + v).second) continue;
      add_corp_edge(u, v);
    }
  }

  // 4. random component order; cross-component ownership only earlier -> later
  std::vector<std::size_t> order(n_components);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::uint32_t> corp_by_pos;
  corp_by_pos.reserve(cfg.n_corporations);
  std::vector<std::size_t> suffix_start(n_components + 1);
  std::vector<std::size_t> position_of(n_components);
  for (std::size_t p = 0; p < n_components; ++p) {
    position_of[order[p]] = p;
    suffix_start[p] = corp_by_pos.size();
    for (std::uint32_t v : members[order[p]]) corp_by_pos.push_back(v);
  }
  suffix_start[n_components] = corp_by_pos.size();

  std::poisson_distribution<std::size_t> n_corp_owner_dist(cfg.mean_corporate_owners);
  for (std::size_t p = 0; p < n_components; ++p) {
    const std::size_t from = suffix_start[p + 1];
    if (from >= corp_by_pos.size()) continue;  // last components own nothing upstream
    std::uniform_int_distribution<std::size_t> pick(from, corp_by_pos.size() - 1);
    for (std::uint32_t owned : members[order[p]]) {
      std::size_t k = n_corp_owner_dist(rng);
      std::unordered_set<std::uint32_t> chosen(corp_owners[owned].begin(),
                                               corp_owners[owned].end());
      for (std::size_t e = 0; e < k; ++e) {
        std::uint32_t owner = corp_by_pos[pick(rng)];
        if (chosen.insert(owner).second) add_corp_edge(owned, owner);
      }
    }
  }

  // 5. individual owners, at least one per corporation
  std::poisson_distribution<std::size_t> n_ind_owner_dist(
      std::max(0.0, cfg.mean_individual_owners - 1.0));
  std::uniform_int_distribution<std::size_t> pick_individual(0, cfg.n_individuals - 1);
  std::vector<std::vector<std::uint32_t>> individual_owners(cfg.n_corporations);
  for (std::size_t c = 0; c < cfg.n_corporations; ++c) {
    std::size_t k = 1 + n_ind_owner_dist(rng);
    std::unordered_set<std::uint32_t> chosen;
    for (std::size_t e = 0; e < k; ++e) {
      auto j = static_cast<std::uint32_t>(pick_individual(rng));
      if (chosen.insert(j).second) individual_owners[c].push_back(j);
    }
  }

  // 6. shares: random positive weights, individuals guaranteed at least the
  // floor of the row mass
  NetworkBuilder builder;
  for (std::size_t c = 0; c < cfg.n_corporations; ++c)
    builder.add_taxpayer(detail::corp_id(c), TaxpayerKind::Corporation);
  for (std::size_t j = 0; j < cfg.n_individuals; ++j)
    builder.add_taxpayer(detail::individual_id(j), TaxpayerKind::Individual);

  std::uniform_real_distribution<double> weight_dist(0.2, 1.0);
  for (std::size_t c = 0; c < cfg.n_corporations; ++c) {
    std::vector<double> wc(corp_owners[c].size()), wi(individual_owners[c].size());
    double corp_total = 0.0, ind_total = 0.0;
    for (double& w : wc) corp_total += (w = weight_dist(rng));
    for (double& w : wi) ind_total += (w = weight_dist(rng));
    double ind_mass =
        corp_total == 0.0
            ? 1.0
            : std::max(cfg.individual_share_floor,
                       ind_total / (ind_total + cfg.corporate_weight_scale * corp_total));
    const double corp_mass = 1.0 - ind_mass;
    for (std::size_t k = 0; k < wc.size(); ++k)
      builder.add_share(detail::corp_id(c), detail::corp_id(corp_owners[c][k]),
                        corp_mass * wc[k] / corp_total);
    for (std::size_t k = 0; k < wi.size(); ++k)
      builder.add_share(detail::corp_id(c), detail::individual_id(individual_owners[c][k]),
                        ind_mass * wi[k] / ind_total);
  }
  OwnershipNetwork net = builder.finalize();

  // 7. incomes: log-normal magnitudes, corporations negative with the
  // configured probability
  std::lognormal_distribution<double> magnitude(cfg.income_log_location, cfg.income_log_scale);
  std::bernoulli_distribution negative(cfg.negative_income_probability);
  IncomeVector incomes(net.size(), 0.0);
  for (std::size_t c = 0; c < cfg.n_corporations; ++c) {
    double value = magnitude(rng);
    incomes[*net.find(detail::corp_id(c))] = negative(rng) ? -value : value;
  }
  for (std::size_t j = 0; j < cfg.n_individuals; ++j)
    incomes[*net.find(detail::individual_id(j))] = magnitude(rng);

  return {std::move(net), std::move(incomes)};
}

/// Re-signs corporate incomes so that exactly round(fraction * n_S) of them
/// are negative; magnitudes are untouched. Individuals keep their sign.
inline IncomeVector perturb_incomes(const IncomeVector& incomes, const OwnershipNetwork& net,
                                    double negative_fraction, std::uint64_t seed) {
  if (negative_fraction < 0.0 || negative_fraction > 1.0)
    throw std::invalid_argument("negative_fraction must be in [0, 1]");
  std::vector<TaxpayerIndex> corps = net.corporations();
  std::mt19937_64 rng(seed);
  std::shuffle(corps.begin(), corps.end(), rng);
  const auto n_negative = static_cast<std::size_t>(
      std::llround(negative_fraction * static_cast<double>(corps.size())));
  IncomeVector out = incomes;
  for (std::size_t k = 0; k < corps.size(); ++k) {
    const double magnitude = std::abs(out[corps[k]]);
    out[corps[k]] = k < n_negative ? -magnitude : magnitude;
  }
  return out;
}

}  // namespace passtax
