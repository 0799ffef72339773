#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace passtax {

using TaxpayerIndex = std::uint32_t;
inline constexpr TaxpayerIndex kNoIndex = std::numeric_limits<TaxpayerIndex>::max();

enum class TaxpayerKind : std::uint8_t { Corporation, Individual };

/// One ownership stake: `owner` holds `fraction` of some corporation.
struct Share {
  TaxpayerIndex owner;
  double fraction;
};

enum class Severity : std::uint8_t { Error, Warning };

struct Finding {
  Severity severity;
  std::string code;     // stable machine code, e.g. "ROW_SUM"
  std::string subject;  // taxpayer id(s) involved
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;

  std::size_t error_count() const {
    std::size_t n = 0;
    for (const auto& f : findings)
      if (f.severity == Severity::Error) ++n;
    return n;
  }
  bool pass() const { return error_count() == 0; }
};

/// Income per taxpayer, indexed by TaxpayerIndex. Currency units, signed.
using IncomeVector = std::vector<double>;

/// Immutable taxpayer network: a registry of corporations and individuals
/// plus the sparse share rows of every corporation. Rows are keyed by the
/// owned corporation and kept in sorted-owner order, so every traversal of
/// the network is deterministic.
class OwnershipNetwork {
 public:
  std::size_t size() const { return ids_.size(); }
  std::size_t corporation_count() const { return corporations_.size(); }
  std::size_t individual_count() const { return ids_.size() - corporations_.size(); }
  std::size_t link_count() const { return shares_.size(); }

  const std::string& id(TaxpayerIndex i) const { return ids_[i]; }
  TaxpayerKind kind(TaxpayerIndex i) const { return kinds_[i]; }
  bool is_corporation(TaxpayerIndex i) const { return kinds_[i] == TaxpayerKind::Corporation; }

  std::optional<TaxpayerIndex> find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Share row of taxpayer i. Empty for individuals.
  std::span<const Share> owners_of(TaxpayerIndex i) const {
    return {shares_.data() + row_offset_[i], row_offset_[i + 1] - row_offset_[i]};
  }

  /// All corporation indices, ascending.
  const std::vector<TaxpayerIndex>& corporations() const { return corporations_; }

  /// Structural problems discovered while assembling the network
  /// (unknown ids, shares attached to individuals, duplicate pairs).
  const std::vector<Finding>& build_findings() const { return build_findings_; }

  /// Copy with every corporate row rescaled to sum exactly to 1.
  OwnershipNetwork normalized() const {
    OwnershipNetwork out = *this;
    for (TaxpayerIndex c : out.corporations_) {
      double sum = 0.0;
      for (std::uint32_t k = out.row_offset_[c]; k < out.row_offset_[c + 1]; ++k)
        sum += out.shares_[k].fraction;
      if (sum > 0.0 && sum != 1.0) {
        for (std::uint32_t k = out.row_offset_[c]; k < out.row_offset_[c + 1]; ++k)
          out.shares_[k].fraction /= sum;
      }
    }
    return out;
  }

 private:
  friend class NetworkBuilder;

  std::vector<std::string> ids_;        // sorted ascending
  std::vector<TaxpayerKind> kinds_;
  std::vector<std::uint32_t> row_offset_;  // CSR over shares_, size()+1 entries
  std::vector<Share> shares_;
  std::vector<TaxpayerIndex> corporations_;
  std::unordered_map<std::string, TaxpayerIndex> index_;
  std::vector<Finding> build_findings_;
};

/// Accumulates taxpayers and share records, then freezes them into an
/// OwnershipNetwork. Ids may arrive in any order; indices are assigned by
/// sorted id at finalize time.
class NetworkBuilder {
 public:
  /// Registers a taxpayer. Re-adding with the same kind is a no-op;
  /// a conflicting kind throws.
  void add_taxpayer(std::string id, TaxpayerKind kind) {
    auto [it, inserted] = taxpayers_.emplace(std::move(id), kind);
    if (!inserted && it->second != kind)
      throw std::invalid_argument("conflicting kind for taxpayer " + it->first);
  }

  bool has(std::string_view id) const { return taxpayers_.count(std::string(id)) > 0; }

  void add_share(std::string owned, std::string owner, double fraction) {
    raw_.push_back({std::move(owned), std::move(owner), fraction});
  }

  OwnershipNetwork finalize() {
    OwnershipNetwork net;
    net.ids_.reserve(taxpayers_.size());
    for (auto& [id, kind] : taxpayers_) {  // std::map iterates in sorted order
      net.index_.emplace(id, static_cast<TaxpayerIndex>(net.ids_.size()));
      net.ids_.push_back(id);
      net.kinds_.push_back(kind);
    }
    for (TaxpayerIndex i = 0; i < net.ids_.size(); ++i)
      if (net.kinds_[i] == TaxpayerKind::Corporation) net.corporations_.push_back(i);

    // Resolve raw records; drop the unusable ones but keep a finding each.
    std::vector<std::vector<Share>> rows(net.ids_.size());
    for (const auto& r : raw_) {
      auto owned = net.find(r.owned);
      auto owner = net.find(r.owner);
      if (!owned || !owner) {
        net.build_findings_.push_back({Severity::Error, "UNKNOWN_ID",
                                       !owned ? r.owned : r.owner,
                                       "ownership record references unregistered taxpayer"});
        continue;
      }
      if (net.kinds_[*owned] == TaxpayerKind::Individual) {
        net.build_findings_.push_back({Severity::Error, "INDIVIDUAL_OWNED", r.owned,
                                       "individual appears as the owned party"});
        continue;
      }
      rows[*owned].push_back({*owner, r.fraction});
    }
    for (TaxpayerIndex i = 0; i < rows.size(); ++i) {
      auto& row = rows[i];
      std::sort(row.begin(), row.end(),
                [](const Share& a, const Share& b) { return a.owner < b.owner; });
      for (std::size_t k = 1; k < row.size(); ++k) {
        if (row[k].owner == row[k - 1].owner) {
          net.build_findings_.push_back(
              {Severity::Error, "DUPLICATE_SHARE",
               net.ids_[i] + "," + net.ids_[row[k].owner],
               "duplicate (owned, owner) pair"});
        }
      }
      row.erase(std::unique(row.begin(), row.end(),
                            [](const Share& a, const Share& b) { return a.owner == b.owner; }),
                row.end());
    }

    net.row_offset_.assign(net.ids_.size() + 1, 0);
    for (TaxpayerIndex i = 0; i < rows.size(); ++i)
      net.row_offset_[i + 1] = net.row_offset_[i] + static_cast<std::uint32_t>(rows[i].size());
    net.shares_.reserve(net.row_offset_.back());
    for (auto& row : rows)
      net.shares_.insert(net.shares_.end(), row.begin(), row.end());
    return net;
  }

 private:
  struct RawShare {
    std::string owned, owner;
    double fraction;
  };
  std::map<std::string, TaxpayerKind> taxpayers_;
  std::vector<RawShare> raw_;
};

/// Share matrix with the rows of a frozen corporation set replaced by unit
/// self-rows: those corporations withhold distribution. A cheap view over
/// the base network; the base is never modified.
class RestrictedShareView {
 public:
  RestrictedShareView(const OwnershipNetwork& net, std::span<const TaxpayerIndex> withheld)
      : net_(&net), withheld_(net.size(), 0) {
    for (TaxpayerIndex i : withheld) {
      if (i >= net.size() || !net.is_corporation(i))
        throw std::invalid_argument("restricted set must contain only corporations");
      withheld_[i] = 1;
    }
  }

  const OwnershipNetwork& network() const { return *net_; }
  bool withheld(TaxpayerIndex i) const { return withheld_[i] != 0; }

 private:
  const OwnershipNetwork* net_;
  std::vector<char> withheld_;
};

inline RestrictedShareView restrict_shares(const OwnershipNetwork& net,
                                           std::span<const TaxpayerIndex> s) {
  return RestrictedShareView(net, s);
}

/// Strictly negative corporations: the set whose rows must be withheld in
/// the next distribution round. Zero income still distributes.
inline std::vector<TaxpayerIndex> negative_set(const IncomeVector& incomes,
                                               const OwnershipNetwork& net) {
  if (incomes.size() != net.size())
    throw std::invalid_argument("income vector dimension mismatch");
  std::vector<TaxpayerIndex> out;
  for (TaxpayerIndex c : net.corporations())
    if (incomes[c] < 0.0) out.push_back(c);
  return out;
}

/// One round of distribution: every non-withheld corporation sends its
/// entire income to its owners, pro rata; withheld corporations and
/// individuals accumulate. Exactly the sparse product E * P_S, evaluated
/// in ascending index order.
inline IncomeVector distribute_step(const IncomeVector& incomes, const RestrictedShareView& view) {
  const OwnershipNetwork& net = view.network();
  if (incomes.size() != net.size())
    throw std::invalid_argument("income vector dimension mismatch");
  IncomeVector out = incomes;
  for (TaxpayerIndex c : net.corporations()) {
    if (view.withheld(c)) continue;
    const double amount = incomes[c];
    if (amount == 0.0) continue;
    out[c] -= amount;
    for (const Share& s : net.owners_of(c)) out[s.owner] += amount * s.fraction;
  }
  return out;
}

/// Structural validation against the share-matrix properties: fractions in
/// range, corporate rows stochastic within row_tol, every corporation has
/// owners, and no closed corporate set that never leaks income to
/// individuals.
inline ValidationReport validate_network(const OwnershipNetwork& net, double row_tol = 1e-9) {
  ValidationReport report;
  report.findings = net.build_findings();

  for (TaxpayerIndex c : net.corporations()) {
    auto row = net.owners_of(c);
    if (row.empty()) {
      report.findings.push_back(
          {Severity::Error, "NO_OWNERS", net.id(c), "corporation has no owners"});
      continue;
    }
    double sum = 0.0;
    for (const Share& s : row) {
      if (!(s.fraction >= 0.0 && s.fraction <= 1.0)) {
        report.findings.push_back({Severity::Error, "FRACTION_RANGE",
                                   net.id(c) + "," + net.id(s.owner),
                                   "share fraction outside [0, 1]"});
      }
      sum += s.fraction;
    }
    if (std::abs(sum - 1.0) > row_tol) {
      report.findings.push_back({Severity::Error, "ROW_SUM", net.id(c),
                                 "corporate shares sum to " + std::to_string(sum)});
    } else if (sum != 1.0) {
      report.findings.push_back({Severity::Warning, "ROW_SUM_INEXACT", net.id(c),
                                 "shares sum to 1 only within tolerance"});
    }
  }

  // lim Q^n = 0 holds iff every corporation can route income, through
  // positive corporate shares, to some corporation with a positive
  // individual share. Reverse BFS from the leaky rows finds the rest.
  std::vector<char> reaches_individuals(net.size(), 0);
  std::deque<TaxpayerIndex> queue;
  for (TaxpayerIndex c : net.corporations()) {
    for (const Share& s : net.owners_of(c)) {
      if (!net.is_corporation(s.owner) && s.fraction > 0.0) {
        reaches_individuals[c] = 1;
        queue.push_back(c);
        break;
      }
    }
  }
  // reverse adjacency: corp owner -> corps it owns
  std::vector<std::vector<TaxpayerIndex>> owned_by(net.size());
  for (TaxpayerIndex c : net.corporations())
    for (const Share& s : net.owners_of(c))
      if (net.is_corporation(s.owner) && s.fraction > 0.0) owned_by[s.owner].push_back(c);
  while (!queue.empty()) {
    TaxpayerIndex v = queue.front();
    queue.pop_front();
    for (TaxpayerIndex u : owned_by[v]) {
      if (!reaches_individuals[u]) {
        reaches_individuals[u] = 1;
        queue.push_back(u);
      }
    }
  }
  for (TaxpayerIndex c : net.corporations()) {
    if (!reaches_individuals[c] && !net.owners_of(c).empty()) {
      report.findings.push_back({Severity::Error, "ABSORBING_CYCLE", net.id(c),
                                 "income from this corporation can never reach individuals"});
    }
  }
  return report;
}

}  // namespace passtax
