#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "passtax/network.hpp"

namespace passtax {

/// One strongly connected component of the corporate subgraph.
struct Component {
  std::vector<TaxpayerIndex> members;  // ascending
  bool has_internal_edge = false;      // any positive share between members, self-shares included
};

/// SCCs in processing order: if some member of component A is owned by a
/// member of component B (A != B), A appears before B. Income flows
/// owned -> owner, so a component distributes only after every upstream
/// component has finished.
struct ComponentDecomposition {
  std::vector<Component> components;
  std::vector<std::uint32_t> component_of;  // by taxpayer index; kNoIndex for individuals
};

/// Tarjan over the corporate subgraph (arc u -> v iff corporation v holds a
/// positive share of corporation u). Explicit stack, linear time. Tarjan
/// emits components sink-first; the list is reversed so the stored order
/// satisfies the income-flow invariant.
inline ComponentDecomposition decompose(const OwnershipNetwork& net) {
  const std::size_t n = net.size();
  ComponentDecomposition out;
  out.component_of.assign(n, kNoIndex);

  constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> index(n, kUnvisited), lowlink(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<TaxpayerIndex> tarjan_stack;
  std::uint32_t next_index = 0;

  struct Frame {
    TaxpayerIndex v;
    std::size_t child;  // position within owners_of(v)
  };
  std::vector<Frame> frames;

  auto corp_successor = [&](TaxpayerIndex v, std::size_t k) -> TaxpayerIndex {
    const Share& s = net.owners_of(v)[k];
    return (net.is_corporation(s.owner) && s.fraction > 0.0) ? s.owner : kNoIndex;
  };

  for (TaxpayerIndex root : net.corporations()) {
    if (index[root] != kUnvisited) continue;
    frames.push_back({root, 0});
    index[root] = lowlink[root] = next_index++;
    tarjan_stack.push_back(root);
    on_stack[root] = 1;

    while (!frames.empty()) {
      Frame& f = frames.back();
      auto row = net.owners_of(f.v);
      bool descended = false;
      while (f.child < row.size()) {
        TaxpayerIndex w = corp_successor(f.v, f.child++);
        if (w == kNoIndex) continue;
        if (index[w] == kUnvisited) {
          index[w] = lowlink[w] = next_index++;
          tarjan_stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) lowlink[f.v] = std::min(lowlink[f.v], index[w]);
      }
      if (descended) continue;

      if (lowlink[f.v] == index[f.v]) {
        Component comp;
        TaxpayerIndex w;
        do {
          w = tarjan_stack.back();
          tarjan_stack.pop_back();
          on_stack[w] = 0;
          out.component_of[w] = static_cast<std::uint32_t>(out.components.size());
          comp.members.push_back(w);
        } while (w != f.v);
        std::sort(comp.members.begin(), comp.members.end());
        out.components.push_back(std::move(comp));
      }
      TaxpayerIndex finished = f.v;
      frames.pop_back();
      if (!frames.empty())
        lowlink[frames.back().v] = std::min(lowlink[frames.back().v], lowlink[finished]);
    }
  }

  std::reverse(out.components.begin(), out.components.end());
  for (std::uint32_t c = 0; c < out.components.size(); ++c)
    for (TaxpayerIndex v : out.components[c].members) out.component_of[v] = c;

  for (TaxpayerIndex u : net.corporations()) {
    for (const Share& s : net.owners_of(u)) {
      if (net.is_corporation(s.owner) && s.fraction > 0.0 &&
          out.component_of[u] == out.component_of[s.owner]) {
        out.components[out.component_of[u]].has_internal_edge = true;
      }
    }
  }
  return out;
}

struct NetworkStats {
  std::size_t individuals = 0;
  std::size_t corporations = 0;
  std::size_t links = 0;
  double fraction_links_to_individuals = 0.0;
  double mean_corporations_owned_per_corporation = 0.0;
  double mean_owners_per_corporation = 0.0;
  double mean_individual_owners_per_corporation = 0.0;
  double mean_corporate_owners_per_corporation = 0.0;
  // arc convention u -> v: in-degree of v counts what v owns, out-degree of
  // u counts u's owners
  std::map<std::size_t, std::size_t> corporate_in_degree_histogram;
  std::map<std::size_t, std::size_t> corporate_out_degree_histogram;
  std::map<std::size_t, std::size_t> scc_size_histogram;
  std::size_t scc_count = 0;
  std::size_t nontrivial_scc_count = 0;
  std::size_t largest_scc = 0;
  std::size_t weak_components_all = 0;       // individuals included
  std::size_t largest_weak_all = 0;
  std::size_t weak_components_corporate = 0;  // corporate subgraph only
  std::size_t largest_weak_corporate = 0;
  std::size_t trivial_component_count = 0;   // owns nothing, owned only by individuals
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), TaxpayerIndex{0});
  }
  TaxpayerIndex find(TaxpayerIndex x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(TaxpayerIndex a, TaxpayerIndex b) { parent_[find(a)] = find(b); }

 private:
  std::vector<TaxpayerIndex> parent_;
};

}  // namespace detail

inline NetworkStats network_stats(const OwnershipNetwork& net) {
  NetworkStats st;
  st.individuals = net.individual_count();
  st.corporations = net.corporation_count();
  st.links = net.link_count();

  std::vector<std::size_t> owned_count(net.size(), 0);  // entities this taxpayer owns
  std::size_t links_to_individuals = 0, links_to_corporations = 0;
  std::size_t individual_owner_links = 0, corporate_owner_links = 0;
  for (TaxpayerIndex c : net.corporations()) {
    for (const Share& s : net.owners_of(c)) {
      ++owned_count[s.owner];
      if (net.is_corporation(s.owner)) {
        ++links_to_corporations;
        ++corporate_owner_links;
      } else {
        ++links_to_individuals;
        ++individual_owner_links;
      }
    }
  }
  if (st.links > 0)
    st.fraction_links_to_individuals = static_cast<double>(links_to_individuals) / st.links;
  if (st.corporations > 0) {
    std::size_t owned_by_corps = 0;
    for (TaxpayerIndex c : net.corporations()) owned_by_corps += owned_count[c];
    st.mean_corporations_owned_per_corporation =
        static_cast<double>(owned_by_corps) / st.corporations;
    st.mean_owners_per_corporation = static_cast<double>(st.links) / st.corporations;
    st.mean_individual_owners_per_corporation =
        static_cast<double>(individual_owner_links) / st.corporations;
    st.mean_corporate_owners_per_corporation =
        static_cast<double>(corporate_owner_links) / st.corporations;
  }
  for (TaxpayerIndex c : net.corporations()) {
    ++st.corporate_in_degree_histogram[owned_count[c]];
    ++st.corporate_out_degree_histogram[net.owners_of(c).size()];
  }

  ComponentDecomposition dec = decompose(net);
  st.scc_count = dec.components.size();
  for (const Component& comp : dec.components) {
    ++st.scc_size_histogram[comp.members.size()];
    st.largest_scc = std::max(st.largest_scc, comp.members.size());
    if (comp.members.size() > 1) ++st.nontrivial_scc_count;
  }

  // Weak components, over everyone and over the corporate subgraph.
  detail::UnionFind all(net.size()), corp_only(net.size());
  for (TaxpayerIndex c : net.corporations()) {
    for (const Share& s : net.owners_of(c)) {
      all.unite(c, s.owner);
      if (net.is_corporation(s.owner)) corp_only.unite(c, s.owner);
    }
  }
  std::map<TaxpayerIndex, std::size_t> all_sizes, corp_sizes;
  for (TaxpayerIndex i = 0; i < net.size(); ++i) ++all_sizes[all.find(i)];
  for (TaxpayerIndex c : net.corporations()) ++corp_sizes[corp_only.find(c)];
  st.weak_components_all = all_sizes.size();
  for (auto& [root, sz] : all_sizes) st.largest_weak_all = std::max(st.largest_weak_all, sz);
  st.weak_components_corporate = corp_sizes.size();
  for (auto& [root, sz] : corp_sizes)
    st.largest_weak_corporate = std::max(st.largest_weak_corporate, sz);

  std::vector<char> owns_corp(net.size(), 0);
  for (TaxpayerIndex c : net.corporations())
    for (const Share& s : net.owners_of(c))
      if (net.is_corporation(s.owner)) owns_corp[s.owner] = 1;
  for (TaxpayerIndex c : net.corporations()) {
    if (owns_corp[c]) continue;
    bool only_individuals = !net.owners_of(c).empty();
    for (const Share& s : net.owners_of(c))
      if (net.is_corporation(s.owner)) only_individuals = false;
    if (only_individuals) ++st.trivial_component_count;
  }
  return st;
}

struct TrivialFilterResult {
  OwnershipNetwork net;
  std::size_t removed_corporations = 0;
  std::size_t removed_individuals = 0;
};

/// Drops corporations that own no corporation and are owned only by
/// individuals, plus the individuals those removals leave isolated. Solvers
/// do not need this; it exists for statistics parity on raw filings where
/// such one-shot corporations dominate.
inline TrivialFilterResult trivial_component_filter(const OwnershipNetwork& net) {
  std::vector<char> owns_corp(net.size(), 0);
  for (TaxpayerIndex c : net.corporations())
    for (const Share& s : net.owners_of(c))
      if (net.is_corporation(s.owner)) owns_corp[s.owner] = 1;

  std::vector<char> removed(net.size(), 0);
  std::size_t removed_corps = 0;
  for (TaxpayerIndex c : net.corporations()) {
    if (owns_corp[c] || net.owners_of(c).empty()) continue;
    bool only_individuals = true;
    for (const Share& s : net.owners_of(c))
      if (net.is_corporation(s.owner)) only_individuals = false;
    if (only_individuals) {
      removed[c] = 1;
      ++removed_corps;
    }
  }

  // Individuals that owned at least one removed corporation and own no
  // surviving corporation become isolated and go too.
  std::vector<char> owned_removed(net.size(), 0), owns_surviving(net.size(), 0);
  for (TaxpayerIndex c : net.corporations()) {
    for (const Share& s : net.owners_of(c)) {
      if (net.is_corporation(s.owner)) continue;
      (removed[c] ? owned_removed : owns_surviving)[s.owner] = 1;
    }
  }
  std::size_t removed_individuals = 0;
  for (TaxpayerIndex i = 0; i < net.size(); ++i) {
    if (!net.is_corporation(i) && owned_removed[i] && !owns_surviving[i]) {
      removed[i] = 1;
      ++removed_individuals;
    }
  }

  NetworkBuilder builder;
  for (TaxpayerIndex i = 0; i < net.size(); ++i)
    if (!removed[i]) builder.add_taxpayer(net.id(i), net.kind(i));
  for (TaxpayerIndex c : net.corporations()) {
    if (removed[c]) continue;
    for (const Share& s : net.owners_of(c))
      builder.add_share(net.id(c), net.id(s.owner), s.fraction);
  }
  return {builder.finalize(), removed_corps, removed_individuals};
}

}  // namespace passtax
