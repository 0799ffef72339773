// Shared helpers for the test suites: dense-matrix oracles that stay
// independent of the sparse implementation paths, plus small random
// instance builders.
#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "passtax/network.hpp"

namespace support {

using passtax::IncomeVector;
using passtax::NetworkBuilder;
using passtax::OwnershipNetwork;
using passtax::Share;
using passtax::TaxpayerIndex;
using passtax::TaxpayerKind;

inline std::string cid(std::size_t k) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "c%03zu", k);
  return buf;
}

inline std::string pid(std::size_t k) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "p%03zu", k);
  return buf;
}

/// Explicit dense P_S over all taxpayers: individuals and withheld
/// corporations get unit self-rows, everyone else their share row.
inline Eigen::MatrixXd dense_restricted(const OwnershipNetwork& net,
                                        const std::vector<TaxpayerIndex>& withheld) {
  const auto n = static_cast<Eigen::Index>(net.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  std::vector<char> held(net.size(), 0);
  for (TaxpayerIndex i : withheld) held[i] = 1;
  for (TaxpayerIndex i = 0; i < net.size(); ++i) {
    if (!net.is_corporation(i) || held[i]) {
      m(i, i) = 1.0;
    } else {
      for (const Share& s : net.owners_of(i)) m(i, s.owner) += s.fraction;
    }
  }
  return m;
}

/// One distribution round computed as a literal vector-matrix product.
inline IncomeVector dense_step(const OwnershipNetwork& net, const IncomeVector& incomes,
                               const std::vector<TaxpayerIndex>& withheld) {
  Eigen::RowVectorXd e(static_cast<Eigen::Index>(incomes.size()));
  for (std::size_t i = 0; i < incomes.size(); ++i) e(static_cast<Eigen::Index>(i)) = incomes[i];
  Eigen::RowVectorXd r = e * dense_restricted(net, withheld);
  IncomeVector out(incomes.size());
  for (std::size_t i = 0; i < incomes.size(); ++i) out[i] = r(static_cast<Eigen::Index>(i));
  return out;
}

/// Small random valid network: every corporation has 1-3 individual owners
/// (at least 10% of the row) and up to 3 corporate owners, cycles and
/// self-shares allowed.
inline OwnershipNetwork random_network(std::mt19937_64& rng, std::size_t n_corps,
                                       std::size_t n_inds) {
  NetworkBuilder builder;
  for (std::size_t i = 0; i < n_corps; ++i) builder.add_taxpayer(cid(i), TaxpayerKind::Corporation);
  for (std::size_t i = 0; i < n_inds; ++i) builder.add_taxpayer(pid(i), TaxpayerKind::Individual);

  std::uniform_real_distribution<double> weight(0.2, 1.0);
  std::uniform_int_distribution<std::size_t> pick_ind(0, n_inds - 1);
  for (std::size_t c = 0; c < n_corps; ++c) {
    std::vector<std::size_t> inds, corps;
    std::size_t n_io = 1 + rng() % 3;
    for (std::size_t k = 0; k < n_io; ++k) {
      std::size_t j = pick_ind(rng);
      if (std::find(inds.begin(), inds.end(), j) == inds.end()) inds.push_back(j);
    }
    std::size_t n_co = rng() % 4;  // may include c itself: direct self-shares are legal
    for (std::size_t k = 0; k < n_co && n_corps > 0; ++k) {
      std::size_t j = rng() % n_corps;
      if (std::find(corps.begin(), corps.end(), j) == corps.end()) corps.push_back(j);
    }
    std::vector<double> wi(inds.size()), wc(corps.size());
    double ti = 0, tc = 0;
    for (double& w : wi) ti += (w = weight(rng));
    for (double& w : wc) tc += (w = weight(rng));
    double ind_mass = corps.empty() ? 1.0 : std::max(0.1, ti / (ti + tc));
    for (std::size_t k = 0; k < inds.size(); ++k)
      builder.add_share(cid(c), pid(inds[k]), ind_mass * wi[k] / ti);
    for (std::size_t k = 0; k < corps.size(); ++k)
      builder.add_share(cid(c), cid(corps[k]), (1.0 - ind_mass) * wc[k] / tc);
  }
  return builder.finalize();
}

inline IncomeVector random_incomes(std::mt19937_64& rng, const OwnershipNetwork& net,
                                   double negative_fraction) {
  std::uniform_real_distribution<double> magnitude(10.0, 1000.0);
  std::bernoulli_distribution negative(negative_fraction);
  IncomeVector e(net.size(), 0.0);
  for (TaxpayerIndex i = 0; i < net.size(); ++i) {
    e[i] = magnitude(rng);
    if (net.is_corporation(i) && negative(rng)) e[i] = -e[i];
  }
  return e;
}

inline double sum(const IncomeVector& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

inline double sum_abs(const IncomeVector& v) {
  double s = 0;
  for (double x : v) s += std::abs(x);
  return s;
}

inline double l1_distance(const IncomeVector& a, const IncomeVector& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

/// The two-corporation mutual-ownership fixture used across suites:
/// c0 {c1: 0.5, p0: 0.5}, c1 {c0: 0.5, p1: 0.5}.
inline OwnershipNetwork mutual_half_network() {
  NetworkBuilder b;
  b.add_taxpayer("c0", TaxpayerKind::Corporation);
  b.add_taxpayer("c1", TaxpayerKind::Corporation);
  b.add_taxpayer("p0", TaxpayerKind::Individual);
  b.add_taxpayer("p1", TaxpayerKind::Individual);
  b.add_share("c0", "c1", 0.5);
  b.add_share("c0", "p0", 0.5);
  b.add_share("c1", "c0", 0.5);
  b.add_share("c1", "p1", 0.5);
  return b.finalize();
}

}  // namespace support
