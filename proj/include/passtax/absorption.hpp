#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "passtax/errors.hpp"
#include "passtax/network.hpp"

namespace passtax {

/// Dense view of a designated transient corporation set T: the internal
/// share block Q_TT (row = owned, column = owner, self-shares on the
/// diagonal) and, per transient, the shares held by owners outside T.
struct TransientSystem {
  std::vector<TaxpayerIndex> transients;        // ascending
  Eigen::MatrixXd q;                            // |T| x |T|
  std::vector<std::vector<Share>> boundary;     // per transient row, sorted by owner
};

inline constexpr std::size_t kDefaultDenseCap = 10'000;

inline TransientSystem build_transient_system(const OwnershipNetwork& net,
                                              std::span<const TaxpayerIndex> transients,
                                              std::size_t dense_cap = kDefaultDenseCap) {
  if (transients.size() > dense_cap)
    throw SolveError(SolveErrorCode::CapExceeded,
                     "transient set of " + std::to_string(transients.size()) +
                         " exceeds dense cap " + std::to_string(dense_cap));
  TransientSystem sys;
  sys.transients.assign(transients.begin(), transients.end());
  std::sort(sys.transients.begin(), sys.transients.end());

  std::vector<std::int64_t> pos(net.size(), -1);
  for (std::size_t k = 0; k < sys.transients.size(); ++k) {
    TaxpayerIndex t = sys.transients[k];
    if (t >= net.size() || !net.is_corporation(t))
      throw std::invalid_argument("transient set must contain only corporations");
    pos[t] = static_cast<std::int64_t>(k);
  }

  const auto m = static_cast<Eigen::Index>(sys.transients.size());
  sys.q = Eigen::MatrixXd::Zero(m, m);
  sys.boundary.resize(sys.transients.size());
  for (std::size_t k = 0; k < sys.transients.size(); ++k) {
    for (const Share& s : net.owners_of(sys.transients[k])) {
      if (pos[s.owner] >= 0)
        sys.q(static_cast<Eigen::Index>(k), pos[s.owner]) += s.fraction;
      else
        sys.boundary[k].push_back(s);
    }
  }
  return sys;
}

namespace detail {

inline Eigen::PartialPivLU<Eigen::MatrixXd> factor_system(const Eigen::MatrixXd& q) {
  const auto m = q.rows();
  Eigen::MatrixXd iq = Eigen::MatrixXd::Identity(m, m) - q;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(iq);
  if (m > 0 && lu.rcond() < 1e-12)
    throw SolveError(SolveErrorCode::AbsorbingSubset,
                     "I - Q is numerically singular; the transient set contains a closed "
                     "subset with no leakage");
  return lu;
}

}  // namespace detail

/// Settles the transient set in one shot: solves x (I - Q_TT) = E_T by LU
/// on the transposed system, deposits x_t * share with every boundary
/// owner, and zeroes the transients. Equivalent to iterating distribution
/// over T to convergence.
inline void absorb(IncomeVector& incomes, const TransientSystem& sys) {
  const std::size_t m = sys.transients.size();
  if (m == 0) return;
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) rhs(static_cast<Eigen::Index>(k)) = incomes[sys.transients[k]];

  Eigen::MatrixXd iq_t =
      (Eigen::MatrixXd::Identity(sys.q.rows(), sys.q.cols()) - sys.q).transpose();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(iq_t);
  if (lu.rcond() < 1e-12)
    throw SolveError(SolveErrorCode::AbsorbingSubset,
                     "I - Q is numerically singular; the transient set contains a closed "
                     "subset with no leakage");
  Eigen::VectorXd throughput = lu.solve(rhs);

  for (std::size_t k = 0; k < m; ++k) incomes[sys.transients[k]] = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double x = throughput(static_cast<Eigen::Index>(k));
    if (x == 0.0) continue;
    for (const Share& s : sys.boundary[k]) incomes[s.owner] += x * s.fraction;
  }
}

/// The long-run split (I - Q)^{-1} R: entry (t, j) is the fraction of
/// transient t's income that ends up with boundary target j. Targets are
/// returned alongside, ascending. Rows sum to 1.
inline Eigen::MatrixXd absorption_matrix(const TransientSystem& sys,
                                         std::vector<TaxpayerIndex>& targets_out) {
  targets_out.clear();
  for (const auto& row : sys.boundary)
    for (const Share& s : row) targets_out.push_back(s.owner);
  std::sort(targets_out.begin(), targets_out.end());
  targets_out.erase(std::unique(targets_out.begin(), targets_out.end()), targets_out.end());

  std::vector<std::int64_t> col_of(targets_out.empty() ? 1 : targets_out.back() + 1, -1);
  for (std::size_t j = 0; j < targets_out.size(); ++j)
    col_of[targets_out[j]] = static_cast<std::int64_t>(j);

  const auto m = static_cast<Eigen::Index>(sys.transients.size());
  const auto b = static_cast<Eigen::Index>(targets_out.size());
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, b);
  for (std::size_t k = 0; k < sys.boundary.size(); ++k)
    for (const Share& s : sys.boundary[k])
      r(static_cast<Eigen::Index>(k), col_of[s.owner]) += s.fraction;

  auto lu = detail::factor_system(sys.q);
  return lu.solve(r);
}

}  // namespace passtax
