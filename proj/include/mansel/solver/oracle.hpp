#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mansel/core/sparse.hpp"

namespace mansel::solver {

struct OracleResult {
  bool feasible = false;      // some subset satisfies residual and topology
  std::vector<int> subset;    // enforced hypothesis rows (max cardinality,
                              // lexicographically smallest among ties)
  Eigen::VectorXd xi;
  double residual = 0.0;
};

/// Exhaustive L0 reference: tries all 2^k enforcement subsets of E's rows
/// (k <= k_max, refused otherwise), each solved as an equality-collapsed,
/// topology-constrained least squares; a subset is feasible when the
/// residual stays within delta and D xi <= feas_tol. Enumerates by
/// descending cardinality, lexicographic within, and returns the first
/// feasible subset. A and b are expected pre-weighted.
OracleResult brute_force_l0(const TripletMatrix& E, const TripletMatrix& A,
                            const std::vector<double>& b, double delta,
                            const TripletMatrix& D, int k_max = 16,
                            double feas_tol = 1e-6);

}  // namespace mansel::solver
