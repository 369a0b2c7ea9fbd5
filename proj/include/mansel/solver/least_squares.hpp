#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "mansel/core/sparse.hpp"

namespace mansel::solver {

using ColNamer = std::function<std::string(int)>;

Eigen::SparseMatrix<double> to_eigen(const TripletMatrix& m);
Eigen::VectorXd to_eigen(const std::vector<double>& v);

/// Sparse linear least squares through the normal equations. Requires full
/// column rank; a rank deficiency raises an Error naming the null
/// direction (via `namer` when provided, column numbers otherwise).
/// Postcondition: ||A^T (A xi - b)||_inf <= 1e-8 * ||A^T b||_inf.
Eigen::VectorXd solve_least_squares(const TripletMatrix& A,
                                    const std::vector<double>& b,
                                    const ColNamer& namer = {});

struct ConstrainedLsResult {
  Eigen::VectorXd xi;
  double residual = 0.0;            // ||A xi - b||_2
  std::vector<int> active;          // rows of D held as equalities
  Eigen::VectorXd multipliers;      // one per active row, >= 0 at optimum
  int iterations = 0;
};

/// min ||A xi - b||_2 subject to D xi <= 0, by a primal active-set method
/// over the (typically few) binding rows. A must have full column rank.
ConstrainedLsResult constrained_least_squares(const TripletMatrix& A,
                                              const std::vector<double>& b,
                                              const TripletMatrix& D,
                                              const ColNamer& namer = {});

/// delta = (1 + epsilon) * residual_lin, floored at 1e-6 to guard the
/// zero-residual degenerate case. epsilon < 0 is rejected.
double compute_delta(double residual_lin, double epsilon);

}  // namespace mansel::solver
