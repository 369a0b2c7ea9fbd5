#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mansel/core/sparse.hpp"
#include "mansel/graph/assemble.hpp"

namespace mansel::solver {

/// Result of mu-thresholding the relaxed solution: the accepted hypothesis
/// rows and the transitive closure of their column pairs.
struct MergeSet {
  std::vector<int> accepted;               // E row indices, ascending
  std::vector<std::vector<int>> classes;   // merged column groups, size >= 2,
                                           // ordered by smallest member
};

/// Accepts hypothesis row r iff |(E xi)_r| <= mu; classes come from
/// union-find over the accepted rows' column pairs.
MergeSet threshold_equivalences(const TripletMatrix& E, const Eigen::VectorXd& xi,
                                double mu);

struct ResolveResult {
  Eigen::VectorXd xi;        // expanded: merged columns share one scalar
  double residual = 0.0;     // weighted ||A xi - b||_2
  int reduced_dim = 0;
  std::vector<int> active;   // binding topology rows
  Eigen::VectorXd multipliers;
};

/// Re-solves the measurement system with the accepted equivalences
/// enforced exactly (columns collapsed per class) subject to the topology
/// constraints. Classes mixing axes or facings are rejected.
ResolveResult collapse_and_resolve(const graph::FactorGraph& g,
                                   const graph::ParameterIndex& index,
                                   const graph::SparseSystem& sys,
                                   const MergeSet& merges);

/// Column collapse map for a merge set: identity except class members,
/// compressed to a dense numbering that preserves column order. Returns
/// the reduced dimension.
int build_column_map(int dim, const MergeSet& merges, std::vector<int>& col_map);

}  // namespace mansel::solver
