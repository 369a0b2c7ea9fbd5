#pragma once

#include <vector>

#include "mansel/graph/factor_graph.hpp"

namespace mansel::graph {

/// The stacked sparse systems over the parameter vector: measurement rows
/// A xi = b (with per-row weights), equivalence hypotheses E xi = 0, and
/// topology inequalities D xi <= 0.
struct SparseSystem {
  TripletMatrix A;
  std::vector<double> b;
  std::vector<double> weights;
  TripletMatrix E;
  TripletMatrix D;
};

struct AssemblyOptions {
  double anchor_weight = 1e3;
  enum class Weighting { Unit, Sigma };
  Weighting weighting = Weighting::Unit;  // plain unweighted stacking
  double range_sigma = 0.0;
  double odom_sigma = 0.0;
};

/// Builds A and b: one row per range factor (m_slot - p_i.axis = d), three
/// rows per odometry step (p_{i+1} - p_i = t), and three anchor rows fixing
/// p_0 = 0 to remove the translation gauge. Row order: ranges in
/// observation order, then odometry, then anchor.
SparseSystem assemble_measurement_system(const FactorGraph& g,
                                         const ParameterIndex& index,
                                         const AssemblyOptions& opts = {});

/// All unordered same-axis, same-facing slot pairs whose offsets at
/// xi_init differ by at most max_gap.
std::vector<Hypothesis> generate_hypotheses(const FactorGraph& g,
                                            const ParameterIndex& index,
                                            const std::vector<double>& xi_init,
                                            double max_gap);

/// One row per hypothesis: +1 on slot a's column, -1 on slot b's.
TripletMatrix build_equivalence_matrix(const std::vector<Hypothesis>& hypotheses,
                                       const ParameterIndex& index);

/// One row per range factor with |d| >= 1e-6:
/// -sign(d) * (m - p.axis) <= 0, i.e. the plane stays on the observed side.
TripletMatrix build_topology_constraints(const FactorGraph& g,
                                         const ParameterIndex& index);

/// Row weights folded into a copy of (A, b): returns weighted triplets and
/// right-hand side so downstream solvers treat all rows uniformly.
void apply_row_weights(const SparseSystem& sys, TripletMatrix& weighted_A,
                       std::vector<double>& weighted_b);

}  // namespace mansel::graph
