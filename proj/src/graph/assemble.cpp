#include "mansel/graph/assemble.hpp"

#include <cmath>

namespace mansel::graph {

SparseSystem assemble_measurement_system(const FactorGraph& g,
                                         const ParameterIndex& index,
                                         const AssemblyOptions& opts) {
  if (g.n_frames <= 0) throw Error("assemble: empty graph");

  const bool sigma_weighting = opts.weighting == AssemblyOptions::Weighting::Sigma;
  const double w_range =
      sigma_weighting && opts.range_sigma > 0 ? 1.0 / opts.range_sigma : 1.0;
  const double w_odom =
      sigma_weighting && opts.odom_sigma > 0 ? 1.0 / opts.odom_sigma : 1.0;

  SparseSystem sys;
  const int rows = static_cast<int>(g.range_factors.size()) +
                   3 * static_cast<int>(g.odom_factors.size()) + 3;
  sys.A.rows = rows;
  sys.A.cols = index.dim();
  sys.b.reserve(rows);
  sys.weights.reserve(rows);

  int row = 0;
  for (const auto& f : g.range_factors) {
    sys.A.add(row, index.plane_col(f.axis, f.slot), 1.0);
    sys.A.add(row, index.pose_col(f.frame, axis_index(f.axis)), -1.0);
    sys.b.push_back(f.d);
    sys.weights.push_back(w_range);
    ++row;
  }
  for (const auto& f : g.odom_factors) {
    for (int c = 0; c < 3; ++c) {
      sys.A.add(row, index.pose_col(f.frame + 1, c), 1.0);
      sys.A.add(row, index.pose_col(f.frame, c), -1.0);
      sys.b.push_back(f.t[c]);
      sys.weights.push_back(w_odom);
      ++row;
    }
  }
  for (int c = 0; c < 3; ++c) {
    sys.A.add(row, index.pose_col(0, c), 1.0);
    sys.b.push_back(0.0);
    sys.weights.push_back(opts.anchor_weight);
    ++row;
  }
  return sys;
}

std::vector<Hypothesis> generate_hypotheses(const FactorGraph& g,
                                            const ParameterIndex& index,
                                            const std::vector<double>& xi_init,
                                            double max_gap) {
  if (static_cast<int>(xi_init.size()) != index.dim())
    throw Error("generate_hypotheses: xi_init dimension mismatch");
  std::vector<Hypothesis> out;
  for (int a = 0; a < 3; ++a) {
    const Axis axis = static_cast<Axis>(a);
    const auto& slots = g.slots[a];
    for (size_t i = 0; i < slots.size(); ++i) {
      for (size_t j = i + 1; j < slots.size(); ++j) {
        if (slots[i].facing != slots[j].facing) continue;
        const double gap = xi_init[index.plane_col(axis, static_cast<int>(i))] -
                           xi_init[index.plane_col(axis, static_cast<int>(j))];
        if (std::fabs(gap) > max_gap) continue;
        out.push_back({axis, static_cast<int>(i), static_cast<int>(j)});
      }
    }
  }
  return out;
}

TripletMatrix build_equivalence_matrix(const std::vector<Hypothesis>& hypotheses,
                                       const ParameterIndex& index) {
  TripletMatrix E;
  E.rows = static_cast<int>(hypotheses.size());
  E.cols = index.dim();
  for (size_t r = 0; r < hypotheses.size(); ++r) {
    const auto& h = hypotheses[r];
    E.add(static_cast<int>(r), index.plane_col(h.axis, h.slot_a), +1.0);
    E.add(static_cast<int>(r), index.plane_col(h.axis, h.slot_b), -1.0);
  }
  return E;
}

TripletMatrix build_topology_constraints(const FactorGraph& g,
                                         const ParameterIndex& index) {
  TripletMatrix D;
  D.cols = index.dim();
  int row = 0;
  for (const auto& f : g.range_factors) {
    if (std::fabs(f.d) < 1e-6) continue;  // sign undefined, skip
    const double s = f.d > 0 ? 1.0 : -1.0;
    D.add(row, index.plane_col(f.axis, f.slot), -s);
    D.add(row, index.pose_col(f.frame, axis_index(f.axis)), s);
    ++row;
  }
  D.rows = row;
  return D;
}

void apply_row_weights(const SparseSystem& sys, TripletMatrix& weighted_A,
                       std::vector<double>& weighted_b) {
  weighted_A = sys.A;
  weighted_b = sys.b;
  for (auto& t : weighted_A.entries) t.value *= sys.weights[t.row];
  for (size_t r = 0; r < weighted_b.size(); ++r) weighted_b[r] *= sys.weights[r];
}

}  // namespace mansel::graph
