#include "mansel/solver/merge.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mansel/core/types.hpp"
#include "mansel/solver/least_squares.hpp"

namespace mansel::solver {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

std::pair<int, int> row_pair(const TripletMatrix& E, int row) {
  int ca = -1, cb = -1;
  for (const auto& e : E.entries) {
    if (e.row != row) continue;
    if (e.value > 0)
      ca = e.col;
    else if (e.value < 0)
      cb = e.col;
  }
  if (ca < 0 || cb < 0 || ca == cb)
    throw Error("equivalence row " + std::to_string(row) +
                " is not a (+1,-1) column pair");
  return {ca, cb};
}

}  // namespace

MergeSet threshold_equivalences(const TripletMatrix& E, const Eigen::VectorXd& xi,
                                double mu) {
  if (!(mu > 0)) throw Error("threshold_equivalences: mu must be positive");
  if (E.cols != xi.size())
    throw Error("threshold_equivalences: xi dimension mismatch");

  std::vector<double> gap(E.rows, 0.0);
  for (const auto& e : E.entries) gap[e.row] += e.value * xi[e.col];

  MergeSet out;
  UnionFind uf(E.cols);
  for (int r = 0; r < E.rows; ++r) {
    if (std::fabs(gap[r]) > mu) continue;
    out.accepted.push_back(r);
    const auto [ca, cb] = row_pair(E, r);
    uf.unite(ca, cb);
  }

  std::map<int, std::vector<int>> by_root;
  for (int c = 0; c < E.cols; ++c) by_root[uf.find(c)].push_back(c);
  for (auto& [root, members] : by_root) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end());
    out.classes.push_back(std::move(members));
  }
  std::sort(out.classes.begin(), out.classes.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

int build_column_map(int dim, const MergeSet& merges, std::vector<int>& col_map) {
  std::vector<int> rep(dim);
  std::iota(rep.begin(), rep.end(), 0);
  for (const auto& cls : merges.classes) {
    const int head = cls.front();
    for (int c : cls) rep[c] = head;
  }
  // Compress representatives to dense indices, preserving column order.
  col_map.assign(dim, -1);
  int next = 0;
  for (int c = 0; c < dim; ++c) {
    if (rep[c] == c) col_map[c] = next++;
  }
  for (int c = 0; c < dim; ++c) col_map[c] = col_map[rep[c]];
  return next;
}

ResolveResult collapse_and_resolve(const graph::FactorGraph& g,
                                   const graph::ParameterIndex& index,
                                   const graph::SparseSystem& sys,
                                   const MergeSet& merges) {
  // A merged class must be one physical plane: single axis, single facing.
  for (const auto& cls : merges.classes) {
    const auto head = index.lookup(cls.front());
    if (head.is_pose) throw Error("merge class contains a pose column");
    const auto& head_slot = g.slots[axis_index(head.axis)][head.slot];
    for (int c : cls) {
      const auto e = index.lookup(c);
      if (e.is_pose) throw Error("merge class contains a pose column");
      if (e.axis != head.axis)
        throw Error("merge class mixes axes (" + index.describe(cls.front()) +
                    " vs " + index.describe(c) + ")");
      const auto& slot = g.slots[axis_index(e.axis)][e.slot];
      if (slot.facing != head_slot.facing)
        throw Error("merge class joins opposite-facing slots (" +
                    index.describe(cls.front()) + " vs " + index.describe(c) + ")");
    }
  }

  TripletMatrix Aw;
  std::vector<double> bw;
  graph::apply_row_weights(sys, Aw, bw);

  std::vector<int> col_map;
  const int reduced = build_column_map(index.dim(), merges, col_map);

  TripletMatrix Ar = Aw;
  Ar.cols = reduced;
  for (auto& e : Ar.entries) e.col = col_map[e.col];
  TripletMatrix Dr = sys.D;
  Dr.cols = reduced;
  for (auto& e : Dr.entries) e.col = col_map[e.col];

  auto namer = [&](int col) {
    // Reduced columns map back to one or more original columns.
    std::string names;
    for (int c = 0; c < index.dim(); ++c) {
      if (col_map[c] != col) continue;
      if (!names.empty()) names += "=";
      names += index.describe(c);
    }
    return names.empty() ? "col " + std::to_string(col) : names;
  };

  const ConstrainedLsResult r = constrained_least_squares(Ar, bw, Dr, namer);

  ResolveResult out;
  out.xi.resize(index.dim());
  for (int c = 0; c < index.dim(); ++c) out.xi[c] = r.xi[col_map[c]];
  out.residual = r.residual;
  out.reduced_dim = reduced;
  out.active = r.active;
  out.multipliers = r.multipliers;
  return out;
}

}  // namespace mansel::solver
