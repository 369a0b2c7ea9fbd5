#include "mansel/solver/oracle.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mansel/core/types.hpp"
#include "mansel/solver/least_squares.hpp"
#include "mansel/solver/merge.hpp"

namespace mansel::solver {

namespace {

// Lexicographically next size-s combination over {0..k-1}; false at end.
bool next_combination(std::vector<int>& c, int k) {
  const int s = static_cast<int>(c.size());
  for (int i = s - 1; i >= 0; --i) {
    if (c[i] < k - (s - i)) {
      ++c[i];
      for (int j = i + 1; j < s; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

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

}  // namespace

OracleResult brute_force_l0(const TripletMatrix& E, const TripletMatrix& A,
                            const std::vector<double>& b, double delta,
                            const TripletMatrix& D, int k_max, double feas_tol) {
  const int k = E.rows;
  if (k > k_max)
    throw Error("brute_force_l0: " + std::to_string(k) + " hypotheses exceed k_max=" +
                std::to_string(k_max) + " (2^k enumeration refused)");
  if (!(delta > 0)) throw Error("brute_force_l0: delta must be positive");

  // Column pairs per hypothesis row.
  std::vector<std::pair<int, int>> pairs(k, {-1, -1});
  for (const auto& e : E.entries) {
    auto& p = pairs[e.row];
    if (e.value > 0)
      p.first = e.col;
    else if (e.value < 0)
      p.second = e.col;
  }
  for (int r = 0; r < k; ++r)
    if (pairs[r].first < 0 || pairs[r].second < 0 || pairs[r].first == pairs[r].second)
      throw Error("brute_force_l0: equivalence row " + std::to_string(r) +
                  " is not a (+1,-1) column pair");

  // Mergeable columns M (those E touches) and the fixed block F.
  std::vector<int> m_cols;
  for (const auto& p : pairs) {
    m_cols.push_back(p.first);
    m_cols.push_back(p.second);
  }
  std::sort(m_cols.begin(), m_cols.end());
  m_cols.erase(std::unique(m_cols.begin(), m_cols.end()), m_cols.end());
  const int m = static_cast<int>(m_cols.size());
  std::map<int, int> m_pos;
  for (int i = 0; i < m; ++i) m_pos[m_cols[i]] = i;

  const int n = A.cols;
  std::vector<int> f_cols;
  for (int c = 0; c < n; ++c)
    if (!m_pos.count(c)) f_cols.push_back(c);
  const int f = static_cast<int>(f_cols.size());

  // Split A into the fixed and mergeable column blocks.
  TripletMatrix Af_t, Am_t;
  Af_t.rows = A.rows;
  Af_t.cols = f;
  Am_t.rows = A.rows;
  Am_t.cols = m;
  {
    std::vector<int> col_to_f(n, -1);
    for (int i = 0; i < f; ++i) col_to_f[f_cols[i]] = i;
    for (const auto& e : A.entries) {
      const auto it = m_pos.find(e.col);
      if (it != m_pos.end())
        Am_t.add(e.row, it->second, e.value);
      else
        Af_t.add(e.row, col_to_f[e.col], e.value);
    }
  }
  const Eigen::SparseMatrix<double> Af = to_eigen(Af_t);
  const Eigen::SparseMatrix<double> Am = to_eigen(Am_t);
  const Eigen::VectorXd bv = to_eigen(b);

  // Schur complement onto the mergeable block: minimizing over x_F first
  // leaves r^2(m) = m'S m - 2 c_s'm + r0^2 with x_F = x_F0 - Y m.
  const Eigen::SparseMatrix<double> Gff = Eigen::SparseMatrix<double>(
      (Af.transpose() * Af).pruned());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Gff);
  if (ldlt.info() != Eigen::Success)
    throw Error("brute_force_l0: fixed block is rank-deficient (gauge unfixed?)");
  {
    const Eigen::VectorXd dvec = ldlt.vectorD();
    if (dvec.size() > 0 &&
        dvec.cwiseAbs().minCoeff() <= 1e-12 * dvec.cwiseAbs().maxCoeff())
      throw Error("brute_force_l0: fixed block is rank-deficient (gauge unfixed?)");
  }

  const Eigen::MatrixXd C =
      Eigen::MatrixXd(Eigen::SparseMatrix<double>(Af.transpose() * Am));
  Eigen::MatrixXd Y(f, m);
  for (int j = 0; j < m; ++j) Y.col(j) = ldlt.solve(C.col(j));
  const Eigen::VectorXd cf = Af.transpose() * bv;
  const Eigen::VectorXd xf0 = ldlt.solve(cf);
  const Eigen::MatrixXd S =
      Eigen::MatrixXd(Eigen::SparseMatrix<double>(Am.transpose() * Am)) -
      C.transpose() * Y;
  const Eigen::VectorXd cs = Am.transpose() * bv - C.transpose() * xf0;
  const double r0sq = bv.squaredNorm() - cf.dot(xf0);

  const Eigen::SparseMatrix<double> Ds = to_eigen(D);
  const double delta_sq = delta * delta * (1.0 + 1e-12);

  Eigen::VectorXd x_full(n);
  auto assemble_x = [&](const Eigen::VectorXd& m_vals) -> Eigen::VectorXd& {
    const Eigen::VectorXd xf = xf0 - Y * m_vals;
    for (int i = 0; i < f; ++i) x_full[f_cols[i]] = xf[i];
    for (int i = 0; i < m; ++i) x_full[m_cols[i]] = m_vals[i];
    return x_full;
  };

  auto evaluate_subset = [&](const std::vector<int>& subset, OracleResult& out) {
    UnionFind uf(m);
    for (int r : subset) uf.unite(m_pos.at(pairs[r].first), m_pos.at(pairs[r].second));
    std::vector<int> group(m, -1);
    int groups = 0;
    for (int i = 0; i < m; ++i) {
      const int root = uf.find(i);
      if (group[root] < 0) group[root] = groups++;
      group[i] = group[root];
    }

    Eigen::MatrixXd Sg = Eigen::MatrixXd::Zero(groups, groups);
    Eigen::VectorXd cg = Eigen::VectorXd::Zero(groups);
    for (int i = 0; i < m; ++i) {
      cg[group[i]] += cs[i];
      for (int j = 0; j < m; ++j) Sg(group[i], group[j]) += S(i, j);
    }
    bool schur_ok = true;
    Eigen::VectorXd mg = Eigen::VectorXd::Zero(groups);
    if (groups > 0) {
      const Eigen::LLT<Eigen::MatrixXd> llt(Sg);
      schur_ok = llt.info() == Eigen::Success;
      if (schur_ok) mg = llt.solve(cg);
    }
    if (schur_ok) {
      const double rsq = r0sq - cg.dot(mg);
      if (rsq > delta_sq) return false;

      Eigen::VectorXd m_vals(m);
      for (int i = 0; i < m; ++i) m_vals[i] = mg[group[i]];
      const Eigen::VectorXd& x = assemble_x(m_vals);

      bool topology_ok = true;
      if (D.rows > 0) {
        const Eigen::VectorXd w = Ds * x;
        topology_ok = w.maxCoeff() <= feas_tol;
      }
      if (topology_ok) {
        out.feasible = true;
        out.subset = subset;
        out.xi = x;
        out.residual = std::sqrt(std::max(0.0, rsq));
        return true;
      }
    }

    // D binds: fall back to the exact topology-constrained solve on the
    // column-collapsed system.
    MergeSet merges;
    std::map<int, std::vector<int>> by_root;
    for (int i = 0; i < m; ++i)
      by_root[uf.find(i)].push_back(m_cols[i]);
    for (auto& [root, cols] : by_root) {
      if (cols.size() < 2) continue;
      merges.classes.push_back(cols);
    }
    std::vector<int> col_map;
    const int reduced = build_column_map(n, merges, col_map);
    TripletMatrix Ar = A;
    Ar.cols = reduced;
    for (auto& e : Ar.entries) e.col = col_map[e.col];
    TripletMatrix Dr = D;
    Dr.cols = reduced;
    for (auto& e : Dr.entries) e.col = col_map[e.col];
    const ConstrainedLsResult r = constrained_least_squares(Ar, b, Dr);
    if (r.residual * r.residual > delta_sq) return false;
    out.feasible = true;
    out.subset = subset;
    out.xi.resize(n);
    for (int c = 0; c < n; ++c) out.xi[c] = r.xi[col_map[c]];
    out.residual = r.residual;
    return true;
  };

  OracleResult out;
  for (int size = k; size >= 0; --size) {
    std::vector<int> subset(size);
    std::iota(subset.begin(), subset.end(), 0);
    do {
      if (evaluate_subset(subset, out)) return out;
    } while (size > 0 && next_combination(subset, k));
  }
  out.feasible = false;
  return out;
}

}  // namespace mansel::solver
