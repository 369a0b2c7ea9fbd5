#pragma once

#include <cstdint>
#include <vector>

namespace mansel {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Sparse matrix in triplet form with an explicit shape. Triplets are kept
/// in assembly order; duplicate entries sum.
struct TripletMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Triplet> entries;

  void add(int r, int c, double v) { entries.push_back({r, c, v}); }
  bool empty() const { return rows == 0; }
};

/// Compressed sparse row storage used by the kernel-backed solvers.
struct Csr {
  int rows = 0;
  int cols = 0;
  std::vector<int> indptr;   // size rows+1
  std::vector<int> indices;  // column index per nonzero
  std::vector<double> values;

  static Csr from_triplets(const TripletMatrix& t);
  Csr transposed() const;
  size_t nnz() const { return values.size(); }

  /// Unpreconditioned infinity norm of each row (sum of |values|).
  std::vector<double> row_abs_sums() const;
  std::vector<double> col_abs_sums() const;
};

}  // namespace mansel
