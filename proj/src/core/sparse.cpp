#include "mansel/core/sparse.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

namespace mansel {

Csr Csr::from_triplets(const TripletMatrix& t) {
  Csr m;
  m.rows = t.rows;
  m.cols = t.cols;
  m.indptr.assign(static_cast<size_t>(t.rows) + 1, 0);

  for (const auto& e : t.entries) m.indptr[static_cast<size_t>(e.row) + 1]++;
  for (int r = 0; r < t.rows; ++r) m.indptr[r + 1] += m.indptr[r];

  std::vector<int> fill(m.indptr.begin(), m.indptr.end() - 1);
  m.indices.resize(t.entries.size());
  m.values.resize(t.entries.size());
  for (const auto& e : t.entries) {
    const int at = fill[e.row]++;
    m.indices[at] = e.col;
    m.values[at] = e.value;
  }

  // Sort each row by column and merge duplicates.
  std::vector<std::pair<int, double>> row_buf;
  size_t write = 0;
  std::vector<int> new_indptr(m.indptr.size(), 0);
  for (int r = 0; r < m.rows; ++r) {
    const int begin = m.indptr[r];
    const int end = m.indptr[r + 1];
    row_buf.clear();
    for (int i = begin; i < end; ++i) row_buf.emplace_back(m.indices[i], m.values[i]);
    std::sort(row_buf.begin(), row_buf.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    size_t row_start = write;
    for (const auto& [col, val] : row_buf) {
      if (write > row_start && col == m.indices[write - 1]) {
        m.values[write - 1] += val;
      } else {
        m.indices[write] = col;
        m.values[write] = val;
        ++write;
      }
    }
    new_indptr[r + 1] = static_cast<int>(write);
  }
  m.indices.resize(write);
  m.values.resize(write);
  m.indptr = std::move(new_indptr);
  return m;
}

Csr Csr::transposed() const {
  TripletMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.entries.reserve(values.size());
  for (int r = 0; r < rows; ++r)
    for (int k = indptr[r]; k < indptr[r + 1]; ++k)
      t.entries.push_back({indices[k], r, values[k]});
  return from_triplets(t);
}

std::vector<double> Csr::row_abs_sums() const {
  std::vector<double> s(rows, 0.0);
  for (int r = 0; r < rows; ++r)
    for (int k = indptr[r]; k < indptr[r + 1]; ++k) s[r] += std::abs(values[k]);
  return s;
}

std::vector<double> Csr::col_abs_sums() const {
  std::vector<double> s(cols, 0.0);
  for (size_t k = 0; k < indices.size(); ++k) s[indices[k]] += std::abs(values[k]);
  return s;
}

}  // namespace mansel
