#include "mansel/solver/least_squares.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <map>

#include "mansel/core/log.hpp"
#include "mansel/core/types.hpp"

namespace mansel::solver {

Eigen::SparseMatrix<double> to_eigen(const TripletMatrix& m) {
  std::vector<Eigen::Triplet<double>> ts;
  ts.reserve(m.entries.size());
  for (const auto& e : m.entries) ts.emplace_back(e.row, e.col, e.value);
  Eigen::SparseMatrix<double> s(m.rows, m.cols);
  s.setFromTriplets(ts.begin(), ts.end());
  return s;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

namespace {

std::string name_col(const ColNamer& namer, int col) {
  return namer ? namer(col) : "col " + std::to_string(col);
}

/// Describe an (approximate) null direction by its dominant components.
std::string describe_null_direction(const Eigen::VectorXd& v, const ColNamer& namer) {
  const double peak = v.cwiseAbs().maxCoeff();
  std::string out;
  int listed = 0;
  for (int i = 0; i < v.size() && listed < 8; ++i) {
    if (std::fabs(v[i]) < 0.3 * peak) continue;
    if (!out.empty()) out += ", ";
    out += name_col(namer, i);
    ++listed;
  }
  return out.empty() ? "(no dominant component)" : out;
}

}  // namespace

Eigen::VectorXd solve_least_squares(const TripletMatrix& A,
                                    const std::vector<double>& b,
                                    const ColNamer& namer) {
  if (A.rows != static_cast<int>(b.size()))
    throw Error("least squares: b length does not match A rows");
  if (A.cols == 0) throw Error("least squares: empty system");

  const Eigen::SparseMatrix<double> As = to_eigen(A);
  const Eigen::VectorXd bv = to_eigen(b);
  const Eigen::SparseMatrix<double> G = (As.transpose() * As).pruned();
  const Eigen::VectorXd c = As.transpose() * bv;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(G);
  bool deficient = ldlt.info() != Eigen::Success;
  if (!deficient) {
    const Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    deficient = d.cwiseAbs().minCoeff() <= 1e-12 * dmax || dmax == 0.0;
  }
  if (deficient) {
    // Inverse iteration against the shifted system exposes the (near-)null
    // direction so the error can name what is unconstrained (the gauge).
    const double shift = 1e-10 * (G.diagonal().cwiseAbs().maxCoeff() + 1.0);
    Eigen::SparseMatrix<double> Gs = G;
    for (int i = 0; i < Gs.rows(); ++i) Gs.coeffRef(i, i) += shift;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> shifted(Gs);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(G.cols()).normalized();
    if (shifted.info() == Eigen::Success) {
      for (int it = 0; it < 8; ++it) {
        v = shifted.solve(v);
        const double n = v.norm();
        if (!(n > 0) || !std::isfinite(n)) break;
        v /= n;
      }
    }
    throw Error("least squares: rank-deficient system (unfixed gauge); null "
                "direction spans " + describe_null_direction(v, namer));
  }

  Eigen::VectorXd xi = ldlt.solve(c);
  // One step of iterative refinement on the normal equations.
  xi += ldlt.solve(c - G * xi);

  const double grad = (As.transpose() * (As * xi - bv)).cwiseAbs().maxCoeff();
  const double scale = std::max(c.cwiseAbs().maxCoeff(), 1e-300);
  if (grad > 1e-8 * scale)
    log::warn("least squares: normal-equation residual " + std::to_string(grad) +
              " above contract (" + std::to_string(1e-8 * scale) + ")");
  return xi;
}

double compute_delta(double residual_lin, double epsilon) {
  if (epsilon < 0) throw Error("compute_delta: epsilon must be >= 0");
  if (residual_lin < 0) throw Error("compute_delta: residual must be >= 0");
  constexpr double kFloor = 1e-6;
  if (residual_lin < kFloor) return kFloor;
  return (1.0 + epsilon) * residual_lin;
}

ConstrainedLsResult constrained_least_squares(const TripletMatrix& A,
                                              const std::vector<double>& b,
                                              const TripletMatrix& D,
                                              const ColNamer& namer) {
  const Eigen::SparseMatrix<double> As = to_eigen(A);
  const Eigen::VectorXd bv = to_eigen(b);
  const Eigen::SparseMatrix<double> G = (As.transpose() * As).pruned();
  const Eigen::VectorXd c = As.transpose() * bv;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(G);
  bool deficient = ldlt.info() != Eigen::Success;
  if (!deficient) {
    const Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    deficient = dmax == 0.0 || d.cwiseAbs().minCoeff() <= 1e-12 * dmax;
  }
  if (deficient) {
    solve_least_squares(A, b, namer);  // raises the descriptive gauge error
    throw Error("constrained least squares: rank-deficient system");
  }

  const Eigen::VectorXd x_unc = ldlt.solve(c);

  ConstrainedLsResult res;
  res.xi = x_unc;
  if (D.rows == 0) {
    res.residual = (As * res.xi - bv).norm();
    return res;
  }

  const Eigen::SparseMatrix<double> Ds = to_eigen(D);
  constexpr double kTol = 1e-9;
  const Eigen::VectorXd w_unc = Ds * x_unc;

  // Per constraint row r, cache g_r = G^{-1} d_r and h_r = D g_r (the
  // Schur column for r).
  struct RowCache {
    Eigen::VectorXd g;
    Eigen::VectorXd h;
  };
  std::map<int, RowCache> cache;
  auto row_cache = [&](int r) -> const RowCache& {
    auto it = cache.find(r);
    if (it == cache.end()) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(G.rows());
      for (int col = 0; col < Ds.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator jt(Ds, col); jt; ++jt)
          if (jt.row() == r) d[col] = jt.value();
      RowCache rc;
      rc.g = ldlt.solve(d);
      rc.h = Ds * rc.g;
      it = cache.emplace(r, std::move(rc)).first;
    }
    return it->second;
  };

  // Primal active-set: grow the working set with the most violated row,
  // drop rows whose multiplier goes negative.
  std::vector<int> work;
  Eigen::VectorXd x = x_unc;
  Eigen::VectorXd lambda;
  const int max_iters = 10 * D.rows + 50;
  int iter = 0;
  for (; iter < max_iters; ++iter) {
    // Solve the equality-constrained problem on the working set.
    if (!work.empty()) {
      const int k = static_cast<int>(work.size());
      Eigen::MatrixXd S(k, k);
      Eigen::VectorXd rhs(k);
      for (int i = 0; i < k; ++i) {
        rhs[i] = w_unc[work[i]];
        const RowCache& rc = row_cache(work[i]);
        for (int j = 0; j < k; ++j) S(j, i) = rc.h[work[j]];
      }
      // Tiny ridge guards duplicated constraint rows.
      S.diagonal().array() += 1e-12 * (S.trace() / k + 1.0);
      lambda = S.ldlt().solve(rhs);
      x = x_unc;
      for (int i = 0; i < k; ++i) x -= lambda[i] * row_cache(work[i]).g;

      // Drop the most negative multiplier, if any.
      int drop = -1;
      double most_negative = -kTol;
      for (int i = 0; i < k; ++i) {
        if (lambda[i] < most_negative) {
          most_negative = lambda[i];
          drop = i;
        }
      }
      if (drop >= 0) {
        work.erase(work.begin() + drop);
        continue;
      }
    } else {
      x = x_unc;
      lambda.resize(0);
    }

    // Add the most violated constraint outside the working set.
    const Eigen::VectorXd w = Ds * x;
    int add = -1;
    double worst = kTol;
    for (int r = 0; r < D.rows; ++r) {
      if (std::find(work.begin(), work.end(), r) != work.end()) continue;
      if (w[r] > worst) {
        worst = w[r];
        add = r;
      }
    }
    if (add < 0) break;
    work.push_back(add);
  }
  if (iter >= max_iters)
    throw Error("constrained least squares: active-set did not settle");

  res.xi = x;
  res.residual = (As * x - bv).norm();
  res.active = work;
  res.multipliers = lambda;
  res.iterations = iter;
  return res;
}

}  // namespace mansel::solver
