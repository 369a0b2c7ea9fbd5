#include "mansel/solver/l1_selection.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "mansel/core/log.hpp"
#include "mansel/core/types.hpp"
#include "mansel/kernels/kernels.hpp"
#include "mansel/solver/merge.hpp"

namespace mansel::solver {

namespace {

double max_abs(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

struct Stacked {
  Csr K, Kt;        // [E; A; D] and its transpose, column-equilibrated
  Csr Ec, Ac, Dc;   // individual blocks (original scale) for reporting
  int n = 0;        // columns
  int me = 0, ma = 0, md = 0;
  std::vector<double> colscale;  // xi = colscale .* x_tilde
};

Stacked build_stacked(const TripletMatrix& E, const TripletMatrix& A,
                      const TripletMatrix& D) {
  Stacked s;
  s.n = A.cols;
  s.me = E.rows;
  s.ma = A.rows;
  s.md = D.rows;

  TripletMatrix K;
  K.rows = s.me + s.ma + s.md;
  K.cols = s.n;
  K.entries.reserve(E.entries.size() + A.entries.size() + D.entries.size());
  for (const auto& e : E.entries) K.add(e.row, e.col, e.value);
  for (const auto& e : A.entries) K.add(s.me + e.row, e.col, e.value);
  for (const auto& e : D.entries) K.add(s.me + s.ma + e.row, e.col, e.value);

  Csr k_raw = Csr::from_triplets(K);
  s.colscale = k_raw.col_abs_sums();
  for (auto& c : s.colscale) c = c > 1e-12 ? 1.0 / std::sqrt(c) : 1.0;

  TripletMatrix K_eq = K;
  for (auto& e : K_eq.entries) e.value *= s.colscale[e.col];
  s.K = Csr::from_triplets(K_eq);
  s.Kt = s.K.transposed();

  s.Ec = Csr::from_triplets(E);
  s.Ac = Csr::from_triplets(A);
  s.Dc = Csr::from_triplets(D);
  return s;
}

/// Exact solve once the active structure is known. With the sign pattern
/// of the open gaps fixed, the objective is linear on the subspace where
/// the closed gaps are enforced, and minimizing a linear function over the
/// residual ball has a closed form. The KKT certificate is the arbiter: a
/// wrong structure guess simply fails to certify.
struct PolishOutcome {
  bool ok = false;
  Eigen::VectorXd x, ye, ya, yd;
  KktReport kkt;
};

PolishOutcome try_polish(const TripletMatrix& E, const TripletMatrix& A,
                         const std::vector<double>& b, double delta,
                         const TripletMatrix& D, const Eigen::VectorXd& u,
                         const std::vector<char>& closed, double kkt_tol) {
  PolishOutcome out;
  const int n = A.cols;
  const int k = E.rows;

  std::vector<int> open_rows;
  for (int r = 0; r < k; ++r)
    if (!closed[r]) open_rows.push_back(r);

  // Row -> (positive col, negative col). The polish exploits this pair
  // structure; decline gracefully for any other kind of E row (the plain
  // iteration handles those, just without the fast certificate).
  std::vector<std::pair<int, int>> pairs(k, {-1, -1});
  for (const auto& e : E.entries) {
    if (e.value > 0)
      pairs[e.row].first = e.col;
    else if (e.value < 0)
      pairs[e.row].second = e.col;
  }
  for (const auto& [ca, cb] : pairs)
    if (ca < 0 || cb < 0 || ca == cb) return out;

  MergeSet ms;
  {
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    for (int r = 0; r < k; ++r) {
      if (!closed[r]) continue;
      int ra = find(pairs[r].first);
      int rb = find(pairs[r].second);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
    for (auto& [root, members] : groups)
      if (members.size() >= 2) ms.classes.push_back(members);
  }

  std::vector<int> col_map;
  const int reduced = build_column_map(n, ms, col_map);

  TripletMatrix Ar = A;
  Ar.cols = reduced;
  for (auto& e : Ar.entries) e.col = col_map[e.col];
  const Eigen::SparseMatrix<double> As = to_eigen(Ar);
  const Eigen::VectorXd bv = to_eigen(b);
  const Eigen::SparseMatrix<double> G = (As.transpose() * As).pruned();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(G);
  if (ldlt.info() != Eigen::Success) return out;
  {
    const Eigen::VectorXd dv = ldlt.vectorD();
    if (dv.size() == 0 || dv.cwiseAbs().minCoeff() <= 1e-12 * dv.cwiseAbs().maxCoeff())
      return out;
  }

  const Eigen::VectorXd zeta_ls = ldlt.solve(As.transpose() * bv);
  const double r_ls = (As * zeta_ls - bv).norm();
  if (r_ls > delta * (1 + 1e-9)) return out;  // too many merges guessed

  // Linear objective of the open gaps, collapsed.
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (int r : open_rows) {
    const double s = u[r] > 0 ? 1.0 : -1.0;
    c[pairs[r].first] += s;
    c[pairs[r].second] -= s;
  }
  Eigen::VectorXd cr = Eigen::VectorXd::Zero(reduced);
  for (int i = 0; i < n; ++i) cr[col_map[i]] += c[i];

  Eigen::VectorXd zeta;
  double lambda = 0.0;
  if (cr.cwiseAbs().maxCoeff() <= 1e-12) {
    // Objective is constant on the subspace: any feasible point works.
    zeta = zeta_ls;
  } else {
    const Eigen::VectorXd h = ldlt.solve(cr);
    const double q = cr.dot(h);
    if (q <= 0) return out;
    const double slack = delta * delta - r_ls * r_ls;
    if (slack <= 0) return out;
    const double kappa = std::sqrt(slack / q);
    zeta = zeta_ls - kappa * h;  // ball multiplier recovered by the dual fit
  }

  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = zeta[col_map[i]];

  const Eigen::SparseMatrix<double> Afull = to_eigen(A);
  const Eigen::VectorXd v = Afull * x - bv;
  const double vnorm = v.norm();
  const bool ball_active = cr.cwiseAbs().maxCoeff() > 1e-12;

  // Dual fit: stationarity E' y_E + A' y_A (+ D' y_D = 0 here) = 0 with
  // y_E fixed to the sign on open rows and free in [-1,1] on closed rows,
  // y_A = lambda v / ||v||.
  const int ns = static_cast<int>(k - open_rows.size());
  std::vector<int> closed_rows;
  for (int r = 0; r < k; ++r)
    if (closed[r]) closed_rows.push_back(r);

  const int unknowns = ns + (ball_active ? 1 : 0);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(std::max(unknowns, 1));
  if (unknowns > 0) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, unknowns);
    for (int i = 0; i < ns; ++i) {
      const auto& [ca, cb] = pairs[closed_rows[i]];
      M(ca, i) += 1.0;
      M(cb, i) -= 1.0;
    }
    if (ball_active && vnorm > 0) M.col(ns) = (Afull.transpose() * v) / vnorm;
    z = M.colPivHouseholderQr().solve(-c);
  }

  Eigen::VectorXd ye = Eigen::VectorXd::Zero(k);
  for (int r : open_rows) ye[r] = u[r] > 0 ? 1.0 : -1.0;
  for (int i = 0; i < ns; ++i)
    ye[closed_rows[i]] = std::clamp(z[i], -1.0, 1.0);
  if (ball_active) lambda = std::max(0.0, z[ns]);

  Eigen::VectorXd ya = Eigen::VectorXd::Zero(A.rows);
  if (ball_active && vnorm > 0) ya = (lambda / vnorm) * v;
  Eigen::VectorXd yd = Eigen::VectorXd::Zero(D.rows);

  out.kkt = evaluate_kkt(E, A, b, delta, D, x, ye, ya, yd, kkt_tol);
  if (!out.kkt.passed) return out;
  out.ok = true;
  out.x = std::move(x);
  out.ye = std::move(ye);
  out.ya = std::move(ya);
  out.yd = std::move(yd);
  return out;
}

/// Power iteration on K~' K~ for the operator norm of the scaled stack.
double operator_norm(const Csr& K, const Csr& Kt) {
  std::vector<double> v(K.cols, 1.0), kv(K.rows), ktkv(K.cols);
  double norm = 1.0;
  for (int it = 0; it < 40; ++it) {
    kernels::spmv(K, v.data(), kv.data());
    kernels::spmv(Kt, kv.data(), ktkv.data());
    const double n = std::sqrt(kernels::nrm2sq(ktkv.data(), ktkv.size()));
    if (n < 1e-300) return 1.0;
    for (size_t i = 0; i < v.size(); ++i) v[i] = ktkv[i] / n;
    norm = std::sqrt(n);
  }
  return norm;
}

}  // namespace

double KktReport::worst() const {
  return std::max({stationarity, l1_complementarity, ball_complementarity,
                   ineq_complementarity, ball_violation, ineq_violation});
}

KktReport evaluate_kkt(const TripletMatrix& E, const TripletMatrix& A,
                       const std::vector<double>& b, double delta,
                       const TripletMatrix& D, const Eigen::VectorXd& xi,
                       const Eigen::VectorXd& dual_e,
                       const Eigen::VectorXd& dual_ball,
                       const Eigen::VectorXd& dual_ineq, double tol) {
  const Eigen::SparseMatrix<double> Es = to_eigen(E);
  const Eigen::SparseMatrix<double> As = to_eigen(A);
  const Eigen::SparseMatrix<double> Ds = to_eigen(D);
  const Eigen::VectorXd bv = to_eigen(b);
  const Eigen::Index n = As.cols();

  const Eigen::VectorXd u =
      E.rows > 0 ? Eigen::VectorXd(Es * xi) : Eigen::VectorXd(0);
  const Eigen::VectorXd v = As * xi - bv;
  const Eigen::VectorXd w =
      D.rows > 0 ? Eigen::VectorXd(Ds * xi) : Eigen::VectorXd(0);

  KktReport r;

  const Eigen::VectorXd ge = E.rows > 0 ? Eigen::VectorXd(Es.transpose() * dual_e)
                                        : Eigen::VectorXd(Eigen::VectorXd::Zero(n));
  const Eigen::VectorXd ga = As.transpose() * dual_ball;
  const Eigen::VectorXd gd = D.rows > 0 ? Eigen::VectorXd(Ds.transpose() * dual_ineq)
                                        : Eigen::VectorXd(Eigen::VectorXd::Zero(n));
  const double stat_scale = 1.0 + std::max({max_abs(ge), max_abs(ga), max_abs(gd)});
  r.stationarity = max_abs(ge + ga + gd) / stat_scale;

  // y_E must be an L1 subgradient at u: |y|<=1 with y'u = ||u||_1.
  double cs_l1 = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    cs_l1 = std::max(cs_l1, std::fabs(u[i]) - dual_e[i] * u[i]);
    cs_l1 = std::max(cs_l1, std::fabs(dual_e[i]) - 1.0);
  }
  r.l1_complementarity = cs_l1 / (1.0 + max_abs(u));

  const double vnorm = v.norm();
  const double ball_gap = delta * dual_ball.norm() - dual_ball.dot(v);
  r.ball_complementarity = std::fabs(ball_gap) / (1.0 + delta * dual_ball.norm());
  r.ball_violation = std::max(0.0, vnorm - delta) / (1.0 + delta);

  double cs_d = 0.0;
  double viol_d = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    cs_d = std::max(cs_d, std::fabs(dual_ineq[i] * w[i]));
    cs_d = std::max(cs_d, -dual_ineq[i]);  // y_D >= 0
    viol_d = std::max(viol_d, w[i]);
  }
  r.ineq_complementarity = cs_d / (1.0 + max_abs(dual_ineq));
  r.ineq_violation = std::max(0.0, viol_d) / (1.0 + max_abs(xi));

  r.passed = r.worst() <= tol;
  return r;
}

ConvexSolution solve_sparse_selection(const TripletMatrix& E,
                                      const TripletMatrix& A,
                                      const std::vector<double>& b, double delta,
                                      const TripletMatrix& D,
                                      const ConvexOptions& opts) {
  if (A.cols != E.cols && E.rows > 0)
    throw Error("sparse selection: E column count mismatch");
  if (D.rows > 0 && D.cols != A.cols)
    throw Error("sparse selection: D column count mismatch");
  if (!(delta > 0)) throw Error("sparse selection: delta must be positive");

  ConvexSolution sol;
  sol.delta_used = delta;

  // Feasibility guard: the tightest residual attainable under the
  // topology cone. If it exceeds delta the ball is empty; raise delta.
  const ConstrainedLsResult feas = constrained_least_squares(A, b, D);
  if (feas.residual > delta) {
    sol.delta_used = (1.0 + opts.epsilon) * feas.residual;
    sol.delta_raised = true;
    log::warn("sparse selection: delta " + std::to_string(delta) +
              " below attainable residual " + std::to_string(feas.residual) +
              "; raised to " + std::to_string(sol.delta_used));
  }
  delta = sol.delta_used;

  const Stacked st = build_stacked(E, A, D);
  const int n = st.n;

  // Trivial objective: any feasible point is optimal.
  if (st.me == 0) {
    sol.xi = feas.xi;
    sol.objective = 0.0;
    sol.residual = feas.residual;
    sol.max_ineq_violation = 0.0;
    sol.dual_e.resize(0);
    sol.dual_ball = Eigen::VectorXd::Zero(st.ma);
    sol.dual_ineq = Eigen::VectorXd::Zero(st.md);
    sol.kkt = evaluate_kkt(E, A, b, delta, D, sol.xi, sol.dual_e, sol.dual_ball,
                           sol.dual_ineq, opts.kkt_tol);
    sol.converged = sol.kkt.passed;
    return sol;
  }

  const double L = operator_norm(st.K, st.Kt);
  const double tau = 0.99 / L;
  const double sigma = 0.99 / L;

  // Primal iterate in equilibrated coordinates, warm-started from the
  // feasible least-squares point.
  std::vector<double> x(n), xbar(n);
  for (int j = 0; j < n; ++j) x[j] = feas.xi[j] / st.colscale[j];
  xbar = x;

  std::vector<double> y(st.K.rows, 0.0);
  std::vector<double> z(st.K.rows), kx(st.K.rows), kty(n);
  std::vector<double> xi_full(n);

  const auto& k = kernels::ops();
  const double* bw = b.data();

  auto current_xi = [&](const std::vector<double>& xt) {
    for (int j = 0; j < n; ++j) xi_full[j] = xt[j] * st.colscale[j];
    return Eigen::Map<const Eigen::VectorXd>(xi_full.data(), n);
  };

  std::vector<double> u(st.me), v(st.ma), w(st.md);
  auto objective_at = [&](const Eigen::VectorXd& xi) {
    if (st.me == 0) return 0.0;
    kernels::spmv(st.Ec, xi.data(), u.data());
    double o = 0.0;
    for (double g : u) o += std::fabs(g);
    return o;
  };

  double last_obj = objective_at(current_xi(x));
  int plateau_age = 0;
  int iter = 0;
  bool converged = false;
  int next_polish = 256;
  const double rho = opts.relaxation;

  std::vector<double> x_half(n);

  // Candidate active structures: close the s smallest gaps of the current
  // iterate, sweeping s from everything down to nothing. The certificate
  // rejects wrong guesses, so ordering noise only costs a factorization.
  auto attempt_polish = [&]() {
    const Eigen::VectorXd xi = current_xi(x);
    Eigen::VectorXd gaps(st.me);
    kernels::spmv(st.Ec, xi.data(), gaps.data());
    std::vector<int> order(st.me);
    for (int r = 0; r < st.me; ++r) order[r] = r;
    std::sort(order.begin(), order.end(), [&](int a, int c) {
      return std::fabs(gaps[a]) < std::fabs(gaps[c]);
    });
    for (int s = st.me; s >= 0; --s) {
      std::vector<char> closed(st.me, 0);
      for (int i = 0; i < s; ++i) closed[order[i]] = 1;
      const PolishOutcome p =
          try_polish(E, A, b, delta, D, gaps, closed, opts.kkt_tol);
      if (p.ok) {
        sol.kkt = p.kkt;
        sol.xi = p.x;
        sol.dual_e = p.ye;
        sol.dual_ball = p.ya;
        sol.dual_ineq = p.yd;
        return true;
      }
    }
    return false;
  };

  for (iter = 1; iter <= opts.max_iters; ++iter) {
    // Half step: x~ = x - tau K'y, dual prox at y + sigma K (2x~ - x),
    // then over-relax both by rho.
    kernels::spmv(st.Kt, y.data(), kty.data());
    x_half = x;
    k.axpy(-tau, kty.data(), x_half.data(), n);
    for (int j = 0; j < n; ++j) xbar[j] = 2.0 * x_half[j] - x[j];

    kernels::spmv(st.K, xbar.data(), kx.data());
    for (size_t i = 0; i < z.size(); ++i) z[i] = y[i] + sigma * kx[i];

    k.clamp(-1.0, 1.0, z.data(), st.me);
    {
      double* za = z.data() + st.me;
      k.axpy(-sigma, bw, za, st.ma);
      const double nrm = std::sqrt(kernels::nrm2sq(za, st.ma));
      const double scale = nrm > 0 ? std::max(0.0, 1.0 - sigma * delta / nrm) : 0.0;
      k.scal(scale, za, st.ma);
    }
    k.max0(z.data() + st.me + st.ma, st.md);

    for (int j = 0; j < n; ++j) x[j] = x[j] + rho * (x_half[j] - x[j]);
    for (size_t i = 0; i < y.size(); ++i) y[i] = y[i] + rho * (z[i] - y[i]);

    const bool checkpoint =
        iter % opts.check_interval == 0 || iter == opts.max_iters;
    const bool polish_due = iter >= next_polish || iter == opts.max_iters;
    if (!checkpoint && !polish_due) continue;

    if (checkpoint) {
      const Eigen::VectorXd xi = current_xi(x);
      const double obj = objective_at(xi);
      if (std::fabs(obj - last_obj) < opts.plateau_tol * (1.0 + std::fabs(obj)))
        plateau_age += opts.check_interval;
      else
        plateau_age = 0;
      last_obj = obj;

      if (plateau_age >= opts.plateau_window) {
        Eigen::VectorXd ye = Eigen::Map<const Eigen::VectorXd>(y.data(), st.me);
        Eigen::VectorXd ya =
            Eigen::Map<const Eigen::VectorXd>(y.data() + st.me, st.ma);
        Eigen::VectorXd yd =
            Eigen::Map<const Eigen::VectorXd>(y.data() + st.me + st.ma, st.md);
        const KktReport kkt =
            evaluate_kkt(E, A, b, delta, D, xi, ye, ya, yd, opts.kkt_tol);
        if (kkt.passed) {
          sol.kkt = kkt;
          sol.xi = xi;
          sol.dual_e = std::move(ye);
          sol.dual_ball = std::move(ya);
          sol.dual_ineq = std::move(yd);
          converged = true;
          break;
        }
      }
    }

    if (polish_due) {
      next_polish *= 2;
      if (attempt_polish()) {
        converged = true;
        break;
      }
    }
  }

  if (!converged) {
    // Report the raw iterate, walked toward the strictly feasible point
    // until both constraints hold (a tiny step when nearly feasible).
    Eigen::VectorXd xi = current_xi(x);
    kernels::spmv(st.Ac, xi.data(), v.data());
    k.axpy(-1.0, bw, v.data(), st.ma);
    double resid = std::sqrt(kernels::nrm2sq(v.data(), st.ma));
    double viol = 0.0;
    if (st.md > 0) {
      kernels::spmv(st.Dc, xi.data(), w.data());
      for (double wi : w) viol = std::max(viol, wi);
    }
    if (resid > delta || viol > opts.feas_tol) {
      double hi = 1.0, lo = 0.0;
      for (int it = 0; it < 60; ++it) {
        const double t = 0.5 * (lo + hi);
        const Eigen::VectorXd cand = xi + t * (feas.xi - xi);
        kernels::spmv(st.Ac, cand.data(), v.data());
        k.axpy(-1.0, bw, v.data(), st.ma);
        resid = std::sqrt(kernels::nrm2sq(v.data(), st.ma));
        viol = 0.0;
        if (st.md > 0) {
          kernels::spmv(st.Dc, cand.data(), w.data());
          for (double wi : w) viol = std::max(viol, wi);
        }
        if (resid <= delta && viol <= opts.feas_tol * 0.5)
          hi = t;
        else
          lo = t;
      }
      xi = xi + hi * (feas.xi - xi);
    }
    sol.xi = xi;
    sol.dual_e = Eigen::Map<const Eigen::VectorXd>(y.data(), st.me);
    sol.dual_ball = Eigen::Map<const Eigen::VectorXd>(y.data() + st.me, st.ma);
    sol.dual_ineq =
        Eigen::Map<const Eigen::VectorXd>(y.data() + st.me + st.ma, st.md);
    sol.kkt = evaluate_kkt(E, A, b, delta, D, sol.xi, sol.dual_e, sol.dual_ball,
                           sol.dual_ineq, opts.kkt_tol);
    log::warn("sparse selection: iteration cap reached (" +
              std::to_string(opts.max_iters) + "); worst KKT residual " +
              std::to_string(sol.kkt.worst()));
  }

  sol.objective = objective_at(sol.xi);
  kernels::spmv(st.Ac, sol.xi.data(), v.data());
  k.axpy(-1.0, bw, v.data(), st.ma);
  sol.residual = std::sqrt(kernels::nrm2sq(v.data(), st.ma));
  sol.max_ineq_violation = 0.0;
  if (st.md > 0) {
    kernels::spmv(st.Dc, sol.xi.data(), w.data());
    for (double wi : w) sol.max_ineq_violation = std::max(sol.max_ineq_violation, wi);
  }
  sol.iterations = std::min(iter, opts.max_iters);
  sol.converged = converged;
  return sol;
}

}  // namespace mansel::solver
