#pragma once

#include <Eigen/Dense>

#include "mansel/core/sparse.hpp"
#include "mansel/solver/least_squares.hpp"

namespace mansel::solver {

struct ConvexOptions {
  int max_iters = 20000;
  double feas_tol = 1e-6;
  double kkt_tol = 1e-6;
  int check_interval = 25;
  int plateau_window = 50;
  double plateau_tol = 1e-8;
  double epsilon = 0.02;  // used when delta must be raised to stay feasible
  double relaxation = 1.8;  // primal-dual over-relaxation factor in (0,2)
};

/// Scaled KKT residuals of (xi, duals) for
///   min ||E xi||_1  s.t.  ||A xi - b||_2 <= delta,  D xi <= 0.
struct KktReport {
  double stationarity = 0.0;        // ||E'yE + A'yA + D'yD||_inf, scaled
  double l1_complementarity = 0.0;  // max_r (|u_r| - yE_r u_r), u = E xi
  double ball_complementarity = 0.0;
  double ineq_complementarity = 0.0;
  double ball_violation = 0.0;  // max(0, ||A xi - b|| - delta), scaled
  double ineq_violation = 0.0;  // max(0, max_i (D xi)_i), scaled
  bool passed = false;
  double worst() const;
};

struct ConvexSolution {
  Eigen::VectorXd xi;
  double objective = 0.0;  // ||E xi||_1
  double residual = 0.0;   // ||A xi - b||_2
  double max_ineq_violation = 0.0;
  int iterations = 0;
  bool converged = false;
  KktReport kkt;
  Eigen::VectorXd dual_e, dual_ball, dual_ineq;
  double delta_used = 0.0;
  bool delta_raised = false;
};

/// Minimizes ||E xi||_1 inside the residual ball and topology cone, by an
/// over-relaxed preconditioned primal-dual splitting: the L1 objective and
/// both constraint sets enter through their dual proxes, the primal step
/// is a plain gradient move through the stacked operator [E; A; D].
/// Columns are equilibrated and the step sizes come from a power-iteration
/// estimate of the scaled operator norm. Once the iterate separates closed
/// from open gaps, a polish solves the fixed-sign subproblem exactly (a
/// linear objective over the ball on the merge subspace has a closed form)
/// and the run converges when either path produces a full KKT certificate.
/// Infeasible delta is pre-checked against min ||A xi - b|| s.t. D xi <= 0
/// and raised (with a warning) when necessary.
ConvexSolution solve_sparse_selection(const TripletMatrix& E,
                                      const TripletMatrix& A,
                                      const std::vector<double>& b, double delta,
                                      const TripletMatrix& D,
                                      const ConvexOptions& opts = {});

/// KKT residuals at an arbitrary primal/dual point; used by the solver
/// itself and by the certification tests.
KktReport evaluate_kkt(const TripletMatrix& E, const TripletMatrix& A,
                       const std::vector<double>& b, double delta,
                       const TripletMatrix& D, const Eigen::VectorXd& xi,
                       const Eigen::VectorXd& dual_e,
                       const Eigen::VectorXd& dual_ball,
                       const Eigen::VectorXd& dual_ineq, double tol);

}  // namespace mansel::solver
