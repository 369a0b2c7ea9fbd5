#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "mansel/core/rng.hpp"
#include "mansel/pipeline/pipeline.hpp"
#include "mansel/solver/extents.hpp"
#include "mansel/solver/l1_selection.hpp"
#include "mansel/solver/least_squares.hpp"
#include "mansel/solver/merge.hpp"
#include "mansel/solver/oracle.hpp"
#include "test_scenarios.hpp"

using namespace mansel;
using namespace mansel::solver;

namespace {

Eigen::MatrixXd dense_of(const TripletMatrix& m) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m.rows, m.cols);
  for (const auto& e : m.entries) d(e.row, e.col) += e.value;
  return d;
}

/// Two frames, one wall seen from both without a temporal link: two slots,
/// one hypothesis. gap_b shifts the second observation.
struct TinyInstance {
  graph::FactorGraph g;
  graph::ParameterIndex index;
  graph::SparseSystem sys;
  TripletMatrix Aw, E, D;
  std::vector<double> bw;
};

TinyInstance two_slot_instance(double d0, double d1, double t_step) {
  TinyInstance t;
  t.g.n_frames = 2;
  t.g.slots[0].push_back({Axis::X, -1, {0}});
  t.g.slots[0].push_back({Axis::X, -1, {1}});
  t.g.range_factors.push_back({0, Axis::X, 0, d0, 0});
  t.g.range_factors.push_back({1, Axis::X, 1, d1, 1});
  sim::OdometrySample step;
  step.t_axis = Vec3(t_step, 0, 0);
  t.g.odom_factors.push_back({0, step.t_axis});
  t.index = graph::ParameterIndex::from_graph(t.g);
  t.sys = graph::assemble_measurement_system(t.g, t.index);
  graph::apply_row_weights(t.sys, t.Aw, t.bw);
  t.E = graph::build_equivalence_matrix({{Axis::X, 0, 1}}, t.index);
  t.D = graph::build_topology_constraints(t.g, t.index);
  t.sys.E = t.E;
  t.sys.D = t.D;
  return t;
}

}  // namespace

TEST_CASE("least squares matches the dense pseudoinverse on random systems") {
  Rng rng(555);
  for (int trial = 0; trial < 20; ++trial) {
    TripletMatrix A;
    A.rows = 50;
    A.cols = 20;
    // Dense-ish random triplets plus a diagonal to keep full column rank.
    for (int c = 0; c < A.cols; ++c) A.add(c, c, 2.0 + rng.uniform());
    for (int i = 0; i < 300; ++i)
      A.add(static_cast<int>(rng.uniform_index(A.rows)),
            static_cast<int>(rng.uniform_index(A.cols)), rng.uniform(-1, 1));
    std::vector<double> b(A.rows);
    for (auto& v : b) v = rng.uniform(-2, 2);

    const Eigen::VectorXd xi = solve_least_squares(A, b);
    const Eigen::MatrixXd Ad = dense_of(A);
    const Eigen::VectorXd bd = to_eigen(b);
    const Eigen::VectorXd want =
        Ad.colPivHouseholderQr().solve(bd);
    CHECK((xi - want).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("zero-noise loop data solves with negligible residual") {
  const auto sc = testing::make_loop_scenario(3, testing::LoopOptions{});
  const auto R = pipeline::run_pipeline(sc, pipeline::Stage::LeastSquares);
  CHECK(R.residual_ls <= 1e-9);
}

TEST_CASE("compute_delta applies the relative slack with a floor") {
  CHECK(compute_delta(1.0, 0.02) == doctest::Approx(1.02));
  CHECK(compute_delta(0.0, 0.02) == doctest::Approx(1e-6));
  CHECK(compute_delta(5.0, 0.0) == doctest::Approx(5.0));
  CHECK_THROWS_AS(compute_delta(1.0, -0.1), Error);
}

TEST_CASE("selection with no hypotheses returns a feasible zero-objective point") {
  auto t = two_slot_instance(2.0, 1.0, 1.0);
  TripletMatrix E_empty;
  E_empty.rows = 0;
  E_empty.cols = t.index.dim();
  const auto sol = solve_sparse_selection(E_empty, t.Aw, t.bw, 0.5, t.D);
  CHECK(sol.converged);
  CHECK(sol.objective == 0.0);
  CHECK(sol.residual <= 0.5 * (1 + 1e-9));
  CHECK(sol.max_ineq_violation <= 1e-6);
}

TEST_CASE("a true equivalence closes to zero gap under a generous delta") {
  // Both frames see the same wall; the offsets disagree a little.
  auto t = two_slot_instance(2.0, 1.03, 1.0);
  const Eigen::VectorXd xi_ls = solve_least_squares(t.Aw, t.bw);
  const double r_lin = (dense_of(t.Aw) * xi_ls - to_eigen(t.bw)).norm();
  const double delta = compute_delta(std::max(r_lin, 0.05), 0.5);

  const auto sol = solve_sparse_selection(t.E, t.Aw, t.bw, delta, t.D);
  REQUIRE(sol.converged);
  const double gap = std::fabs(sol.xi[t.index.plane_col(Axis::X, 0)] -
                               sol.xi[t.index.plane_col(Axis::X, 1)]);
  CHECK(gap <= 1e-6);
  CHECK(sol.kkt.passed);
}

TEST_CASE("relaxation lower-bounds the oracle's selection cost") {
  for (uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    const auto sc = testing::make_random_loop(seed);
    const auto R = pipeline::run_pipeline(sc, pipeline::Stage::Convex);
    REQUIRE(R.system.E.rows <= 12);
    if (R.system.E.rows == 0) continue;

    TripletMatrix Aw;
    std::vector<double> bw;
    graph::apply_row_weights(R.system, Aw, bw);
    const auto oracle =
        brute_force_l0(R.system.E, Aw, bw, R.convex.delta_used, R.system.D);
    REQUIRE(oracle.feasible);

    const Eigen::VectorXd e_at_oracle = dense_of(R.system.E) * oracle.xi;
    CHECK(R.convex.objective <= e_at_oracle.lpNorm<1>() + 1e-6);
  }
}

TEST_CASE("objective is monotonically non-increasing in delta") {
  auto t = two_slot_instance(2.0, 1.4, 1.0);
  double last = std::numeric_limits<double>::infinity();
  for (double delta : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    const auto sol = solve_sparse_selection(t.E, t.Aw, t.bw, delta, t.D);
    REQUIRE(sol.converged);
    CHECK(sol.objective <= last + 1e-6);
    last = sol.objective;
  }
}

TEST_CASE("threshold accepts small gaps and rejects anything above mu") {
  graph::ParameterIndex index(0, 3, 0, 0);
  std::vector<graph::Hypothesis> hyps = {{Axis::X, 0, 1}, {Axis::X, 1, 2}};
  const auto E = graph::build_equivalence_matrix(hyps, index);

  Eigen::VectorXd xi(index.dim());
  SUBCASE("|gap| = 0.05 accepted under mu = 0.3") {
    xi << 1.00, 1.05, 2.00;
    const auto m = threshold_equivalences(E, xi, 0.3);
    CHECK(m.accepted == std::vector<int>{0});
    REQUIRE(m.classes.size() == 1);
    CHECK(m.classes[0] == std::vector<int>{0, 1});
  }
  SUBCASE("|gap| = 0.31 rejected") {
    xi << 1.00, 1.31, 5.00;
    const auto m = threshold_equivalences(E, xi, 0.3);
    CHECK(m.accepted.empty());
    CHECK(m.classes.empty());
  }
  SUBCASE("accepted pairs close transitively") {
    xi << 1.00, 1.05, 1.10;
    const auto m = threshold_equivalences(E, xi, 0.3);
    CHECK(m.accepted == std::vector<int>{0, 1});
    REQUIRE(m.classes.size() == 1);
    CHECK(m.classes[0] == std::vector<int>{0, 1, 2});
  }
}

TEST_CASE("collapsing every slot into one class averages the implied offsets") {
  auto t = two_slot_instance(2.0, 1.2, 1.0);
  MergeSet merges;
  merges.accepted = {0};
  merges.classes = {{t.index.plane_col(Axis::X, 0), t.index.plane_col(Axis::X, 1)}};
  const auto r = collapse_and_resolve(t.g, t.index, t.sys, merges);

  // Implied offsets: frame0 sees m at 0+2.0, frame1 at ~1+1.2; the anchored
  // unweighted least squares balances measurement and odometry rows.
  const double m0 = r.xi[t.index.plane_col(Axis::X, 0)];
  const double m1 = r.xi[t.index.plane_col(Axis::X, 1)];
  CHECK(m0 == m1);  // exact equality by reparameterization
  // Odometry row and both range rows share the error: the merged offset
  // moves off 2.0 toward the second implied offset.
  CHECK(m0 > 1.9);
  CHECK(m0 < 2.2);
}

TEST_CASE("no merges reproduces the plain least-squares solution") {
  auto t = two_slot_instance(2.0, 1.03, 1.0);
  const Eigen::VectorXd xi_ls = solve_least_squares(t.Aw, t.bw);
  const auto r = collapse_and_resolve(t.g, t.index, t.sys, MergeSet{});
  CHECK((r.xi - xi_ls).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("merging opposite facings is rejected") {
  auto t = two_slot_instance(2.0, 1.03, 1.0);
  t.g.slots[0][1].facing = +1;
  MergeSet merges;
  merges.classes = {{t.index.plane_col(Axis::X, 0), t.index.plane_col(Axis::X, 1)}};
  CHECK_THROWS_AS(collapse_and_resolve(t.g, t.index, t.sys, merges), Error);
}

TEST_CASE("a sign-flipped near-wall observation activates the topology rows") {
  // Two frames share one slot; noise flipped the second measured sign, so
  // its topology row caps the plane at the second pose. The doubled first
  // observation makes the unconstrained optimum land past the cap.
  TinyInstance t;
  t.g.n_frames = 2;
  t.g.slots[0].push_back({Axis::X, -1, {0, 1, 2}});
  t.g.range_factors.push_back({0, Axis::X, 0, +0.05, 0});
  t.g.range_factors.push_back({0, Axis::X, 0, +0.05, 1});
  t.g.range_factors.push_back({1, Axis::X, 0, -0.01, 2});
  t.g.odom_factors.push_back({0, Vec3(0.03, 0, 0)});
  t.index = graph::ParameterIndex::from_graph(t.g);
  t.sys = graph::assemble_measurement_system(t.g, t.index);
  t.sys.D = graph::build_topology_constraints(t.g, t.index);
  graph::apply_row_weights(t.sys, t.Aw, t.bw);

  // Unconstrained optimum violates the flipped row.
  const Eigen::VectorXd xi_unc = solve_least_squares(t.Aw, t.bw);
  const Eigen::VectorXd w_unc = dense_of(t.sys.D) * xi_unc;
  REQUIRE(w_unc.maxCoeff() > 1e-6);

  const auto r = collapse_and_resolve(t.g, t.index, t.sys, MergeSet{});
  const Eigen::VectorXd w = dense_of(t.sys.D) * r.xi;
  CHECK(w.maxCoeff() <= 1e-9);
  REQUIRE(!r.active.empty());
  for (Eigen::Index i = 0; i < r.multipliers.size(); ++i)
    CHECK(r.multipliers[i] >= -1e-9);
}

TEST_CASE("oracle: empty hypothesis set is feasible iff delta admits the residual") {
  // Disagreeing repeat observations make the minimum residual nonzero.
  auto t = two_slot_instance(2.0, 1.4, 1.0);
  t.g.range_factors.push_back({1, Axis::X, 0, 1.05, 2});
  t.g.slots[0][0].segment_ids.push_back(2);
  t.sys = graph::assemble_measurement_system(t.g, t.index);
  graph::apply_row_weights(t.sys, t.Aw, t.bw);
  t.D = graph::build_topology_constraints(t.g, t.index);

  TripletMatrix E_empty;
  E_empty.rows = 0;
  E_empty.cols = t.index.dim();
  const Eigen::VectorXd xi_ls = solve_least_squares(t.Aw, t.bw);
  const double r_lin = (dense_of(t.Aw) * xi_ls - to_eigen(t.bw)).norm();
  REQUIRE(r_lin > 1e-3);

  const auto ok = brute_force_l0(E_empty, t.Aw, t.bw, r_lin * 1.01, t.D);
  CHECK(ok.feasible);
  CHECK(ok.subset.empty());

  const auto bad = brute_force_l0(E_empty, t.Aw, t.bw, r_lin * 0.5, t.D);
  CHECK(!bad.feasible);
}

TEST_CASE("oracle refuses hypothesis counts beyond k_max") {
  graph::ParameterIndex index(0, 20, 0, 0);
  std::vector<graph::Hypothesis> hyps;
  for (int i = 0; i < 17; ++i) hyps.push_back({Axis::X, i, i + 1});
  const auto E = graph::build_equivalence_matrix(hyps, index);
  TripletMatrix A;
  A.rows = 20;
  A.cols = index.dim();
  for (int i = 0; i < 20; ++i) A.add(i, i, 1.0);
  CHECK_THROWS_AS(brute_force_l0(E, A, std::vector<double>(20, 0.0), 1.0, {}),
                  Error);
}

TEST_CASE("oracle finds exactly the true loop-closure pair") {
  // A ring loop with odometry bias: the duplicated start wall must merge,
  // the distinct walls must not.
  testing::LoopOptions o;
  o.bias_per_step = 0.004;
  o.bias_dir = 0.7;
  o.range_sigma = 0.01;
  const auto sc = testing::make_loop_scenario(21, o);
  const auto R = pipeline::run_pipeline(sc, pipeline::Stage::Convex);
  REQUIRE(R.system.E.rows >= 1);
  REQUIRE(R.system.E.rows <= 12);

  TripletMatrix Aw;
  std::vector<double> bw;
  graph::apply_row_weights(R.system, Aw, bw);
  const auto oracle =
      brute_force_l0(R.system.E, Aw, bw, R.convex.delta_used, R.system.D);
  REQUIRE(oracle.feasible);

  // The pipeline's mu-thresholded acceptance equals the oracle subset.
  CHECK(R.merges.accepted == oracle.subset);

  // Every accepted hypothesis joins slots of the same true plane; the
  // merged model hits the ground-truth plane count.
  CHECK(R.report.final_structures == static_cast<int>(R.world.planes.size()));
}

TEST_CASE("model extents: single class keeps its own extent, unions abut") {
  graph::FactorGraph g;
  g.n_frames = 1;
  g.slots[0].push_back({Axis::X, -1, {0}});
  g.slots[0].push_back({Axis::X, -1, {1}});
  const auto index = graph::ParameterIndex::from_graph(g);

  std::vector<SegmentObservation> segments(2);
  segments[0].segment_id = 0;
  segments[0].frame_index = 0;
  segments[0].axis = Axis::X;
  segments[0].extent = {0, 1, 0, 2.5};
  segments[1].segment_id = 1;
  segments[1].frame_index = 0;
  segments[1].axis = Axis::X;
  segments[1].extent = {1, 2, 0, 2.5};

  Eigen::VectorXd xi = Eigen::VectorXd::Zero(index.dim());
  xi[index.plane_col(Axis::X, 0)] = 3.0;
  xi[index.plane_col(Axis::X, 1)] = 3.0;

  SUBCASE("no merge: each slot keeps its extent") {
    const auto structures = model_extents(xi, index, g, MergeSet{}, segments);
    REQUIRE(structures.size() == 2);
    CHECK(structures[0].extent.u_min == 0.0);
    CHECK(structures[0].extent.u_max == 1.0);
  }
  SUBCASE("merged abutting segments take the union rectangle") {
    MergeSet merges;
    merges.classes = {{index.plane_col(Axis::X, 0), index.plane_col(Axis::X, 1)}};
    const auto structures = model_extents(xi, index, g, merges, segments);
    REQUIRE(structures.size() == 1);
    CHECK(structures[0].extent.u_min == 0.0);
    CHECK(structures[0].extent.u_max == 2.0);
    CHECK(structures[0].slots == std::vector<int>{0, 1});
  }
}

TEST_CASE("reconstructed wall extents track the true walls within 2 percent") {
  testing::LoopOptions o;
  o.range_sigma = 0.01;
  const auto sc = testing::make_loop_scenario(5, o);
  const auto R = pipeline::run_pipeline(sc, pipeline::Stage::Convex);

  // Simulator truth for extents: the union of what the sensor could
  // actually see of each plane along the true trajectory.
  auto visible_union = [&](size_t plane_idx) {
    const auto& plane = R.world.planes[plane_idx];
    const auto [ua, va] = plane_axes(plane.axis);
    Rect hull{};
    for (const auto& pose : R.truth.poses) {
      const auto ext = sim::visible_plane_extent(plane, pose, sc.sensor);
      if (!ext) continue;
      hull = Rect::hull(hull, ext->shifted(pose.p[axis_index(ua)],
                                           pose.p[axis_index(va)]));
    }
    return hull;
  };

  int checked = 0;
  for (const auto& s : R.structures) {
    if (s.axis == Axis::Z) continue;
    // Match to the nearest true wall.
    const LayoutPlane* best = nullptr;
    size_t best_idx = 0;
    double best_gap = 1e9;
    for (size_t p = 0; p < R.world.planes.size(); ++p) {
      const auto& plane = R.world.planes[p];
      if (plane.axis != s.axis || plane.facing != s.facing) continue;
      const double gap = std::fabs(plane.offset - s.offset);
      if (gap < best_gap) {
        best_gap = gap;
        best = &plane;
        best_idx = p;
      }
    }
    REQUIRE(best != nullptr);
    const Rect want = visible_union(best_idx);
    const double want_span = want.u_max - want.u_min;
    const double got_span = s.extent.u_max - s.extent.u_min;
    CHECK(std::fabs(got_span - want_span) <= 0.02 * want_span + 0.05);
    ++checked;
  }
  CHECK(checked >= 8);
}

TEST_CASE("every converged selection carries a passing KKT certificate") {
  for (uint64_t seed : {31ULL, 32ULL}) {
    const auto sc = testing::make_random_loop(seed);
    const auto R = pipeline::run_pipeline(sc, pipeline::Stage::Convex);
    REQUIRE(R.convex.converged);
    CHECK(R.convex.kkt.passed);
    CHECK(R.convex.kkt.stationarity <= 1e-6);
    CHECK(R.convex.kkt.ball_violation <= 1e-6);
    CHECK(R.convex.kkt.ineq_violation <= 1e-6);
    CHECK(R.convex.kkt.l1_complementarity <= 1e-6);
    CHECK(R.convex.kkt.ball_complementarity <= 1e-6);
    CHECK(R.convex.kkt.ineq_complementarity <= 1e-6);
  }
}

TEST_CASE("single-frame collapse averages the implied offsets exactly") {
  // One anchored frame, two slots merged: no odometry coupling, so the
  // merged offset is the plain mean of the per-observation implied offsets.
  TinyInstance t;
  t.g.n_frames = 1;
  t.g.slots[0].push_back({Axis::X, -1, {0}});
  t.g.slots[0].push_back({Axis::X, -1, {1}});
  t.g.range_factors.push_back({0, Axis::X, 0, 2.0, 0});
  t.g.range_factors.push_back({0, Axis::X, 1, 2.4, 1});
  t.index = graph::ParameterIndex::from_graph(t.g);
  t.sys = graph::assemble_measurement_system(t.g, t.index);

  MergeSet merges;
  merges.classes = {{t.index.plane_col(Axis::X, 0), t.index.plane_col(Axis::X, 1)}};
  const auto r = collapse_and_resolve(t.g, t.index, t.sys, merges);
  CHECK(r.xi[t.index.plane_col(Axis::X, 0)] == doctest::Approx(2.2).epsilon(1e-12));
  CHECK(r.xi[t.index.plane_col(Axis::X, 1)] == doctest::Approx(2.2).epsilon(1e-12));
}

TEST_CASE("an unattainable delta is raised with a warning flag") {
  // Minimum residual is ~0.035 here; ask for far less.
  auto t = two_slot_instance(2.0, 1.4, 1.0);
  t.g.range_factors.push_back({1, Axis::X, 0, 1.05, 2});
  t.g.slots[0][0].segment_ids.push_back(2);
  t.sys = graph::assemble_measurement_system(t.g, t.index);
  graph::apply_row_weights(t.sys, t.Aw, t.bw);
  t.D = graph::build_topology_constraints(t.g, t.index);

  const auto sol = solve_sparse_selection(t.E, t.Aw, t.bw, 1e-4, t.D);
  CHECK(sol.delta_raised);
  CHECK(sol.delta_used > 1e-4);
  CHECK(sol.residual <= sol.delta_used * (1 + 1e-9));
  CHECK(sol.converged);
}
