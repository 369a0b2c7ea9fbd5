#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "mansel/core/rng.hpp"
#include "mansel/graph/assemble.hpp"
#include "mansel/graph/factor_graph.hpp"
#include "mansel/solver/least_squares.hpp"

using namespace mansel;
using namespace mansel::graph;

namespace {

SegmentObservation seg(int id, int frame, Axis axis, double d, int facing = -1) {
  SegmentObservation s;
  s.segment_id = id;
  s.frame_index = frame;
  s.axis = axis;
  s.d = d;
  s.facing = facing;
  s.extent = {0, 1, 0, 1};
  return s;
}

CorrespondenceEdge edge(int a, int b, Axis axis) {
  return {a, b, axis, EdgeKind::Temporal};
}

std::vector<sim::OdometrySample> odo_steps(std::initializer_list<Vec3> ts) {
  std::vector<sim::OdometrySample> out;
  for (const auto& t : ts) {
    sim::OdometrySample s;
    s.t_axis = t;
    s.t_sensor = t;
    out.push_back(s);
  }
  return out;
}

Eigen::MatrixXd dense_of(const TripletMatrix& m) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m.rows, m.cols);
  for (const auto& e : m.entries) d(e.row, e.col) += e.value;
  return d;
}

}  // namespace

TEST_CASE("one wall seen twice with a temporal edge becomes one slot") {
  const auto segments = std::vector<SegmentObservation>{
      seg(0, 0, Axis::X, 2.0), seg(1, 1, Axis::X, 1.8)};
  const auto g = build_graph(segments, {edge(0, 1, Axis::X)},
                             odo_steps({Vec3(0.2, 0, 0)}));
  CHECK(g.n_frames == 2);
  CHECK(g.slots[0].size() == 1);
  CHECK(g.range_factors.size() == 2);
  CHECK(g.range_factors[0].slot == 0);
  CHECK(g.range_factors[1].slot == 0);
}

TEST_CASE("no edges: one slot per segment") {
  const auto segments = std::vector<SegmentObservation>{
      seg(0, 0, Axis::X, 2.0), seg(1, 1, Axis::X, 1.8), seg(2, 1, Axis::Y, 3.0)};
  const auto g =
      build_graph(segments, {}, odo_steps({Vec3(0.2, 0, 0)}));
  CHECK(g.slots[0].size() == 2);
  CHECK(g.slots[1].size() == 1);
  CHECK(g.total_slots() == 3);
}

TEST_CASE("edge chains merge transitively") {
  const auto segments = std::vector<SegmentObservation>{
      seg(0, 0, Axis::X, 2.0), seg(1, 1, Axis::X, 1.8), seg(2, 2, Axis::X, 1.6)};
  const auto g = build_graph(
      segments, {edge(0, 1, Axis::X), edge(1, 2, Axis::X)},
      odo_steps({Vec3(0.2, 0, 0), Vec3(0.2, 0, 0)}));
  REQUIRE(g.slots[0].size() == 1);
  CHECK(g.slots[0][0].segment_ids == std::vector<int>{0, 1, 2});
}

TEST_CASE("edges joining different axes are rejected") {
  const auto segments = std::vector<SegmentObservation>{
      seg(0, 0, Axis::X, 2.0), seg(1, 1, Axis::Y, 2.0)};
  CHECK_THROWS_AS(build_graph(segments, {edge(0, 1, Axis::X)},
                              odo_steps({Vec3(0.2, 0, 0)})),
                  Error);
}

TEST_CASE("parameter index round-trips every column") {
  const ParameterIndex index(5, 3, 2, 1);
  CHECK(index.dim() == 21);
  for (int c = 0; c < index.dim(); ++c) {
    const auto e = index.lookup(c);
    const int back = e.is_pose ? index.pose_col(e.frame, e.component)
                               : index.plane_col(e.axis, e.slot);
    CHECK(back == c);
  }
  CHECK(index.describe(0) == "p[0].x");
  CHECK(index.describe(15) == "m_x[0]");
  CHECK(index.describe(20) == "m_z[0]");
}

TEST_CASE("single frame, single plane solves to the anchored solution") {
  const auto segments = std::vector<SegmentObservation>{seg(0, 0, Axis::X, 2.0)};
  FactorGraph g;
  g.n_frames = 1;
  g.slots[0].push_back({Axis::X, -1, {0}});
  g.range_factors.push_back({0, Axis::X, 0, 2.0, 0});
  const auto index = ParameterIndex::from_graph(g);
  const auto sys = assemble_measurement_system(g, index);

  TripletMatrix Aw;
  std::vector<double> bw;
  apply_row_weights(sys, Aw, bw);
  const Eigen::VectorXd xi = solver::solve_least_squares(Aw, bw);
  CHECK(std::fabs(xi[0]) <= 1e-9);                      // p0.x
  CHECK(std::fabs(xi[index.plane_col(Axis::X, 0)] - 2.0) <= 1e-9);
}

TEST_CASE("row count is ranges + 3 odometry per step + 3 anchor rows") {
  const auto segments = std::vector<SegmentObservation>{
      seg(0, 0, Axis::X, 2.0), seg(1, 1, Axis::X, 1.8), seg(2, 1, Axis::Y, 3.0)};
  const auto g = build_graph(segments, {}, odo_steps({Vec3(0.2, 0, 0)}));
  const auto index = ParameterIndex::from_graph(g);
  const auto sys = assemble_measurement_system(g, index);
  CHECK(sys.A.rows == 3 + 3 * 1 + 3);
  CHECK(sys.b.size() == static_cast<size_t>(sys.A.rows));
  CHECK(sys.weights.size() == sys.b.size());

  // Row sparsity contract: 2 nonzeros for range and odometry rows, 1 for
  // anchors.
  std::vector<int> nnz(sys.A.rows, 0);
  for (const auto& e : sys.A.entries) nnz[e.row]++;
  for (int r = 0; r < 3 + 3; ++r) CHECK(nnz[r] == 2);
  for (int r = 6; r < 9; ++r) CHECK(nnz[r] == 1);
}

TEST_CASE("assembled system equals a dense hand construction on 5 frames") {
  // Walk along x past one x-wall (seen in every frame) and one y-wall.
  std::vector<SegmentObservation> segments;
  std::vector<CorrespondenceEdge> edges;
  for (int f = 0; f < 5; ++f) {
    segments.push_back(seg(2 * f, f, Axis::X, 4.0 - 0.5 * f));
    segments.push_back(seg(2 * f + 1, f, Axis::Y, 1.5, +1));
    if (f > 0) {
      edges.push_back(edge(2 * (f - 1), 2 * f, Axis::X));
      edges.push_back(edge(2 * (f - 1) + 1, 2 * f + 1, Axis::Y));
    }
  }
  const auto g = build_graph(
      segments, edges,
      odo_steps({Vec3(0.5, 0, 0), Vec3(0.5, 0, 0), Vec3(0.5, 0, 0), Vec3(0.5, 0, 0)}));
  const auto index = ParameterIndex::from_graph(g);
  REQUIRE(index.dim() == 15 + 2);
  const auto sys = assemble_measurement_system(g, index);

  TripletMatrix Aw;
  std::vector<double> bw;
  apply_row_weights(sys, Aw, bw);
  const Eigen::VectorXd xi = solver::solve_least_squares(Aw, bw);

  // Dense reference: identical rows written out longhand.
  const int rows = 10 + 12 + 3;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, index.dim());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  int r = 0;
  for (int f = 0; f < 5; ++f) {
    A(r, index.plane_col(Axis::X, 0)) = 1;
    A(r, 3 * f + 0) = -1;
    b(r++) = 4.0 - 0.5 * f;
    A(r, index.plane_col(Axis::Y, 0)) = 1;
    A(r, 3 * f + 1) = -1;
    b(r++) = 1.5;
  }
  for (int f = 0; f < 4; ++f) {
    for (int c = 0; c < 3; ++c) {
      A(r, 3 * (f + 1) + c) = 1;
      A(r, 3 * f + c) = -1;
      b(r++) = c == 0 ? 0.5 : 0.0;
    }
  }
  for (int c = 0; c < 3; ++c) {
    A(r, c) = 1e3;
    b(r++) = 0;
  }
  const Eigen::VectorXd xi_dense =
      (A.transpose() * A).ldlt().solve(A.transpose() * b);
  CHECK((xi - xi_dense).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("hypothesis generation: gap and facing gates") {
  FactorGraph g;
  g.n_frames = 1;
  g.slots[0].push_back({Axis::X, -1, {0}});
  g.slots[0].push_back({Axis::X, -1, {1}});
  const auto index = ParameterIndex::from_graph(g);

  std::vector<double> xi(index.dim(), 0.0);
  xi[index.plane_col(Axis::X, 0)] = 3.00;
  xi[index.plane_col(Axis::X, 1)] = 3.10;
  auto hyps = generate_hypotheses(g, index, xi, 0.5);
  REQUIRE(hyps.size() == 1);
  CHECK(hyps[0].slot_a == 0);
  CHECK(hyps[0].slot_b == 1);

  // Same offsets, opposite facing: no hypothesis.
  g.slots[0][1].facing = +1;
  hyps = generate_hypotheses(g, index, xi, 0.5);
  CHECK(hyps.empty());
}

TEST_CASE("hypothesis generation matches the quadratic pair oracle") {
  Rng rng(314);
  FactorGraph g;
  g.n_frames = 1;
  std::vector<double> offsets;
  for (int i = 0; i < 50; ++i) {
    const Axis axis = static_cast<Axis>(rng.uniform_index(3));
    const int facing = rng.uniform() < 0.5 ? -1 : +1;
    g.slots[axis_index(axis)].push_back({axis, facing, {i}});
  }
  const auto index = ParameterIndex::from_graph(g);
  std::vector<double> xi(index.dim(), 0.0);
  for (int a = 0; a < 3; ++a)
    for (size_t s = 0; s < g.slots[a].size(); ++s)
      xi[index.plane_col(static_cast<Axis>(a), static_cast<int>(s))] =
          rng.uniform(0, 8);

  const double max_gap = 1.0;
  const auto hyps = generate_hypotheses(g, index, xi, max_gap);

  size_t expected = 0;
  for (int a = 0; a < 3; ++a) {
    const auto& slots = g.slots[a];
    for (size_t i = 0; i < slots.size(); ++i)
      for (size_t j = i + 1; j < slots.size(); ++j) {
        if (slots[i].facing != slots[j].facing) continue;
        const double ga = xi[index.plane_col(static_cast<Axis>(a), (int)i)];
        const double gb = xi[index.plane_col(static_cast<Axis>(a), (int)j)];
        if (std::fabs(ga - gb) <= max_gap) ++expected;
      }
  }
  CHECK(hyps.size() == expected);
}

TEST_CASE("equivalence rows are +1/-1 pairs and annihilate constants") {
  FactorGraph g;
  g.n_frames = 2;
  g.slots[0].push_back({Axis::X, -1, {0}});
  g.slots[0].push_back({Axis::X, -1, {1}});
  const auto index = ParameterIndex::from_graph(g);
  const std::vector<Hypothesis> hyps = {{Axis::X, 0, 1}};
  const auto E = build_equivalence_matrix(hyps, index);
  REQUIRE(E.rows == 1);
  CHECK(E.cols == index.dim());

  const Eigen::MatrixXd Ed = dense_of(E);
  CHECK(Ed(0, index.plane_col(Axis::X, 0)) == 1.0);
  CHECK(Ed(0, index.plane_col(Axis::X, 1)) == -1.0);
  CHECK(Ed.row(0).sum() == 0.0);

  const auto E0 = build_equivalence_matrix({}, index);
  CHECK(E0.rows == 0);

  // E annihilates the truth when the slots really coincide.
  Eigen::VectorXd xi_true = Eigen::VectorXd::Zero(index.dim());
  xi_true[index.plane_col(Axis::X, 0)] = 4.2;
  xi_true[index.plane_col(Axis::X, 1)] = 4.2;
  CHECK((Ed * xi_true).norm() == 0.0);
}

TEST_CASE("topology rows carry the observation's side") {
  FactorGraph g;
  g.n_frames = 1;
  g.slots[0].push_back({Axis::X, -1, {0}});
  g.slots[0].push_back({Axis::X, +1, {1}});
  g.range_factors.push_back({0, Axis::X, 0, +3.0, 0});
  g.range_factors.push_back({0, Axis::X, 1, -3.0, 1});
  g.range_factors.push_back({0, Axis::X, 0, 1e-9, 0});  // sign undefined: skipped
  const auto index = ParameterIndex::from_graph(g);
  const auto D = build_topology_constraints(g, index);
  REQUIRE(D.rows == 2);

  const Eigen::MatrixXd Dd = dense_of(D);
  // d = +3: row asserts -(m - p) <= 0, i.e. m >= p.
  CHECK(Dd(0, index.plane_col(Axis::X, 0)) == -1.0);
  CHECK(Dd(0, index.pose_col(0, 0)) == +1.0);
  // d = -3: m <= p.
  CHECK(Dd(1, index.plane_col(Axis::X, 1)) == +1.0);
  CHECK(Dd(1, index.pose_col(0, 0)) == -1.0);
}

TEST_CASE("topology holds at the unconstrained optimum of exact data") {
  // Zero-noise corridor walk: the least-squares solution must satisfy D.
  std::vector<SegmentObservation> segments;
  std::vector<CorrespondenceEdge> edges;
  std::vector<sim::OdometrySample> odo;
  for (int f = 0; f < 8; ++f) {
    segments.push_back(seg(2 * f, f, Axis::X, 4.0 - 0.5 * f));
    segments.push_back(seg(2 * f + 1, f, Axis::Y, -1.5, +1));
    if (f > 0) {
      edges.push_back(edge(2 * (f - 1), 2 * f, Axis::X));
      edges.push_back(edge(2 * (f - 1) + 1, 2 * f + 1, Axis::Y));
      sim::OdometrySample s;
      s.t_axis = Vec3(0.5, 0, 0);
      odo.push_back(s);
    }
  }
  const auto g = build_graph(segments, edges, odo);
  const auto index = ParameterIndex::from_graph(g);
  const auto sys = assemble_measurement_system(g, index);
  TripletMatrix Aw;
  std::vector<double> bw;
  apply_row_weights(sys, Aw, bw);
  const Eigen::VectorXd xi = solver::solve_least_squares(Aw, bw);

  const auto D = build_topology_constraints(g, index);
  const Eigen::VectorXd w = dense_of(D) * xi;
  CHECK(w.maxCoeff() <= 1e-9);
}

TEST_CASE("without the anchor the gauge shows up as a named null space") {
  const auto segments = std::vector<SegmentObservation>{seg(0, 0, Axis::X, 2.0)};
  const auto g = build_graph(segments, {}, {});
  const auto index = ParameterIndex::from_graph(g);

  // Rebuild A without anchor rows.
  TripletMatrix A;
  A.rows = 1;
  A.cols = index.dim();
  A.add(0, index.plane_col(Axis::X, 0), 1.0);
  A.add(0, index.pose_col(0, 0), -1.0);
  auto namer = [&](int col) { return index.describe(col); };
  try {
    solver::solve_least_squares(A, {2.0}, namer);
    FAIL("expected a rank-deficiency error");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("rank-deficient") != std::string::npos);
    // The error names parameters, not bare column numbers.
    CHECK(what.find("p[0]") != std::string::npos);
  }
}

TEST_CASE("unanchored A annihilates the three canonical gauge shifts") {
  // Uniform translation of all poses and same-axis plane offsets is
  // invisible to range and odometry rows; only the anchor pins it.
  std::vector<SegmentObservation> segments;
  std::vector<CorrespondenceEdge> edges;
  std::vector<sim::OdometrySample> odo;
  for (int f = 0; f < 4; ++f) {
    segments.push_back(seg(3 * f, f, Axis::X, 2.0 - 0.1 * f));
    segments.push_back(seg(3 * f + 1, f, Axis::Y, 1.0, +1));
    segments.push_back(seg(3 * f + 2, f, Axis::Z, -1.2, +1));
    if (f > 0) {
      sim::OdometrySample s;
      s.t_axis = Vec3(0.1, 0.05, 0);
      odo.push_back(s);
    }
  }
  const auto g = build_graph(segments, edges, odo);
  const auto index = ParameterIndex::from_graph(g);
  const auto sys = assemble_measurement_system(g, index);

  // Strip the anchor rows (the last three).
  TripletMatrix A_free = sys.A;
  A_free.entries.erase(
      std::remove_if(A_free.entries.begin(), A_free.entries.end(),
                     [&](const Triplet& t) { return t.row >= sys.A.rows - 3; }),
      A_free.entries.end());

  const Eigen::MatrixXd Ad = dense_of(A_free);
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(index.dim());
    for (int f = 0; f < g.n_frames; ++f) shift[index.pose_col(f, axis)] = 1.0;
    for (int s = 0; s < index.slots(static_cast<Axis>(axis)); ++s)
      shift[index.plane_col(static_cast<Axis>(axis), s)] = 1.0;
    CHECK((Ad * shift).norm() <= 1e-12);
  }
}
