#include "mansel/graph/factor_graph.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace mansel::graph {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(size_t n) : parent(n) {
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
    parent[b] = a;  // smaller id wins: stable slot ordering
  }
};

}  // namespace

int FactorGraph::slot_of_segment(int segment_id, Axis axis) const {
  const auto& list = slots[axis_index(axis)];
  for (size_t s = 0; s < list.size(); ++s) {
    if (std::binary_search(list[s].segment_ids.begin(),
                           list[s].segment_ids.end(), segment_id))
      return static_cast<int>(s);
  }
  return -1;
}

ParameterIndex::ParameterIndex(int n_frames, int nx, int ny, int nz)
    : n_frames_(n_frames), slot_counts_{nx, ny, nz},
      dim_(3 * n_frames + nx + ny + nz) {}

ParameterIndex ParameterIndex::from_graph(const FactorGraph& g) {
  return ParameterIndex(g.n_frames, static_cast<int>(g.slots[0].size()),
                        static_cast<int>(g.slots[1].size()),
                        static_cast<int>(g.slots[2].size()));
}

int ParameterIndex::pose_col(int frame, int component) const {
  if (frame < 0 || frame >= n_frames_ || component < 0 || component > 2)
    throw Error("parameter index: pose out of range");
  return 3 * frame + component;
}

int ParameterIndex::plane_col(Axis axis, int slot) const {
  const int a = axis_index(axis);
  if (slot < 0 || slot >= slot_counts_[a])
    throw Error("parameter index: plane slot out of range");
  int col = 3 * n_frames_;
  for (int i = 0; i < a; ++i) col += slot_counts_[i];
  return col + slot;
}

ParameterIndex::Entry ParameterIndex::lookup(int col) const {
  if (col < 0 || col >= dim_) throw Error("parameter index: column out of range");
  Entry e;
  if (col < 3 * n_frames_) {
    e.is_pose = true;
    e.frame = col / 3;
    e.component = col % 3;
    return e;
  }
  int rest = col - 3 * n_frames_;
  for (int a = 0; a < 3; ++a) {
    if (rest < slot_counts_[a]) {
      e.axis = static_cast<Axis>(a);
      e.slot = rest;
      return e;
    }
    rest -= slot_counts_[a];
  }
  throw Error("parameter index: column out of range");
}

std::string ParameterIndex::describe(int col) const {
  const Entry e = lookup(col);
  if (e.is_pose)
    return "p[" + std::to_string(e.frame) + "]." + "xyz"[e.component];
  return std::string("m_") + axis_name(e.axis) + "[" + std::to_string(e.slot) + "]";
}

FactorGraph build_graph(const std::vector<SegmentObservation>& segments,
                        const std::vector<CorrespondenceEdge>& temporal_edges,
                        const std::vector<sim::OdometrySample>& odometry) {
  FactorGraph g;
  g.n_frames = static_cast<int>(odometry.size()) + 1;

  std::map<int, size_t> by_id;
  for (size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (s.segment_id < 0) throw Error("build_graph: segment without id");
    if (s.frame_index < 0 || s.frame_index >= g.n_frames)
      throw Error("build_graph: segment frame " + std::to_string(s.frame_index) +
                  " out of range");
    if (!by_id.emplace(s.segment_id, i).second)
      throw Error("build_graph: duplicate segment id");
  }

  UnionFind uf(segments.size());
  for (const auto& e : temporal_edges) {
    const auto ita = by_id.find(e.segment_id_a);
    const auto itb = by_id.find(e.segment_id_b);
    if (ita == by_id.end() || itb == by_id.end())
      throw Error("build_graph: edge references unknown segment");
    const auto& sa = segments[ita->second];
    const auto& sb = segments[itb->second];
    if (sa.axis != sb.axis)
      throw Error("build_graph: correspondence joins different axes");
    if (sa.facing != sb.facing)
      throw Error("build_graph: correspondence joins opposite facings");
    uf.unite(static_cast<int>(ita->second), static_cast<int>(itb->second));
  }

  // Slots ordered by first member appearance, per axis.
  std::map<int, int> root_to_slot[3];
  for (size_t i = 0; i < segments.size(); ++i) {
    const int root = uf.find(static_cast<int>(i));
    const int a = axis_index(segments[i].axis);
    auto [it, fresh] = root_to_slot[a].emplace(root, -1);
    if (fresh) {
      it->second = static_cast<int>(g.slots[a].size());
      g.slots[a].push_back({segments[i].axis, segments[i].facing, {}});
    }
    g.slots[a][it->second].segment_ids.push_back(segments[i].segment_id);
  }
  for (auto& per_axis : g.slots)
    for (auto& slot : per_axis)
      std::sort(slot.segment_ids.begin(), slot.segment_ids.end());

  for (size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    const int a = axis_index(s.axis);
    const int slot = root_to_slot[a].at(uf.find(static_cast<int>(i)));
    g.range_factors.push_back({s.frame_index, s.axis, slot, s.d, s.segment_id});
  }

  for (size_t i = 0; i < odometry.size(); ++i)
    g.odom_factors.push_back({static_cast<int>(i), odometry[i].t_axis});

  return g;
}

}  // namespace mansel::graph
