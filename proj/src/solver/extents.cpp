#include "mansel/solver/extents.hpp"

#include <map>

namespace mansel::solver {

std::vector<LayoutStructure> model_extents(
    const Eigen::VectorXd& xi, const graph::ParameterIndex& index,
    const graph::FactorGraph& g, const MergeSet& merges,
    const std::vector<SegmentObservation>& segments) {
  if (xi.size() != index.dim()) throw Error("model_extents: xi dimension mismatch");

  std::map<int, const SegmentObservation*> by_id;
  for (const auto& s : segments) by_id[s.segment_id] = &s;

  // Representative column per plane column.
  std::vector<int> rep(index.dim());
  for (int c = 0; c < index.dim(); ++c) rep[c] = c;
  for (const auto& cls : merges.classes)
    for (int c : cls) rep[c] = cls.front();

  std::map<int, LayoutStructure> by_rep;
  for (int a = 0; a < 3; ++a) {
    const Axis axis = static_cast<Axis>(a);
    for (size_t slot = 0; slot < g.slots[a].size(); ++slot) {
      const int col = index.plane_col(axis, static_cast<int>(slot));
      const int r = rep[col];
      auto [it, fresh] = by_rep.try_emplace(r);
      LayoutStructure& ls = it->second;
      if (fresh) {
        ls.axis = axis;
        ls.offset = xi[r];
        ls.facing = g.slots[a][slot].facing;
      }
      ls.slots.push_back(static_cast<int>(slot));

      const auto [ua, va] = plane_axes(axis);
      for (int seg_id : g.slots[a][slot].segment_ids) {
        const auto found = by_id.find(seg_id);
        if (found == by_id.end())
          throw Error("model_extents: slot references unknown segment " +
                      std::to_string(seg_id));
        const SegmentObservation& seg = *found->second;
        // Segment extents are sensor-relative; anchor them at the
        // optimized pose of the frame that saw them.
        const double pu = xi[index.pose_col(seg.frame_index, axis_index(ua))];
        const double pv = xi[index.pose_col(seg.frame_index, axis_index(va))];
        ls.extent = Rect::hull(ls.extent, seg.extent.shifted(pu, pv));
      }
    }
  }

  std::vector<LayoutStructure> out;
  out.reserve(by_rep.size());
  for (auto& [col, ls] : by_rep) out.push_back(std::move(ls));
  return out;
}

}  // namespace mansel::solver
