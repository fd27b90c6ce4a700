#pragma once

#include <iosfwd>
#include <utility>

#include "smc/frame.hpp"

namespace smc {

/// Dense displacement field in pixels at the resolution it displaces.
struct FlowField {
  int width = 0;
  int height = 0;
  Planef dx;
  Planef dy;

  static FlowField zeros(int w, int h) {
    FlowField f;
    f.width = w;
    f.height = h;
    f.dx = Planef(w, h);
    f.dy = Planef(w, h);
    return f;
  }
  bool same_size(const FlowField& o) const {
    return width == o.width && height == o.height;
  }
};

/// Per 16x16 block, the integer vector minimizing luma SAD over the full
/// +-search_range window. Ties break by smallest |dx|+|dy|, then
/// lexicographic (dx, dy). Expanded to a per-pixel constant field.
/// Vectors point from cur content toward matching ref content.
FlowField block_match(const Frame& ref, const Frame& cur, int search_range,
                      int block = 16);

/// Linear-motion model at t = 0.5: each output is half the corresponding
/// exhaustive block-match field.
std::pair<FlowField, FlowField> estimate_intermediate_flows(
    const Frame& i0, const Frame& i1, int search_range);

/// F_0->1 = 2*F_t->1, F_1->0 = 2*F_t->0, pointwise.
std::pair<FlowField, FlowField> reuse_flows(const FlowField& f_t0,
                                            const FlowField& f_t1);

/// Backward bilinear warp with border clamp: out(x,y) samples the input at
/// (x+dx, y+dy).
Planef warp_plane(const Planef& src, const FlowField& flow);

/// Warps Y with the given full-resolution flow and chroma with its
/// downsampled counterpart. Output samples rounded and clipped.
Frame warp_frame(const Frame& src, const FlowField& flow);

/// 2x2 mean of each component, then scaled by 0.5.
FlowField downsample_flow(const FlowField& flow);

/// Debug dump as CSV rows "x,y,dx,dy".
void dump_flow_csv(std::ostream& out, const FlowField& flow);

} // namespace smc
