#include "smc/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>

namespace smc {

namespace {

// SAD of one cur block against ref at (bx+mx, by+my), border-clamped.
// Bails out once the running sum reaches `bound`.
uint64_t block_sad(const Frame& ref, const Frame& cur, int bx, int by,
                   int bw, int bh, int mx, int my, uint64_t bound) {
  uint64_t sad = 0;
  const int w = ref.width, h = ref.height;
  for (int yy = 0; yy < bh; ++yy) {
    const int cy = by + yy;
    const int ry = std::clamp(cy + my, 0, h - 1);
    const uint8_t* crow = &cur.y[size_t(cy) * w];
    const uint8_t* rrow = &ref.y[size_t(ry) * w];
    const int rx0 = bx + mx;
    if (rx0 >= 0 && rx0 + bw <= w) {
      for (int xx = 0; xx < bw; ++xx)
        sad += uint64_t(std::abs(int(crow[bx + xx]) - int(rrow[rx0 + xx])));
    } else {
      for (int xx = 0; xx < bw; ++xx) {
        int rx = std::clamp(bx + xx + mx, 0, w - 1);
        sad += uint64_t(std::abs(int(crow[bx + xx]) - int(rrow[rx])));
      }
    }
    if (sad >= bound) return sad;
  }
  return sad;
}

} // namespace

FlowField block_match(const Frame& ref, const Frame& cur, int search_range,
                      int block) {
  if (!ref.same_size(cur)) throw Error("block_match: dimension mismatch");
  if (search_range < 0) throw Error("block_match: negative search range");
  FlowField out = FlowField::zeros(cur.width, cur.height);

  for (int by = 0; by < cur.height; by += block) {
    const int bh = std::min(block, cur.height - by);
    for (int bx = 0; bx < cur.width; bx += block) {
      const int bw = std::min(block, cur.width - bx);

      int best_dx = 0, best_dy = 0;
      uint64_t best = block_sad(ref, cur, bx, by, bw, bh, 0, 0, UINT64_MAX);
      int best_cost = 0;
      for (int my = -search_range; my <= search_range; ++my) {
        for (int mx = -search_range; mx <= search_range; ++mx) {
          if (mx == 0 && my == 0) continue;
          uint64_t sad = block_sad(ref, cur, bx, by, bw, bh, mx, my, best + 1);
          if (sad > best) continue;
          int cost = std::abs(mx) + std::abs(my);
          bool take = sad < best;
          if (!take && sad == best) {
            take = cost < best_cost ||
                   (cost == best_cost &&
                    (mx < best_dx || (mx == best_dx && my < best_dy)));
          }
          if (take) {
            best = sad;
            best_dx = mx;
            best_dy = my;
            best_cost = cost;
          }
        }
      }
      for (int yy = by; yy < by + bh; ++yy)
        for (int xx = bx; xx < bx + bw; ++xx) {
          out.dx.at(xx, yy) = float(best_dx);
          out.dy.at(xx, yy) = float(best_dy);
        }
    }
  }
  return out;
}

std::pair<FlowField, FlowField> estimate_intermediate_flows(
    const Frame& i0, const Frame& i1, int search_range) {
  if (!i0.same_size(i1))
    throw Error("estimate_intermediate_flows: dimension mismatch");
  FlowField to0 = block_match(i0, i1, search_range);
  FlowField to1 = block_match(i1, i0, search_range);
  auto halve = [](FlowField& f) {
    for (float& x : f.dx.v) x *= 0.5f;
    for (float& x : f.dy.v) x *= 0.5f;
  };
  halve(to0);
  halve(to1);
  return {std::move(to0), std::move(to1)};
}

std::pair<FlowField, FlowField> reuse_flows(const FlowField& f_t0,
                                            const FlowField& f_t1) {
  if (!f_t0.same_size(f_t1)) throw Error("reuse_flows: dimension mismatch");
  FlowField f01 = f_t1;
  FlowField f10 = f_t0;
  auto dbl = [](FlowField& f) {
    for (float& x : f.dx.v) x *= 2.f;
    for (float& x : f.dy.v) x *= 2.f;
  };
  dbl(f01);
  dbl(f10);
  return {std::move(f01), std::move(f10)};
}

Planef warp_plane(const Planef& src, const FlowField& flow) {
  if (src.w != flow.width || src.h != flow.height)
    throw Error("warp_plane: dimension mismatch");
  Planef out(src.w, src.h);
  const float maxx = float(src.w - 1);
  const float maxy = float(src.h - 1);
  for (int y = 0; y < src.h; ++y) {
    for (int x = 0; x < src.w; ++x) {
      float sx = std::clamp(float(x) + flow.dx.at(x, y), 0.f, maxx);
      float sy = std::clamp(float(y) + flow.dy.at(x, y), 0.f, maxy);
      int x0 = int(sx);
      int y0 = int(sy);
      int x1 = std::min(x0 + 1, src.w - 1);
      int y1 = std::min(y0 + 1, src.h - 1);
      float fx = sx - float(x0);
      float fy = sy - float(y0);
      float a = src.at(x0, y0) * (1.f - fx) + src.at(x1, y0) * fx;
      float b = src.at(x0, y1) * (1.f - fx) + src.at(x1, y1) * fx;
      out.at(x, y) = a * (1.f - fy) + b * fy;
    }
  }
  return out;
}

Frame warp_frame(const Frame& src, const FlowField& flow) {
  if (src.width != flow.width || src.height != flow.height)
    throw Error("warp_frame: dimension mismatch");
  Planef yf(src.width, src.height);
  for (size_t i = 0; i < src.y.size(); ++i) yf.v[i] = float(src.y[i]);
  Planef yw = warp_plane(yf, flow);

  FlowField cflow = downsample_flow(flow);
  Planef uf(src.chroma_w(), src.chroma_h());
  Planef vf(src.chroma_w(), src.chroma_h());
  for (size_t i = 0; i < src.u.size(); ++i) uf.v[i] = float(src.u[i]);
  for (size_t i = 0; i < src.v.size(); ++i) vf.v[i] = float(src.v[i]);
  Planef uw = warp_plane(uf, cflow);
  Planef vw = warp_plane(vf, cflow);

  Frame out = Frame::allocate(src.width, src.height);
  out.poc = src.poc;
  auto q = [](float x) {
    return uint8_t(std::clamp(std::lround(x), 0L, 255L));
  };
  for (size_t i = 0; i < out.y.size(); ++i) out.y[i] = q(yw.v[i]);
  for (size_t i = 0; i < out.u.size(); ++i) out.u[i] = q(uw.v[i]);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = q(vw.v[i]);
  return out;
}

FlowField downsample_flow(const FlowField& flow) {
  if (flow.width % 2 || flow.height % 2)
    throw Error("downsample_flow: odd dimensions");
  const int w2 = flow.width / 2;
  const int h2 = flow.height / 2;
  FlowField out = FlowField::zeros(w2, h2);
  for (int y = 0; y < h2; ++y) {
    for (int x = 0; x < w2; ++x) {
      float sx = 0.f, sy = 0.f;
      for (int dj = 0; dj < 2; ++dj)
        for (int di = 0; di < 2; ++di) {
          sx += flow.dx.at(2 * x + di, 2 * y + dj);
          sy += flow.dy.at(2 * x + di, 2 * y + dj);
        }
      out.dx.at(x, y) = sx * 0.25f * 0.5f;
      out.dy.at(x, y) = sy * 0.25f * 0.5f;
    }
  }
  return out;
}

void dump_flow_csv(std::ostream& out, const FlowField& flow) {
  out << "x,y,dx,dy\n";
  for (int y = 0; y < flow.height; ++y)
    for (int x = 0; x < flow.width; ++x)
      out << x << ',' << y << ',' << flow.dx.at(x, y) << ','
          << flow.dy.at(x, y) << '\n';
}

} // namespace smc
