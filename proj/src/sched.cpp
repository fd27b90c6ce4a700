#include "smc/sched.hpp"

#include <algorithm>

namespace smc {

std::vector<int> Action::inputs() const {
  switch (kind) {
    case ActionKind::S: return {target - d, target + d};
    case ActionKind::J: return {target - 1, target + 1};
    case ActionKind::E: return {target - 2, target};
  }
  return {};
}

std::vector<int> Action::enhanced() const {
  switch (kind) {
    case ActionKind::S: return {};
    case ActionKind::J: return {target - 1, target + 1};
    case ActionKind::E: return {target - 2, target};
  }
  return {};
}

std::set<ActionKind> mode_of(int p) {
  if (p < 0) throw Error("mode_of: negative poc");
  std::set<ActionKind> m;
  int r = p % 8;
  if (r == 2 || r == 3 || r == 4 || r == 6 || r == 7) m.insert(ActionKind::S);
  if (r == 3 || r == 7) m.insert(ActionKind::E);
  if (r == 1 || r == 5) m.insert(ActionKind::J);
  return m;
}

int distance_of(int p) {
  switch (p % 8) {
    case 4: return 4;
    case 2:
    case 6: return 2;
    case 3:
    case 7: return 1;
    default:
      throw Error("distance_of: poc " + std::to_string(p) +
                  " has no synthesis distance");
  }
}

PocActions actions_at(int poc, int last_poc) {
  PocActions a;
  if (poc < 0 || poc > last_poc) return a;
  const int r = poc % 8;
  if (r == 1 || r == 5) {
    if (poc + 1 <= last_poc) a.pre = Action{ActionKind::J, poc, 0};
  } else if (r == 2 || r == 3 || r == 4 || r == 6 || r == 7) {
    int d = distance_of(poc);
    if (poc + d <= last_poc) a.pre = Action{ActionKind::S, poc, d};
  }
  if (r == 3 || r == 7) a.post = Action{ActionKind::E, poc, 0};
  return a;
}

std::vector<Action> plan_window(int base_poc, int last_poc) {
  if (base_poc % 8 != 0) throw Error("plan_window: base poc must be a multiple of 8");
  static constexpr int kOffsets[8] = {8, 4, 2, 1, 3, 6, 5, 7};
  std::vector<Action> plan;
  for (int off : kOffsets) {
    int p = base_poc + off;
    if (p > last_poc) continue;
    PocActions a = actions_at(p, last_poc);
    if (a.pre) plan.push_back(*a.pre);
    if (a.post) plan.push_back(*a.post);
  }
  return plan;
}

std::vector<uint8_t> PfeFlagSection::serialize() const {
  if (int(flags.size()) != cols * rows)
    throw Error("pfe flags: bit count mismatch");
  std::vector<uint8_t> out;
  out.push_back(uint8_t(cols & 0xff));
  out.push_back(uint8_t(cols >> 8));
  out.push_back(uint8_t(rows & 0xff));
  out.push_back(uint8_t(rows >> 8));
  size_t nbytes = (flags.size() + 7) / 8;
  size_t start = out.size();
  out.resize(start + nbytes, 0);
  for (size_t i = 0; i < flags.size(); ++i)
    if (flags[i]) out[start + i / 8] |= uint8_t(0x80u >> (i % 8));
  return out;
}

PfeFlagSection PfeFlagSection::parse(int poc, const uint8_t* data, size_t n,
                                     size_t& consumed) {
  if (n < 4) throw Error("pfe flags: truncated section");
  PfeFlagSection s;
  s.poc = poc;
  s.cols = data[0] | (data[1] << 8);
  s.rows = data[2] | (data[3] << 8);
  if (s.cols <= 0 || s.rows <= 0 || s.cols * s.rows > 1 << 20)
    throw Error("pfe flags: invalid grid");
  size_t nbits = size_t(s.cols) * size_t(s.rows);
  size_t nbytes = (nbits + 7) / 8;
  if (n < 4 + nbytes) throw Error("pfe flags: truncated section");
  s.flags.resize(nbits);
  for (size_t i = 0; i < nbits; ++i)
    s.flags[i] = (data[4 + i / 8] >> (7 - (i % 8))) & 1;
  consumed = 4 + nbytes;
  return s;
}

namespace {

uint64_t tile_sse(const Frame& a, const Frame& b, const Tile& t) {
  uint64_t s = 0;
  for (int yy = t.y0; yy < t.y0 + t.core_h; ++yy)
    for (int xx = t.x0; xx < t.x0 + t.core_w; ++xx) {
      int d = int(a.Y(xx, yy)) - int(b.Y(xx, yy));
      s += uint64_t(d * d);
    }
  for (int yy = t.y0 / 2; yy < (t.y0 + t.core_h) / 2; ++yy)
    for (int xx = t.x0 / 2; xx < (t.x0 + t.core_w) / 2; ++xx) {
      int du = int(a.U(xx, yy)) - int(b.U(xx, yy));
      int dv = int(a.V(xx, yy)) - int(b.V(xx, yy));
      s += uint64_t(du * du) + uint64_t(dv * dv);
    }
  return s;
}

} // namespace

std::vector<bool> decide_pfe_flags(const Frame& orig, const Frame& recon,
                                   const Frame& filtered, const TileGrid& grid) {
  std::vector<bool> flags;
  flags.reserve(grid.tiles.size());
  for (const Tile& t : grid.tiles) {
    uint64_t sse_rec = tile_sse(orig, recon, t);
    uint64_t sse_fil = tile_sse(orig, filtered, t);
    flags.push_back(sse_fil < sse_rec); // tie keeps the reconstruction
  }
  return flags;
}

Frame apply_pfe_flags(const Frame& recon, const Frame& filtered,
                      const TileGrid& grid, const std::vector<bool>& flags) {
  if (flags.size() != grid.tiles.size())
    throw Error("apply_pfe_flags: flag count mismatch");
  Frame out = recon;
  for (size_t i = 0; i < grid.tiles.size(); ++i) {
    if (!flags[i]) continue;
    const Tile& t = grid.tiles[i];
    paste(out, filtered, t.x0, t.y0, t.x0, t.y0, t.core_w, t.core_h);
  }
  return out;
}

WindowBuffer::WindowBuffer(int base_poc, int last_poc)
    : base_(base_poc), last_(last_poc) {
  for (const Action& a : plan_window(base_, last_))
    for (int p : a.enhanced())
      if (p >= base_ && p < base_ + 8 && p <= last_) expected_.insert(p);
}

std::vector<int> WindowBuffer::slots() const {
  std::vector<int> s;
  for (int p = base_; p < base_ + 8 && p <= last_; ++p) s.push_back(p);
  return s;
}

void WindowBuffer::store_enhanced(int poc, Frame f) {
  if (poc < base_ || poc >= base_ + 8)
    throw Error("window buffer: poc outside window");
  enhanced_[poc] = std::move(f);
}

void WindowBuffer::store_recon(int poc, const Frame& f) {
  if (poc < base_ || poc >= base_ + 8)
    throw Error("window buffer: poc outside window");
  recon_[poc] = f;
}

bool WindowBuffer::complete() const {
  for (int p : expected_)
    if (!enhanced_.count(p)) return false;
  return true;
}

std::vector<Frame> WindowBuffer::emit() const {
  if (!complete())
    throw Error("window buffer: emission requested before window completion");
  std::vector<Frame> out;
  for (int p : slots()) {
    auto it = enhanced_.find(p);
    if (it != enhanced_.end()) {
      out.push_back(it->second);
    } else {
      auto rit = recon_.find(p);
      if (rit == recon_.end())
        throw Error("window buffer: missing reconstruction for poc " +
                    std::to_string(p));
      out.push_back(rit->second); // orphan: pass the reconstruction through
    }
    out.back().poc = p;
  }
  return out;
}

} // namespace smc
