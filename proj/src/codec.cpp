#include "smc/codec.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

#include "smc/transform.hpp"

namespace smc {

void CodecConfig::validate() const {
  if (qp < 0 || qp > 51) throw Error("qp out of range [0, 51]");
  if (gop != 8) throw Error("gop must be 8");
  if (intra_period <= 0 || intra_period % gop != 0)
    throw Error("intra_period must be a positive multiple of the gop");
  if (search_range < 0) throw Error("search_range must be nonnegative");
  if (block != 16) throw Error("block size must be 16");
  if (fps_num <= 0 || fps_den <= 0) throw Error("invalid fps");
}

void Dpb::insert(int poc, Frame f) {
  f.poc = poc;
  frames_[poc] = std::move(f);
}

const Frame& Dpb::get(int poc) const {
  auto it = frames_.find(poc);
  if (it == frames_.end())
    throw Error("dpb: missing reference poc " + std::to_string(poc));
  return it->second;
}

void Dpb::prune_below(int min_poc) {
  for (auto it = frames_.begin(); it != frames_.end();)
    it = it->first < min_poc ? frames_.erase(it) : std::next(it);
}

Rpl derive_rpls(int poc, const Dpb& dpb, const CodecConfig& cfg, bool intra) {
  Rpl rpl;
  if (intra) return rpl;
  std::vector<int> lower, higher;
  for (const auto& [p, f] : dpb.all()) {
    if (p < poc) lower.push_back(p);
    else if (p > poc) higher.push_back(p);
  }
  std::sort(lower.rbegin(), lower.rend());   // nearest (largest) first
  std::sort(higher.begin(), higher.end());   // nearest (smallest) first
  if (lower.empty())
    throw Error("derive_rpls: no reference below poc " + std::to_string(poc));
  const size_t max_refs = 2;
  for (size_t i = 0; i < std::min(lower.size(), max_refs); ++i)
    rpl.l0.push_back({lower[i], false});
  for (size_t i = 0; i < std::min(higher.size(), max_refs); ++i)
    rpl.l1.push_back({higher[i], false});
  (void)cfg;
  return rpl;
}

std::vector<int> coding_order(int num_frames, const CodecConfig& cfg) {
  std::vector<int> order;
  if (num_frames <= 0) return order;
  order.push_back(0);
  const int g = cfg.gop;
  static constexpr int kOffsets[8] = {8, 4, 2, 1, 3, 6, 5, 7};
  for (int base = 0; base + 1 < num_frames; base += g)
    for (int off : kOffsets) {
      int p = base + off;
      if (p < num_frames) order.push_back(p);
    }
  return order;
}

void write_frame_header(BitWriter& bw, const FrameHeader& h) {
  bw.write_ue(uint32_t(h.poc));
  bw.put_bit(h.intra ? 1 : 0);
  bw.write_ue(uint32_t(h.qp));
}

FrameHeader read_frame_header(BitReader& br) {
  FrameHeader h;
  h.poc = int(br.read_ue());
  h.intra = br.get_bit() != 0;
  h.qp = int(br.read_ue());
  if (h.qp > 51) throw Error("frame header: qp out of range");
  return h;
}

namespace {

struct BlockPixels {
  std::array<uint8_t, 256> y{};
  std::array<uint8_t, 64> u{};
  std::array<uint8_t, 64> v{};
};

struct Candidate {
  BlockMode mode = BlockMode::IntraDc;
  int ref0 = 0, ref1 = 0;
  MotionVector mv0, mv1;
};

// Six 8x8 coefficient blocks: 4 luma (raster subblock order), then U, V.
struct BlockLevels {
  std::array<Levels8x8, 6> lv{};
};

BlockPixels fetch_block(const Frame& f, int bx, int by) {
  BlockPixels b;
  for (int yy = 0; yy < 16; ++yy)
    for (int xx = 0; xx < 16; ++xx) b.y[yy * 16 + xx] = f.Y(bx + xx, by + yy);
  int cx = bx / 2, cy = by / 2;
  for (int yy = 0; yy < 8; ++yy)
    for (int xx = 0; xx < 8; ++xx) {
      b.u[yy * 8 + xx] = f.U(cx + xx, cy + yy);
      b.v[yy * 8 + xx] = f.V(cx + xx, cy + yy);
    }
  return b;
}

int dc_from_neighbors(long sum, int count) {
  if (count == 0) return 128;
  return int((sum + count / 2) / count);
}

BlockPixels intra_dc_pred(const Frame& recon, int bx, int by) {
  BlockPixels p;
  long sum = 0;
  int cnt = 0;
  if (bx > 0)
    for (int yy = 0; yy < 16; ++yy) { sum += recon.Y(bx - 1, by + yy); ++cnt; }
  if (by > 0)
    for (int xx = 0; xx < 16; ++xx) { sum += recon.Y(bx + xx, by - 1); ++cnt; }
  p.y.fill(uint8_t(dc_from_neighbors(sum, cnt)));

  int cx = bx / 2, cy = by / 2;
  auto chroma_dc = [&](auto getter) {
    long s = 0;
    int c = 0;
    if (cx > 0)
      for (int yy = 0; yy < 8; ++yy) { s += getter(cx - 1, cy + yy); ++c; }
    if (cy > 0)
      for (int xx = 0; xx < 8; ++xx) { s += getter(cx + xx, cy - 1); ++c; }
    return uint8_t(dc_from_neighbors(s, c));
  };
  p.u.fill(chroma_dc([&](int x, int y) { return recon.U(x, y); }));
  p.v.fill(chroma_dc([&](int x, int y) { return recon.V(x, y); }));
  return p;
}

BlockPixels mc_pred(const Frame& ref, int bx, int by, MotionVector mv) {
  BlockPixels p;
  for (int yy = 0; yy < 16; ++yy)
    for (int xx = 0; xx < 16; ++xx)
      p.y[yy * 16 + xx] = ref.y_clamped(bx + xx + mv.x, by + yy + mv.y);
  int cx = bx / 2, cy = by / 2;
  int cmx = mv.x >> 1, cmy = mv.y >> 1;
  for (int yy = 0; yy < 8; ++yy)
    for (int xx = 0; xx < 8; ++xx) {
      p.u[yy * 8 + xx] = ref.u_clamped(cx + xx + cmx, cy + yy + cmy);
      p.v[yy * 8 + xx] = ref.v_clamped(cx + xx + cmx, cy + yy + cmy);
    }
  return p;
}

BlockPixels bi_average(const BlockPixels& a, const BlockPixels& b) {
  BlockPixels p;
  for (int i = 0; i < 256; ++i) p.y[i] = uint8_t((a.y[i] + b.y[i] + 1) >> 1);
  for (int i = 0; i < 64; ++i) {
    p.u[i] = uint8_t((a.u[i] + b.u[i] + 1) >> 1);
    p.v[i] = uint8_t((a.v[i] + b.v[i] + 1) >> 1);
  }
  return p;
}

uint64_t pred_sad(const Frame& ref, const Frame& orig, int bx, int by,
                  int mx, int my, uint64_t bound) {
  uint64_t sad = 0;
  for (int yy = 0; yy < 16; ++yy) {
    for (int xx = 0; xx < 16; ++xx)
      sad += uint64_t(std::abs(int(orig.Y(bx + xx, by + yy)) -
                               int(ref.y_clamped(bx + xx + mx, by + yy + my))));
    if (sad >= bound) return sad;
  }
  return sad;
}

struct MeResult {
  MotionVector mv;
  uint64_t sad = 0;
};

MeResult motion_search(const Frame& ref, const Frame& orig, int bx, int by,
                       int range) {
  MeResult best;
  best.sad = pred_sad(ref, orig, bx, by, 0, 0, UINT64_MAX);
  int best_cost = 0;
  for (int my = -range; my <= range; ++my)
    for (int mx = -range; mx <= range; ++mx) {
      if (mx == 0 && my == 0) continue;
      uint64_t sad = pred_sad(ref, orig, bx, by, mx, my, best.sad + 1);
      if (sad > best.sad) continue;
      int cost = std::abs(mx) + std::abs(my);
      bool take = sad < best.sad;
      if (!take && sad == best.sad)
        take = cost < best_cost ||
               (cost == best_cost && (mx < best.mv.x ||
                                      (mx == best.mv.x && my < best.mv.y)));
      if (take) {
        best.sad = sad;
        best.mv = {mx, my};
        best_cost = cost;
      }
    }
  return best;
}

// Residual coding for one 8x8 subblock from src/pred arrays.
template <size_t N>
Levels8x8 code_subblock(const std::array<uint8_t, N>& src,
                        const std::array<uint8_t, N>& pred, int stride,
                        int ox, int oy, double step,
                        std::array<uint8_t, N>& recon_out) {
  std::array<int16_t, 64> resid{};
  for (int yy = 0; yy < 8; ++yy)
    for (int xx = 0; xx < 8; ++xx) {
      int idx = (oy + yy) * stride + (ox + xx);
      resid[yy * 8 + xx] = int16_t(int(src[idx]) - int(pred[idx]));
    }
  Levels8x8 lv = quantize(dct8x8(resid), step);
  std::array<int16_t, 64> rec = idct8x8(dequantize(lv, step));
  for (int yy = 0; yy < 8; ++yy)
    for (int xx = 0; xx < 8; ++xx) {
      int idx = (oy + yy) * stride + (ox + xx);
      recon_out[idx] =
          uint8_t(std::clamp(int(pred[idx]) + int(rec[yy * 8 + xx]), 0, 255));
    }
  return lv;
}

void reconstruct_subblock_from_levels(const Levels8x8& lv, double step,
                                      uint8_t* pred_recon, int stride, int ox,
                                      int oy) {
  std::array<int16_t, 64> rec = idct8x8(dequantize(lv, step));
  for (int yy = 0; yy < 8; ++yy)
    for (int xx = 0; xx < 8; ++xx) {
      int idx = (oy + yy) * stride + (ox + xx);
      pred_recon[idx] =
          uint8_t(std::clamp(int(pred_recon[idx]) + int(rec[yy * 8 + xx]), 0, 255));
    }
}

void write_levels(BitWriter& bw, const Levels8x8& lv) {
  int nnz = 0;
  for (int i = 0; i < 64; ++i)
    if (lv[kZigzag8x8[i]] != 0) ++nnz;
  bw.write_ue(uint32_t(nnz));
  int run = 0;
  for (int i = 0; i < 64 && nnz > 0; ++i) {
    int32_t level = lv[kZigzag8x8[i]];
    if (level == 0) {
      ++run;
      continue;
    }
    bw.write_ue(uint32_t(run));
    bw.write_se(level);
    run = 0;
    --nnz;
  }
}

Levels8x8 read_levels(BitReader& br) {
  Levels8x8 lv{};
  uint32_t nnz = br.read_ue();
  if (nnz > 64) throw Error("coefficient count out of range");
  int pos = 0;
  for (uint32_t i = 0; i < nnz; ++i) {
    uint32_t run = br.read_ue();
    pos += int(run);
    if (pos >= 64) throw Error("coefficient run out of range");
    int32_t level = br.read_se();
    if (level == 0) throw Error("zero level in nonzero coefficient");
    lv[kZigzag8x8[pos]] = level;
    ++pos;
  }
  return lv;
}

void write_block_syntax(BitWriter& bw, bool intra_frame, const Candidate& c,
                        const BlockLevels& levels) {
  if (!intra_frame) {
    bw.write_ue(uint32_t(int(c.mode)));
    if (c.mode == BlockMode::Uni0 || c.mode == BlockMode::Bi) {
      bw.write_ue(uint32_t(c.ref0));
      bw.write_se(c.mv0.x);
      bw.write_se(c.mv0.y);
    }
    if (c.mode == BlockMode::Uni1 || c.mode == BlockMode::Bi) {
      bw.write_ue(uint32_t(c.ref1));
      bw.write_se(c.mv1.x);
      bw.write_se(c.mv1.y);
    }
  }
  for (const Levels8x8& lv : levels.lv) write_levels(bw, lv);
}

struct Trial {
  BlockPixels recon;
  BlockLevels levels;
  uint64_t ssd = 0;
  size_t bits = 0;
  double cost = 0;
};

Trial trial_encode(const BlockPixels& orig, const BlockPixels& pred,
                   bool intra_frame, const Candidate& cand, double step,
                   double lambda) {
  Trial t;
  t.recon = pred;
  static constexpr int kLumaOff[4][2] = {{0, 0}, {8, 0}, {0, 8}, {8, 8}};
  for (int i = 0; i < 4; ++i)
    t.levels.lv[i] = code_subblock(orig.y, pred.y, 16, kLumaOff[i][0],
                                   kLumaOff[i][1], step, t.recon.y);
  t.levels.lv[4] = code_subblock(orig.u, pred.u, 8, 0, 0, step, t.recon.u);
  t.levels.lv[5] = code_subblock(orig.v, pred.v, 8, 0, 0, step, t.recon.v);

  for (int i = 0; i < 256; ++i) {
    int d = int(orig.y[i]) - int(t.recon.y[i]);
    t.ssd += uint64_t(d * d);
  }
  for (int i = 0; i < 64; ++i) {
    int du = int(orig.u[i]) - int(t.recon.u[i]);
    int dv = int(orig.v[i]) - int(t.recon.v[i]);
    t.ssd += uint64_t(du * du) + uint64_t(dv * dv);
  }
  BitWriter scratch;
  write_block_syntax(scratch, intra_frame, cand, t.levels);
  t.bits = scratch.bit_count();
  t.cost = double(t.ssd) + lambda * double(t.bits);
  return t;
}

void paste_block(Frame& recon, const BlockPixels& b, int bx, int by) {
  for (int yy = 0; yy < 16; ++yy)
    for (int xx = 0; xx < 16; ++xx) recon.Y(bx + xx, by + yy) = b.y[yy * 16 + xx];
  int cx = bx / 2, cy = by / 2;
  for (int yy = 0; yy < 8; ++yy)
    for (int xx = 0; xx < 8; ++xx) {
      recon.U(cx + xx, cy + yy) = b.u[yy * 8 + xx];
      recon.V(cx + xx, cy + yy) = b.v[yy * 8 + xx];
    }
}

} // namespace

EncodedFrame encode_frame(const Frame& orig, const RefList& l0,
                          const RefList& l1, bool intra,
                          const CodecConfig& cfg, BitWriter& bw) {
  cfg.validate();
  if (orig.width % 16 || orig.height % 16)
    throw Error("encode_frame: dimensions must be multiples of 16");
  if (!intra && l0.empty())
    throw Error("encode_frame: inter frame without list-0 references");

  EncodedFrame ef;
  ef.header = {orig.poc, intra, cfg.qp};
  write_frame_header(bw, ef.header);

  const double step = quant_step(cfg.qp);
  const double lambda = rd_lambda(cfg.qp, cfg.lambda_scale);
  ef.recon = Frame::allocate(orig.width, orig.height);
  ef.recon.poc = orig.poc;

  size_t bits_before = bw.bit_count();

  for (int by = 0; by < orig.height; by += 16) {
    for (int bx = 0; bx < orig.width; bx += 16) {
      BlockPixels ob = fetch_block(orig, bx, by);

      // Candidate enumeration order fixes RD tie-breaking: INTRA, UNI0
      // entries, UNI1 entries, BI.
      struct Option {
        Candidate cand;
        BlockPixels pred;
      };
      std::vector<Option> options;
      options.push_back({{BlockMode::IntraDc}, intra_dc_pred(ef.recon, bx, by)});

      if (!intra) {
        std::vector<MeResult> me0(l0.size()), me1(l1.size());
        for (size_t i = 0; i < l0.size(); ++i) {
          me0[i] = motion_search(*l0.frames[i], orig, bx, by, cfg.search_range);
          Candidate c{BlockMode::Uni0, int(i), 0, me0[i].mv, {}};
          options.push_back({c, mc_pred(*l0.frames[i], bx, by, me0[i].mv)});
        }
        for (size_t i = 0; i < l1.size(); ++i) {
          me1[i] = motion_search(*l1.frames[i], orig, bx, by, cfg.search_range);
          Candidate c{BlockMode::Uni1, 0, int(i), {}, me1[i].mv};
          options.push_back({c, mc_pred(*l1.frames[i], bx, by, me1[i].mv)});
        }
        if (!l0.empty() && !l1.empty()) {
          // BI from the lowest-SAD entry in each list (ties to lower index).
          size_t b0 = 0, b1 = 0;
          for (size_t i = 1; i < me0.size(); ++i)
            if (me0[i].sad < me0[b0].sad) b0 = i;
          for (size_t i = 1; i < me1.size(); ++i)
            if (me1[i].sad < me1[b1].sad) b1 = i;
          Candidate c{BlockMode::Bi, int(b0), int(b1), me0[b0].mv, me1[b1].mv};
          BlockPixels p0 = mc_pred(*l0.frames[b0], bx, by, me0[b0].mv);
          BlockPixels p1 = mc_pred(*l1.frames[b1], bx, by, me1[b1].mv);
          options.push_back({c, bi_average(p0, p1)});
        }
      }

      Trial best;
      Candidate best_cand;
      bool have = false;
      for (const Option& opt : options) {
        Trial t = trial_encode(ob, opt.pred, intra, opt.cand, step, lambda);
        if (!have || t.cost < best.cost) {
          best = std::move(t);
          best_cand = opt.cand;
          have = true;
        }
      }

      write_block_syntax(bw, intra, best_cand, best.levels);
      paste_block(ef.recon, best.recon, bx, by);

      BlockRecord rec;
      rec.bx = bx;
      rec.by = by;
      rec.mode = best_cand.mode;
      if (rec.mode == BlockMode::Uni0 || rec.mode == BlockMode::Bi) {
        rec.ref0 = best_cand.ref0;
        rec.ref0_virtual = l0.entries[size_t(rec.ref0)].is_virtual;
        rec.mv0 = best_cand.mv0;
      }
      if (rec.mode == BlockMode::Uni1 || rec.mode == BlockMode::Bi) {
        rec.ref1 = best_cand.ref1;
        rec.ref1_virtual = l1.entries[size_t(rec.ref1)].is_virtual;
        rec.mv1 = best_cand.mv1;
      }
      ef.blocks.push_back(rec);
    }
  }

  ef.block_bits = bw.bit_count() - bits_before;
  bw.byte_align();
  return ef;
}

Frame decode_frame_blocks(BitReader& br, int width, int height,
                          const FrameHeader& h, const RefList& l0,
                          const RefList& l1,
                          std::vector<BlockRecord>* records) {
  if (width % 16 || height % 16)
    throw Error("decode_frame_blocks: dimensions must be multiples of 16");
  const double step = quant_step(h.qp);
  Frame recon = Frame::allocate(width, height);
  recon.poc = h.poc;

  for (int by = 0; by < height; by += 16) {
    for (int bx = 0; bx < width; bx += 16) {
      Candidate c;
      if (!h.intra) {
        uint32_t m = br.read_ue();
        if (m > 3) throw Error("invalid block mode");
        c.mode = BlockMode(int(m));
        if (c.mode == BlockMode::Uni0 || c.mode == BlockMode::Bi) {
          c.ref0 = int(br.read_ue());
          if (size_t(c.ref0) >= l0.size())
            throw Error("list-0 reference index out of range");
          c.mv0.x = br.read_se();
          c.mv0.y = br.read_se();
        }
        if (c.mode == BlockMode::Uni1 || c.mode == BlockMode::Bi) {
          c.ref1 = int(br.read_ue());
          if (size_t(c.ref1) >= l1.size())
            throw Error("list-1 reference index out of range");
          c.mv1.x = br.read_se();
          c.mv1.y = br.read_se();
        }
      }

      BlockPixels pred;
      switch (c.mode) {
        case BlockMode::IntraDc:
          pred = intra_dc_pred(recon, bx, by);
          break;
        case BlockMode::Uni0:
          pred = mc_pred(*l0.frames[size_t(c.ref0)], bx, by, c.mv0);
          break;
        case BlockMode::Uni1:
          pred = mc_pred(*l1.frames[size_t(c.ref1)], bx, by, c.mv1);
          break;
        case BlockMode::Bi:
          pred = bi_average(mc_pred(*l0.frames[size_t(c.ref0)], bx, by, c.mv0),
                            mc_pred(*l1.frames[size_t(c.ref1)], bx, by, c.mv1));
          break;
      }

      static constexpr int kLumaOff[4][2] = {{0, 0}, {8, 0}, {0, 8}, {8, 8}};
      for (int i = 0; i < 4; ++i)
        reconstruct_subblock_from_levels(read_levels(br), step, pred.y.data(),
                                         16, kLumaOff[i][0], kLumaOff[i][1]);
      reconstruct_subblock_from_levels(read_levels(br), step, pred.u.data(), 8,
                                       0, 0);
      reconstruct_subblock_from_levels(read_levels(br), step, pred.v.data(), 8,
                                       0, 0);
      paste_block(recon, pred, bx, by);

      if (records) {
        BlockRecord rec;
        rec.bx = bx;
        rec.by = by;
        rec.mode = c.mode;
        if (c.mode == BlockMode::Uni0 || c.mode == BlockMode::Bi) {
          rec.ref0 = c.ref0;
          rec.ref0_virtual = l0.entries[size_t(c.ref0)].is_virtual;
          rec.mv0 = c.mv0;
        }
        if (c.mode == BlockMode::Uni1 || c.mode == BlockMode::Bi) {
          rec.ref1 = c.ref1;
          rec.ref1_virtual = l1.entries[size_t(c.ref1)].is_virtual;
          rec.mv1 = c.mv1;
        }
        records->push_back(rec);
      }
    }
  }
  return recon;
}

void write_container_header(std::vector<uint8_t>& out, const ContainerHeader& h) {
  out.push_back('S');
  out.push_back('M');
  out.push_back('C');
  out.push_back('1');
  put_u16(out, uint16_t(h.width));
  put_u16(out, uint16_t(h.height));
  put_u32(out, uint32_t(h.frame_count));
  out.push_back(uint8_t(h.qp));
  put_u16(out, uint16_t(h.intra_period));
  out.push_back(h.flags);
}

ContainerHeader read_container_header(const std::vector<uint8_t>& data,
                                      size_t& offset) {
  if (data.size() < 16) throw Error("container: truncated header");
  if (data[0] != 'S' || data[1] != 'M' || data[2] != 'C' || data[3] != '1')
    throw Error("container: bad magic");
  ContainerHeader h;
  h.width = get_u16(&data[4]);
  h.height = get_u16(&data[6]);
  h.frame_count = int(get_u32(&data[8]));
  h.qp = data[12];
  h.intra_period = get_u16(&data[13]);
  h.flags = data[15];
  if (h.width <= 0 || h.height <= 0 || h.width % 16 || h.height % 16)
    throw Error("container: invalid dimensions");
  if (h.qp > 51) throw Error("container: invalid qp");
  if (h.intra_period <= 0 || h.intra_period % 8)
    throw Error("container: invalid intra period");
  offset = 16;
  return h;
}

void append_payload(std::vector<uint8_t>& out, const std::vector<uint8_t>& payload) {
  put_u32(out, uint32_t(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
}

std::vector<uint8_t> read_payload(const std::vector<uint8_t>& data, size_t& offset) {
  if (offset + 4 > data.size()) throw Error("container: truncated payload length");
  uint32_t n = get_u32(&data[offset]);
  offset += 4;
  if (offset + n > data.size()) throw Error("container: truncated payload");
  std::vector<uint8_t> payload(data.begin() + long(offset),
                               data.begin() + long(offset + n));
  offset += n;
  return payload;
}

} // namespace smc
