#include "smc/pipeline.hpp"

#include <algorithm>

namespace smc {

namespace {

struct PreActionOutcome {
  std::optional<Frame> virtual_ref;
  std::optional<Frame> filtered_lo; // for input_pocs[0]
  std::optional<Frame> filtered_hi; // for input_pocs[1]
};

// Executes the STENet work of one pre-encode action (S or J) from DPB
// reconstructions. With jise disabled, a J position runs the synthesis and
// enhancement pipelines independently; outputs are bit-identical.
PreActionOutcome run_pre_action(const Action& a, const Dpb& dpb,
                                const ToolToggles& tools,
                                const OperatorSet& ops, const TileGrid& grid,
                                CallLog& log, const StenetConfig& cfg) {
  PreActionOutcome out;
  auto in = a.inputs();
  const Frame& i0 = dpb.get(in[0]);
  const Frame& i1 = dpb.get(in[1]);

  if (a.kind == ActionKind::S) {
    if (!tools.rfs) return out;
    RunOutput r = run_tiled(i0, i1, RunMode::Syn, ops, log, grid, cfg);
    out.virtual_ref = std::move(*r.syn);
    return out;
  }
  // Joint position.
  if (tools.rfs && tools.pfe) {
    if (tools.jise) {
      RunOutput r = run_tiled(i0, i1, RunMode::Joint, ops, log, grid, cfg);
      out.virtual_ref = std::move(*r.syn);
      out.filtered_lo = std::move(*r.enh0);
      out.filtered_hi = std::move(*r.enh1);
    } else {
      RunOutput re = run_tiled(i0, i1, RunMode::Enh, ops, log, grid, cfg);
      RunOutput rs = run_tiled(i0, i1, RunMode::Syn, ops, log, grid, cfg);
      out.virtual_ref = std::move(*rs.syn);
      out.filtered_lo = std::move(*re.enh0);
      out.filtered_hi = std::move(*re.enh1);
    }
  } else if (tools.rfs) {
    RunOutput r = run_tiled(i0, i1, RunMode::Syn, ops, log, grid, cfg);
    out.virtual_ref = std::move(*r.syn);
  } else if (tools.pfe) {
    RunOutput r = run_tiled(i0, i1, RunMode::Enh, ops, log, grid, cfg);
    out.filtered_lo = std::move(*r.enh0);
    out.filtered_hi = std::move(*r.enh1);
  }
  return out;
}

Rpl insert_virtual(Rpl rpl, int poc) {
  RplEntry v{poc, true};
  if (rpl.l0.empty() || rpl.l1.empty())
    throw Error("virtual reference requires nonempty reference lists");
  rpl.l0.insert(rpl.l0.begin() + 1, v);
  rpl.l1.insert(rpl.l1.begin() + 1, v);
  return rpl;
}

RefList resolve(const std::vector<RplEntry>& entries, const Dpb& dpb,
                const Frame* virtual_ref) {
  RefList rl;
  rl.entries = entries;
  for (const RplEntry& e : entries) {
    if (e.is_virtual) {
      if (!virtual_ref) throw Error("virtual reference not available");
      rl.frames.push_back(virtual_ref);
    } else {
      rl.frames.push_back(&dpb.get(e.poc));
    }
  }
  return rl;
}

void append_sections(std::vector<uint8_t>& payload,
                     const std::vector<PfeFlagSection>& sections) {
  payload.push_back(uint8_t(sections.size()));
  for (const PfeFlagSection& s : sections) {
    payload.push_back(uint8_t(s.poc & 0xff));
    payload.push_back(uint8_t((s.poc >> 8) & 0xff));
    std::vector<uint8_t> body = s.serialize();
    payload.insert(payload.end(), body.begin(), body.end());
  }
}

std::vector<PfeFlagSection> parse_sections(const std::vector<uint8_t>& payload,
                                           size_t offset) {
  if (offset >= payload.size()) throw Error("payload: missing section count");
  int count = payload[offset++];
  std::vector<PfeFlagSection> sections;
  for (int i = 0; i < count; ++i) {
    if (offset + 2 > payload.size()) throw Error("payload: truncated section poc");
    int poc = payload[offset] | (payload[offset + 1] << 8);
    offset += 2;
    size_t consumed = 0;
    sections.push_back(PfeFlagSection::parse(poc, payload.data() + offset,
                                             payload.size() - offset, consumed));
    offset += consumed;
  }
  if (offset != payload.size()) throw Error("payload: trailing bytes");
  return sections;
}

WindowBuffer& window_for(std::map<int, WindowBuffer>& windows, int poc,
                         int last_poc) {
  int base = (poc / 8) * 8;
  auto it = windows.find(base);
  if (it == windows.end())
    it = windows.emplace(base, WindowBuffer(base, last_poc)).first;
  return it->second;
}

} // namespace

EncodeResult encode_sequence(const std::vector<Frame>& frames,
                             const EncodeOptions& opts) {
  opts.codec.validate();
  if (frames.empty()) throw Error("encode_sequence: no frames");
  const int w = frames[0].width;
  const int h = frames[0].height;
  if (w % 16 || h % 16)
    throw Error("encode_sequence: dimensions must be multiples of 16");
  for (const Frame& f : frames)
    if (f.width != w || f.height != h)
      throw Error("encode_sequence: mixed dimensions");

  const int n = int(frames.size());
  const int last = n - 1;
  const TileGrid grid = make_tile_grid(w, h);
  const OperatorSet ops = default_operator_set();
  const ToolToggles& tools = opts.tools;

  EncodeResult res;
  ContainerHeader ch;
  ch.width = w;
  ch.height = h;
  ch.frame_count = n;
  ch.qp = opts.codec.qp;
  ch.intra_period = opts.codec.intra_period;
  // The JISE bit records whether joint positions are active (both tools
  // on). Disabling JISE at the encoder changes only inference counts, not
  // outputs, so it does not alter the bitstream.
  ch.flags = uint8_t((tools.rfs ? kFlagRfs : 0) | (tools.pfe ? kFlagPfe : 0) |
                     (tools.rfs && tools.pfe ? kFlagJise : 0));
  write_container_header(res.bitstream, ch);

  Dpb dpb;
  std::map<int, WindowBuffer> windows;
  std::map<int, CallLog> logs; // keyed by action target
  int action_order = 0;

  for (int poc : coding_order(n, opts.codec)) {
    dpb.prune_below(poc - 16);
    const bool intra = poc % opts.codec.intra_period == 0;
    const PocActions acts = actions_at(poc, last);

    std::optional<Frame> virtual_ref;
    std::vector<PfeFlagSection> pending_sections;

    auto handle_filtered_pair = [&](const Action& a, const Frame& flo,
                                    const Frame& fhi) {
      auto in = a.inputs();
      for (int k = 0; k < 2; ++k) {
        int p = in[k];
        const Frame& filtered = k == 0 ? flo : fhi;
        const Frame& recon = dpb.get(p);
        PfeFlagSection sec;
        sec.poc = p;
        sec.cols = grid.cols;
        sec.rows = grid.rows;
        sec.flags = decide_pfe_flags(frames[size_t(p)], recon, filtered, grid);
        Frame out = apply_pfe_flags(recon, filtered, grid, sec.flags);
        window_for(windows, p, last).store_enhanced(p, std::move(out));
        pending_sections.push_back(std::move(sec));
      }
    };

    const bool pre_active =
        acts.pre && (acts.pre->kind == ActionKind::S ? tools.rfs
                                                     : tools.rfs || tools.pfe);
    if (pre_active) {
      const Action& a = *acts.pre;
      CallLog& log = logs[a.target];
      PreActionOutcome pre = run_pre_action(a, dpb, tools, ops, grid, log,
                                            opts.stenet);
      if (pre.virtual_ref) {
        SynthesisAudit audit;
        audit.target = a.target;
        audit.input_pocs = a.inputs();
        for (int p : audit.input_pocs)
          audit.input_hashes.push_back(frame_hash(dpb.get(p)));
        res.synthesis_audit.push_back(std::move(audit));
        virtual_ref = std::move(pre.virtual_ref);
      }
      if (pre.filtered_lo) handle_filtered_pair(a, *pre.filtered_lo, *pre.filtered_hi);

      ActionTrace tr;
      tr.order = action_order++;
      tr.kind = a.kind;
      tr.target = a.target;
      tr.d = a.d;
      tr.inputs = a.inputs();
      tr.calls = log.counts();
      res.actions.push_back(std::move(tr));
    }

    Rpl rpl = derive_rpls(poc, dpb, opts.codec, intra);
    if (virtual_ref) rpl = insert_virtual(std::move(rpl), poc);
    RefList l0 = resolve(rpl.l0, dpb, virtual_ref ? &*virtual_ref : nullptr);
    RefList l1 = resolve(rpl.l1, dpb, virtual_ref ? &*virtual_ref : nullptr);

    BitWriter bw;
    EncodedFrame ef = encode_frame(frames[size_t(poc)], l0, l1, intra,
                                   opts.codec, bw);
    res.recon_hashes[poc] = frame_hash(ef.recon);
    dpb.insert(poc, ef.recon);
    window_for(windows, poc, last).store_recon(poc, ef.recon);
    res.blocks.push_back({poc, std::move(ef.blocks)});
    // Virtual reference is discarded here: it never enters the DPB.

    if (acts.post && tools.pfe) {
      const Action& a = *acts.post;
      CallLog& log = logs[a.target];
      auto in = a.inputs();
      RunOutput r = run_tiled(dpb.get(in[0]), dpb.get(in[1]), RunMode::Enh, ops,
                              log, grid, opts.stenet);
      handle_filtered_pair(a, *r.enh0, *r.enh1);

      ActionTrace tr;
      tr.order = action_order++;
      tr.kind = a.kind;
      tr.target = a.target;
      tr.inputs = a.inputs();
      tr.calls = log.counts();
      res.actions.push_back(std::move(tr));
    }

    std::vector<uint8_t> payload = bw.take();
    append_sections(payload, pending_sections);
    res.frame_bits[poc] = payload.size() * 8;
    append_payload(res.bitstream, payload);

    // Keep a full display-order recon copy for reporting.
    if (res.recons.size() < size_t(n)) res.recons.resize(size_t(n));
    res.recons[size_t(poc)] = dpb.get(poc);
  }

  res.total_bits = res.bitstream.size() * 8;

  if (!tools.pfe) {
    res.outputs = res.recons;
  } else {
    res.outputs.resize(size_t(n));
    for (auto& [base, wb] : windows) {
      for (Frame& f : wb.emit()) {
        int p = f.poc;
        res.outputs[size_t(p)] = std::move(f);
      }
    }
  }
  return res;
}

DecodeResult decode_sequence(const std::vector<uint8_t>& bitstream,
                             const StenetConfig& stenet) {
  size_t offset = 0;
  DecodeResult res;
  res.header = read_container_header(bitstream, offset);
  const ContainerHeader& ch = res.header;
  const int n = ch.frame_count;
  const int last = n - 1;
  if (n <= 0) return res;

  CodecConfig cfg;
  cfg.qp = ch.qp;
  cfg.intra_period = ch.intra_period;
  ToolToggles tools{ch.rfs(), ch.pfe(), true};

  const TileGrid grid = make_tile_grid(ch.width, ch.height);
  const OperatorSet ops = default_operator_set();
  CallLog log;

  Dpb dpb;
  std::map<int, WindowBuffer> windows;
  res.recons.resize(size_t(n));
  res.outputs.resize(size_t(n));

  for (int poc : coding_order(n, cfg)) {
    dpb.prune_below(poc - 16);
    const bool intra = poc % cfg.intra_period == 0;
    const PocActions acts = actions_at(poc, last);

    std::vector<uint8_t> payload = read_payload(bitstream, offset);
    BitReader br(payload);
    FrameHeader fh = read_frame_header(br);
    if (fh.poc != poc) throw Error("payload poc does not match coding order");
    if (fh.intra != intra) throw Error("payload frame type mismatch");
    if (fh.qp != ch.qp) throw Error("payload qp mismatch");

    std::optional<Frame> virtual_ref;
    std::optional<Frame> filtered_lo, filtered_hi;
    if (acts.pre && (tools.rfs || tools.pfe)) {
      PreActionOutcome pre =
          run_pre_action(*acts.pre, dpb, tools, ops, grid, log, stenet);
      virtual_ref = std::move(pre.virtual_ref);
      filtered_lo = std::move(pre.filtered_lo);
      filtered_hi = std::move(pre.filtered_hi);
    }

    Rpl rpl = derive_rpls(poc, dpb, cfg, intra);
    if (virtual_ref) rpl = insert_virtual(std::move(rpl), poc);
    RefList l0 = resolve(rpl.l0, dpb, virtual_ref ? &*virtual_ref : nullptr);
    RefList l1 = resolve(rpl.l1, dpb, virtual_ref ? &*virtual_ref : nullptr);

    Frame recon = decode_frame_blocks(br, ch.width, ch.height, fh, l0, l1);
    dpb.insert(poc, recon);
    window_for(windows, poc, last).store_recon(poc, recon);
    res.recons[size_t(poc)] = std::move(recon);

    br.byte_align();
    std::vector<PfeFlagSection> sections =
        parse_sections(payload, br.bits_consumed() / 8);

    std::vector<std::pair<int, const Frame*>> filtered;
    if (filtered_lo && acts.pre) {
      auto in = acts.pre->inputs();
      filtered.push_back({in[0], &*filtered_lo});
      filtered.push_back({in[1], &*filtered_hi});
    }
    std::optional<RunOutput> post_run;
    if (acts.post && tools.pfe) {
      auto in = acts.post->inputs();
      post_run = run_tiled(dpb.get(in[0]), dpb.get(in[1]), RunMode::Enh, ops,
                           log, grid, stenet);
      filtered.push_back({in[0], &*post_run->enh0});
      filtered.push_back({in[1], &*post_run->enh1});
    }

    if (sections.size() != filtered.size())
      throw Error("payload: unexpected PFE section count");
    for (size_t i = 0; i < sections.size(); ++i) {
      if (sections[i].poc != filtered[i].first)
        throw Error("payload: PFE section poc mismatch");
      if (sections[i].cols != grid.cols || sections[i].rows != grid.rows)
        throw Error("payload: PFE section grid mismatch");
      int p = sections[i].poc;
      Frame out = apply_pfe_flags(dpb.get(p), *filtered[i].second, grid,
                                  sections[i].flags);
      window_for(windows, p, last).store_enhanced(p, std::move(out));
    }
  }

  if (offset != bitstream.size()) throw Error("container: trailing bytes");

  if (!tools.pfe) {
    res.outputs = res.recons;
  } else {
    for (auto& [base, wb] : windows) {
      for (Frame& f : wb.emit()) res.outputs[size_t(f.poc)] = std::move(f);
    }
  }
  return res;
}

} // namespace smc
