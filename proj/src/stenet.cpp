#include "smc/stenet.hpp"

#include <algorithm>
#include <cmath>

namespace smc {

FeatureState zero_placeholder(int channels, int w2, int h2) {
  FeatureState s;
  s.ch.assign(size_t(channels), Planef(w2, h2, 0.f));
  return s;
}

std::map<std::string, long> CallLog::counts() const {
  return {
      {"theta", theta.load()},
      {"phi", phi.load()},
      {"eq4", eq4.load()},
      {"eq5", eq5.load()},
      {"eq6", eq6.load()},
      {"eq7", eq7.load()},
      {"eq8", eq8.load()},
      {"eq9", eq9.load()},
      {"reconstruct_0", reconstruct_0.load()},
      {"reconstruct_t", reconstruct_t.load()},
      {"reconstruct_1", reconstruct_1.load()},
  };
}

void CallLog::reset() {
  theta = phi = 0;
  eq4 = eq5 = eq6 = eq7 = eq8 = eq9 = 0;
  reconstruct_0 = reconstruct_t = reconstruct_1 = 0;
}

void blend_channels(std::vector<Planef>& own, const Planef& c_own,
                    const std::vector<Planef>& inc, const Planef& c_in,
                    Planef& conf_out) {
  if (own.size() != inc.size()) throw Error("blend_channels: channel mismatch");
  const size_t n = c_own.v.size();
  conf_out = Planef(c_own.w, c_own.h);
  for (size_t i = 0; i < n; ++i) {
    float co = c_own.v[i];
    float ci = c_in.v[i];
    float denom = co + ci;
    float w = denom > 0.f ? ci / denom : 0.f;
    for (size_t c = 0; c < own.size(); ++c) {
      float o = own[c].v[i];
      own[c].v[i] = o + w * (inc[c].v[i] - o);
    }
    conf_out.v[i] = std::max(co, ci);
  }
}

Planef attenuate_confidence(const std::vector<Planef>& own,
                            const std::vector<Planef>& inc,
                            const Planef& c_in_raw) {
  Planef out(c_in_raw.w, c_in_raw.h);
  const float norm = 1.f / (255.f * float(own.size()));
  for (size_t i = 0; i < out.v.size(); ++i) {
    float resid = 0.f;
    for (size_t c = 0; c < own.size(); ++c)
      resid += std::abs(inc[c].v[i] - own[c].v[i]);
    float r = std::clamp(resid * norm, 0.f, 1.f);
    out.v[i] = std::max(0.f, c_in_raw.v[i] * (1.f - r));
  }
  return out;
}

namespace {

constexpr int kContent = 6;
constexpr int kFeatChannels = 7; // 6 packed + 1 confidence

std::vector<Planef> slice(const std::vector<Planef>& v, size_t a, size_t n) {
  return {v.begin() + long(a), v.begin() + long(a + n)};
}

FeatureState make_state(std::vector<Planef> content, Planef conf) {
  FeatureState s;
  s.ch = std::move(content);
  s.ch.push_back(std::move(conf));
  return s;
}

// Fuse incoming warped channels (content + raw confidence) into own content.
FeatureState fuse_warped(std::vector<Planef> own, const Planef& c_own,
                         const std::vector<Planef>& inc_content,
                         const Planef& inc_conf_raw) {
  Planef c_in = attenuate_confidence(own, inc_content, inc_conf_raw);
  Planef conf_out;
  blend_channels(own, c_own, inc_content, c_in, conf_out);
  return make_state(std::move(own), std::move(conf_out));
}

} // namespace

OperatorSet default_operator_set() {
  OperatorSet ops;
  ops.feature_channels = kFeatChannels;

  // Identity lift of the packed channels with unit confidence, then fuse
  // the incoming warped feature.
  ops.extract = [](const std::vector<Planef>& planes) {
    if (planes.size() != kContent + kFeatChannels)
      throw Error("extract: unexpected channel count");
    std::vector<Planef> own = slice(planes, 0, kContent);
    Planef ones(own[0].w, own[0].h, 1.f);
    return fuse_warped(std::move(own), ones, slice(planes, kContent, kContent),
                       planes[kContent + kContent]);
  };

  ops.refine_b = [](const FeatureState& s) { return s; };

  ops.refine_f = [](const std::vector<Planef>& planes) {
    if (planes.size() == 2 * kFeatChannels + kContent) {
      // state + packed original + placeholder
      std::vector<Planef> own = slice(planes, 0, kContent);
      Planef c_own = planes[kContent];
      Planef ones(own[0].w, own[0].h, 1.f);
      Planef conf1;
      blend_channels(own, c_own, slice(planes, kFeatChannels, kContent), ones,
                     conf1);
      return fuse_warped(std::move(own), conf1,
                         slice(planes, kFeatChannels + kContent, kContent),
                         planes[2 * kFeatChannels + kContent - 1]);
    }
    if (planes.size() == 2 * kFeatChannels) {
      std::vector<Planef> own = slice(planes, 0, kContent);
      Planef c_own = planes[kContent];
      return fuse_warped(std::move(own), c_own,
                         slice(planes, kFeatChannels, kContent),
                         planes[2 * kFeatChannels - 1]);
    }
    throw Error("refine_f: unexpected channel count");
  };

  ops.reconstruct = [](const FeatureState& s) {
    if (s.ch.size() != kFeatChannels)
      throw Error("reconstruct: unexpected channel count");
    PackedFrame p;
    p.width2 = s.width2();
    p.height2 = s.height2();
    p.channels = slice(s.ch, 0, kContent);
    return p;
  };

  return ops;
}

namespace {

FeatureState warp_state(const FeatureState& s, const FlowField& flow) {
  FeatureState out;
  out.ch.reserve(s.ch.size());
  for (const Planef& p : s.ch) out.ch.push_back(warp_plane(p, flow));
  return out;
}

std::vector<Planef> concat(std::initializer_list<const std::vector<Planef>*> parts) {
  std::vector<Planef> out;
  for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
  return out;
}

void check_shape(const FeatureState& s, int c, int w2, int h2,
                 const char* stage) {
  if (int(s.ch.size()) != c)
    throw Error(std::string(stage) + ": operator produced wrong channel count");
  for (const Planef& p : s.ch)
    if (p.w != w2 || p.h != h2)
      throw Error(std::string(stage) + ": operator produced wrong shape");
}

} // namespace

RunOutput run(const Frame& i0, const Frame& i1, RunMode mode,
              const OperatorSet& ops, CallLog& log, const StenetConfig& cfg) {
  if (!i0.same_size(i1)) throw Error("stenet: dimension mismatch");
  const int w2 = i0.width / 2;
  const int h2 = i0.height / 2;
  const int C = ops.feature_channels;

  const PackedFrame p0 = pack_six_channel(i0);
  const PackedFrame p1 = pack_six_channel(i1);

  auto [f_t0, f_t1] = estimate_intermediate_flows(i0, i1, cfg.flow_search_range);
  log.theta++;
  auto [f_01, f_10] = reuse_flows(f_t0, f_t1);
  log.phi++;
  const FlowField dt0 = downsample_flow(f_t0);
  const FlowField dt1 = downsample_flow(f_t1);
  const FlowField d01 = downsample_flow(f_01);
  const FlowField d10 = downsample_flow(f_10);

  const FeatureState zero = zero_placeholder(C, w2, h2);

  // Backward branch.
  auto in4 = concat({&p1.channels, &zero.ch});
  FeatureState e1b = ops.refine_b(ops.extract(in4));
  log.eq4++;
  check_shape(e1b, C, w2, h2, "eq4");

  FeatureState w_e1b = warp_state(e1b, d01);
  auto in5 = concat({&p0.channels, &w_e1b.ch});
  FeatureState e0b = ops.refine_b(ops.extract(in5));
  log.eq5++;
  check_shape(e0b, C, w2, h2, "eq5");

  FeatureState stb;
  if (mode != RunMode::Enh) {
    stb = ops.refine_b(warp_state(e1b, dt1));
    log.eq6++;
    check_shape(stb, C, w2, h2, "eq6");
  }

  // Forward branch.
  auto in7 = concat({&e0b.ch, &p0.channels, &zero.ch});
  FeatureState e0f = ops.refine_f(in7);
  log.eq7++;
  check_shape(e0f, C, w2, h2, "eq7");

  FeatureState w_e0f_10 = warp_state(e0f, d10);
  auto in8 = concat({&e1b.ch, &w_e0f_10.ch});
  FeatureState e1f = ops.refine_f(in8);
  log.eq8++;
  check_shape(e1f, C, w2, h2, "eq8");

  FeatureState stf;
  if (mode != RunMode::Enh) {
    FeatureState w_e0f_t0 = warp_state(e0f, dt0);
    auto in9 = concat({&stb.ch, &w_e0f_t0.ch});
    stf = ops.refine_f(in9);
    log.eq9++;
    check_shape(stf, C, w2, h2, "eq9");
  }

  RunOutput out;
  if (mode != RunMode::Syn) {
    out.enh0 = unpack_six_channel(ops.reconstruct(e0f));
    log.reconstruct_0++;
    out.enh1 = unpack_six_channel(ops.reconstruct(e1f));
    log.reconstruct_1++;
  }
  if (mode != RunMode::Enh) {
    out.syn = unpack_six_channel(ops.reconstruct(stf));
    log.reconstruct_t++;
  }
  return out;
}

RunOutput run_tiled(const Frame& i0, const Frame& i1, RunMode mode,
                    const OperatorSet& ops, CallLog& log,
                    const TileGrid& grid, const StenetConfig& cfg) {
  if (!i0.same_size(i1)) throw Error("stenet: dimension mismatch");
  RunOutput out;
  auto prep = [&](std::optional<Frame>& f) {
    f = Frame::allocate(i0.width, i0.height);
  };
  if (mode != RunMode::Syn) {
    prep(out.enh0);
    prep(out.enh1);
  }
  if (mode != RunMode::Enh) prep(out.syn);

  for (const Tile& t : grid.tiles) {
    Frame c0 = crop(i0, t.px0, t.py0, t.pw, t.ph);
    Frame c1 = crop(i1, t.px0, t.py0, t.pw, t.ph);
    RunOutput r = run(c0, c1, mode, ops, log, cfg);
    auto paste_core = [&](Frame& dst, const Frame& src) {
      paste(dst, src, t.x0, t.y0, t.x0 - t.px0, t.y0 - t.py0, t.core_w,
            t.core_h);
    };
    if (out.enh0) paste_core(*out.enh0, *r.enh0);
    if (out.enh1) paste_core(*out.enh1, *r.enh1);
    if (out.syn) paste_core(*out.syn, *r.syn);
  }
  if (out.enh0) out.enh0->poc = i0.poc;
  if (out.enh1) out.enh1->poc = i1.poc;
  return out;
}

} // namespace smc
