#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smc/flow.hpp"
#include "smc/frame.hpp"

namespace smc {

/// Multi-channel half-resolution feature map. The default operator set
/// carries the 6 packed channels plus one confidence channel.
struct FeatureState {
  std::vector<Planef> ch;

  int width2() const { return ch.empty() ? 0 : ch[0].w; }
  int height2() const { return ch.empty() ? 0 : ch[0].h; }
};

FeatureState zero_placeholder(int channels, int w2, int h2);

/// Pluggable stage operators. All must be pure: same input, bit-identical
/// output.
///
/// extract receives 6 packed channels + feature_channels incoming channels.
/// refine_f receives either state + 6 packed + incoming placeholder
/// (2C+6 channels) or state + incoming warped state (2C channels).
struct OperatorSet {
  int feature_channels = 0;
  std::function<FeatureState(const std::vector<Planef>&)> extract;
  std::function<FeatureState(const FeatureState&)> refine_b;
  std::function<FeatureState(const std::vector<Planef>&)> refine_f;
  std::function<PackedFrame(const FeatureState&)> reconstruct;
};

/// Per-stage invocation counters, used to verify module reuse under joint
/// inference.
struct CallLog {
  std::atomic<long> theta{0}, phi{0};
  std::atomic<long> eq4{0}, eq5{0}, eq6{0}, eq7{0}, eq8{0}, eq9{0};
  std::atomic<long> reconstruct_0{0}, reconstruct_t{0}, reconstruct_1{0};

  std::map<std::string, long> counts() const;
  void reset();
};

enum class RunMode { Enh, Syn, Joint };

struct RunOutput {
  std::optional<Frame> enh0;
  std::optional<Frame> enh1;
  std::optional<Frame> syn;
};

/// Confidence-weighted blend: w = c_in / (c_in + c_own) per pixel; output
/// content = own + w*(inc - own). Both confidences zero gives w = 0.
void blend_channels(std::vector<Planef>& own, const Planef& c_own,
                    const std::vector<Planef>& inc, const Planef& c_in,
                    Planef& conf_out);

/// Attenuates a warped feature's confidence by its normalized absolute
/// residual against the state's own channels, then blends.
Planef attenuate_confidence(const std::vector<Planef>& own,
                            const std::vector<Planef>& inc,
                            const Planef& c_in_raw);

/// Deterministic classical operator set ("MCFuse"): identity feature lift
/// plus confidence-weighted motion-compensated fusion.
OperatorSet default_operator_set();

struct StenetConfig {
  // Full-search range of the classical flow estimator. Normative for the
  // bitstream: encoder and decoder synthesis must match bit-exactly.
  int flow_search_range = 32;
};

/// Executes the bidirectional-recurrent dataflow on one frame pair.
/// Enh skips the intermediate-state stages; Syn skips the endpoint
/// reconstructions; Joint runs everything once.
RunOutput run(const Frame& i0, const Frame& i1, RunMode mode,
              const OperatorSet& ops, CallLog& log,
              const StenetConfig& cfg = {});

/// Block-based inference: runs the dataflow per padded tile of `grid` and
/// assembles outputs from tile core regions.
RunOutput run_tiled(const Frame& i0, const Frame& i1, RunMode mode,
                    const OperatorSet& ops, CallLog& log,
                    const TileGrid& grid, const StenetConfig& cfg = {});

} // namespace smc
