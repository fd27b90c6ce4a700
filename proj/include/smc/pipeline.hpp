#pragma once

#include <map>
#include <string>
#include <vector>

#include "smc/codec.hpp"
#include "smc/sched.hpp"
#include "smc/stenet.hpp"

namespace smc {

struct ToolToggles {
  bool rfs = true;
  bool pfe = true;
  bool jise = true;
};

struct EncodeOptions {
  CodecConfig codec;
  ToolToggles tools;
  StenetConfig stenet;
};

/// One executed scheduler action with its stage-invocation counts.
struct ActionTrace {
  int order = 0;
  ActionKind kind = ActionKind::S;
  int target = 0;
  int d = 0;
  std::vector<int> inputs;
  std::map<std::string, long> calls;
};

/// Input provenance of one synthesis action, for the buffer-purity audit:
/// virtual references must be built from reconstructions, never from
/// enhanced frames.
struct SynthesisAudit {
  int target = 0;
  std::vector<int> input_pocs;
  std::vector<uint64_t> input_hashes;
};

struct PocBlocks {
  int poc = 0;
  std::vector<BlockRecord> blocks;
};

struct EncodeResult {
  std::vector<uint8_t> bitstream;
  std::vector<Frame> recons;   // display order
  std::vector<Frame> outputs;  // display order, post-enhancement
  std::map<int, size_t> frame_bits;
  size_t total_bits = 0;
  std::vector<ActionTrace> actions;
  std::vector<PocBlocks> blocks;           // coding order
  std::vector<SynthesisAudit> synthesis_audit;
  std::map<int, uint64_t> recon_hashes;    // hashes at DPB-insert time
};

struct DecodeResult {
  ContainerHeader header;
  std::vector<Frame> recons;
  std::vector<Frame> outputs;
};

EncodeResult encode_sequence(const std::vector<Frame>& frames,
                             const EncodeOptions& opts);

DecodeResult decode_sequence(const std::vector<uint8_t>& bitstream,
                             const StenetConfig& stenet = {});

} // namespace smc
