#pragma once

#include <map>
#include <vector>

#include "smc/bitio.hpp"
#include "smc/frame.hpp"

namespace smc {

struct CodecConfig {
  int qp = 32;            // [0, 51]
  int gop = 8;
  int intra_period = 32;  // multiple of gop
  int search_range = 16;  // integer-pel full search
  int block = 16;
  double lambda_scale = 0.85;
  int fps_num = 30;
  int fps_den = 1;

  void validate() const;
};

/// Decoded picture buffer: POC -> closed-loop reconstruction. Enhanced
/// frames never enter here.
class Dpb {
public:
  void insert(int poc, Frame f);
  bool contains(int poc) const { return frames_.count(poc) != 0; }
  const Frame& get(int poc) const;
  void prune_below(int min_poc);
  const std::map<int, Frame>& all() const { return frames_; }

private:
  std::map<int, Frame> frames_;
};

struct RplEntry {
  int poc = -1;
  bool is_virtual = false;
};

struct Rpl {
  std::vector<RplEntry> l0;
  std::vector<RplEntry> l1;
};

/// Reference list resolved to frames; parallel to its entry metadata.
struct RefList {
  std::vector<const Frame*> frames;
  std::vector<RplEntry> entries;

  size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
};

/// Nearest-first real reference lists from the DPB (no virtual entries).
Rpl derive_rpls(int poc, const Dpb& dpb, const CodecConfig& cfg, bool intra);

/// Hierarchical GOP-8 coding order; POC 0 first.
std::vector<int> coding_order(int num_frames, const CodecConfig& cfg);

enum class BlockMode : int { IntraDc = 0, Uni0 = 1, Uni1 = 2, Bi = 3 };

struct MotionVector {
  int x = 0;
  int y = 0;
};

struct BlockRecord {
  int bx = 0, by = 0;
  BlockMode mode = BlockMode::IntraDc;
  int ref0 = -1, ref1 = -1;
  bool ref0_virtual = false, ref1_virtual = false;
  MotionVector mv0, mv1;
};

struct FrameHeader {
  int poc = 0;
  bool intra = false;
  int qp = 32;
};

struct EncodedFrame {
  FrameHeader header;
  Frame recon;
  std::vector<BlockRecord> blocks;
  size_t block_bits = 0;
};

void write_frame_header(BitWriter& bw, const FrameHeader& h);
FrameHeader read_frame_header(BitReader& br);

/// Trial-RD encoder for one frame. Writes header + per-block records into
/// `bw` (left byte-aligned). Frame dimensions must be multiples of 16.
EncodedFrame encode_frame(const Frame& orig, const RefList& l0,
                          const RefList& l1, bool intra,
                          const CodecConfig& cfg, BitWriter& bw);

/// Decodes block records (header already consumed); recon is bit-identical
/// to the encoder's.
Frame decode_frame_blocks(BitReader& br, int width, int height,
                          const FrameHeader& h, const RefList& l0,
                          const RefList& l1,
                          std::vector<BlockRecord>* records = nullptr);

// --- container ------------------------------------------------------------

constexpr uint8_t kFlagRfs = 1;
constexpr uint8_t kFlagPfe = 2;
constexpr uint8_t kFlagJise = 4;

struct ContainerHeader {
  int width = 0;
  int height = 0;
  int frame_count = 0;
  int qp = 32;
  int intra_period = 32;
  uint8_t flags = 0;

  bool rfs() const { return flags & kFlagRfs; }
  bool pfe() const { return flags & kFlagPfe; }
  bool jise() const { return flags & kFlagJise; }
};

void write_container_header(std::vector<uint8_t>& out, const ContainerHeader& h);
/// Returns the header and sets `offset` to the first payload byte.
ContainerHeader read_container_header(const std::vector<uint8_t>& data,
                                      size_t& offset);

void append_payload(std::vector<uint8_t>& out, const std::vector<uint8_t>& payload);
/// Reads the next length-prefixed payload; advances offset.
std::vector<uint8_t> read_payload(const std::vector<uint8_t>& data, size_t& offset);

} // namespace smc
