#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "smc/frame.hpp"

namespace smc {

enum class ActionKind { S, E, J };

/// One scheduled enhancement-window action: synthesis for `target`,
/// enhancement of a frame pair, or the joint form.
struct Action {
  ActionKind kind = ActionKind::S;
  int target = 0; // S/J: frame receiving the virtual reference; E: upper pair member
  int d = 0;      // S only

  // Reconstructed inputs the action reads.
  std::vector<int> inputs() const;
  // Frames whose enhanced version the action produces (E/J).
  std::vector<int> enhanced() const;

  bool operator==(const Action&) const = default;
};

/// Action kinds triggered for POC p (empty set for p mod 8 == 0).
std::set<ActionKind> mode_of(int p);

/// Synthesis POC distance for p (precondition: p mod 8 in {2,3,4,6,7}).
int distance_of(int p);

/// Actions that fire around the encode of `poc`: `pre` runs immediately
/// before (S/J), `post` immediately after reconstruction (E). Actions whose
/// inputs exceed last_poc are dropped.
struct PocActions {
  std::optional<Action> pre;
  std::optional<Action> post;
};
PocActions actions_at(int poc, int last_poc);

/// The ordered action list for window [base_poc, base_poc+8), interleaved
/// with the GOP-8 coding order.
std::vector<Action> plan_window(int base_poc, int last_poc);

// --- PFE block flags ------------------------------------------------------

/// One bit per tile, row-major. Serialized layout: u16 cols, u16 rows,
/// then ceil(cols*rows/8) bytes, MSB-first.
struct PfeFlagSection {
  int poc = 0;
  int cols = 0;
  int rows = 0;
  std::vector<bool> flags; // row-major, size cols*rows

  std::vector<uint8_t> serialize() const; // without the poc prefix
  static PfeFlagSection parse(int poc, const uint8_t* data, size_t n,
                              size_t& consumed);
};

/// Flag per tile: 1 iff the filtered tile is strictly closer to the
/// original than the reconstruction (summed SSE over Y, U, V of the tile
/// core; ties keep the reconstruction).
std::vector<bool> decide_pfe_flags(const Frame& orig, const Frame& recon,
                                   const Frame& filtered, const TileGrid& grid);

/// Assembles the output frame tile-wise: filtered where flagged, recon
/// elsewhere.
Frame apply_pfe_flags(const Frame& recon, const Frame& filtered,
                      const TileGrid& grid, const std::vector<bool>& flags);

// --- temporary buffer for enhanced frames ---------------------------------

/// Holds enhanced frames until the whole window is processed, then emits
/// in display order. Orphan slots (enhancement dropped at sequence end)
/// pass the reconstruction through.
class WindowBuffer {
public:
  WindowBuffer(int base_poc, int last_poc);

  int base_poc() const { return base_; }
  /// POCs of this window that exist in the sequence.
  std::vector<int> slots() const;
  /// POCs expected to be enhanced, per the window plan.
  const std::set<int>& expected() const { return expected_; }

  void store_enhanced(int poc, Frame f);
  void store_recon(int poc, const Frame& f);
  bool complete() const;

  /// Display-order emission; throws if expected enhancements are missing.
  std::vector<Frame> emit() const;

private:
  int base_ = 0;
  int last_ = 0;
  std::set<int> expected_;
  std::map<int, Frame> enhanced_;
  std::map<int, Frame> recon_;
};

} // namespace smc
