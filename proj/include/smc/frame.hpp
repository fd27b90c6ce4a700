#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace smc {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// One YUV 4:2:0 picture, 8-bit, even dimensions. Chroma planes are
/// half-size in each direction.
struct Frame {
  static constexpr int kBitDepth = 8;
  static constexpr int kMaxSample = 255;

  int width = 0;
  int height = 0;
  int poc = -1; // display index, -1 = unset

  std::vector<uint8_t> y;
  std::vector<uint8_t> u;
  std::vector<uint8_t> v;

  static Frame allocate(int w, int h, uint8_t fill = 0);

  int chroma_w() const { return width / 2; }
  int chroma_h() const { return height / 2; }

  uint8_t& Y(int x, int yy) { return y[size_t(yy) * width + x]; }
  uint8_t Y(int x, int yy) const { return y[size_t(yy) * width + x]; }
  uint8_t& U(int x, int yy) { return u[size_t(yy) * chroma_w() + x]; }
  uint8_t U(int x, int yy) const { return u[size_t(yy) * chroma_w() + x]; }
  uint8_t& V(int x, int yy) { return v[size_t(yy) * chroma_w() + x]; }
  uint8_t V(int x, int yy) const { return v[size_t(yy) * chroma_w() + x]; }

  // Border-clamped luma fetch, used by motion search and prediction.
  uint8_t y_clamped(int x, int yy) const;
  uint8_t u_clamped(int x, int yy) const;
  uint8_t v_clamped(int x, int yy) const;

  bool same_size(const Frame& o) const {
    return width == o.width && height == o.height;
  }
  bool same_samples(const Frame& o) const {
    return same_size(o) && y == o.y && u == o.u && v == o.v;
  }
};

/// Single-channel float plane used for features and flow components.
struct Planef {
  int w = 0;
  int h = 0;
  std::vector<float> v;

  Planef() = default;
  Planef(int w_, int h_, float fill = 0.f) : w(w_), h(h_), v(size_t(w_) * h_, fill) {}

  float& at(int x, int y) { return v[size_t(y) * w + x]; }
  float at(int x, int y) const { return v[size_t(y) * w + x]; }
};

/// Six half-resolution channels: 4 luma phases (PixelUnshuffle x2) + U + V.
struct PackedFrame {
  int width2 = 0;
  int height2 = 0;
  std::vector<Planef> channels; // size 6

  bool same_size(const PackedFrame& o) const {
    return width2 == o.width2 && height2 == o.height2;
  }
};

PackedFrame pack_six_channel(const Frame& f);
Frame unpack_six_channel(const PackedFrame& p);

// --- quality metrics ------------------------------------------------------

enum class PlaneSel { Y, U, V };

/// Sum of squared sample differences over one plane.
uint64_t plane_sse(const Frame& a, const Frame& b, PlaneSel sel);
/// Sum of squared differences over all three planes.
uint64_t total_sse(const Frame& a, const Frame& b);

double plane_mse(const Frame& a, const Frame& b, PlaneSel sel);

/// PSNR in dB. Zero MSE maps to +infinity (reported as "lossless").
double psnr(const Frame& a, const Frame& b, PlaneSel sel);
double psnr_from_mse(double mse, int bit_depth = 8);

constexpr double kLosslessPsnr = std::numeric_limits<double>::infinity();

// --- block tiling ---------------------------------------------------------

struct Tile {
  int x0 = 0, y0 = 0;          // core rectangle origin
  int core_w = 0, core_h = 0;  // core rectangle size
  int px0 = 0, py0 = 0;        // padded rectangle (clipped to frame)
  int pw = 0, ph = 0;
};

struct TileGrid {
  int block_size = 0;
  int pad = 0;
  int cols = 0;
  int rows = 0;
  std::vector<Tile> tiles; // row-major
};

/// 240/8 tiles for frames up to 416x240 pixels of area, 480/16 above.
TileGrid make_tile_grid(int width, int height);

Frame crop(const Frame& f, int x0, int y0, int w, int h);
void paste(Frame& dst, const Frame& src, int dst_x, int dst_y,
           int src_x, int src_y, int w, int h);

// --- I/O ------------------------------------------------------------------

std::vector<Frame> read_y4m(std::istream& in);
void write_y4m(std::ostream& out, const std::vector<Frame>& frames,
               int fps_num = 30, int fps_den = 1);

std::vector<Frame> read_y4m_file(const std::string& path);
void write_y4m_file(const std::string& path, const std::vector<Frame>& frames,
                    int fps_num = 30, int fps_den = 1);

/// Raw planar 4:2:0, dimensions supplied by the caller.
std::vector<Frame> read_yuv420(std::istream& in, int width, int height);

// --- hashing --------------------------------------------------------------

uint64_t fnv1a64(const uint8_t* data, size_t n, uint64_t seed = 0xcbf29ce484222325ull);
uint64_t frame_hash(const Frame& f);
uint64_t frames_hash(const std::vector<Frame>& fs);

} // namespace smc
