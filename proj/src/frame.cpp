#include "smc/frame.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace smc {

Frame Frame::allocate(int w, int h, uint8_t fill) {
  if (w <= 0 || h <= 0 || w % 2 != 0 || h % 2 != 0)
    throw Error("frame dimensions must be positive and even");
  Frame f;
  f.width = w;
  f.height = h;
  f.y.assign(size_t(w) * h, fill);
  f.u.assign(size_t(w / 2) * (h / 2), fill);
  f.v.assign(size_t(w / 2) * (h / 2), fill);
  return f;
}

uint8_t Frame::y_clamped(int x, int yy) const {
  x = std::clamp(x, 0, width - 1);
  yy = std::clamp(yy, 0, height - 1);
  return Y(x, yy);
}

uint8_t Frame::u_clamped(int x, int yy) const {
  x = std::clamp(x, 0, chroma_w() - 1);
  yy = std::clamp(yy, 0, chroma_h() - 1);
  return U(x, yy);
}

uint8_t Frame::v_clamped(int x, int yy) const {
  x = std::clamp(x, 0, chroma_w() - 1);
  yy = std::clamp(yy, 0, chroma_h() - 1);
  return V(x, yy);
}

PackedFrame pack_six_channel(const Frame& f) {
  if (f.width % 2 != 0 || f.height % 2 != 0)
    throw Error("pack_six_channel requires even dimensions");
  const int w2 = f.width / 2;
  const int h2 = f.height / 2;
  PackedFrame p;
  p.width2 = w2;
  p.height2 = h2;
  p.channels.assign(6, Planef(w2, h2));
  // Luma pixel (2i+di, 2j+dj) lands in channel 2*di+dj at (i, j).
  for (int j = 0; j < h2; ++j) {
    for (int i = 0; i < w2; ++i) {
      for (int di = 0; di < 2; ++di)
        for (int dj = 0; dj < 2; ++dj)
          p.channels[2 * di + dj].at(i, j) = float(f.Y(2 * i + di, 2 * j + dj));
      p.channels[4].at(i, j) = float(f.U(i, j));
      p.channels[5].at(i, j) = float(f.V(i, j));
    }
  }
  return p;
}

static uint8_t to_sample(float x) {
  long r = std::lround(x);
  return uint8_t(std::clamp(r, 0L, long(Frame::kMaxSample)));
}

Frame unpack_six_channel(const PackedFrame& p) {
  if (p.channels.size() != 6)
    throw Error("unpack_six_channel: expected 6 channels");
  Frame f = Frame::allocate(p.width2 * 2, p.height2 * 2);
  for (int j = 0; j < p.height2; ++j) {
    for (int i = 0; i < p.width2; ++i) {
      for (int di = 0; di < 2; ++di)
        for (int dj = 0; dj < 2; ++dj)
          f.Y(2 * i + di, 2 * j + dj) = to_sample(p.channels[2 * di + dj].at(i, j));
      f.U(i, j) = to_sample(p.channels[4].at(i, j));
      f.V(i, j) = to_sample(p.channels[5].at(i, j));
    }
  }
  return f;
}

static uint64_t sse_span(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
  uint64_t s = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    int d = int(a[i]) - int(b[i]);
    s += uint64_t(d * d);
  }
  return s;
}

uint64_t plane_sse(const Frame& a, const Frame& b, PlaneSel sel) {
  if (!a.same_size(b)) throw Error("plane_sse: dimension mismatch");
  switch (sel) {
    case PlaneSel::Y: return sse_span(a.y, b.y);
    case PlaneSel::U: return sse_span(a.u, b.u);
    default: return sse_span(a.v, b.v);
  }
}

uint64_t total_sse(const Frame& a, const Frame& b) {
  return plane_sse(a, b, PlaneSel::Y) + plane_sse(a, b, PlaneSel::U) +
         plane_sse(a, b, PlaneSel::V);
}

double plane_mse(const Frame& a, const Frame& b, PlaneSel sel) {
  size_t n = sel == PlaneSel::Y ? a.y.size() : a.u.size();
  return double(plane_sse(a, b, sel)) / double(n);
}

double psnr_from_mse(double mse, int bit_depth) {
  if (mse <= 0.0) return kLosslessPsnr;
  double max = double((1 << bit_depth) - 1);
  return 10.0 * std::log10(max * max / mse);
}

double psnr(const Frame& a, const Frame& b, PlaneSel sel) {
  return psnr_from_mse(plane_mse(a, b, sel), Frame::kBitDepth);
}

TileGrid make_tile_grid(int width, int height) {
  if (width <= 0 || height <= 0 || width % 2 != 0 || height % 2 != 0)
    throw Error("make_tile_grid requires positive even dimensions");
  TileGrid g;
  const long long area = (long long)width * height;
  if (area <= 416LL * 240LL) {
    g.block_size = 240;
    g.pad = 8;
  } else {
    g.block_size = 480;
    g.pad = 16;
  }
  g.cols = (width + g.block_size - 1) / g.block_size;
  g.rows = (height + g.block_size - 1) / g.block_size;
  for (int ty = 0; ty < g.rows; ++ty) {
    for (int tx = 0; tx < g.cols; ++tx) {
      Tile t;
      t.x0 = tx * g.block_size;
      t.y0 = ty * g.block_size;
      t.core_w = std::min(g.block_size, width - t.x0);
      t.core_h = std::min(g.block_size, height - t.y0);
      t.px0 = std::max(0, t.x0 - g.pad);
      t.py0 = std::max(0, t.y0 - g.pad);
      t.pw = std::min(width, t.x0 + t.core_w + g.pad) - t.px0;
      t.ph = std::min(height, t.y0 + t.core_h + g.pad) - t.py0;
      g.tiles.push_back(t);
    }
  }
  return g;
}

Frame crop(const Frame& f, int x0, int y0, int w, int h) {
  if (x0 % 2 || y0 % 2 || w % 2 || h % 2)
    throw Error("crop: rectangle must be even-aligned");
  if (x0 < 0 || y0 < 0 || x0 + w > f.width || y0 + h > f.height)
    throw Error("crop: rectangle out of bounds");
  Frame out = Frame::allocate(w, h);
  out.poc = f.poc;
  for (int yy = 0; yy < h; ++yy)
    std::memcpy(&out.Y(0, yy), f.y.data() + size_t(y0 + yy) * f.width + x0,
                size_t(w));
  for (int yy = 0; yy < h / 2; ++yy) {
    std::memcpy(&out.U(0, yy),
                f.u.data() + size_t(y0 / 2 + yy) * f.chroma_w() + x0 / 2,
                size_t(w / 2));
    std::memcpy(&out.V(0, yy),
                f.v.data() + size_t(y0 / 2 + yy) * f.chroma_w() + x0 / 2,
                size_t(w / 2));
  }
  return out;
}

void paste(Frame& dst, const Frame& src, int dst_x, int dst_y,
           int src_x, int src_y, int w, int h) {
  if (dst_x % 2 || dst_y % 2 || src_x % 2 || src_y % 2 || w % 2 || h % 2)
    throw Error("paste: rectangle must be even-aligned");
  for (int yy = 0; yy < h; ++yy)
    std::memcpy(&dst.Y(dst_x, dst_y + yy),
                src.y.data() + size_t(src_y + yy) * src.width + src_x,
                size_t(w));
  for (int yy = 0; yy < h / 2; ++yy) {
    std::memcpy(&dst.U(dst_x / 2, dst_y / 2 + yy),
                src.u.data() + size_t(src_y / 2 + yy) * src.chroma_w() + src_x / 2,
                size_t(w / 2));
    std::memcpy(&dst.V(dst_x / 2, dst_y / 2 + yy),
                src.v.data() + size_t(src_y / 2 + yy) * src.chroma_w() + src_x / 2,
                size_t(w / 2));
  }
}

// --- Y4M ------------------------------------------------------------------

std::vector<Frame> read_y4m(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw Error("y4m: empty stream");
  std::istringstream hs(header);
  std::string magic;
  hs >> magic;
  if (magic != "YUV4MPEG2") throw Error("y4m: bad magic");
  int w = 0, h = 0;
  std::string tok;
  while (hs >> tok) {
    if (tok.empty()) continue;
    switch (tok[0]) {
      case 'W': w = std::atoi(tok.c_str() + 1); break;
      case 'H': h = std::atoi(tok.c_str() + 1); break;
      case 'C':
        if (tok.rfind("C420", 0) != 0)
          throw Error("y4m: unsupported colorspace " + tok);
        break;
      default: break; // F/I/A/X tags ignored
    }
  }
  std::vector<Frame> frames;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("FRAME", 0) != 0) throw Error("y4m: expected FRAME marker");
    if (w <= 0 || h <= 0 || w % 2 || h % 2)
      throw Error("y4m: missing or invalid W/H");
    Frame f = Frame::allocate(w, h);
    f.poc = int(frames.size());
    in.read(reinterpret_cast<char*>(f.y.data()), std::streamsize(f.y.size()));
    in.read(reinterpret_cast<char*>(f.u.data()), std::streamsize(f.u.size()));
    in.read(reinterpret_cast<char*>(f.v.data()), std::streamsize(f.v.size()));
    if (!in) throw Error("y4m: truncated frame payload");
    frames.push_back(std::move(f));
  }
  return frames;
}

void write_y4m(std::ostream& out, const std::vector<Frame>& frames,
               int fps_num, int fps_den) {
  int w = frames.empty() ? 0 : frames[0].width;
  int h = frames.empty() ? 0 : frames[0].height;
  for (const Frame& f : frames)
    if (f.width != w || f.height != h) throw Error("write_y4m: mixed dimensions");
  out << "YUV4MPEG2";
  if (!frames.empty()) out << " W" << w << " H" << h;
  out << " F" << fps_num << ":" << fps_den << " Ip A1:1 C420\n";
  for (const Frame& f : frames) {
    out << "FRAME\n";
    out.write(reinterpret_cast<const char*>(f.y.data()), std::streamsize(f.y.size()));
    out.write(reinterpret_cast<const char*>(f.u.data()), std::streamsize(f.u.size()));
    out.write(reinterpret_cast<const char*>(f.v.data()), std::streamsize(f.v.size()));
  }
}

std::vector<Frame> read_y4m_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_y4m(in);
}

void write_y4m_file(const std::string& path, const std::vector<Frame>& frames,
                    int fps_num, int fps_den) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_y4m(out, frames, fps_num, fps_den);
  if (!out) throw Error("write failed: " + path);
}

std::vector<Frame> read_yuv420(std::istream& in, int width, int height) {
  std::vector<Frame> frames;
  for (;;) {
    Frame f = Frame::allocate(width, height);
    in.read(reinterpret_cast<char*>(f.y.data()), std::streamsize(f.y.size()));
    if (in.gcount() == 0) break;
    in.read(reinterpret_cast<char*>(f.u.data()), std::streamsize(f.u.size()));
    in.read(reinterpret_cast<char*>(f.v.data()), std::streamsize(f.v.size()));
    if (!in) throw Error("yuv420: truncated frame payload");
    f.poc = int(frames.size());
    frames.push_back(std::move(f));
  }
  return frames;
}

uint64_t fnv1a64(const uint8_t* data, size_t n, uint64_t seed) {
  uint64_t h = seed;
  for (size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t frame_hash(const Frame& f) {
  uint64_t h = fnv1a64(f.y.data(), f.y.size());
  h = fnv1a64(f.u.data(), f.u.size(), h);
  h = fnv1a64(f.v.data(), f.v.size(), h);
  return h;
}

uint64_t frames_hash(const std::vector<Frame>& fs) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const Frame& f : fs) {
    uint64_t fh = frame_hash(f);
    h = fnv1a64(reinterpret_cast<const uint8_t*>(&fh), sizeof(fh), h);
  }
  return h;
}

} // namespace smc
