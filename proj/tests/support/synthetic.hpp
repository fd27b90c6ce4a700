#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "smc/frame.hpp"

namespace synth {

// Deterministic PRNG so all fixtures are reproducible across platforms.
class Rng {
public:
  explicit Rng(uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  uint64_t next() {
    s_ ^= s_ << 13;
    s_ ^= s_ >> 7;
    s_ ^= s_ << 17;
    return s_;
  }
  int below(int n) { return int(next() % uint64_t(n)); }
  uint8_t byte() { return uint8_t(next() & 0xff); }

private:
  uint64_t s_;
};

// Smoothed random texture: enough structure for motion search to lock on,
// no periodic aliasing.
inline std::vector<uint8_t> texture(int w, int h, uint64_t seed) {
  Rng rng(seed);
  std::vector<uint8_t> raw(size_t(w) * h);
  for (auto& p : raw) p = rng.byte();
  std::vector<uint8_t> out(size_t(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int s = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          int xx = std::min(std::max(x + dx, 0), w - 1);
          int yy = std::min(std::max(y + dy, 0), h - 1);
          s += raw[size_t(yy) * w + xx];
        }
      out[size_t(y) * w + x] = uint8_t(s / 9);
    }
  return out;
}

inline smc::Frame textured_frame(int w, int h, uint64_t seed) {
  smc::Frame f = smc::Frame::allocate(w, h);
  std::vector<uint8_t> ty = texture(w, h, seed);
  f.y = ty;
  std::vector<uint8_t> tc = texture(w / 2, h / 2, seed + 101);
  for (size_t i = 0; i < f.u.size(); ++i) {
    f.u[i] = uint8_t(96 + tc[i] / 4);
    f.v[i] = uint8_t(160 - tc[i] / 4);
  }
  return f;
}

// Window panned across a larger texture at `step` px/frame (step even keeps
// chroma phase aligned).
inline std::vector<smc::Frame> pan_sequence(int w, int h, int n, int step,
                                            uint64_t seed) {
  int bw = w + step * (n - 1);
  std::vector<uint8_t> ty = texture(bw, h, seed);
  std::vector<uint8_t> tu = texture(bw / 2, h / 2, seed + 7);
  std::vector<uint8_t> tv = texture(bw / 2, h / 2, seed + 13);
  std::vector<smc::Frame> seq;
  for (int i = 0; i < n; ++i) {
    smc::Frame f = smc::Frame::allocate(w, h);
    f.poc = i;
    int x0 = step * i;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) f.Y(x, y) = ty[size_t(y) * bw + x0 + x];
    for (int y = 0; y < h / 2; ++y)
      for (int x = 0; x < w / 2; ++x) {
        f.U(x, y) = tu[size_t(y) * (bw / 2) + x0 / 2 + x];
        f.V(x, y) = tv[size_t(y) * (bw / 2) + x0 / 2 + x];
      }
    seq.push_back(std::move(f));
  }
  return seq;
}

// Texture rotating about the frame center, bilinear-resampled per frame.
inline std::vector<smc::Frame> rotation_sequence(int w, int h, int n,
                                                 uint64_t seed) {
  int bw = 2 * w, bh = 2 * h;
  std::vector<uint8_t> ty = texture(bw, bh, seed);
  auto sample = [&](double x, double y) {
    x = std::min(std::max(x, 0.0), double(bw - 1));
    y = std::min(std::max(y, 0.0), double(bh - 1));
    int x0 = int(x), y0 = int(y);
    int x1 = std::min(x0 + 1, bw - 1), y1 = std::min(y0 + 1, bh - 1);
    double fx = x - x0, fy = y - y0;
    double v = (1 - fx) * (1 - fy) * ty[size_t(y0) * bw + x0] +
               fx * (1 - fy) * ty[size_t(y0) * bw + x1] +
               (1 - fx) * fy * ty[size_t(y1) * bw + x0] +
               fx * fy * ty[size_t(y1) * bw + x1];
    return uint8_t(std::lround(std::min(std::max(v, 0.0), 255.0)));
  };
  std::vector<smc::Frame> seq;
  for (int i = 0; i < n; ++i) {
    double ang = 0.01 * i;
    double c = std::cos(ang), s = std::sin(ang);
    smc::Frame f = smc::Frame::allocate(w, h, 128);
    f.poc = i;
    double cx = bw / 2.0, cy = bh / 2.0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double rx = x - w / 2.0, ry = y - h / 2.0;
        f.Y(x, y) = sample(cx + c * rx - s * ry, cy + s * rx + c * ry);
      }
    seq.push_back(std::move(f));
  }
  return seq;
}

inline std::vector<smc::Frame> noise_sequence(int w, int h, int n,
                                              uint64_t seed) {
  Rng rng(seed);
  std::vector<smc::Frame> seq;
  for (int i = 0; i < n; ++i) {
    smc::Frame f = smc::Frame::allocate(w, h);
    f.poc = i;
    for (auto& p : f.y) p = rng.byte();
    for (auto& p : f.u) p = rng.byte();
    for (auto& p : f.v) p = rng.byte();
    seq.push_back(std::move(f));
  }
  return seq;
}

} // namespace synth
