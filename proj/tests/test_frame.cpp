#include <doctest.h>

#include <sstream>

#include "smc/frame.hpp"
#include "support/synthetic.hpp"

using namespace smc;

namespace {

std::string y4m_bytes(const std::vector<Frame>& fs) {
  std::ostringstream out;
  write_y4m(out, fs);
  return out.str();
}

} // namespace

TEST_CASE("y4m constant two-frame roundtrip") {
  std::vector<Frame> fs(2, Frame::allocate(16, 16, 128));
  fs[0].poc = 0;
  fs[1].poc = 1;
  std::istringstream in(y4m_bytes(fs));
  std::vector<Frame> back = read_y4m(in);
  REQUIRE(back.size() == 2);
  for (const Frame& f : back) {
    CHECK(f.width == 16);
    CHECK(f.height == 16);
    for (uint8_t s : f.y) CHECK(s == 128);
    for (uint8_t s : f.u) CHECK(s == 128);
    for (uint8_t s : f.v) CHECK(s == 128);
  }
  CHECK(back[0].poc == 0);
  CHECK(back[1].poc == 1);
}

TEST_CASE("y4m 416x240 frame payload size") {
  // header `YUV4MPEG2 W416 H240 F30:1` => 416*240 + 2*208*120 bytes per frame
  std::ostringstream head;
  head << "YUV4MPEG2 W416 H240 F30:1\n";
  const size_t payload = 416 * 240 + 2 * 208 * 120;
  std::string stream = head.str() + "FRAME\n" + std::string(payload, '\x40');
  std::istringstream in(stream);
  std::vector<Frame> fs = read_y4m(in);
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].width == 416);
  CHECK(fs[0].height == 240);
  CHECK(fs[0].y.size() + fs[0].u.size() + fs[0].v.size() == payload);
}

TEST_CASE("y4m truncated payload errors") {
  std::string stream = "YUV4MPEG2 W16 H16 F30:1 C420\nFRAME\n";
  stream += std::string(100, '\0'); // needs 384 bytes
  std::istringstream in(stream);
  CHECK_THROWS_AS(read_y4m(in), Error);
}

TEST_CASE("y4m empty list writes header-only stream") {
  std::string s = y4m_bytes({});
  CHECK(s.rfind("YUV4MPEG2", 0) == 0);
  CHECK(s.find("FRAME") == std::string::npos);
  std::istringstream in(s);
  CHECK(read_y4m(in).empty());
}

TEST_CASE("y4m one 2x2 frame is header + FRAME marker + 6 bytes") {
  std::vector<Frame> fs{Frame::allocate(2, 2, 7)};
  std::string s = y4m_bytes(fs);
  std::string header_only = y4m_bytes({});
  // write_y4m emits the same header for same dims? header carries W2 H2 here.
  size_t marker = s.find("FRAME\n");
  REQUIRE(marker != std::string::npos);
  CHECK(s.size() == marker + 6 + 6); // "FRAME\n" + 4 luma + 1 U + 1 V
  (void)header_only;
}

TEST_CASE("y4m textured roundtrip is exact") {
  std::vector<Frame> fs;
  for (int i = 0; i < 3; ++i) fs.push_back(synth::textured_frame(32, 16, 10 + i));
  std::istringstream in(y4m_bytes(fs));
  std::vector<Frame> back = read_y4m(in);
  REQUIRE(back.size() == fs.size());
  for (size_t i = 0; i < fs.size(); ++i) CHECK(back[i].same_samples(fs[i]));
}

TEST_CASE("y4m rejects mixed dimensions") {
  std::vector<Frame> fs{Frame::allocate(16, 16), Frame::allocate(32, 16)};
  std::ostringstream out;
  CHECK_THROWS_AS(write_y4m(out, fs), Error);
}

TEST_CASE("psnr identical frames hits the lossless sentinel") {
  Frame a = synth::textured_frame(32, 32, 1);
  CHECK(psnr(a, a, PlaneSel::Y) == kLosslessPsnr);
}

TEST_CASE("psnr of uniform +1 luma offset is 48.1308 dB") {
  Frame a = Frame::allocate(32, 32, 100);
  Frame b = a;
  for (auto& s : b.y) s = uint8_t(s + 1);
  CHECK(std::abs(psnr(a, b, PlaneSel::Y) - 48.1308) < 1e-3);
}

TEST_CASE("psnr single-sample +16 offset follows the MSE formula") {
  Frame a = Frame::allocate(32, 32, 100);
  Frame b = a;
  b.Y(5, 7) = uint8_t(100 + 16);
  double n = 32.0 * 32.0;
  double expected = 10.0 * std::log10(255.0 * 255.0 / (256.0 / n));
  CHECK(psnr(a, b, PlaneSel::Y) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("psnr is symmetric") {
  Frame a = synth::textured_frame(32, 32, 2);
  Frame b = synth::textured_frame(32, 32, 3);
  CHECK(psnr(a, b, PlaneSel::Y) == psnr(b, a, PlaneSel::Y));
}

TEST_CASE("pack places the four luma phases in channels 2*di+dj") {
  Frame f = Frame::allocate(2, 2);
  f.Y(0, 0) = 1;
  f.Y(1, 0) = 2;
  f.Y(0, 1) = 3;
  f.Y(1, 1) = 4;
  PackedFrame p = pack_six_channel(f);
  REQUIRE(p.channels.size() == 6);
  CHECK(p.width2 == 1);
  CHECK(p.height2 == 1);
  CHECK(p.channels[0].at(0, 0) == 1); // di=0, dj=0
  CHECK(p.channels[1].at(0, 0) == 3); // di=0, dj=1
  CHECK(p.channels[2].at(0, 0) == 2); // di=1, dj=0
  CHECK(p.channels[3].at(0, 0) == 4); // di=1, dj=1
}

TEST_CASE("pack of a constant frame gives constant channels") {
  Frame f = Frame::allocate(8, 8, 77);
  PackedFrame p = pack_six_channel(f);
  for (const Planef& c : p.channels)
    for (float v : c.v) CHECK(v == 77.f);
}

TEST_CASE("unpack inverts pack exactly") {
  Frame f = synth::textured_frame(32, 16, 5);
  CHECK(unpack_six_channel(pack_six_channel(f)).same_samples(f));
}

TEST_CASE("unpack clamps out-of-range channel values") {
  PackedFrame p;
  p.width2 = 1;
  p.height2 = 1;
  p.channels.assign(6, Planef(1, 1, 300.f));
  p.channels[1].at(0, 0) = -5.f;
  Frame f = unpack_six_channel(p);
  CHECK(f.Y(0, 0) == 255);
  CHECK(f.Y(0, 1) == 0);
  CHECK(f.U(0, 0) == 255);
}

TEST_CASE("tile grid sizing rule") {
  TileGrid a = make_tile_grid(416, 240);
  CHECK(a.block_size == 240);
  CHECK(a.pad == 8);
  CHECK(a.cols == 2);
  CHECK(a.rows == 1);

  TileGrid b = make_tile_grid(832, 480);
  CHECK(b.block_size == 480);
  CHECK(b.pad == 16);
  CHECK(b.cols == 2);
  CHECK(b.rows == 1);

  TileGrid c = make_tile_grid(1920, 1080);
  CHECK(c.block_size == 480);
  CHECK(c.cols == 4);
  CHECK(c.rows == 3);
}

TEST_CASE("tile cores partition the frame; padded rects stay in bounds") {
  for (auto [w, h] : {std::pair{416, 240}, {832, 480}, {64, 32}}) {
    TileGrid g = make_tile_grid(w, h);
    std::vector<int> cover(size_t(w) * h, 0);
    for (const Tile& t : g.tiles) {
      CHECK(t.px0 >= 0);
      CHECK(t.py0 >= 0);
      CHECK(t.px0 + t.pw <= w);
      CHECK(t.py0 + t.ph <= h);
      for (int y = t.y0; y < t.y0 + t.core_h; ++y)
        for (int x = t.x0; x < t.x0 + t.core_w; ++x) ++cover[size_t(y) * w + x];
    }
    for (int c : cover) CHECK(c == 1);
  }
}

TEST_CASE("tile core SSE sums to whole-frame SSE") {
  Frame a = synth::textured_frame(64, 32, 8);
  Frame b = synth::textured_frame(64, 32, 9);
  TileGrid g = make_tile_grid(64, 32);
  uint64_t sum = 0;
  for (const Tile& t : g.tiles) {
    Frame ca = crop(a, t.x0, t.y0, t.core_w, t.core_h);
    Frame cb = crop(b, t.x0, t.y0, t.core_w, t.core_h);
    sum += plane_sse(ca, cb, PlaneSel::Y);
  }
  CHECK(sum == plane_sse(a, b, PlaneSel::Y));
}

TEST_CASE("crop then paste restores the region") {
  Frame f = synth::textured_frame(64, 32, 11);
  Frame c = crop(f, 16, 8, 32, 16);
  Frame dst = Frame::allocate(64, 32, 0);
  paste(dst, c, 16, 8, 0, 0, 32, 16);
  Frame expect = Frame::allocate(64, 32, 0);
  paste(expect, f, 16, 8, 16, 8, 32, 16);
  CHECK(dst.same_samples(expect));
}

TEST_CASE("frame hashing is deterministic and input-sensitive") {
  Frame a = synth::textured_frame(32, 32, 21);
  Frame b = a;
  CHECK(frame_hash(a) == frame_hash(b));
  b.Y(0, 0) = uint8_t(b.Y(0, 0) + 1);
  CHECK(frame_hash(a) != frame_hash(b));
}
