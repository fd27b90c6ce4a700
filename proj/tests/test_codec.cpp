#include <doctest.h>

#include <cmath>

#include "smc/bitio.hpp"
#include "smc/codec.hpp"
#include "smc/transform.hpp"
#include "support/synthetic.hpp"

using namespace smc;

namespace {

std::string bits_of(const BitWriter& bw) {
  std::string s;
  const auto& bytes = bw.bytes();
  size_t n = bw.bit_count();
  for (size_t i = 0; i < n; ++i)
    s += ((bytes[i / 8] >> (7 - i % 8)) & 1) ? '1' : '0';
  return s;
}

} // namespace

TEST_CASE("exp-Golomb definition: ue(0) and ue(3)") {
  BitWriter a;
  a.write_ue(0);
  CHECK(bits_of(a) == "1");
  BitWriter b;
  b.write_ue(3);
  CHECK(bits_of(b) == "00100");
}

TEST_CASE("ue roundtrips over a wide range") {
  BitWriter bw;
  for (uint32_t v = 0; v < 600; ++v) bw.write_ue(v);
  bw.write_ue(0xffffffu);
  std::vector<uint8_t> bytes = bw.take();
  BitReader br(bytes);
  for (uint32_t v = 0; v < 600; ++v) CHECK(br.read_ue() == v);
  CHECK(br.read_ue() == 0xffffffu);
}

TEST_CASE("se roundtrips over [-100, 100]") {
  BitWriter bw;
  for (int v = -100; v <= 100; ++v) bw.write_se(v);
  std::vector<uint8_t> bytes = bw.take();
  BitReader br(bytes);
  for (int v = -100; v <= 100; ++v) CHECK(br.read_se() == v);
}

TEST_CASE("bit reader errors on truncation") {
  BitWriter bw;
  bw.write_ue(1000);
  std::vector<uint8_t> bytes = bw.take();
  bytes.pop_back();
  BitReader br(bytes);
  CHECK_THROWS_AS((void)br.read_ue(), Error);
}

TEST_CASE("quant step and lambda formulas") {
  CHECK(quant_step(4) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(quant_step(10) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rd_lambda(12, 0.85) == doctest::Approx(0.85).epsilon(1e-12));
  CHECK(rd_lambda(18, 0.85) == doctest::Approx(0.85 * 4.0).epsilon(1e-12));
}

TEST_CASE("dead-zone quantizer") {
  Block8x8 c{};
  c[0] = 10.0;
  c[1] = -10.0;
  c[2] = 0.99; // |c|/Q + 1/3 = 1.323 -> 1 at Q=1
  c[3] = 0.5;  // 0.833 -> 0
  Levels8x8 l = quantize(c, 1.0);
  CHECK(l[0] == 10);
  CHECK(l[1] == -10);
  CHECK(l[2] == 1);
  CHECK(l[3] == 0);
}

TEST_CASE("dct/idct roundtrip is exact for quantizer-free path") {
  synth::Rng rng(3);
  std::array<int16_t, 64> res;
  for (auto& r : res) r = int16_t(rng.below(511) - 255);
  std::array<int16_t, 64> back = idct8x8(dct8x8(res));
  for (int i = 0; i < 64; ++i) CHECK(back[i] == res[i]);
}

TEST_CASE("dct preserves energy (orthonormality)") {
  synth::Rng rng(4);
  std::array<int16_t, 64> res;
  double e_in = 0;
  for (auto& r : res) {
    r = int16_t(rng.below(255) - 127);
    e_in += double(r) * r;
  }
  Block8x8 c = dct8x8(res);
  double e_out = 0;
  for (double v : c) e_out += v * v;
  CHECK(e_out == doctest::Approx(e_in).epsilon(1e-9));
}

TEST_CASE("zigzag is a permutation starting at DC") {
  std::array<bool, 64> seen{};
  for (int i : kZigzag8x8) {
    REQUIRE(i >= 0);
    REQUIRE(i < 64);
    CHECK(!seen[i]);
    seen[i] = true;
  }
  CHECK(kZigzag8x8[0] == 0);
  CHECK(kZigzag8x8[1] == 1);
  CHECK(kZigzag8x8[2] == 8);
}

TEST_CASE("coding order for 9, 1, and 17 frames") {
  CodecConfig cfg;
  CHECK(coding_order(9, cfg) ==
        std::vector<int>{0, 8, 4, 2, 1, 3, 6, 5, 7});
  CHECK(coding_order(1, cfg) == std::vector<int>{0});
  CHECK(coding_order(17, cfg) ==
        std::vector<int>{0, 8, 4, 2, 1, 3, 6, 5, 7, 16, 12, 10, 9, 11, 14, 13, 15});
}

TEST_CASE("coding order covers every poc once with refs preceding") {
  CodecConfig cfg;
  for (int n : {1, 2, 7, 8, 9, 16, 23, 33, 65}) {
    std::vector<int> order = coding_order(n, cfg);
    REQUIRE(int(order.size()) == n);
    std::vector<bool> seen(size_t(n), false);
    Dpb dpb;
    for (int poc : order) {
      CHECK(!seen[size_t(poc)]);
      seen[size_t(poc)] = true;
      bool intra = poc % cfg.intra_period == 0;
      if (!intra) {
        // derive_rpls throws when references are missing.
        CHECK_NOTHROW(derive_rpls(poc, dpb, cfg, false));
      }
      Frame f = Frame::allocate(16, 16);
      f.poc = poc;
      dpb.insert(poc, f);
    }
  }
}

TEST_CASE("rpl derivation examples") {
  CodecConfig cfg;
  Dpb dpb;
  for (int p : {0, 8}) dpb.insert(p, Frame::allocate(16, 16));
  Rpl r4 = derive_rpls(4, dpb, cfg, false);
  REQUIRE(r4.l0.size() == 1);
  REQUIRE(r4.l1.size() == 1);
  CHECK(r4.l0[0].poc == 0);
  CHECK(r4.l1[0].poc == 8);

  Dpb dpb2;
  for (int p : {0, 2, 4, 8}) dpb2.insert(p, Frame::allocate(16, 16));
  Rpl r1 = derive_rpls(1, dpb2, cfg, false);
  REQUIRE(r1.l0.size() == 1);
  CHECK(r1.l0[0].poc == 0);
  REQUIRE(r1.l1.size() == 2);
  CHECK(r1.l1[0].poc == 2);
  CHECK(r1.l1[1].poc == 4);

  Rpl ri = derive_rpls(0, dpb2, cfg, true);
  CHECK(ri.l0.empty());
  CHECK(ri.l1.empty());
}

TEST_CASE("encoding a frame identical to its reference yields skip-like blocks") {
  Frame ref = synth::textured_frame(64, 32, 31);
  ref.poc = 0;
  Frame orig = ref;
  orig.poc = 1;
  RefList l0, l1;
  l0.frames = {&ref};
  l0.entries = {{0, false}};
  CodecConfig cfg;
  cfg.qp = 27;
  BitWriter bw;
  EncodedFrame ef = encode_frame(orig, l0, l1, false, cfg, bw);
  CHECK(ef.recon.same_samples(ref));
  for (const BlockRecord& b : ef.blocks) {
    CHECK(b.mode == BlockMode::Uni0);
    CHECK(b.mv0.x == 0);
    CHECK(b.mv0.y == 0);
  }
}

TEST_CASE("closed loop: decode reproduces encoder recon on noise frames") {
  for (int qp : {27, 37}) {
    std::vector<Frame> seq = synth::noise_sequence(48, 32, 2, 99 + qp);
    CodecConfig cfg;
    cfg.qp = qp;
    BitWriter bw0;
    RefList none;
    EncodedFrame f0 = encode_frame(seq[0], none, none, true, cfg, bw0);
    std::vector<uint8_t> p0 = bw0.take();
    BitReader br0(p0);
    FrameHeader h0 = read_frame_header(br0);
    Frame d0 = decode_frame_blocks(br0, 48, 32, h0, none, none);
    CHECK(d0.same_samples(f0.recon));

    RefList l0;
    l0.frames = {&f0.recon};
    l0.entries = {{0, false}};
    BitWriter bw1;
    EncodedFrame f1 = encode_frame(seq[1], l0, none, false, cfg, bw1);
    std::vector<uint8_t> p1 = bw1.take();
    BitReader br1(p1);
    FrameHeader h1 = read_frame_header(br1);
    std::vector<BlockRecord> recs;
    Frame d1 = decode_frame_blocks(br1, 48, 32, h1, l0, none, &recs);
    CHECK(d1.same_samples(f1.recon));
    REQUIRE(recs.size() == f1.blocks.size());
  }
}

TEST_CASE("intra frame of flat gray codes cheaply and reconstructs well") {
  Frame f = Frame::allocate(64, 32, 128);
  CodecConfig cfg;
  cfg.qp = 32;
  BitWriter bw;
  RefList none;
  EncodedFrame ef = encode_frame(f, none, none, true, cfg, bw);
  CHECK(ef.recon.same_samples(f));
  CHECK(bw.bit_count() / ef.blocks.size() < 64); // few bits per block
}

TEST_CASE("decoder rejects out-of-range reference indices") {
  Frame ref = synth::textured_frame(32, 32, 1);
  RefList l0, none;
  l0.frames = {&ref};
  l0.entries = {{0, false}};
  BitWriter bw;
  FrameHeader h{1, false, 32};
  write_frame_header(bw, h);
  bw.write_ue(uint32_t(BlockMode::Uni0)); // mode
  bw.write_ue(5);                         // ref idx out of range
  bw.write_se(0);
  bw.write_se(0);
  bw.write_ue(0); // nnz for each of 6 subblocks
  for (int i = 0; i < 5; ++i) bw.write_ue(0);
  std::vector<uint8_t> payload = bw.take();
  BitReader br(payload);
  FrameHeader hh = read_frame_header(br);
  CHECK_THROWS_AS(decode_frame_blocks(br, 32, 32, hh, l0, none), Error);
}

TEST_CASE("container header roundtrip and validation") {
  ContainerHeader h;
  h.width = 64;
  h.height = 32;
  h.frame_count = 17;
  h.qp = 37;
  h.intra_period = 32;
  h.flags = kFlagRfs | kFlagPfe | kFlagJise;
  std::vector<uint8_t> buf;
  write_container_header(buf, h);
  size_t off = 0;
  ContainerHeader back = read_container_header(buf, off);
  CHECK(back.width == 64);
  CHECK(back.height == 32);
  CHECK(back.frame_count == 17);
  CHECK(back.qp == 37);
  CHECK(back.intra_period == 32);
  CHECK(back.rfs());
  CHECK(back.pfe());
  CHECK(back.jise());

  buf[0] = 'X'; // corrupt magic
  size_t off2 = 0;
  CHECK_THROWS_AS(read_container_header(buf, off2), Error);
}

TEST_CASE("payload framing roundtrip") {
  std::vector<uint8_t> out;
  std::vector<uint8_t> a{1, 2, 3}, b{9};
  append_payload(out, a);
  append_payload(out, b);
  size_t off = 0;
  CHECK(read_payload(out, off) == a);
  CHECK(read_payload(out, off) == b);
  CHECK(off == out.size());
  // Truncated length prefix.
  std::vector<uint8_t> bad(out.begin(), out.begin() + 2);
  size_t off2 = 0;
  CHECK_THROWS_AS(read_payload(bad, off2), Error);
}

TEST_CASE("dpb pruning") {
  Dpb dpb;
  for (int p = 0; p < 8; ++p) dpb.insert(p, Frame::allocate(16, 16));
  dpb.prune_below(4);
  CHECK(!dpb.contains(3));
  CHECK(dpb.contains(4));
  CHECK_THROWS_AS((void)dpb.get(0), Error);
}
