#include <doctest.h>

#include "smc/eval.hpp"
#include "smc/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace smc;

namespace {

EncodeOptions make_opts(int qp, bool rfs, bool pfe, bool jise) {
  EncodeOptions o;
  o.codec.qp = qp;
  o.tools = {rfs, pfe, jise};
  return o;
}

} // namespace

TEST_CASE("encode/decode roundtrip: recons and outputs hash-identical") {
  std::vector<Frame> seq = synth::pan_sequence(64, 32, 9, 2, 41);
  for (bool rfs : {true, false})
    for (bool pfe : {true, false}) {
      EncodeResult enc = encode_sequence(seq, make_opts(32, rfs, pfe, true));
      DecodeResult dec = decode_sequence(enc.bitstream);
      REQUIRE(dec.recons.size() == seq.size());
      CHECK(frames_hash(dec.recons) == frames_hash(enc.recons));
      CHECK(frames_hash(dec.outputs) == frames_hash(enc.outputs));
      for (size_t i = 0; i < dec.outputs.size(); ++i)
        CHECK(dec.outputs[i].poc == int(i));
    }
}

TEST_CASE("no-jise encodes are bit-identical to the default") {
  std::vector<Frame> seq = synth::pan_sequence(64, 32, 9, 2, 43);
  EncodeResult a = encode_sequence(seq, make_opts(32, true, true, true));
  EncodeResult b = encode_sequence(seq, make_opts(32, true, true, false));
  CHECK(a.bitstream == b.bitstream);
  CHECK(frames_hash(a.outputs) == frames_hash(b.outputs));
}

TEST_CASE("call counts halve under joint inference at J positions") {
  std::vector<Frame> seq = synth::pan_sequence(64, 32, 9, 2, 47);
  EncodeResult joint = encode_sequence(seq, make_opts(32, true, true, true));
  EncodeResult sep = encode_sequence(seq, make_opts(32, true, true, false));
  auto find_action = [](const EncodeResult& r, int target) {
    for (const ActionTrace& a : r.actions)
      if (a.kind == ActionKind::J && a.target == target) return a;
    throw Error("action not found");
  };
  for (int target : {1, 5}) {
    ActionTrace aj = find_action(joint, target);
    ActionTrace as = find_action(sep, target);
    for (const char* k : {"theta", "phi", "eq4", "eq5", "eq7", "eq8"}) {
      CHECK(aj.calls.at(k) == 1);
      CHECK(as.calls.at(k) == 2);
    }
  }
}

TEST_CASE("encoding is deterministic") {
  std::vector<Frame> seq = synth::pan_sequence(64, 32, 9, 2, 51);
  EncodeResult a = encode_sequence(seq, make_opts(37, true, true, true));
  EncodeResult b = encode_sequence(seq, make_opts(37, true, true, true));
  CHECK(a.bitstream == b.bitstream);
}

TEST_CASE("pfe monotonicity: output MSE never exceeds recon MSE") {
  std::vector<Frame> seq = synth::pan_sequence(64, 32, 9, 2, 53);
  EncodeResult enc = encode_sequence(seq, make_opts(37, true, true, true));
  for (size_t i = 0; i < seq.size(); ++i)
    CHECK(total_sse(seq[i], enc.outputs[i]) <= total_sse(seq[i], enc.recons[i]));
}

TEST_CASE("virtual references never reach the DPB (synthesis audit)") {
  std::vector<Frame> seq = synth::pan_sequence(64, 32, 9, 2, 59);
  EncodeResult enc = encode_sequence(seq, make_opts(32, true, true, true));
  CHECK(!enc.synthesis_audit.empty());
  for (const SynthesisAudit& a : enc.synthesis_audit)
    for (size_t i = 0; i < a.input_pocs.size(); ++i)
      CHECK(a.input_hashes[i] == enc.recon_hashes.at(a.input_pocs[i]));
}

TEST_CASE("all tools off reduces to the plain minicodec") {
  std::vector<Frame> seq = synth::pan_sequence(64, 32, 9, 2, 61);
  EncodeResult enc = encode_sequence(seq, make_opts(32, false, false, true));
  CHECK(enc.actions.empty());
  RefUsageStats usage = ref_usage(enc.blocks);
  CHECK(usage.both_virtual == 0);
  CHECK(usage.one_virtual == 0);
  for (size_t i = 0; i < seq.size(); ++i)
    CHECK(enc.outputs[i].same_samples(enc.recons[i]));
  DecodeResult dec = decode_sequence(enc.bitstream);
  CHECK(frames_hash(dec.outputs) == frames_hash(enc.recons));
}

TEST_CASE("decoder rejects corrupted containers without crashing") {
  std::vector<Frame> seq = synth::pan_sequence(64, 32, 3, 2, 67);
  EncodeResult enc = encode_sequence(seq, make_opts(32, true, true, true));
  // Bad magic.
  std::vector<uint8_t> bad = enc.bitstream;
  bad[0] ^= 0xff;
  CHECK_THROWS_AS(decode_sequence(bad), Error);
  // Truncation.
  std::vector<uint8_t> trunc(enc.bitstream.begin(), enc.bitstream.end() - 5);
  CHECK_THROWS_AS(decode_sequence(trunc), Error);
  // Trailing garbage.
  std::vector<uint8_t> trail = enc.bitstream;
  trail.push_back(0);
  CHECK_THROWS_AS(decode_sequence(trail), Error);
}

TEST_CASE("rate is monotone non-increasing in QP") {
  std::vector<Frame> seq = synth::pan_sequence(64, 32, 9, 2, 71);
  size_t prev = SIZE_MAX;
  for (int qp : {22, 27, 32, 37, 42}) {
    EncodeResult enc = encode_sequence(seq, make_opts(qp, true, true, true));
    CHECK(enc.total_bits <= prev);
    prev = enc.total_bits;
  }
}

TEST_CASE("virtual entries sit at index 1 of both lists when present") {
  std::vector<Frame> seq = synth::pan_sequence(64, 32, 9, 2, 73);
  EncodeResult enc = encode_sequence(seq, make_opts(37, true, false, true));
  bool saw_virtual = false;
  for (const PocBlocks& pb : enc.blocks)
    for (const BlockRecord& b : pb.blocks) {
      if ((b.mode == BlockMode::Uni0 || b.mode == BlockMode::Bi) &&
          b.ref0_virtual) {
        CHECK(b.ref0 == 1);
        saw_virtual = true;
      }
      if ((b.mode == BlockMode::Uni1 || b.mode == BlockMode::Bi) &&
          b.ref1_virtual) {
        CHECK(b.ref1 == 1);
        saw_virtual = true;
      }
    }
  CHECK(saw_virtual);
}

TEST_CASE("non-multiple-of-16 dimensions are rejected") {
  std::vector<Frame> seq{Frame::allocate(30, 30)};
  CHECK_THROWS_AS(encode_sequence(seq, make_opts(32, true, true, true)), Error);
}
