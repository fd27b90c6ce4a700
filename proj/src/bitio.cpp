#include "smc/bitio.hpp"

namespace smc {

void BitWriter::put_bit(int b) {
  if (used_ == 8) {
    bytes_.push_back(0);
    used_ = 0;
  }
  if (b) bytes_.back() |= uint8_t(0x80u >> used_);
  ++used_;
}

void BitWriter::put_bits(uint32_t value, int n) {
  for (int i = n - 1; i >= 0; --i) put_bit(int((value >> i) & 1u));
}

void BitWriter::write_ue(uint32_t v) {
  uint64_t x = uint64_t(v) + 1;
  int len = 0;
  for (uint64_t t = x; t > 1; t >>= 1) ++len;
  for (int i = 0; i < len; ++i) put_bit(0);
  for (int i = len; i >= 0; --i) put_bit(int((x >> i) & 1u));
}

void BitWriter::write_se(int32_t v) {
  uint32_t u = v > 0 ? uint32_t(2 * int64_t(v) - 1) : uint32_t(-2 * int64_t(v));
  write_ue(u);
}

void BitWriter::byte_align() { used_ = 8; }

void BitWriter::put_bytes(const uint8_t* data, size_t n) {
  byte_align();
  bytes_.insert(bytes_.end(), data, data + n);
}

const std::vector<uint8_t>& BitWriter::bytes() const { return bytes_; }

std::vector<uint8_t> BitWriter::take() {
  used_ = 8;
  return std::move(bytes_);
}

int BitReader::get_bit() {
  if (pos_ >= size_ * 8) throw Error("bitstream truncated");
  int b = (data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1;
  ++pos_;
  return b;
}

uint32_t BitReader::get_bits(int n) {
  uint32_t v = 0;
  for (int i = 0; i < n; ++i) v = (v << 1) | uint32_t(get_bit());
  return v;
}

uint32_t BitReader::read_ue() {
  int zeros = 0;
  while (get_bit() == 0) {
    if (++zeros > 32) throw Error("exp-Golomb code too long");
  }
  uint64_t x = 1;
  for (int i = 0; i < zeros; ++i) x = (x << 1) | uint64_t(get_bit());
  return uint32_t(x - 1);
}

int32_t BitReader::read_se() {
  uint32_t u = read_ue();
  if (u & 1) return int32_t((u + 1) / 2);
  return -int32_t(u / 2);
}

void BitReader::byte_align() { pos_ = (pos_ + 7) & ~size_t(7); }

void BitReader::get_bytes(uint8_t* out, size_t n) {
  byte_align();
  if (pos_ / 8 + n > size_) throw Error("bitstream truncated");
  for (size_t i = 0; i < n; ++i) out[i] = data_[pos_ / 8 + i];
  pos_ += n * 8;
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v & 0xff));
  out.push_back(uint8_t(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(uint8_t((v >> (8 * i)) & 0xff));
}

uint16_t get_u16(const uint8_t* p) { return uint16_t(p[0] | (p[1] << 8)); }

uint32_t get_u32(const uint8_t* p) {
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) |
         (uint32_t(p[3]) << 24);
}

} // namespace smc
