#pragma once

#include <cstdint>
#include <vector>

#include "smc/frame.hpp"

namespace smc {

/// MSB-first bit writer.
class BitWriter {
public:
  void put_bit(int b);
  void put_bits(uint32_t value, int n); // n MSBs first
  void write_ue(uint32_t v);            // unsigned exp-Golomb
  void write_se(int32_t v);             // signed exp-Golomb
  void byte_align();                    // pads with zero bits
  void put_bytes(const uint8_t* data, size_t n); // requires alignment

  size_t bit_count() const { return bytes_.size() * 8 - (8 - used_) % 8; }
  const std::vector<uint8_t>& bytes() const;
  std::vector<uint8_t> take();

private:
  std::vector<uint8_t> bytes_;
  int used_ = 8; // bits used in the last byte; 8 = last byte full
};

/// MSB-first bit reader; throws Error on exhaustion.
class BitReader {
public:
  BitReader(const uint8_t* data, size_t n) : data_(data), size_(n) {}
  explicit BitReader(const std::vector<uint8_t>& v)
      : BitReader(v.data(), v.size()) {}

  int get_bit();
  uint32_t get_bits(int n);
  uint32_t read_ue();
  int32_t read_se();
  void byte_align();
  void get_bytes(uint8_t* out, size_t n); // requires alignment

  size_t bits_consumed() const { return pos_; }
  bool exhausted() const { return pos_ >= size_ * 8; }

private:
  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0; // in bits
};

// Little-endian scalar helpers for the container header.
void put_u16(std::vector<uint8_t>& out, uint16_t v);
void put_u32(std::vector<uint8_t>& out, uint32_t v);
uint16_t get_u16(const uint8_t* p);
uint32_t get_u32(const uint8_t* p);

} // namespace smc
