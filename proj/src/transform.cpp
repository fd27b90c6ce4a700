#include "smc/transform.hpp"

#include <cmath>

namespace smc {

namespace {

struct DctTables {
  double c[8][8]; // c[k][n] = a(k) * cos((2n+1)k*pi/16)
  DctTables() {
    const double pi = std::acos(-1.0);
    for (int k = 0; k < 8; ++k) {
      double a = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n)
        c[k][n] = a * std::cos((2.0 * n + 1.0) * k * pi / 16.0);
    }
  }
};

const DctTables& tables() {
  static const DctTables t;
  return t;
}

} // namespace

Block8x8 dct8x8(const std::array<int16_t, 64>& residual) {
  const auto& T = tables();
  double tmp[8][8];
  // rows
  for (int y = 0; y < 8; ++y)
    for (int k = 0; k < 8; ++k) {
      double s = 0;
      for (int n = 0; n < 8; ++n) s += T.c[k][n] * residual[y * 8 + n];
      tmp[y][k] = s;
    }
  Block8x8 out{};
  // columns
  for (int k = 0; k < 8; ++k)
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int n = 0; n < 8; ++n) s += T.c[k][n] * tmp[n][x];
      out[k * 8 + x] = s;
    }
  return out;
}

std::array<int16_t, 64> idct8x8(const Block8x8& coeffs) {
  const auto& T = tables();
  double tmp[8][8];
  for (int x = 0; x < 8; ++x)
    for (int n = 0; n < 8; ++n) {
      double s = 0;
      for (int k = 0; k < 8; ++k) s += T.c[k][n] * coeffs[k * 8 + x];
      tmp[n][x] = s;
    }
  std::array<int16_t, 64> out{};
  for (int y = 0; y < 8; ++y)
    for (int n = 0; n < 8; ++n) {
      double s = 0;
      for (int k = 0; k < 8; ++k) s += T.c[k][n] * tmp[y][k];
      // round half away from zero
      out[y * 8 + n] = int16_t(s >= 0 ? std::floor(s + 0.5) : std::ceil(s - 0.5));
    }
  return out;
}

Levels8x8 quantize(const Block8x8& coeffs, double step) {
  Levels8x8 out{};
  for (int i = 0; i < 64; ++i) {
    double a = std::abs(coeffs[i]);
    int32_t mag = int32_t(std::floor(a / step + 1.0 / 3.0));
    out[i] = coeffs[i] < 0 ? -mag : mag;
  }
  return out;
}

Block8x8 dequantize(const Levels8x8& levels, double step) {
  Block8x8 out{};
  for (int i = 0; i < 64; ++i) out[i] = double(levels[i]) * step;
  return out;
}

double quant_step(int qp) { return std::pow(2.0, (qp - 4) / 6.0); }

double rd_lambda(int qp, double scale) {
  return scale * std::pow(2.0, (qp - 12) / 3.0);
}

const std::array<int, 64> kZigzag8x8 = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

} // namespace smc
