#pragma once

#include <array>
#include <cstdint>

namespace smc {

/// 8x8 orthonormal DCT-II over a residual block, row-major.
using Block8x8 = std::array<double, 64>;
using Levels8x8 = std::array<int32_t, 64>;

Block8x8 dct8x8(const std::array<int16_t, 64>& residual);
std::array<int16_t, 64> idct8x8(const Block8x8& coeffs);

/// Dead-zone quantizer: sign(c) * floor(|c|/step + 1/3).
Levels8x8 quantize(const Block8x8& coeffs, double step);
Block8x8 dequantize(const Levels8x8& levels, double step);

/// Quantization step for a QP: 2^((qp-4)/6).
double quant_step(int qp);
/// RDO lambda: scale * 2^((qp-12)/3).
double rd_lambda(int qp, double scale);

/// Standard 8x8 zigzag scan order (index into row-major block).
extern const std::array<int, 64> kZigzag8x8;

} // namespace smc
