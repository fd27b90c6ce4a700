#pragma once

#include <string>
#include <vector>

#include "smc/frame.hpp"
#include "smc/pipeline.hpp"

namespace smc {

struct RDPoint {
  int qp = -1;       // informational
  double rate = 0;   // kbps
  double psnr_y = 0;
  double psnr_u = 0;
  double psnr_v = 0;
};

struct RDCurve {
  std::vector<RDPoint> points;

  /// Throws unless there are >= 4 points with distinct rates that are
  /// monotone in every PSNR component once sorted by rate.
  void validate() const;
};

struct BDResult {
  double bd_y = 0, bd_u = 0, bd_v = 0; // percent; negative = test saves rate
  double psnr_low_y = 0, psnr_high_y = 0;
  double psnr_low_u = 0, psnr_high_u = 0;
  double psnr_low_v = 0, psnr_high_v = 0;
};

/// Shape-preserving (Fritsch-Carlson) piecewise-cubic interpolant with
/// analytic segment integration.
class MonotoneCubic {
public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double integrate(double a, double b) const; // a <= b, inside [x0, xn]
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }

private:
  double segment_antiderivative(size_t i, double t) const;

  std::vector<double> x_, y_, m_;
};

BDResult bd_rate(const RDCurve& anchor, const RDCurve& test);

struct FrameMetrics {
  int poc = 0;
  double psnr_y = 0, psnr_u = 0, psnr_v = 0;
};

struct SequenceReport {
  RDPoint point;
  std::vector<FrameMetrics> frames;
};

SequenceReport sequence_report(const std::vector<Frame>& orig,
                               const std::vector<Frame>& output,
                               size_t total_bits, double fps);

struct RefUsageStats {
  long inter_blocks = 0;
  long both_virtual = 0;
  long one_virtual = 0;
  long none = 0;

  double frac_both() const { return inter_blocks ? double(both_virtual) / inter_blocks : 0; }
  double frac_one() const { return inter_blocks ? double(one_virtual) / inter_blocks : 0; }
  double frac_none() const { return inter_blocks ? double(none) / inter_blocks : 0; }
};

RefUsageStats ref_usage(const std::vector<PocBlocks>& trace);
RefUsageStats ref_usage_frame(const PocBlocks& frame);

// CSV helpers for the `qp,rate_kbps,psnr_y,psnr_u,psnr_v` exchange format.
RDCurve read_rd_csv(const std::string& path);
void write_rd_csv(const std::string& path, const RDCurve& curve);

} // namespace smc
