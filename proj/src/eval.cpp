#include "smc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace smc {

void RDCurve::validate() const {
  if (points.size() < 4) throw Error("rd curve: need at least 4 points");
  std::vector<RDPoint> s = points;
  std::sort(s.begin(), s.end(),
            [](const RDPoint& a, const RDPoint& b) { return a.rate < b.rate; });
  for (size_t i = 0; i < s.size(); ++i) {
    if (!(s[i].rate > 0)) throw Error("rd curve: nonpositive rate");
    if (!std::isfinite(s[i].psnr_y) || !std::isfinite(s[i].psnr_u) ||
        !std::isfinite(s[i].psnr_v))
      throw Error("rd curve: non-finite psnr");
    if (i == 0) continue;
    if (!(s[i].rate > s[i - 1].rate)) throw Error("rd curve: duplicate rates");
    if (!(s[i].psnr_y > s[i - 1].psnr_y && s[i].psnr_u > s[i - 1].psnr_u &&
          s[i].psnr_v > s[i - 1].psnr_v))
      throw Error("rd curve: psnr not monotone in rate");
  }
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw Error("interpolant: bad input");
  for (size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) throw Error("interpolant: abscissae not increasing");

  std::vector<double> h(n - 1), d(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    d[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  m_.assign(n, 0.0);
  m_[0] = d[0];
  m_[n - 1] = d[n - 2];
  for (size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0) {
      m_[i] = 0;
    } else {
      // Weighted harmonic mean keeps the interpolant shape-preserving.
      double w1 = 2 * h[i] + h[i - 1];
      double w2 = h[i] + 2 * h[i - 1];
      m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  // Fritsch-Carlson limiter on the endpoint slopes.
  auto limit_end = [&](size_t i, size_t seg) {
    if (d[seg] == 0) {
      m_[i] = 0;
    } else {
      if (m_[i] * d[seg] < 0) m_[i] = 0;
      else if (std::abs(m_[i]) > 3 * std::abs(d[seg])) m_[i] = 3 * d[seg];
    }
  };
  limit_end(0, 0);
  limit_end(n - 1, n - 2);
}

double MonotoneCubic::operator()(double x) const {
  if (x < x_.front() || x > x_.back())
    throw Error("interpolant: query outside data range");
  size_t i = size_t(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
  if (i > 0) --i;
  if (i >= x_.size() - 1) i = x_.size() - 2;
  double h = x_[i + 1] - x_[i];
  double t = (x - x_[i]) / h;
  double t2 = t * t, t3 = t2 * t;
  double h00 = 2 * t3 - 3 * t2 + 1;
  double h10 = t3 - 2 * t2 + t;
  double h01 = -2 * t3 + 3 * t2;
  double h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

// Antiderivative of the Hermite segment i evaluated at local parameter t,
// scaled by the segment width (so differences give exact integrals in x).
double MonotoneCubic::segment_antiderivative(size_t i, double t) const {
  double h = x_[i + 1] - x_[i];
  double t2 = t * t, t3 = t2 * t, t4 = t2 * t2;
  double H00 = t4 / 2 - t3 + t;
  double H10 = t4 / 4 - 2 * t3 / 3 + t2 / 2;
  double H01 = -t4 / 2 + t3;
  double H11 = t4 / 4 - t3 / 3;
  return h * (H00 * y_[i] + H10 * h * m_[i] + H01 * y_[i + 1] +
              H11 * h * m_[i + 1]);
}

double MonotoneCubic::integrate(double a, double b) const {
  if (a > b) throw Error("interpolant: reversed integration bounds");
  if (a < x_.front() || b > x_.back())
    throw Error("interpolant: integration outside data range");
  double total = 0;
  for (size_t i = 0; i + 1 < x_.size(); ++i) {
    double lo = std::max(a, x_[i]);
    double hi = std::min(b, x_[i + 1]);
    if (lo >= hi) continue;
    double h = x_[i + 1] - x_[i];
    double t0 = (lo - x_[i]) / h;
    double t1 = (hi - x_[i]) / h;
    total += segment_antiderivative(i, t1) - segment_antiderivative(i, t0);
  }
  return total;
}

namespace {

double bd_component(const RDCurve& anchor, const RDCurve& test,
                    double (*get)(const RDPoint&), double& lo_out,
                    double& hi_out) {
  auto build = [&](const RDCurve& c) {
    std::vector<std::pair<double, double>> pts; // (psnr, log10 rate)
    for (const RDPoint& p : c.points) pts.push_back({get(p), std::log10(p.rate)});
    std::sort(pts.begin(), pts.end());
    std::vector<double> x, y;
    for (auto& [px, py] : pts) {
      x.push_back(px);
      y.push_back(py);
    }
    return MonotoneCubic(std::move(x), std::move(y));
  };
  MonotoneCubic fa = build(anchor);
  MonotoneCubic ft = build(test);
  double lo = std::max(fa.x_min(), ft.x_min());
  double hi = std::min(fa.x_max(), ft.x_max());
  if (!(hi > lo)) throw Error("bd_rate: psnr ranges do not overlap");
  double avg = (ft.integrate(lo, hi) - fa.integrate(lo, hi)) / (hi - lo);
  lo_out = lo;
  hi_out = hi;
  return (std::pow(10.0, avg) - 1.0) * 100.0;
}

} // namespace

BDResult bd_rate(const RDCurve& anchor, const RDCurve& test) {
  anchor.validate();
  test.validate();
  BDResult r;
  r.bd_y = bd_component(anchor, test, [](const RDPoint& p) { return p.psnr_y; },
                        r.psnr_low_y, r.psnr_high_y);
  r.bd_u = bd_component(anchor, test, [](const RDPoint& p) { return p.psnr_u; },
                        r.psnr_low_u, r.psnr_high_u);
  r.bd_v = bd_component(anchor, test, [](const RDPoint& p) { return p.psnr_v; },
                        r.psnr_low_v, r.psnr_high_v);
  return r;
}

SequenceReport sequence_report(const std::vector<Frame>& orig,
                               const std::vector<Frame>& output,
                               size_t total_bits, double fps) {
  if (orig.empty()) throw Error("sequence_report: no frames");
  if (orig.size() != output.size())
    throw Error("sequence_report: frame count mismatch");

  SequenceReport rep;
  double sum_mse_y = 0, sum_mse_u = 0, sum_mse_v = 0;
  for (size_t i = 0; i < orig.size(); ++i) {
    if (!orig[i].same_size(output[i]))
      throw Error("sequence_report: dimension mismatch");
    FrameMetrics fm;
    fm.poc = int(i);
    fm.psnr_y = psnr(orig[i], output[i], PlaneSel::Y);
    fm.psnr_u = psnr(orig[i], output[i], PlaneSel::U);
    fm.psnr_v = psnr(orig[i], output[i], PlaneSel::V);
    rep.frames.push_back(fm);
    sum_mse_y += plane_mse(orig[i], output[i], PlaneSel::Y);
    sum_mse_u += plane_mse(orig[i], output[i], PlaneSel::U);
    sum_mse_v += plane_mse(orig[i], output[i], PlaneSel::V);
  }
  size_t n = orig.size();
  rep.point.rate = double(total_bits) * fps / double(n) / 1000.0;
  rep.point.psnr_y = psnr_from_mse(sum_mse_y / double(n));
  rep.point.psnr_u = psnr_from_mse(sum_mse_u / double(n));
  rep.point.psnr_v = psnr_from_mse(sum_mse_v / double(n));
  return rep;
}

RefUsageStats ref_usage_frame(const PocBlocks& frame) {
  RefUsageStats s;
  for (const BlockRecord& b : frame.blocks) {
    if (b.mode == BlockMode::IntraDc) continue;
    ++s.inter_blocks;
    int used = 0, virt = 0;
    if (b.mode == BlockMode::Uni0 || b.mode == BlockMode::Bi) {
      ++used;
      if (b.ref0_virtual) ++virt;
    }
    if (b.mode == BlockMode::Uni1 || b.mode == BlockMode::Bi) {
      ++used;
      if (b.ref1_virtual) ++virt;
    }
    if (used == 2 && virt == 2) ++s.both_virtual;
    else if (virt >= 1) ++s.one_virtual;
    else ++s.none;
  }
  return s;
}

RefUsageStats ref_usage(const std::vector<PocBlocks>& trace) {
  RefUsageStats s;
  for (const PocBlocks& f : trace) {
    RefUsageStats fs = ref_usage_frame(f);
    s.inter_blocks += fs.inter_blocks;
    s.both_virtual += fs.both_virtual;
    s.one_virtual += fs.one_virtual;
    s.none += fs.none;
  }
  return s;
}

RDCurve read_rd_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  RDCurve c;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("qp", 0) == 0) continue; // header
    std::istringstream ls(line);
    RDPoint p;
    char comma;
    if (!(ls >> p.qp >> comma >> p.rate >> comma >> p.psnr_y >> comma >>
          p.psnr_u >> comma >> p.psnr_v))
      throw Error("malformed rd csv line: " + line);
    c.points.push_back(p);
  }
  return c;
}

void write_rd_csv(const std::string& path, const RDCurve& curve) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path);
  out << "qp,rate_kbps,psnr_y,psnr_u,psnr_v\n";
  out.precision(10);
  for (const RDPoint& p : curve.points)
    out << p.qp << ',' << p.rate << ',' << p.psnr_y << ',' << p.psnr_u << ','
        << p.psnr_v << '\n';
}

} // namespace smc
