#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "smc/eval.hpp"
#include "smc/pipeline.hpp"

using nlohmann::json;

namespace {

std::string kind_name(smc::ActionKind k) {
  switch (k) {
    case smc::ActionKind::S: return "S";
    case smc::ActionKind::E: return "E";
    case smc::ActionKind::J: return "J";
  }
  return "?";
}

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw smc::Error("cannot open " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::vector<uint8_t>& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw smc::Error("cannot open " + path);
  out.write(reinterpret_cast<const char*>(data.data()),
            std::streamsize(data.size()));
  if (!out) throw smc::Error("write failed: " + path);
}

json psnr_json(double v) {
  if (std::isinf(v)) return "lossless";
  return v;
}

uint64_t config_hash(const smc::EncodeOptions& o, int frames) {
  std::ostringstream ss;
  ss << o.codec.qp << '/' << o.codec.intra_period << '/' << o.tools.rfs
     << o.tools.pfe << o.tools.jise << '/' << o.stenet.flow_search_range << '/'
     << frames;
  std::string s = ss.str();
  return smc::fnv1a64(reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

int cmd_encode(const std::string& input, const std::string& output, int qp,
               int frames, bool no_rfs, bool no_pfe, bool no_jise,
               const std::string& trace_path, const std::string& stats_path) {
  std::vector<smc::Frame> orig = smc::read_y4m_file(input);
  if (frames > 0 && size_t(frames) < orig.size()) orig.resize(size_t(frames));
  if (orig.empty()) throw smc::Error("no frames in " + input);

  smc::EncodeOptions opts;
  opts.codec.qp = qp;
  opts.tools.rfs = !no_rfs;
  opts.tools.pfe = !no_pfe;
  opts.tools.jise = !no_jise;

  smc::EncodeResult res = smc::encode_sequence(orig, opts);
  write_file(output, res.bitstream);

  smc::SequenceReport rep =
      smc::sequence_report(orig, res.outputs, res.total_bits, 30.0);
  smc::RefUsageStats usage = smc::ref_usage(res.blocks);

  json stats;
  stats["input"] = input;
  stats["output"] = output;
  stats["qp"] = qp;
  stats["frames"] = orig.size();
  stats["tools"] = {{"rfs", opts.tools.rfs},
                    {"pfe", opts.tools.pfe},
                    {"jise", opts.tools.jise}};
  stats["total_bits"] = res.total_bits;
  stats["rate_kbps"] = rep.point.rate;
  stats["psnr"] = {{"y", psnr_json(rep.point.psnr_y)},
                   {"u", psnr_json(rep.point.psnr_u)},
                   {"v", psnr_json(rep.point.psnr_v)}};
  json per_frame = json::array();
  for (const auto& fm : rep.frames)
    per_frame.push_back({{"poc", fm.poc},
                         {"psnr_y", psnr_json(fm.psnr_y)},
                         {"psnr_u", psnr_json(fm.psnr_u)},
                         {"psnr_v", psnr_json(fm.psnr_v)}});
  stats["frames_table"] = per_frame;
  stats["ref_usage"] = {{"inter_blocks", usage.inter_blocks},
                        {"both_virtual", usage.frac_both()},
                        {"one_virtual", usage.frac_one()},
                        {"none", usage.frac_none()}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                (unsigned long long)config_hash(opts, int(orig.size())));
  stats["manifest"] = {
      {"config_hash", std::string(buf)},
      {"bitstream_hash",
       smc::fnv1a64(res.bitstream.data(), res.bitstream.size())},
      {"output_hash", smc::frames_hash(res.outputs)}};

  if (!stats_path.empty()) {
    std::ofstream out(stats_path);
    if (!out) throw smc::Error("cannot open " + stats_path);
    out << stats.dump(2) << "\n";
  } else {
    std::cout << stats.dump(2) << "\n";
  }

  if (!trace_path.empty()) {
    json tr = json::array();
    for (const smc::ActionTrace& a : res.actions) {
      json e = {{"order", a.order},
                {"kind", kind_name(a.kind)},
                {"target", a.target},
                {"inputs", a.inputs},
                {"calls", a.calls}};
      if (a.kind == smc::ActionKind::S) e["d"] = a.d;
      tr.push_back(e);
    }
    std::ofstream out(trace_path);
    if (!out) throw smc::Error("cannot open " + trace_path);
    out << tr.dump(2) << "\n";
  }
  return 0;
}

int cmd_decode(const std::string& input, const std::string& output) {
  std::vector<uint8_t> bs = read_file(input);
  smc::DecodeResult res = smc::decode_sequence(bs);
  smc::write_y4m_file(output, res.outputs);
  std::cout << "decoded " << res.outputs.size() << " frames ("
            << res.header.width << "x" << res.header.height << ", qp "
            << res.header.qp << ")\n";
  return 0;
}

int cmd_bdrate(const std::string& anchor_csv, const std::string& test_csv,
               const std::string& out_path) {
  smc::RDCurve anchor = smc::read_rd_csv(anchor_csv);
  smc::RDCurve test = smc::read_rd_csv(test_csv);
  smc::BDResult r = smc::bd_rate(anchor, test);
  json j = {{"bd_rate_y_percent", r.bd_y},
            {"bd_rate_u_percent", r.bd_u},
            {"bd_rate_v_percent", r.bd_v},
            {"overlap_y", {r.psnr_low_y, r.psnr_high_y}},
            {"overlap_u", {r.psnr_low_u, r.psnr_high_u}},
            {"overlap_v", {r.psnr_low_v, r.psnr_high_v}}};
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw smc::Error("cannot open " + out_path);
    out << j.dump(2) << "\n";
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_metrics(const std::string& a_path, const std::string& b_path) {
  std::vector<smc::Frame> a = smc::read_y4m_file(a_path);
  std::vector<smc::Frame> b = smc::read_y4m_file(b_path);
  smc::SequenceReport rep = smc::sequence_report(a, b, 0, 30.0);
  std::cout << "poc,psnr_y,psnr_u,psnr_v\n";
  auto fmt = [](double v) {
    if (std::isinf(v)) return std::string("lossless");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  for (const auto& fm : rep.frames)
    std::cout << fm.poc << ',' << fmt(fm.psnr_y) << ',' << fmt(fm.psnr_u)
              << ',' << fmt(fm.psnr_v) << "\n";
  std::cout << "average," << fmt(rep.point.psnr_y) << ','
            << fmt(rep.point.psnr_u) << ',' << fmt(rep.point.psnr_v) << "\n";
  return 0;
}

int cmd_sched_trace(int frames, const std::string& out_path) {
  if (frames <= 0) throw smc::Error("--frames must be positive");
  json plan = json::array();
  int last = frames - 1;
  for (int base = 0; base <= last; base += 8) {
    for (const smc::Action& a : smc::plan_window(base, last)) {
      json e = {{"kind", kind_name(a.kind)},
                {"target", a.target},
                {"inputs", a.inputs()}};
      if (a.kind == smc::ActionKind::S) e["d"] = a.d;
      plan.push_back(e);
    }
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw smc::Error("cannot open " + out_path);
    out << plan.dump(2) << "\n";
  }
  std::cout << plan.dump(2) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"smc: reference-frame synthesis + post-filter minicodec"};
  app.require_subcommand(1);

  std::string input, output, trace_path, stats_path;
  int qp = 32, frames = 0;
  bool no_rfs = false, no_pfe = false, no_jise = false;

  CLI::App* enc = app.add_subcommand("encode", "Encode a y4m sequence");
  enc->add_option("input", input, "input .y4m")->required();
  enc->add_option("-o,--output", output, "output .smc")->required();
  enc->add_option("--qp", qp, "quantization parameter [0,51]");
  enc->add_option("--frames", frames, "encode only the first N frames");
  enc->add_flag("--no-rfs", no_rfs, "disable virtual reference synthesis");
  enc->add_flag("--no-pfe", no_pfe, "disable post-filter enhancement");
  enc->add_flag("--no-jise", no_jise,
                "run synthesis and enhancement separately at joint positions");
  enc->add_option("--trace", trace_path, "write action trace JSON");
  enc->add_option("--stats", stats_path, "write stats JSON (default: stdout)");

  std::string dec_in, dec_out;
  CLI::App* dec = app.add_subcommand("decode", "Decode a bitstream to y4m");
  dec->add_option("input", dec_in, "input .smc")->required();
  dec->add_option("-o,--output", dec_out, "output .y4m")->required();

  std::string anchor_csv, test_csv, bd_out;
  CLI::App* bd = app.add_subcommand("bdrate", "BD-rate between two RD curves");
  bd->add_option("anchor", anchor_csv, "anchor curve CSV")->required();
  bd->add_option("test", test_csv, "test curve CSV")->required();
  bd->add_option("-o,--output", bd_out, "write result JSON");

  std::string met_a, met_b;
  CLI::App* met = app.add_subcommand("metrics", "Per-frame PSNR between two y4m files");
  met->add_option("a", met_a, "reference .y4m")->required();
  met->add_option("b", met_b, "distorted .y4m")->required();

  int st_frames = 16;
  std::string st_out;
  CLI::App* st = app.add_subcommand("sched-trace", "Print the scheduler action plan");
  st->add_option("--frames", st_frames, "sequence length");
  st->add_option("-o,--output", st_out, "write plan JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (enc->parsed())
      return cmd_encode(input, output, qp, frames, no_rfs, no_pfe, no_jise,
                        trace_path, stats_path);
    if (dec->parsed()) return cmd_decode(dec_in, dec_out);
    if (bd->parsed()) return cmd_bdrate(anchor_csv, test_csv, bd_out);
    if (met->parsed()) return cmd_metrics(met_a, met_b);
    if (st->parsed()) return cmd_sched_trace(st_frames, st_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
