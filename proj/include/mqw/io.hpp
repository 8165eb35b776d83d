#pragma once

// Serialisation of sweep and spectrum results: CSV text with 17 significant
// digits, JSON sidecars, atomic file replacement, and a bare-bones SVG plot.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mqw/core.hpp"
#include "mqw/ncg.hpp"
#include "mqw/spectral.hpp"

namespace mqw::io {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Writes to `path.tmp` and renames over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + tmp.string());
    out << contents;
    if (!out) throw Error(ErrorKind::InvalidArgument, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline constexpr const char* kSweepHeader = "p_bar,theta_s,avg_q,d_avg_q";
inline constexpr const char* kSpectrumHeader = "k,phase,residual,multiplicity_cluster";

inline std::string sweep_csv(const NcgCurve& curve) {
  std::string out = std::string(kSweepHeader) + "\n";
  for (const auto& s : curve.samples) {
    out += format_double(s.p_bar) + "," + format_double(s.theta_s) + "," + format_double(s.avg_q) +
           "," + format_double(s.d_avg_q) + "\n";
  }
  return out;
}

/// Parses a sweep CSV back into rows (p_bar, theta_s, avg_q, d_avg_q).
inline std::vector<NcgSample> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader)
    throw Error(ErrorKind::InvalidArgument, "unexpected sweep CSV header");
  std::vector<NcgSample> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    NcgSample s;
    char c1, c2, c3;
    std::istringstream ls(line);
    if (!(ls >> s.p_bar >> c1 >> s.theta_s >> c2 >> s.avg_q >> c3 >> s.d_avg_q))
      throw Error(ErrorKind::InvalidArgument, "malformed sweep row: " + line);
    rows.push_back(s);
  }
  return rows;
}

inline std::string spectrum_csv(const EigenSystem& es, double cluster_tol = kDegeneracyTolerance) {
  const auto labels = cluster_labels(es, cluster_tol);
  std::string out = std::string(kSpectrumHeader) + "\n";
  for (std::size_t k = 0; k < es.size(); ++k) {
    out += std::to_string(k) + "," + format_double(es.phases[k]) + "," +
           format_double(es.residuals[k]) + "," + std::to_string(labels[k]) + "\n";
  }
  return out;
}

inline nlohmann::ordered_json params_json(const PhysParams& p) {
  const CoinAngles coin = coin_angles(p);
  nlohmann::ordered_json j;
  j["epsilon"] = p.epsilon();
  j["hbar"] = p.hbar();
  j["mass"] = p.mass();
  j["eB"] = p.eB();
  if (p.flux_denominator()) j["flux_denominator"] = *p.flux_denominator();
  j["theta_plus"] = coin.theta_plus;
  j["theta_minus"] = coin.theta_minus;
  j["coin_override"] = p.coin_override().has_value();
  return j;
}

/// Two stacked panels: theta_S(p_bar) and <q>(p_bar).
inline std::string sweep_svg(const NcgCurve& curve) {
  constexpr double width = 640, panel = 240, margin = 40;
  auto polyline = [&](auto value, double top) {
    double lo = 1e300, hi = -1e300;
    for (const auto& s : curve.samples) {
      lo = std::min(lo, value(s));
      hi = std::max(hi, value(s));
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    std::string pts;
    for (const auto& s : curve.samples) {
      const double x = margin + (width - 2 * margin) * s.p_bar / kTwoPi;
      const double y = top + panel - margin / 2 - (panel - margin) * (value(s) - lo) / (hi - lo);
      pts += format_double(x) + "," + format_double(y) + " ";
    }
    return "<polyline fill=\"none\" stroke=\"black\" points=\"" + pts + "\"/>\n";
  };
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\">\n";
  svg += "<text x=\"40\" y=\"20\">theta_S vs p_bar</text>\n";
  svg += polyline([](const NcgSample& s) { return s.theta_s; }, 0.0);
  svg += "<text x=\"40\" y=\"260\">&lt;q&gt; vs p_bar</text>\n";
  svg += polyline([](const NcgSample& s) { return s.avg_q; }, panel);
  svg += "</svg>\n";
  return svg;
}

}  // namespace mqw::io
