#pragma once

// Text renderings of results. Every function is a pure string builder so the
// bytes depend only on the inputs.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "conefield/causal.hpp"
#include "conefield/smoothing.hpp"

namespace conefield::cli {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string index_header(int dim) { return dim == 2 ? "i,j" : "i,j,k"; }

inline std::string index_cols(const GridChart& chart, CellId c) {
  const CellIndex i = chart.index(c);
  std::string s = std::to_string(i[0]) + "," + std::to_string(i[1]);
  if (chart.dim() == 3) s += "," + std::to_string(i[2]);
  return s;
}

/// One row per cell: indices then value. Header "i,j,value" in 2D.
inline std::string scalar_csv(const GridChart& chart, const std::vector<double>& values) {
  std::string out = index_header(chart.dim()) + ",value\n";
  for (CellId c = 0; c < chart.cell_count(); ++c) out += index_cols(chart, c) + "," + fmt(values[c]) + "\n";
  return out;
}

inline std::string set_csv(const GridChart& chart, const CellSet& s) {
  std::string out = index_header(chart.dim()) + "\n";
  for (CellId c : s.cells()) out += index_cols(chart, c) + "\n";
  return out;
}

inline std::string path_csv(const GridChart& chart, const std::vector<CellId>& cells) {
  std::string out = "step," + index_header(chart.dim()) + "\n";
  for (std::size_t k = 0; k < cells.size(); ++k) out += std::to_string(k) + "," + index_cols(chart, cells[k]) + "\n";
  return out;
}

inline std::string edges_csv(const CausalGraph& g) {
  const GridChart& chart = *g.chart;
  const std::string h = index_header(chart.dim());
  std::string out;
  if (chart.dim() == 2) out = "from_i,from_j,to_i,to_j,length\n";
  else out = "from_i,from_j,from_k,to_i,to_j,to_k,length\n";
  for (CellId a = 0; a < g.size(); ++a) {
    if (g.graph.has_loop(a)) out += index_cols(chart, a) + "," + index_cols(chart, a) + ",0\n";
    for (CellId b : g.successors(a)) out += index_cols(chart, a) + "," + index_cols(chart, b) + "," + fmt(g.edge_length(a, b)) + "\n";
  }
  return out;
}

inline std::string graph_csv(const LipschitzGraph& g) {
  std::string out = "y,g\n";
  for (std::size_t i = 0; i < g.size(); ++i) out += fmt(g.y(i)) + "," + fmt(g.values()[i]) + "\n";
  return out;
}

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string ramp(double t) {
  // dark violet to yellow, linear in RGB
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(68 + t * (253 - 68)));
  const int g = static_cast<int>(std::lround(1 + t * (231 - 1)));
  const int b = static_cast<int>(std::lround(84 + t * (37 - 84)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace detail

/// Heatmap of a scalar field: one rectangle per cell (the middle slice for a
/// 3D chart), second axis pointing up, legend with the value range.
inline std::string svg_heatmap(const GridChart& chart, const std::vector<double>& values, const std::string& title) {
  const int nx = chart.axis(0).cells, ny = chart.axis(1).cells;
  const int slice = chart.dim() == 3 ? chart.axis(2).cells / 2 : 0;
  const int px = std::max(1, 512 / std::max(nx, ny));
  const int w = nx * px, h = ny * px;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const double v = values[chart.id({i, j, slice})];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  const double span = hi > lo ? hi - lo : 1.0;
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w + 120) + "\" height=\"" +
         std::to_string(h + 40) + "\" viewBox=\"0 0 " + std::to_string(w + 120) + " " + std::to_string(h + 40) + "\">\n";
  out += "<title>" + detail::xml_escape(title) + "</title>\n";
  out += "<g shape-rendering=\"crispEdges\">\n";
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double v = values[chart.id({i, j, slice})];
      out += "<rect x=\"" + std::to_string(i * px) + "\" y=\"" + std::to_string(h - (j + 1) * px + 30) + "\" width=\"" +
             std::to_string(px) + "\" height=\"" + std::to_string(px) + "\" fill=\"" + detail::ramp((v - lo) / span) + "\"/>\n";
    }
  out += "</g>\n";
  out += "<text x=\"0\" y=\"18\" font-family=\"monospace\" font-size=\"14\">" + detail::xml_escape(title) + "</text>\n";
  out += "<defs><linearGradient id=\"ramp\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">";
  out += "<stop offset=\"0\" stop-color=\"" + detail::ramp(0.0) + "\"/><stop offset=\"1\" stop-color=\"" + detail::ramp(1.0) + "\"/>";
  out += "</linearGradient></defs>\n";
  out += "<rect x=\"" + std::to_string(w + 16) + "\" y=\"30\" width=\"20\" height=\"" + std::to_string(h) + "\" fill=\"url(#ramp)\"/>\n";
  out += "<text x=\"" + std::to_string(w + 42) + "\" y=\"40\" font-family=\"monospace\" font-size=\"11\">" + fmt(hi) + "</text>\n";
  out += "<text x=\"" + std::to_string(w + 42) + "\" y=\"" + std::to_string(h + 30) + "\" font-family=\"monospace\" font-size=\"11\">" + fmt(lo) + "</text>\n";
  out += "</svg>\n";
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IOFailure, "cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw Error(ErrorCode::IOFailure, "write failed for " + path.string());
}

}  // namespace conefield::cli
