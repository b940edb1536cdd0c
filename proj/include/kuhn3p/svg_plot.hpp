#pragma once
// Standalone SVG chart of the three expectations against the pot, points
// connected in trace order so folded-back segments draw the multi-valued
// pieces of the curve.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "kuhn3p/continuation.hpp"

namespace kuhn3p {

inline void emit_expectation_plot(const Branch& br, const std::filesystem::path& path,
                                  bool log_pot = false) {
  if (br.points.empty()) throw std::invalid_argument("cannot plot an empty branch");
  std::vector<double> px;
  std::vector<std::array<double, 3>> pe;
  int dropped = 0;
  for (const BranchPoint& pt : br.points) {
    if (log_pot && !(pt.pot > 0.0)) {
      ++dropped;
      continue;
    }
    px.push_back(log_pot ? std::log10(pt.pot) : pt.pot);
    pe.push_back(pt.expectations);
  }
  if (dropped > 0)
    std::fprintf(stderr, "plot: dropped %d points with P <= 0 (log axis)\n", dropped);
  if (px.empty()) throw std::invalid_argument("no plottable points");

  double xmin = px[0], xmax = px[0], ymin = pe[0][0], ymax = pe[0][0];
  for (std::size_t i = 0; i < px.size(); ++i) {
    xmin = std::min(xmin, px[i]);
    xmax = std::max(xmax, px[i]);
    for (double e : pe[i]) {
      ymin = std::min(ymin, e);
      ymax = std::max(ymax, e);
    }
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-12) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double W = 960, H = 600, ml = 80, mr = 30, mt = 30, mb = 60;
  auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto sy = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  char buf[256];
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
                ml, H - mb, W - mr, H - mb);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", ml,
                mt, ml, H - mb);
  out << buf;
  const int n_ticks = 6;
  for (int i = 0; i <= n_ticks; ++i) {
    const double xv = xmin + (xmax - xmin) * i / n_ticks;
    const double yv = ymin + (ymax - ymin) * i / n_ticks;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
                  sx(xv), H - mb, sx(xv), H - mb + 6);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\">%.4g</text>\n",
                  sx(xv), H - mb + 20, log_pot ? std::pow(10.0, xv) : xv);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
                  ml - 6, sy(yv), ml, sy(yv));
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"end\">%.4g</text>\n",
                  ml - 10, sy(yv) + 4, yv);
    out << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" font-size=\"14\" text-anchor=\"middle\">%s</text>\n",
                (ml + W - mr) / 2, H - 15, log_pot ? "P (log scale)" : "P");
  out << buf;

  const char* colors[3] = {"#1f77b4", "#d62728", "#2ca02c"};
  const char* labels[3] = {"E1", "E2", "E3"};
  for (int k = 0; k < 3; ++k) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[k]
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < px.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(px[i]), sy(pe[i][k]));
      out << buf;
    }
    out << "\"/>\n";
  }
  for (int k = 0; k < 3; ++k) {
    const double lx = W - mr - 120, ly = mt + 20 + 20 * k;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"%s\" "
                  "stroke-width=\"3\"/>\n",
                  lx, ly, lx + 30, ly, colors[k]);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-size=\"13\">%s</text>\n", lx + 38, ly + 4,
                  labels[k]);
    out << buf;
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failure on " + path.string());
}

}  // namespace kuhn3p
