#include "macdec/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace macdec {

CurveData load_curve_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string line;
  int lineno = 0;
  // rows grouped by episode: run -> value
  std::map<long, std::map<int, double>> by_episode;
  std::map<long, double> stored_se;
  bool has_se_column = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line.rfind("run,episode,return_mean,epsilon,seconds", 0) != 0)
        throw std::runtime_error(path + ":1: unexpected header");
      has_se_column = line.find(",return_se") != std::string::npos;
      continue;
    }
    int run;
    long episode;
    double ret, eps, secs, se = 0.0;
    int n = std::sscanf(line.c_str(), "%d,%ld,%lf,%lf,%lf,%lf", &run, &episode,
                        &ret, &eps, &secs, &se);
    if (n < 5)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": parse error");
    by_episode[episode][run] = ret;
    if (has_se_column && n >= 6) stored_se[episode] = se;
  }
  if (by_episode.empty())
    throw std::runtime_error(path + ": no data rows");

  CurveData c;
  c.label = std::filesystem::path(path).stem().string();
  for (const auto& [episode, runs] : by_episode) {
    double mean = 0.0;
    for (const auto& [run, v] : runs) mean += v;
    mean /= static_cast<double>(runs.size());
    double se = 0.0;
    if (has_se_column) {
      se = stored_se.count(episode) ? stored_se[episode] : 0.0;
    } else if (runs.size() > 1) {
      double var = 0.0;
      for (const auto& [run, v] : runs) var += (v - mean) * (v - mean);
      se = std::sqrt(var / (runs.size() - 1)) /
           std::sqrt(static_cast<double>(runs.size()));
    }
    c.x.push_back(static_cast<double>(episode));
    c.y.push_back(mean);
    c.se.push_back(se);
  }
  return c;
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#ff7f0e", "#9467bd", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

void render_curves_svg(const std::vector<CurveData>& curves,
                       std::optional<double> reference, std::ostream& os) {
  if (curves.empty()) throw std::invalid_argument("no curves to render");
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& c : curves) {
    for (size_t k = 0; k < c.x.size(); ++k) {
      xmin = std::min(xmin, c.x[k]);
      xmax = std::max(xmax, c.x[k]);
      ymin = std::min(ymin, c.y[k] - c.se[k]);
      ymax = std::max(ymax, c.y[k] + c.se[k]);
    }
  }
  if (reference) {
    ymin = std::min(ymin, *reference);
    ymax = std::max(ymax, *reference);
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) {
    ymax = ymin + 1.0;
    ymin -= 1.0;
  }
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double W = 860, H = 520, L = 70, R = 24, T = 24, B = 52;
  auto sx = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto sy = [&](double y) {
    return H - B - (y - ymin) / (ymax - ymin) * (H - T - B);
  };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";

  // axes
  os << "<line x1=\"" << num(L) << "\" y1=\"" << num(H - B) << "\" x2=\""
     << num(W - R) << "\" y2=\"" << num(H - B)
     << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  os << "<line x1=\"" << num(L) << "\" y1=\"" << num(T) << "\" x2=\"" << num(L)
     << "\" y2=\"" << num(H - B) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    double xv = xmin + (xmax - xmin) * k / 5.0;
    double yv = ymin + (ymax - ymin) * k / 5.0;
    os << "<line x1=\"" << num(sx(xv)) << "\" y1=\"" << num(H - B) << "\" x2=\""
       << num(sx(xv)) << "\" y2=\"" << num(H - B + 5)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(sx(xv)) << "\" y=\"" << num(H - B + 20)
       << "\" font-size=\"12\" text-anchor=\"middle\">" << tick_label(xv)
       << "</text>\n";
    os << "<line x1=\"" << num(L - 5) << "\" y1=\"" << num(sy(yv)) << "\" x2=\""
       << num(L) << "\" y2=\"" << num(sy(yv)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(L - 8) << "\" y=\"" << num(sy(yv) + 4)
       << "\" font-size=\"12\" text-anchor=\"end\">" << tick_label(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << num((L + W - R) / 2) << "\" y=\"" << num(H - 14)
     << "\" font-size=\"13\" text-anchor=\"middle\">episode</text>\n";
  os << "<text x=\"16\" y=\"" << num((T + H - B) / 2)
     << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << num((T + H - B) / 2) << ")\">discounted return</text>\n";

  for (size_t ci = 0; ci < curves.size(); ++ci) {
    const CurveData& c = curves[ci];
    const char* color = kPalette[ci % kPaletteSize];
    bool any_se = std::any_of(c.se.begin(), c.se.end(),
                              [](double s) { return s > 0.0; });
    if (any_se && c.x.size() > 1) {
      os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" "
         << "stroke=\"none\" points=\"";
      for (size_t k = 0; k < c.x.size(); ++k)
        os << num(sx(c.x[k])) << ',' << num(sy(c.y[k] + c.se[k])) << ' ';
      for (size_t k = c.x.size(); k-- > 0;)
        os << num(sx(c.x[k])) << ',' << num(sy(c.y[k] - c.se[k])) << ' ';
      os << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.8\" points=\"";
    for (size_t k = 0; k < c.x.size(); ++k)
      os << num(sx(c.x[k])) << ',' << num(sy(c.y[k])) << ' ';
    os << "\"/>\n";
  }
  if (reference) {
    os << "<line x1=\"" << num(L) << "\" y1=\"" << num(sy(*reference))
       << "\" x2=\"" << num(W - R) << "\" y2=\"" << num(sy(*reference))
       << "\" stroke=\"red\" stroke-width=\"1.4\" "
          "stroke-dasharray=\"8 3 2 3\"/>\n";
  }
  // legend
  double ly = T + 10;
  for (size_t ci = 0; ci < curves.size(); ++ci) {
    const char* color = kPalette[ci % kPaletteSize];
    os << "<line x1=\"" << num(W - R - 190) << "\" y1=\"" << num(ly)
       << "\" x2=\"" << num(W - R - 160) << "\" y2=\"" << num(ly)
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(W - R - 152) << "\" y=\"" << num(ly + 4)
       << "\" font-size=\"12\">" << curves[ci].label << "</text>\n";
    ly += 18;
  }
  os << "</svg>\n";
}

}  // namespace macdec
