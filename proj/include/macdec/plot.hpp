#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace macdec {

struct CurveData {
  std::string label;
  std::vector<double> x, y, se;
};

// Loads one metrics CSV as a single curve; files holding several runs are
// collapsed to their per-episode mean and standard error.
CurveData load_curve_csv(const std::string& path);

// Learning-curve figure: one line per curve with a standard-error band,
// colors assigned by input order, optional dash-dot reference line.
void render_curves_svg(const std::vector<CurveData>& curves,
                       std::optional<double> reference, std::ostream& os);

}  // namespace macdec
