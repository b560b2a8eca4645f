#include "corrkit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "corrkit/csv.hpp"
#include "corrkit/errors.hpp"

namespace corrkit {

namespace {

constexpr double kWidth = 860.0, kHeight = 520.0;
constexpr double kLeft = 72.0, kRight = 24.0, kTop = 48.0, kBottom = 56.0;
constexpr const char* kPalette[8] = {"#1b6ca8", "#c0392b", "#1e8449", "#8e44ad",
                                     "#d68910", "#148f77", "#7b241c", "#2c3e50"};

std::string escape_xml(const std::string& s) {
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

struct Range {
  double lo = 0.0, hi = 1.0;
};

Range pad_range(double lo, double hi) {
  if (lo == hi) {
    const double pad = lo == 0.0 ? 0.5 : std::abs(lo) * 0.05;
    return {lo - pad, hi + pad};
  }
  const double pad = (hi - lo) * 0.04;
  return {lo - pad, hi + pad};
}

// Tick step rounded to a 1/2/5 decade multiple.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  const double step = r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0;
  return step * mag;
}

class Canvas {
 public:
  Canvas(Range xr, Range yr, bool log_x) : xr_(xr), yr_(yr), log_x_(log_x) {}

  double sx(double x) const {
    const double v = log_x_ ? std::log10(x) : x;
    return kLeft + (v - xr_.lo) / (xr_.hi - xr_.lo) * (kWidth - kLeft - kRight);
  }
  double sy(double y) const {
    return kHeight - kBottom - (y - yr_.lo) / (yr_.hi - yr_.lo) * (kHeight - kTop - kBottom);
  }

  Range xr_, yr_;
  bool log_x_;
};

void open_svg(std::ostringstream& out, const PlotOptions& options) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"#ffffff\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"26\" font-family=\"sans-serif\" font-size=\"16\""
      << " text-anchor=\"middle\">" << escape_xml(options.title) << "</text>\n";
}

void draw_axes(std::ostringstream& out, const Canvas& c, const PlotOptions& options) {
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
  // frame
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
      << "\" height=\"" << kHeight - kTop - kBottom
      << "\" fill=\"none\" stroke=\"#888888\"/>\n";

  if (c.log_x_) {
    const int d0 = static_cast<int>(std::ceil(c.xr_.lo - 1e-9));
    const int d1 = static_cast<int>(std::floor(c.xr_.hi + 1e-9));
    for (int d = d0; d <= d1; ++d) {
      const double px = kLeft + (d - c.xr_.lo) / (c.xr_.hi - c.xr_.lo) *
                                    (kWidth - kLeft - kRight);
      out << "<line x1=\"" << format_double(px) << "\" y1=\"" << kTop << "\" x2=\""
          << format_double(px) << "\" y2=\"" << kHeight - kBottom
          << "\" stroke=\"#dddddd\"/>\n";
      out << "<text x=\"" << format_double(px) << "\" y=\"" << kHeight - kBottom + 16
          << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
    }
  } else {
    const double step = nice_step(c.xr_.hi - c.xr_.lo, 5);
    for (double v = std::ceil(c.xr_.lo / step) * step; v <= c.xr_.hi + 1e-12 * step; v += step) {
      const double px = c.sx(v);
      out << "<line x1=\"" << format_double(px) << "\" y1=\"" << kTop << "\" x2=\""
          << format_double(px) << "\" y2=\"" << kHeight - kBottom
          << "\" stroke=\"#dddddd\"/>\n";
      out << "<text x=\"" << format_double(px) << "\" y=\"" << kHeight - kBottom + 16
          << "\" text-anchor=\"middle\">" << format_double(std::abs(v) < 1e-12 ? 0.0 : v)
          << "</text>\n";
    }
  }
  const double ystep = nice_step(c.yr_.hi - c.yr_.lo, 5);
  for (double v = std::ceil(c.yr_.lo / ystep) * ystep; v <= c.yr_.hi + 1e-12 * ystep;
       v += ystep) {
    const double py = c.sy(v);
    out << "<line x1=\"" << kLeft << "\" y1=\"" << format_double(py) << "\" x2=\""
        << kWidth - kRight << "\" y2=\"" << format_double(py) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << format_double(py + 4)
        << "\" text-anchor=\"end\">" << format_double(std::abs(v) < 1e-12 ? 0.0 : v)
        << "</text>\n";
  }
  out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\">" << escape_xml(options.x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (kTop + kHeight - kBottom) / 2 << ")\">" << escape_xml(options.y_label)
      << "</text>\n";
  out << "</g>\n";
}

void draw_polyline(std::ostringstream& out, const Canvas& c, const std::vector<double>& xs,
                   const std::vector<double>& ys, const char* color) {
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out << ' ';
    out << format_double(c.sx(xs[i])) << ',' << format_double(c.sy(ys[i]));
  }
  out << "\"/>\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw ValidationError("failed writing '" + path + "'");
}

}  // namespace

void write_line_plot_svg(const std::string& path, const std::vector<PlotSeries>& series,
                         const PlotOptions& options) {
  if (series.empty()) throw ValidationError("line plot needs at least one series");
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty())
      throw ValidationError("series '" + s.name + "' needs matching non-empty x/y");
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        throw ValidationError("series '" + s.name + "' contains non-finite values");
      if (options.log_x && !(s.x[i] > 0.0))
        throw ValidationError("log-scale x requires positive x values");
      const double xv = options.log_x ? std::log10(s.x[i]) : s.x[i];
      xlo = std::min(xlo, xv);
      xhi = std::max(xhi, xv);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  const Canvas canvas(pad_range(xlo, xhi), pad_range(ylo, yhi), options.log_x);

  std::ostringstream out;
  open_svg(out, options);
  draw_axes(out, canvas, options);
  for (size_t k = 0; k < series.size(); ++k)
    draw_polyline(out, canvas, series[k].x, series[k].y, kPalette[k % 8]);
  // legend
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (size_t k = 0; k < series.size(); ++k) {
    const double y = kTop + 16 + 16 * static_cast<double>(k);
    out << "<line x1=\"" << kWidth - kRight - 150 << "\" y1=\"" << y << "\" x2=\""
        << kWidth - kRight - 130 << "\" y2=\"" << y << "\" stroke=\"" << kPalette[k % 8]
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kWidth - kRight - 124 << "\" y=\"" << y + 4 << "\">"
        << escape_xml(series[k].name) << "</text>\n";
  }
  out << "</g>\n</svg>\n";
  write_file(path, out.str());
}

void write_histogram_svg(const std::string& path, const std::vector<double>& values, int n_bins,
                         const PlotOptions& options, const std::vector<double>& overlay_x,
                         const std::vector<double>& overlay_y) {
  if (values.empty()) throw ValidationError("histogram needs values");
  if (n_bins < 1) throw ValidationError("histogram needs at least one bin");
  if (overlay_x.size() != overlay_y.size())
    throw ValidationError("overlay x/y must have matching sizes");
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  for (double v : values)
    if (!std::isfinite(v)) throw ValidationError("histogram values must be finite");
  const Range vr = pad_range(lo, hi);
  const double bin_w = (vr.hi - vr.lo) / n_bins;

  std::vector<double> density(static_cast<size_t>(n_bins), 0.0);
  for (double v : values) {
    auto b = static_cast<long>((v - vr.lo) / bin_w);
    b = std::clamp<long>(b, 0, n_bins - 1);
    density[static_cast<size_t>(b)] += 1.0;
  }
  const double norm = static_cast<double>(values.size()) * bin_w;
  for (auto& d : density) d /= norm;

  double dmax = *std::max_element(density.begin(), density.end());
  for (double y : overlay_y) {
    if (!std::isfinite(y)) throw ValidationError("overlay values must be finite");
    dmax = std::max(dmax, y);
  }
  const Canvas canvas({vr.lo, vr.hi}, pad_range(0.0, dmax), false);

  std::ostringstream out;
  open_svg(out, options);
  draw_axes(out, canvas, options);
  for (int b = 0; b < n_bins; ++b) {
    const double x0 = canvas.sx(vr.lo + b * bin_w);
    const double x1 = canvas.sx(vr.lo + (b + 1) * bin_w);
    const double y = canvas.sy(density[static_cast<size_t>(b)]);
    const double y0 = canvas.sy(0.0);
    out << "<rect x=\"" << format_double(x0) << "\" y=\"" << format_double(y) << "\" width=\""
        << format_double(x1 - x0) << "\" height=\"" << format_double(y0 - y)
        << "\" fill=\"#9ec2dd\" stroke=\"#1b6ca8\" stroke-width=\"0.5\"/>\n";
  }
  if (!overlay_x.empty()) draw_polyline(out, canvas, overlay_x, overlay_y, "#c0392b");
  out << "</svg>\n";
  write_file(path, out.str());
}

}  // namespace corrkit
