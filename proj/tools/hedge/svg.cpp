#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace hedge::cli::svg {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 150;
constexpr double kTop = 40;
constexpr double kBottom = 50;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* colour(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
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
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) hi = lo + 1;
  }
};

class Canvas {
 public:
  Canvas(const std::string& title) {
    out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
            "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    text(kWidth / 2, 22, title, "middle", 15);
  }

  void text(double x, double y, const std::string& s, const char* anchor = "start", int size = 12,
            double rotate = 0) {
    out_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\" font-size=\"" +
            std::to_string(size) + "\"";
    if (rotate != 0) out_ += " transform=\"rotate(" + num(rotate) + " " + num(x) + " " + num(y) + ")\"";
    out_ += ">" + escape(s) + "</text>\n";
  }

  void line(double x1, double y1, double x2, double y2, const char* stroke, double width = 1) {
    out_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
            "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill, const char* extra = "") {
    out_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
            "\" fill=\"" + fill + "\"" + extra + "/>\n";
  }

  void raw(const std::string& s) { out_ += s; }

  void legend(std::size_t index, const std::string& name, const char* fill, double opacity = 1.0) {
    const double x = kWidth - kRight + 12;
    const double y = kTop + 8 + 18.0 * static_cast<double>(index);
    out_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y - 9) + "\" width=\"12\" height=\"10\" fill=\"" + fill +
            "\" fill-opacity=\"" + num(opacity) + "\"/>\n";
    text(x + 18, y, name);
  }

  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  std::string out_;
};

struct Frame {
  Range xr, yr;

  [[nodiscard]] double px(double x) const { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kWidth - kLeft - kRight); }
  [[nodiscard]] double py(double y) const {
    return kHeight - kBottom - (y - yr.lo) / (yr.hi - yr.lo) * (kHeight - kTop - kBottom);
  }

  void axes(Canvas& c, const std::string& x_label, const std::string& y_label, bool x_ticks) const {
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    c.line(x0, y0, x1, y0, "black");
    c.line(x0, y0, x0, y1, "black");
    for (int i = 0; i <= 4; ++i) {
      const double yv = yr.lo + (yr.hi - yr.lo) * i / 4.0;
      c.line(x0 - 4, py(yv), x0, py(yv), "black");
      c.line(x0, py(yv), x1, py(yv), "#e0e0e0", 0.5);
      c.text(x0 - 6, py(yv) + 4, tick(yv), "end", 10);
      if (x_ticks) {
        const double xv = xr.lo + (xr.hi - xr.lo) * i / 4.0;
        c.line(px(xv), y0, px(xv), y0 + 4, "black");
        c.text(px(xv), y0 + 16, tick(xv), "middle", 10);
      }
    }
    c.text((x0 + x1) / 2, kHeight - 12, x_label, "middle");
    c.text(18, (y0 + y1) / 2, y_label, "middle", 12, -90);
  }
};

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string("svg: length mismatch in ") + what);
}

}  // namespace

std::string render(const LineChart& chart) {
  Frame f;
  for (const auto& b : chart.bands) {
    require_same(b.x.size(), b.lo.size(), "band");
    require_same(b.x.size(), b.hi.size(), "band");
    for (std::size_t i = 0; i < b.x.size(); ++i) f.xr.add(b.x[i]), f.yr.add(b.lo[i]), f.yr.add(b.hi[i]);
  }
  for (const auto& s : chart.lines) {
    require_same(s.x.size(), s.y.size(), "series");
    for (std::size_t i = 0; i < s.x.size(); ++i) f.xr.add(s.x[i]), f.yr.add(s.y[i]);
  }
  f.xr.settle();
  f.yr.settle();
  f.yr.lo = std::min(f.yr.lo, 0.0);

  Canvas c(chart.title);
  f.axes(c, chart.x_label, chart.y_label, true);
  std::size_t legend = 0;
  for (std::size_t k = 0; k < chart.bands.size(); ++k) {
    const auto& b = chart.bands[k];
    std::string pts;
    for (std::size_t i = 0; i < b.x.size(); ++i) pts += num(f.px(b.x[i])) + "," + num(f.py(b.hi[i])) + " ";
    for (std::size_t i = b.x.size(); i-- > 0;) pts += num(f.px(b.x[i])) + "," + num(f.py(b.lo[i])) + " ";
    c.raw("<polygon points=\"" + pts + "\" fill=\"" + colour(k) + "\" fill-opacity=\"0.25\" stroke=\"none\"/>\n");
    c.legend(legend++, b.name, colour(k), 0.25);
  }
  for (std::size_t k = 0; k < chart.lines.size(); ++k) {
    const auto& s = chart.lines[k];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) pts += num(f.px(s.x[i])) + "," + num(f.py(s.y[i])) + " ";
    c.raw("<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + colour(k) + "\" stroke-width=\"1.8\"/>\n");
    c.legend(legend++, s.name, colour(k));
  }
  return c.finish();
}

std::string render(const BarChart& chart) {
  require_same(chart.groups.size(), chart.values.size(), "bar groups");
  Frame f;
  f.yr.add(0.0);
  for (const auto& g : chart.values) {
    require_same(g.size(), chart.categories.size(), "bar values");
    for (double v : g) f.yr.add(v);
  }
  f.yr.settle();
  f.xr = {0.0, static_cast<double>(std::max<std::size_t>(chart.categories.size(), 1))};

  Canvas c(chart.title);
  f.axes(c, "", chart.y_label, false);
  const double slot = f.px(1.0) - f.px(0.0);
  const double groups = static_cast<double>(std::max<std::size_t>(chart.groups.size(), 1));
  const double bar = 0.8 * slot / groups;
  for (std::size_t i = 0; i < chart.categories.size(); ++i) {
    const double base = f.px(static_cast<double>(i)) + 0.1 * slot;
    for (std::size_t g = 0; g < chart.groups.size(); ++g) {
      const double v = chart.values[g][i];
      const double top = f.py(std::max(v, 0.0));
      c.rect(base + bar * static_cast<double>(g), top, bar * 0.95, f.py(0.0) - top, colour(g));
    }
    c.text(f.px(static_cast<double>(i) + 0.5), kHeight - kBottom + 16, chart.categories[i], "middle", 10);
  }
  for (std::size_t g = 0; g < chart.groups.size(); ++g) c.legend(g, chart.groups[g], colour(g));
  return c.finish();
}

std::string render(const Heatmap& chart) {
  const std::size_t rows = chart.cells.size();
  const std::size_t cols = rows ? chart.cells.front().size() : 0;
  double hi = 0.0;
  for (const auto& r : chart.cells) {
    require_same(r.size(), cols, "heatmap row");
    for (double v : r) hi = std::max(hi, v);
  }
  if (hi <= 0.0) hi = 1.0;

  Canvas c(chart.title);
  const double side = std::min(kWidth - kLeft - kRight, kHeight - kTop - kBottom);
  const double cw = cols ? side / static_cast<double>(cols) : side;
  const double ch = rows ? side / static_cast<double>(rows) : side;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double t = std::sqrt(std::clamp(chart.cells[i][j] / hi, 0.0, 1.0));
      // White through dark blue.
      const int r = static_cast<int>(std::lround(255 - 225 * t));
      const int g = static_cast<int>(std::lround(255 - 175 * t));
      const int b = static_cast<int>(std::lround(255 - 75 * t));
      char fill[8];
      std::snprintf(fill, sizeof fill, "#%02x%02x%02x", r, g, b);
      c.rect(kLeft + cw * static_cast<double>(j), kTop + ch * static_cast<double>(i), cw, ch, fill);
    }
  }
  c.line(kLeft, kTop, kLeft, kTop + side, "black");
  c.line(kLeft, kTop + side, kLeft + side, kTop + side, "black");
  c.text(kLeft + side / 2, kTop + side + 30, chart.x_label, "middle");
  c.text(18, kTop + side / 2, chart.y_label, "middle", 12, -90);
  c.text(kLeft + side + 20, kTop + 12, "max p = " + tick(hi) + " (sqrt scale)");
  return c.finish();
}

}  // namespace hedge::cli::svg
