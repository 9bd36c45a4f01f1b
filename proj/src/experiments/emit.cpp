#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>

#include "kkno/experiments.hpp"

namespace kkno {

std::string format_real(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::string format_short(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 4);
  return std::string(buf.data(), res.ptr);
}

std::string format_fixed(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, 2);
  return std::string(buf.data(), res.ptr);
}

std::string point_text(const Point& x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ';';
    s += format_real(x[i]);
  }
  return s;
}

std::string xml_escape(const std::string& s) {
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

}  // namespace

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
  return out;
}

CsvTable converge_csv(const ConvergenceTable& table) {
  CsvTable t{{"n", "sup_error"}, {}};
  for (const auto& r : table.rows) t.rows.push_back({std::to_string(r.n), format_real(r.sup_error)});
  return t;
}

CsvTable bound_csv(const BoundReport& report) {
  CsvTable t{{"n", "sup_error", "bound", "margin"}, {}};
  for (const auto& r : report.rows)
    t.rows.push_back({std::to_string(r.n), format_real(r.error), format_real(r.bound), format_real(r.margin)});
  return t;
}

CsvTable voronovskaya_csv(const VoronovskayaReport& report) {
  CsvTable t{{"n", "residual"}, {}};
  for (const auto& r : report.rows) t.rows.push_back({std::to_string(r.n), format_real(r.residual)});
  return t;
}

CsvTable korovkin_csv(const KorovkinReport& report) {
  CsvTable t{{"monomial", "n", "sup_error"}, {}};
  for (const auto& r : report.rows) t.rows.push_back({r.monomial, std::to_string(r.n), format_real(r.sup_error)});
  return t;
}

CsvTable compare_csv(const std::vector<ComparisonReport>& reports) {
  CsvTable t{{"n", "gamma", "t", "m", "gap", "amp_compose", "amp_pde"}, {}};
  for (const auto& r : reports)
    t.rows.push_back({std::to_string(r.n), std::to_string(r.gamma), format_real(r.t), std::to_string(r.m),
                      format_real(r.gap), format_real(r.amp_compose), format_real(r.amp_pde)});
  return t;
}

CsvTable moments_csv(const std::vector<MomentReport>& reports) {
  CsvTable t{{"x", "component", "value"}, {}};
  for (const auto& r : reports) {
    const std::string x = point_text(r.x);
    const auto d = r.first.size();
    t.rows.push_back({x, "mass", format_real(r.mass)});
    for (Eigen::Index i = 0; i < d; ++i)
      t.rows.push_back({x, "m1_" + std::to_string(i + 1), format_real(r.first(i))});
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = i; j < d; ++j)
        t.rows.push_back({x, "m2_" + std::to_string(i + 1) + "_" + std::to_string(j + 1), format_real(r.second(i, j))});
    t.rows.push_back({x, "m3_abs", format_real(r.third_abs)});
  }
  return t;
}

Plot render_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                 const std::vector<PlotSeries>& series) {
  if (series.empty()) throw std::invalid_argument("plot: no series");
  Plot plot;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("plot: series '" + s.name + "' has mismatched lengths");
    if (s.x.size() < 2) throw std::invalid_argument("plot: series '" + s.name + "' needs at least two points");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        throw std::invalid_argument("plot: series '" + s.name + "' has a non-finite value");
      if (s.x[i] <= 0.0 || s.y[i] <= 0.0) plot.log_axes = false;
    }
  }
  if (!plot.log_axes) plot.warning = "nonpositive values; using linear axes";

  auto tf = [&](double v) { return plot.log_axes ? std::log10(v) : v; };
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo, y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_lo = std::min(x_lo, tf(s.x[i]));
      x_hi = std::max(x_hi, tf(s.x[i]));
      y_lo = std::min(y_lo, tf(s.y[i]));
      y_hi = std::max(y_hi, tf(s.y[i]));
    }
  // Log axes snap to whole decades; degenerate ranges are widened.
  if (plot.log_axes) {
    x_lo = std::floor(x_lo);
    x_hi = std::max(std::ceil(x_hi), x_lo + 1.0);
    y_lo = std::floor(y_lo);
    y_hi = std::max(std::ceil(y_hi), y_lo + 1.0);
  } else {
    if (x_hi == x_lo) { x_lo -= 1.0; x_hi += 1.0; }
    if (y_hi == y_lo) { y_lo -= 1.0; y_hi += 1.0; }
  }

  constexpr double W = 640, H = 420, L = 80, R = 20, T = 40, B = 55;
  auto px = [&](double v) { return L + (tf(v) - x_lo) / (x_hi - x_lo) * (W - L - R); };
  auto py = [&](double v) { return H - B - (tf(v) - y_lo) / (y_hi - y_lo) * (H - T - B); };
  auto gx = [&](double u) { return L + (u - x_lo) / (x_hi - x_lo) * (W - L - R); };
  auto gy = [&](double u) { return H - B - (u - y_lo) / (y_hi - y_lo) * (H - T - B); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + xml_escape(title) + "</text>\n";
  svg += "<rect x=\"" + format_fixed(L) + "\" y=\"" + format_fixed(T) + "\" width=\"" + format_fixed(W - L - R) +
         "\" height=\"" + format_fixed(H - T - B) + "\" fill=\"none\" stroke=\"black\"/>\n";

  auto ticks = [&](double lo, double hi) {
    std::vector<double> out;
    if (plot.log_axes) {
      for (double u = lo; u <= hi + 1e-9; u += 1.0) out.push_back(u);
    } else {
      for (int k = 0; k <= 4; ++k) out.push_back(lo + (hi - lo) * k / 4.0);
    }
    return out;
  };
  auto label = [&](double u) {
    return plot.log_axes ? "1e" + std::to_string(static_cast<int>(std::lround(u))) : format_short(u);
  };
  for (double u : ticks(x_lo, x_hi)) {
    const std::string x = format_fixed(gx(u));
    svg += "<line x1=\"" + x + "\" y1=\"" + format_fixed(H - B) + "\" x2=\"" + x + "\" y2=\"" + format_fixed(H - B + 5) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + x + "\" y=\"" + format_fixed(H - B + 18) + "\" text-anchor=\"middle\">" + label(u) + "</text>\n";
  }
  for (double u : ticks(y_lo, y_hi)) {
    const std::string y = format_fixed(gy(u));
    svg += "<line x1=\"" + format_fixed(L - 5) + "\" y1=\"" + y + "\" x2=\"" + format_fixed(L) + "\" y2=\"" + y +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format_fixed(L - 8) + "\" y=\"" + y + "\" text-anchor=\"end\" dominant-baseline=\"middle\">" +
           label(u) + "</text>\n";
  }
  svg += "<text x=\"" + format_fixed((L + W - R) / 2) + "\" y=\"" + format_fixed(H - 12) + "\" text-anchor=\"middle\">" +
         xml_escape(x_label) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + format_fixed((T + H - B) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         format_fixed((T + H - B) / 2) + ")\">" + xml_escape(y_label) + "</text>\n";

  static constexpr std::array<const char*, 6> colors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = colors[k % colors.size()];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) svg += ' ';
      svg += format_fixed(px(s.x[i])) + "," + format_fixed(py(s.y[i]));
    }
    svg += "\"/>\n";
    if (series.size() > 1) {
      const std::string y = format_fixed(T + 16 + 16.0 * static_cast<double>(k));
      svg += "<line x1=\"" + format_fixed(W - R - 150) + "\" y1=\"" + y + "\" x2=\"" + format_fixed(W - R - 126) +
             "\" y2=\"" + y + "\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
      svg += "<text x=\"" + format_fixed(W - R - 120) + "\" y=\"" + y + "\" dominant-baseline=\"middle\">" +
             xml_escape(s.name) + "</text>\n";
    }
  }
  svg += "</svg>\n";
  plot.svg = std::move(svg);
  return plot;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

}  // namespace kkno
