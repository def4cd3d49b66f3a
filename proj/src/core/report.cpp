#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pointdyn {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

bool monotone_within_slack(const std::vector<double>& values,
                           const std::vector<double>& norms, double floor) {
  if (values.size() != norms.size() || norms.empty()) return false;
  for (double n : norms)
    if (!std::isfinite(n) || n < 0.0) return false;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (!(values[k] < values[k - 1])) return false;
  for (std::size_t k = 1; k < norms.size(); ++k) {
    if (norms[k - 1] <= 3.0 * floor) break;
    if (norms[k] > 1.05 * norms[k - 1]) return false;
  }
  return true;
}

bool strictly_decreasing_until_floor(const std::vector<double>& norms,
                                     double floor) {
  for (std::size_t k = 1; k < norms.size(); ++k) {
    if (norms[k - 1] <= 3.0 * floor) break;
    if (!(norms[k] < norms[k - 1])) return false;
  }
  return true;
}

bool ConvergenceReport::checks_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRow& c) {
    return c.report_only || c.passed;
  });
}

void ConvergenceReport::decide() {
  strictly_decreasing = strictly_decreasing_until_floor(norms, floor);
  verdict = monotone_within_slack(values, norms, floor) && checks_pass();
}

std::string report_csv(const ConvergenceReport& r) {
  std::ostringstream os;
  const bool resolvent = r.lambda != 0.0;
  os << r.parameter_name
     << ",norm,floor,grid_n,p_max,t,order_used,tail_estimate";
  if (resolvent) os << ",lambda,t_max,laplace_nodes";
  os << '\n';
  for (std::size_t k = 0; k < r.values.size(); ++k) {
    os << num(r.values[k]) << ',' << num(r.norms[k]) << ',' << num(r.floor)
       << ',' << r.grid_n << ',' << num(r.p_max) << ',' << num(r.t) << ','
       << (k < r.orders_used.size() ? r.orders_used[k] : 0) << ','
       << num(k < r.tail_estimates.size() ? r.tail_estimates[k] : 0.0);
    if (resolvent)
      os << ',' << num(r.lambda) << ',' << num(r.t_max) << ','
         << r.laplace_nodes;
    os << '\n';
  }
  return os.str();
}

std::string checks_csv(const ConvergenceReport& r) {
  std::ostringstream os;
  os << "check,value,bound,passed,report_only\n";
  for (const auto& c : r.checks)
    os << c.name << ',' << num(c.value) << ',' << num(c.bound) << ','
       << (c.passed ? 1 : 0) << ',' << (c.report_only ? 1 : 0) << '\n';
  return os.str();
}

std::string plot_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<PlotSeries>& series,
                       double floor_line, bool log_axes) {
  constexpr double W = 640, H = 440, L = 80, R = 20, T = 40, B = 60;
  auto tr = [&](double v) { return log_axes ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!log_axes || (x > 0.0 && y > 0.0));
  };
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!usable(s.x[k], s.y[k])) continue;
      xmin = std::min(xmin, tr(s.x[k]));
      xmax = std::max(xmax, tr(s.x[k]));
      ymin = std::min(ymin, tr(s.y[k]));
      ymax = std::max(ymax, tr(s.y[k]));
    }
  if (floor_line > 0.0 && log_axes) {
    ymin = std::min(ymin, tr(floor_line));
    ymax = std::max(ymax, tr(floor_line));
  }
  if (!std::isfinite(xmin)) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
  double xstep = 1.0, ystep = 1.0;
  if (log_axes) {
    xmin = std::floor(xmin); xmax = std::ceil(xmax);
    ymin = std::floor(ymin); ymax = std::ceil(ymax);
  } else {
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    xstep = (xmax - xmin) / 5.0;
    ystep = (ymax - ymin) / 5.0;
  }
  if (xmax == xmin) xmax += 1;
  if (ymax == ymin) ymax += 1;
  auto sx = [&](double v) { return L + (tr(v) - xmin) / (xmax - xmin) * (W - L - R); };
  auto sy = [&](double v) { return H - B - (tr(v) - ymin) / (ymax - ymin) * (H - T - B); };
  auto at = [&](double e) { return log_axes ? std::pow(10.0, e) : e; };
  auto label = [&](double e) {
    std::ostringstream l;
    if (log_axes) l << "1e" << e; else { l.precision(3); l << e; }
    return l.str();
  };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape_xml(title) << "</text>\n";
  for (int i = 0; xmin + i * xstep <= xmax + 1e-9 * xstep; ++i) {
    const double e = xmin + i * xstep;
    const double x = sx(at(e));
    os << "<line x1=\"" << x << "\" y1=\"" << T << "\" x2=\"" << x << "\" y2=\""
       << H - B << "\" stroke=\"#ddd\"/>\n"
       << "<text x=\"" << x << "\" y=\"" << H - B + 18
       << "\" text-anchor=\"middle\">" << label(e) << "</text>\n";
  }
  for (int i = 0; ymin + i * ystep <= ymax + 1e-9 * ystep; ++i) {
    const double e = ymin + i * ystep;
    const double y = sy(at(e));
    os << "<line x1=\"" << L << "\" y1=\"" << y << "\" x2=\"" << W - R
       << "\" y2=\"" << y << "\" stroke=\"#ddd\"/>\n"
       << "<text x=\"" << L - 6 << "\" y=\"" << y + 4
       << "\" text-anchor=\"end\">" << label(e) << "</text>\n";
  }
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R
     << "\" height=\"" << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n"
     << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15
     << "\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n"
     << "<text transform=\"translate(18," << (T + H - B) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(y_label)
     << "</text>\n";
  if (floor_line > 0.0 && log_axes) {
    const double y = sy(floor_line);
    os << "<line x1=\"" << L << "\" y1=\"" << y << "\" x2=\"" << W - R
       << "\" y2=\"" << y << "\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n"
       << "<text x=\"" << W - R - 4 << "\" y=\"" << y - 4
       << "\" text-anchor=\"end\" fill=\"gray\">floor</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* c = colors[i % 6];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k)
      if (usable(s.x[k], s.y[k])) os << sx(s.x[k]) << ',' << sy(s.y[k]) << ' ';
    os << "\"/>\n";
    if (s.x.size() <= 64)
      for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k)
        if (usable(s.x[k], s.y[k]))
          os << "<circle cx=\"" << sx(s.x[k]) << "\" cy=\"" << sy(s.y[k])
             << "\" r=\"3.5\" fill=\"" << c << "\"/>\n";
    os << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 + 16 * i << "\" fill=\""
       << c << "\">" << escape_xml(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace pointdyn
