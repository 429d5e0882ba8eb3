#include "memr/plotting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace memr {

int CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const int idx = column_index(name);
  if (idx < 0) throw std::invalid_argument("csv: no column '" + name + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(idx)]);
  return out;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("csv: cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (lineno == 1) {
      table.columns = cells;
      continue;
    }
    if (cells.size() != table.columns.size()) {
      throw std::invalid_argument("csv: row " + std::to_string(lineno) + " in '" + path +
                                  "' has " + std::to_string(cells.size()) +
                                  " cells, expected " + std::to_string(table.columns.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(c, &pos));
        if (pos != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw std::invalid_argument("csv: row " + std::to_string(lineno) + " in '" + path +
                                    "' has non-numeric cell '" + c + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty() || table.rows.empty()) {
    throw std::invalid_argument("csv: '" + path + "' has no data rows");
  }
  return table;
}

PlotSeries aggregate_series(const std::vector<double>& x,
                            const std::vector<std::vector<double>>& ys) {
  if (ys.empty()) throw std::invalid_argument("aggregate_series: no series");
  for (const auto& y : ys) {
    if (y.size() != x.size()) {
      throw std::invalid_argument("aggregate_series: series length mismatch");
    }
  }
  PlotSeries out;
  out.x = x;
  out.mean.resize(x.size());
  out.std.assign(x.size(), 0.0);
  const double n = static_cast<double>(ys.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double m = 0.0;
    for (const auto& y : ys) m += y[i];
    m /= n;
    out.mean[i] = m;
    if (ys.size() > 1) {
      double ss = 0.0;
      for (const auto& y : ys) ss += (y[i] - m) * (y[i] - m);
      out.std[i] = std::sqrt(ss / (n - 1.0));
    }
  }
  return out;
}

namespace {

struct AxisMap {
  double x0, x1, y0, y1;         // data range
  double px0, px1, py0, py1;     // pixel range (y inverted)

  double px(double x) const {
    const double f = (x1 == x0) ? 0.5 : (x - x0) / (x1 - x0);
    return px0 + f * (px1 - px0);
  }
  double py(double y) const {
    const double f = (y1 == y0) ? 0.5 : (y - y0) / (y1 - y0);
    return py0 + f * (py1 - py0);
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_line_plot_svg(const std::string& path, const std::string& title,
                         const std::string& xlabel, const std::string& ylabel,
                         const PlotSeries& series) {
  if (series.x.empty() || series.x.size() != series.mean.size()) {
    throw std::invalid_argument("write_line_plot_svg: empty or mismatched series");
  }
  const bool band = !series.std.empty();
  if (band && series.std.size() != series.x.size()) {
    throw std::invalid_argument("write_line_plot_svg: std band length mismatch");
  }

  double xmin = series.x.front(), xmax = series.x.front();
  double ymin = series.mean.front(), ymax = series.mean.front();
  for (std::size_t i = 0; i < series.x.size(); ++i) {
    xmin = std::min(xmin, series.x[i]);
    xmax = std::max(xmax, series.x[i]);
    const double s = band ? series.std[i] : 0.0;
    ymin = std::min(ymin, series.mean[i] - s);
    ymax = std::max(ymax, series.mean[i] + s);
  }
  if (ymin == ymax) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const int width = 720, height = 480;
  AxisMap ax{xmin, xmax, ymin, ymax, 80.0, width - 20.0, height - 60.0, 40.0};

  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_line_plot_svg: cannot open '" + path + "'");
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

  // axes
  os << "<line x1=\"" << ax.px0 << "\" y1=\"" << ax.py0 << "\" x2=\"" << ax.px1
     << "\" y2=\"" << ax.py0 << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ax.px0 << "\" y1=\"" << ax.py0 << "\" x2=\"" << ax.px0
     << "\" y2=\"" << ax.py1 << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    os << "<text x=\"" << ax.px(xv) << "\" y=\"" << ax.py0 + 18 << "\" "
       << "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(xv)
       << "</text>\n";
    os << "<text x=\"" << ax.px0 - 6 << "\" y=\"" << ax.py(yv) + 4 << "\" "
       << "text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(yv)
       << "</text>\n";
    os << "<line x1=\"" << ax.px(xv) << "\" y1=\"" << ax.py0 << "\" x2=\"" << ax.px(xv)
       << "\" y2=\"" << ax.py0 + 4 << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ax.px0 - 4 << "\" y1=\"" << ax.py(yv) << "\" x2=\"" << ax.px0
       << "\" y2=\"" << ax.py(yv) << "\" stroke=\"black\"/>\n";
  }
  os << "<text x=\"" << (ax.px0 + ax.px1) / 2 << "\" y=\"" << height - 16
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xlabel
     << "</text>\n";
  os << "<text x=\"20\" y=\"" << (ax.py0 + ax.py1) / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
     << "transform=\"rotate(-90 20 " << (ax.py0 + ax.py1) / 2 << ")\">" << ylabel
     << "</text>\n";

  if (band) {
    bool any_width = false;
    for (double s : series.std) any_width |= (s > 0.0);
    if (any_width) {
      os << "<polygon fill=\"#4477aa\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < series.x.size(); ++i) {
        os << ax.px(series.x[i]) << "," << ax.py(series.mean[i] + series.std[i]) << " ";
      }
      for (std::size_t i = series.x.size(); i-- > 0;) {
        os << ax.px(series.x[i]) << "," << ax.py(series.mean[i] - series.std[i]) << " ";
      }
      os << "\"/>\n";
    }
  }

  os << "<polyline fill=\"none\" stroke=\"#4477aa\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < series.x.size(); ++i) {
    os << ax.px(series.x[i]) << "," << ax.py(series.mean[i]) << " ";
  }
  os << "\"/>\n</svg>\n";
  if (!os) throw std::runtime_error("write_line_plot_svg: write failed for '" + path + "'");
}

}  // namespace memr
