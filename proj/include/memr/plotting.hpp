#pragma once

#include <string>
#include <vector>

namespace memr {

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column_index(const std::string& name) const;  // -1 when absent
  std::vector<double> column(const std::string& name) const;
};

// Strict numeric CSV reader; malformed rows throw naming the row number.
CsvTable read_csv(const std::string& path);

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std;  // band half-width; empty means no band
};

// Self-contained SVG line plot with an optional mean +- std band.
void write_line_plot_svg(const std::string& path, const std::string& title,
                         const std::string& xlabel, const std::string& ylabel,
                         const PlotSeries& series);

// Row-wise mean and sample std across equally shaped value vectors.
PlotSeries aggregate_series(const std::vector<double>& x,
                            const std::vector<std::vector<double>>& ys);

}  // namespace memr
