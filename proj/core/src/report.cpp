#include "binopt/report.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include "binopt/csv.hpp"

namespace binopt {

RecoveryTable build_recovery_table(const std::vector<RecoveryRow>& runs,
                                   const ThetaVec& expected_value) {
  if (runs.empty()) {
    throw std::invalid_argument("build_recovery_table: no runs");
  }
  std::set<std::string> labels;
  for (const auto& row : runs) {
    if (!labels.insert(row.label).second) {
      throw std::invalid_argument("build_recovery_table: duplicate label '" +
                                  row.label + "'");
    }
  }
  return RecoveryTable{runs, {"expected", expected_value}};
}

std::string table_to_csv(const RecoveryTable& table) {
  std::ostringstream out;
  out << "label,theta1,theta2,theta3,sigma0\n";
  auto emit = [&out](const RecoveryRow& row) {
    out << row.label;
    for (int p = 0; p < 4; ++p) {
      out << ',' << csv::format_double(row.value[p]);
    }
    out << '\n';
  };
  for (const auto& row : table.rows) emit(row);
  emit(table.expected);
  return out.str();
}

RecoveryTable table_from_csv(const std::string& text) {
  const auto lines = csv::split_lines(text);
  if (lines.empty() || lines.front() != "label,theta1,theta2,theta3,sigma0") {
    throw std::runtime_error("table_from_csv: missing header");
  }
  std::vector<RecoveryRow> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto fields = csv::split_line(lines[k]);
    if (fields.size() != 5) {
      throw std::runtime_error("table_from_csv: bad row '" + lines[k] + "'");
    }
    RecoveryRow row{fields[0], {}};
    for (int p = 0; p < 4; ++p) {
      row.value[p] = csv::parse_double(fields[static_cast<std::size_t>(p) + 1]);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.back().label != "expected") {
    throw std::runtime_error("table_from_csv: missing expected row");
  }
  RecoveryTable table;
  table.expected = rows.back();
  rows.pop_back();
  if (rows.empty()) {
    throw std::runtime_error("table_from_csv: no result rows");
  }
  table.rows = std::move(rows);
  return table;
}

std::string table_to_text(const RecoveryTable& table) {
  std::size_t width = table.expected.label.size();
  for (const auto& row : table.rows) width = std::max(width, row.label.size());

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "label"
      << std::right << std::setw(12) << "theta1" << std::setw(12) << "theta2"
      << std::setw(12) << "theta3" << std::setw(12) << "sigma0" << '\n';
  auto emit = [&](const RecoveryRow& row) {
    out << std::left << std::setw(static_cast<int>(width)) << row.label
        << std::right << std::fixed << std::setprecision(4);
    for (int p = 0; p < 4; ++p) out << std::setw(12) << row.value[p];
    out << '\n';
    out.unsetf(std::ios::fixed);
  };
  for (const auto& row : table.rows) emit(row);
  emit(table.expected);
  return out.str();
}

DriftFn cubic_drift_fn(const ThetaVec& theta) {
  return [theta](double y) {
    return cubic_perturbation(theta[0], theta[1], theta[2], y);
  };
}

DriftCurve build_drift_curve(const std::vector<LabeledDrift>& curves,
                             double y_min, double y_max, int n_samples) {
  if (n_samples < 2) {
    throw std::invalid_argument("build_drift_curve: n_samples must be >= 2");
  }
  if (!(y_min < y_max)) {
    throw std::invalid_argument("build_drift_curve: empty y range");
  }
  DriftCurve curve;
  curve.y.resize(static_cast<std::size_t>(n_samples));
  const double h = (y_max - y_min) / (n_samples - 1);
  for (int k = 0; k < n_samples; ++k) {
    curve.y[static_cast<std::size_t>(k)] = y_min + k * h;
  }
  for (const auto& [label, fn] : curves) {
    DriftSeries series{label, {}};
    series.values.reserve(curve.y.size());
    for (double y : curve.y) series.values.push_back(fn(y));
    curve.series.push_back(std::move(series));
  }
  return curve;
}

std::string drift_to_csv(const DriftCurve& curve) {
  std::ostringstream out;
  out << "y";
  for (const auto& s : curve.series) out << ',' << s.label;
  out << '\n';
  for (std::size_t k = 0; k < curve.y.size(); ++k) {
    out << csv::format_double(curve.y[k]);
    for (const auto& s : curve.series) {
      out << ',' << csv::format_double(s.values[k]);
    }
    out << '\n';
  }
  return out.str();
}

DriftCurve drift_from_csv(const std::string& text) {
  const auto lines = csv::split_lines(text);
  if (lines.empty()) throw std::runtime_error("drift_from_csv: empty file");
  const auto header = csv::split_line(lines.front());
  if (header.size() < 2 || header.front() != "y") {
    throw std::runtime_error("drift_from_csv: bad header");
  }
  DriftCurve curve;
  for (std::size_t s = 1; s < header.size(); ++s) {
    curve.series.push_back({header[s], {}});
  }
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto fields = csv::split_line(lines[k]);
    if (fields.size() != header.size()) {
      throw std::runtime_error("drift_from_csv: bad row '" + lines[k] + "'");
    }
    curve.y.push_back(csv::parse_double(fields[0]));
    for (std::size_t s = 1; s < fields.size(); ++s) {
      curve.series[s - 1].values.push_back(csv::parse_double(fields[s]));
    }
  }
  return curve;
}

}  // namespace binopt
