#include "binopt/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "binopt/csv.hpp"
#include "binopt/rng.hpp"

namespace binopt {

void MeasurementSet::validate() const {
  if (points.empty() || points.size() != values.size()) {
    throw std::invalid_argument(
        "MeasurementSet: needs m >= 1 points with matching values");
  }
  for (std::size_t j = 0; j + 1 < points.size(); ++j) {
    if (!(points[j] < points[j + 1])) {
      throw std::invalid_argument(
          "MeasurementSet: points must be strictly increasing");
    }
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("MeasurementSet: non-finite value");
    }
  }
}

MeasurementSet generate(const ModelParams& truth, const GridSpec& grid,
                        const std::vector<double>& points,
                        const NoiseSpec& noise, const DriftFn& drift) {
  noise.validate();
  if (points.empty()) {
    throw std::invalid_argument("generate: needs at least one point");
  }
  std::vector<double> values = forward_observe(truth, grid, points, {}, drift);
  if (noise.relative_level > 0.0) {
    Rng rng(noise.seed);
    for (double& v : values) {
      v *= 1.0 + noise.relative_level * rng.normal();
    }
  }
  MeasurementSet set{points, std::move(values), noise, truth};
  set.validate();
  return set;
}

std::string measurements_to_csv(const MeasurementSet& set) {
  std::ostringstream out;
  out << "y,value\n";
  for (std::size_t j = 0; j < set.size(); ++j) {
    out << csv::format_double(set.points[j]) << ','
        << csv::format_double(set.values[j]) << '\n';
  }
  return out.str();
}

MeasurementSet measurements_from_csv(const std::string& text) {
  const auto lines = csv::split_lines(text);
  if (lines.empty() || lines.front() != "y,value") {
    throw std::runtime_error("measurements_from_csv: missing y,value header");
  }
  MeasurementSet set;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto fields = csv::split_line(lines[k]);
    if (fields.size() != 2) {
      throw std::runtime_error("measurements_from_csv: bad row '" + lines[k] +
                               "'");
    }
    set.points.push_back(csv::parse_double(fields[0]));
    set.values.push_back(csv::parse_double(fields[1]));
  }
  set.validate();
  return set;
}

}  // namespace binopt
