#include "mulab/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mulab {

MetricsReport compute_metrics(const ModelSpec& spec, const ParamVector& params,
                              const UnlearnSplit& split, const MiModel& eval_mi,
                              double ut_seconds) {
  split.forget.validate();
  split.remain.validate();
  split.test.validate();
  MetricsReport r;
  r.ua = 1.0 - accuracy(spec, params, split.forget.features_matrix(), split.forget.labels());
  r.ra = accuracy(spec, params, split.remain.features_matrix(), split.remain.labels());
  r.ta = accuracy(spec, params, split.test.features_matrix(), split.test.labels());
  r.mi = mi_accuracy(eval_mi, spec, params, split.forget, split.test);
  r.ut_seconds = ut_seconds;
  return r;
}

DeltaReport delta_report(const MetricsReport& method, const MetricsReport& gold) {
  DeltaReport d;
  d.ua = std::fabs(method.ua - gold.ua);
  d.ra = std::fabs(method.ra - gold.ra);
  d.ta = std::fabs(method.ta - gold.ta);
  d.mi = std::fabs(method.mi - gold.mi);
  d.method = method;
  d.gold = gold;
  return d;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

std::string render_metrics_row(const MetricsReport& r) {
  return format_percent(r.ua) + " / " + format_percent(r.ra) + " / " + format_percent(r.ta) +
         " / " + format_percent(r.mi);
}

std::string render_delta_row(const DeltaReport& d) {
  const auto cell = [](double value, double delta) {
    return format_percent(value) + " (" + format_percent(delta) + ")";
  };
  return cell(d.method.ua, d.ua) + " / " + cell(d.method.ra, d.ra) + " / " +
         cell(d.method.ta, d.ta) + " / " + cell(d.method.mi, d.mi);
}

MetricsReport parse_metrics_row(const std::string& row, double ut_seconds) {
  std::stringstream ss(row);
  std::string cell;
  double values[4];
  int got = 0;
  while (std::getline(ss, cell, '/')) {
    if (got >= 4) throw std::invalid_argument("parse_metrics_row: too many cells in '" + row + "'");
    try {
      values[got++] = std::stod(cell) / 100.0;
    } catch (...) {
      throw std::invalid_argument("parse_metrics_row: bad cell '" + cell + "'");
    }
  }
  if (got != 4) throw std::invalid_argument("parse_metrics_row: expected 4 cells in '" + row + "'");
  return MetricsReport{values[0], values[1], values[2], values[3], ut_seconds};
}

}  // namespace mulab
