#pragma once

#include <string>

#include "mulab/mi.hpp"
#include "mulab/sampling.hpp"

namespace mulab {

// The five-metric report. All accuracy-like values are fractions in [0,1];
// rendering converts to percent.
struct MetricsReport {
  double ua = 0.0;  // 1 - accuracy on the forget set
  double ra = 0.0;  // accuracy on the remain set
  double ta = 0.0;  // accuracy on the test set
  double mi = 0.0;  // membership-attack accuracy on the forget set
  double ut_seconds = 0.0;
};

// Absolute per-metric gaps against the gold model; UT stays raw.
struct DeltaReport {
  double ua = 0.0, ra = 0.0, ta = 0.0, mi = 0.0;
  MetricsReport method;
  MetricsReport gold;
};

MetricsReport compute_metrics(const ModelSpec& spec, const ParamVector& params,
                              const UnlearnSplit& split, const MiModel& eval_mi,
                              double ut_seconds);

DeltaReport delta_report(const MetricsReport& method, const MetricsReport& gold);

// Percent with two decimals, e.g. 0.0524 -> "5.24".
std::string format_percent(double fraction);

// "5.24 / 100.00 / 94.26 / 12.88" (UA / RA / TA / MI).
std::string render_metrics_row(const MetricsReport& r);

// "4.37 (0.87) / 99.83 (0.17) / ..." with the gold gap in parentheses.
std::string render_delta_row(const DeltaReport& d);

// Inverse of render_metrics_row; percent values become fractions.
MetricsReport parse_metrics_row(const std::string& row, double ut_seconds = 0.0);

}  // namespace mulab
