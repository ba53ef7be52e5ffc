#pragma once

#include <vector>

#include "adasleep/epoch_series.hpp"

namespace adasleep::ingest {

// Segment raw streams into fixed, non-overlapping epochs aligned to `origin`
// and summarize each signal with MEAN, MED and SD (n-1 denominator) per epoch.
// An epoch is NA as a whole row if any signal observed fewer than 90% of its
// designed samples (sampling_hz x epoch_length). Samples before `origin` are
// outside the grid and ignored.
EpochSeries segment_and_summarize(const std::vector<RawStream>& streams,
                                  double epoch_length,
                                  double origin,
                                  const std::string& subject_id = "");

}  // namespace adasleep::ingest
