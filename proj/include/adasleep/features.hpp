#pragma once

#include <string>
#include <vector>

#include "adasleep/epoch_series.hpp"
#include "adasleep/sessions.hpp"

namespace adasleep::features {

// Fixed 196-column schema: 100 sleep-side features (durations, night-sleep
// onset/offset, then 24 per signal), 96 wake-side (24 per signal). Signals in
// canonical ACC, HR, TEMP, EDA order regardless of manifest order.
const std::vector<std::string>& feature_schema();

// true for columns whose name involves a standard deviation; those values are
// stored as ln(max(value, 1e-6)).
bool is_log_transformed(const std::string& feature_name);

struct FeatureRow {
    std::string subject_id;
    int day = 0;
    std::vector<double> values;   // aligned with feature_schema(), NaN when missing
    std::vector<bool> present;
};

struct FeatureTable {
    std::vector<FeatureRow> rows;
};

// One (subject, day) feature row. Session statistics pool the usable epochs
// of every session of a kind assigned to the day; regressions run each epoch
// statistic against hours since its session's onset (re-zeroed per session).
// A day without sessions of a kind leaves that side missing, not zero.
FeatureRow extract_features(const std::vector<sessions::Session>& session_list,
                            const EpochSeries& clean,
                            int day,
                            double day_origin);

}  // namespace adasleep::features
