#pragma once

#include <vector>

#include "adasleep/adaptive.hpp"
#include "adasleep/common.hpp"

namespace adasleep::sessions {

// Per-epoch label for smoothing: 0 wake, 1 sleep, kGap for abnormal/NA epochs.
inline constexpr int kGap = -1;

struct Session {
    int kind = 0;  // 0 wake, 1 sleep
    double onset = 0.0;
    double offset = 0.0;
    int assigned_day = 0;
    bool is_night_sleep = false;

    double duration() const { return offset - onset; }
};

// Recursive (in-place) median filter over the labeled positions: each label
// is replaced by the median of the centered window, reading already-smoothed
// values to the left, with shrunken windows at the edges and even-count ties
// keeping the epoch's own label. The recursive form makes a single pass
// idempotent. Gap positions stay gaps; positions across a gap still fall
// inside the positional window, so gaps shorter than the window are bridged.
std::vector<int> median_smooth(const std::vector<int>& labels, int window);

// Cut maximal constant-label runs into sessions. Gaps shorter than
// bridge_epochs flanked by the same label are absorbed into the session;
// all other gaps split. Sleep sessions shorter than min_sleep become wake
// and touching same-kind sessions coalesce.
std::vector<Session> partition_sessions(const std::vector<int>& labels,
                                        double origin,
                                        double epoch_length,
                                        double min_sleep_seconds = 3600.0,
                                        int bridge_epochs = 5);

// Day assignment and night-sleep flags. Day boundaries sit at origin + 24h
// multiples. Wake sessions take the day of their onset; a sleep session takes
// its onset day when the immediately preceding wake session lasted more than
// min_prior_wake_seconds, else the previous day. Per day, the longest sleep
// session with onset inside night_window is the night sleep.
void assign_day(std::vector<Session>& sessions,
                double origin,
                const adaptive::ClockWindow& night_window = {20.0, 4.0},
                double min_prior_wake_seconds = 5.0 * 3600.0);

}  // namespace adasleep::sessions
