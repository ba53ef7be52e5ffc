#include "adasleep/sessions.hpp"

#include <algorithm>
#include <cmath>

namespace adasleep::sessions {

std::vector<int> median_smooth(const std::vector<int>& labels, int window) {
    if (window < 3 || window % 2 == 0)
        throw ConfigError("median_smooth: window must be odd and >= 3");

    const auto n = static_cast<Index>(labels.size());
    const Index h = window / 2;
    std::vector<int> out = labels;
    for (Index i = 0; i < n; ++i) {
        if (labels[static_cast<std::size_t>(i)] == kGap) continue;
        int ones = 0, total = 0;
        for (Index j = std::max<Index>(0, i - h); j <= std::min(n - 1, i + h); ++j) {
            const int v = j < i ? out[static_cast<std::size_t>(j)]  // already smoothed
                                : labels[static_cast<std::size_t>(j)];
            if (v == kGap) continue;
            ++total;
            ones += v;
        }
        if (2 * ones > total) {
            out[static_cast<std::size_t>(i)] = 1;
        } else if (2 * ones < total) {
            out[static_cast<std::size_t>(i)] = 0;
        }
        // exact tie keeps the epoch's own label
    }
    return out;
}

namespace {

struct Run {
    int kind;
    Index first;  // first epoch index
    Index last;   // last epoch index (inclusive)
};

}  // namespace

std::vector<Session> partition_sessions(const std::vector<int>& labels,
                                        double origin,
                                        double epoch_length,
                                        double min_sleep_seconds,
                                        int bridge_epochs) {
    const auto n = static_cast<Index>(labels.size());

    // maximal constant runs, absorbing short same-label gaps
    std::vector<Run> runs;
    Index i = 0;
    while (i < n) {
        if (labels[static_cast<std::size_t>(i)] == kGap) {
            ++i;
            continue;
        }
        const int kind = labels[static_cast<std::size_t>(i)];
        Run run{kind, i, i};
        Index j = i + 1;
        while (j < n) {
            if (labels[static_cast<std::size_t>(j)] == kind) {
                run.last = j;
                ++j;
            } else if (labels[static_cast<std::size_t>(j)] == kGap) {
                Index g = j;
                while (g < n && labels[static_cast<std::size_t>(g)] == kGap) ++g;
                if (g < n && labels[static_cast<std::size_t>(g)] == kind &&
                    g - j < static_cast<Index>(bridge_epochs)) {
                    j = g;  // bridge the gap
                } else {
                    break;
                }
            } else {
                break;
            }
        }
        runs.push_back(run);
        i = j;
    }

    // sleep runs below the duration threshold become wake
    for (auto& r : runs) {
        const double dur = static_cast<double>(r.last - r.first + 1) * epoch_length;
        if (r.kind == 1 && dur < min_sleep_seconds) r.kind = 0;
    }

    // coalesce touching same-kind runs (last epoch adjacent to next first)
    std::vector<Session> out;
    for (const auto& r : runs) {
        const double onset = origin + epoch_length * static_cast<double>(r.first);
        const double offset = origin + epoch_length * static_cast<double>(r.last + 1);
        if (!out.empty() && out.back().kind == r.kind && out.back().offset >= onset) {
            out.back().offset = offset;
        } else {
            Session s;
            s.kind = r.kind;
            s.onset = onset;
            s.offset = offset;
            out.push_back(s);
        }
    }
    return out;
}

void assign_day(std::vector<Session>& sessions,
                double origin,
                const adaptive::ClockWindow& night_window,
                double min_prior_wake_seconds) {
    constexpr double kDay = 24.0 * 3600.0;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        auto& s = sessions[i];
        const int onset_day = static_cast<int>(std::floor((s.onset - origin) / kDay));
        if (s.kind == 0) {
            s.assigned_day = onset_day;
            continue;
        }
        const bool prior_wake_long = i > 0 && sessions[i - 1].kind == 0 &&
                                     sessions[i - 1].duration() > min_prior_wake_seconds;
        s.assigned_day = prior_wake_long ? onset_day : onset_day - 1;
        s.is_night_sleep = false;
    }

    // longest night-onset sleep session per day
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        const auto& s = sessions[i];
        if (s.kind != 1) continue;
        const double hour = std::fmod((s.onset - origin) / 3600.0, 24.0);
        if (!night_window.contains(hour)) continue;
        bool best = true;
        for (const auto& o : sessions) {
            if (&o == &s || o.kind != 1 || o.assigned_day != s.assigned_day) continue;
            const double oh = std::fmod((o.onset - origin) / 3600.0, 24.0);
            if (!night_window.contains(oh)) continue;
            if (o.duration() > s.duration() ||
                (o.duration() == s.duration() && o.onset < s.onset)) {
                best = false;
                break;
            }
        }
        sessions[i].is_night_sleep = best;
    }
}

}  // namespace adasleep::sessions
