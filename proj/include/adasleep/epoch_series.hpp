#pragma once

#include <limits>
#include <string>
#include <vector>

#include "adasleep/common.hpp"

namespace adasleep {

// A raw sensor channel. ACC carries the Euclidean norm of 3-axis
// acceleration, computed at ingestion.
struct RawStream {
    SignalId signal = SignalId::ACC;
    double sampling_hz = 0.0;
    std::vector<double> timestamps;  // seconds since study origin, strictly increasing
    std::vector<double> values;
};

// Per-subject grid of epoch summary statistics: N epochs x (3 stats x p
// signals), plus an NA mask. Epoch j spans [start(j), start(j) + epoch_length).
struct EpochSeries {
    std::string subject_id;
    double epoch_length = 60.0;
    double origin = 0.0;  // start of epoch 0
    std::vector<SignalId> signals;
    Matrix stats;               // N x (3 * signals.size()), NaN where na
    std::vector<bool> na_mask;  // true: fewer than 90% of designed samples in some signal

    Index n_epochs() const { return stats.rows(); }
    double epoch_start(Index j) const { return origin + epoch_length * static_cast<double>(j); }
    double span_end() const { return origin + epoch_length * static_cast<double>(n_epochs()); }

    Index col(SignalId s, StatId st) const { return col(VariableId{s, st}); }

    Index col(const VariableId& v) const {
        for (std::size_t i = 0; i < signals.size(); ++i) {
            if (signals[i] == v.signal)
                return static_cast<Index>(3 * i) + static_cast<Index>(v.stat);
        }
        throw ConfigError("variable " + to_string(v) + " not present in epoch series");
    }

    bool has(const VariableId& v) const {
        for (SignalId s : signals)
            if (s == v.signal) return true;
        return false;
    }

    // column name used in the epochs CSV header
    std::string column_name(Index c) const {
        const auto sig = signals[static_cast<std::size_t>(c / 3)];
        const auto st = static_cast<StatId>(c % 3);
        return to_string(VariableId{sig, st});
    }

    // epoch index containing timestamp t, or -1 if outside the grid
    Index epoch_of(double t) const {
        const double rel = (t - origin) / epoch_length;
        if (rel < 0.0) return -1;
        const auto j = static_cast<Index>(std::floor(rel));
        return j < n_epochs() ? j : -1;
    }
};

// Usable (non-NA) epoch indices, optionally restricted to starts in [t_from, t_to).
std::vector<Index> usable_epochs(const EpochSeries& series,
                                 double t_from = -std::numeric_limits<double>::infinity(),
                                 double t_to = std::numeric_limits<double>::infinity());

// Gather the named variables over the given epoch rows into a dense matrix.
Matrix extract_columns(const EpochSeries& series,
                       const std::vector<Index>& rows,
                       const std::vector<VariableId>& variables);

}  // namespace adasleep
