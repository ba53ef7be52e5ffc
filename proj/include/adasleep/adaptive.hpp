#pragma once

#include <optional>
#include <vector>

#include "adasleep/epoch_series.hpp"
#include "adasleep/lda.hpp"

namespace adasleep::adaptive {

// ---------------------------------------------------------------------------
// Separability index
// ---------------------------------------------------------------------------

// Fraction of samples whose nearest neighbor (excluding self) carries the
// same label, with neighbors under the projection distance |w'(x_t - x_t')|.
// Distance ties break toward the earlier sample index. Throws on n < 2.
double separability_index(const Matrix& x, const std::vector<int>& y, const Vector& w);

// Same index with Euclidean nearest neighbors.
double si_euclidean(const Matrix& x, const std::vector<int>& y);

// ---------------------------------------------------------------------------
// Marginal screening
// ---------------------------------------------------------------------------

// Clock-time window [start_hour, end_hour), wrapping midnight when
// start_hour > end_hour.
struct ClockWindow {
    double start_hour = 0.0;
    double end_hour = 0.0;

    bool contains(double hour) const {
        return start_hour <= end_hour ? (hour >= start_hour && hour < end_hour)
                                      : (hour >= start_hour || hour < end_hour);
    }
};

struct MarginalSiEntry {
    VariableId variable;
    double si = 0.0;
    double zero_pair_fraction = 0.0;  // fraction of sample pairs at distance zero
    bool uninformative = false;       // > 50% zero pairwise distances
};

// Label epochs inside the resting window 0 and the sleeping window 1, then
// compute the per-variable SI with scalar direction 1. Variables dominated by
// tied distances are flagged uninformative.
std::vector<MarginalSiEntry> marginal_si_screen(const EpochSeries& series,
                                                const ClockWindow& rest_window,
                                                const ClockWindow& sleep_window);

// ---------------------------------------------------------------------------
// Sequential labeling with adaptive-size sliding windows
// ---------------------------------------------------------------------------

struct SequencerConfig {
    double batch_seconds = 6.0 * 3600.0;
    std::vector<double> window_candidates = {24.0 * 3600.0, 48.0 * 3600.0, 72.0 * 3600.0};
    double gamma = 1.0;
    int min_class_count = 5;  // per class per window, raised to dim+1 when larger
};

enum class EpochStatus { SLEEP, WAKE, ABNORMAL, NA };
enum class Provenance { HMM, LDA, SMOOTHED, NONE };

const char* to_string(EpochStatus s);
const char* to_string(Provenance p);

struct WindowCandidateAudit {
    double window_seconds = 0.0;
    bool eligible = false;  // enough samples per class and LDA fit succeeded
    double si = 0.0;        // valid only when eligible
};

struct BatchAudit {
    int batch = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    std::vector<WindowCandidateAudit> candidates;
    double chosen_window = 0.0;  // 0 when skipped or fallback
    bool fallback = false;       // previous batch's classifier reused
    bool skipped = false;        // no usable epochs in the batch
    int n_sleep = 0;
    int n_wake = 0;
};

struct LabeledTimeline {
    std::vector<EpochStatus> status;    // per epoch of the series grid
    std::vector<Provenance> provenance;
    std::vector<int> batch;             // labeling batch index, -1 outside batches
    std::vector<BatchAudit> audits;
};

// Walk forward from the HMM-labeled initial segment in fixed batches,
// refitting Fisher's LDA on each candidate training window, scoring each
// window by the SI of its joint train+test set under that window's own
// direction, and committing the labels of the best window. Committed labels
// are frozen. Epochs marked NA in `clean` keep status NA.
LabeledTimeline sequential_label(const EpochSeries& clean,
                                 const std::vector<VariableId>& features,
                                 const std::vector<Index>& init_rows,
                                 const std::vector<int>& init_labels,
                                 double initial_window_end,
                                 const SequencerConfig& cfg);

}  // namespace adasleep::adaptive
