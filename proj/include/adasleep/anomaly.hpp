#pragma once

#include <cstdint>
#include <vector>

#include "adasleep/epoch_series.hpp"

namespace adasleep::anomaly {

// Which tail of a screening variable holds abnormal readings. Skin
// temperature drops toward ambient when the device is off the wrist
// (abnormal low); heart rate spikes on poor contact or vigorous activity
// (abnormal high).
enum class AbnormalSide { LOW, HIGH };

struct ClusterSummary {
    std::vector<int> assignments;    // per-sample cluster index; 0 = largest centroid
    std::vector<double> centroids;   // descending
    std::vector<int> normal_set;     // sample indices in the normal (non-abnormal) clusters
    double wcss = 0.0;
};

enum class CutoffDirection { LOWER_BOUND, UPPER_BOUND };

// A cutoff only takes effect when the abnormal-candidate cluster is clearly
// separated from the normal set; slicing a true sleep/wake mode on
// anomaly-free data must not amputate it.
inline constexpr double kMinSeparationRatio = 4.0;

// Feasible interval for one screening variable: [cutoff, inf) for
// LOWER_BOUND, (-inf, cutoff] for UPPER_BOUND. Inactive rules impose no
// restriction.
struct CutoffRule {
    VariableId variable;
    double cutoff = 0.0;
    CutoffDirection direction = CutoffDirection::LOWER_BOUND;
    bool active = true;
    double separation_ratio = 0.0;  // abnormal gap over flanking within-cluster spread
};

enum class ExcludedCategory { NW, LOC, ACTIVE, OTHER };

const char* to_string(ExcludedCategory c);

// Lloyd's k-means on one dimension with farthest-point seeding, 20 seeded
// restarts, best within-cluster sum of squares kept (ties to the lowest
// restart index). Centroids are reported in descending order.
// Throws DataError when values has fewer than k distinct entries.
ClusterSummary kmeans_1d(const std::vector<double>& values, int k, std::uint64_t seed);

// Build the quantile cutoff for one screening variable from its non-NA
// values. Clusters into three groups, forms the normal set cluster-gap-wise
// on the configured abnormal side, and cuts at the 2.5% quantile of the
// normal set (feasible above) when the normal mean exceeds the abnormal
// mean, else at the 97.5% quantile (feasible below).
CutoffRule compute_cutoff(const std::vector<double>& values,
                          std::uint64_t seed,
                          AbnormalSide side = AbnormalSide::LOW,
                          VariableId variable = {SignalId::TEMP, StatId::MED});

struct FilterResult {
    // Same grid as the input; excluded epochs are additionally marked NA so
    // downstream learners skip them. Their identity lives in `excluded`.
    EpochSeries clean;
    std::vector<Index> excluded;
};

// Exclude every non-NA epoch violating any rule's feasible interval.
// NA epochs pass through untouched (neither clean nor excluded).
FilterResult filter_epochs(const EpochSeries& series, const std::vector<CutoffRule>& rules);

struct TukeyFences {
    double low = 0.0;
    double up = 0.0;
};

// Q1 - 1.5*IQR and Q3 + 1.5*IQR.
TukeyFences tukey_fences(const std::vector<double>& values);

// Empirical wake-session distribution of the variables used to categorize
// excluded epochs.
struct WakeReference {
    std::vector<double> temp_med;
    std::vector<double> acc_sd;
    std::vector<double> hr_med;
};

// Categorize excluded epochs into device states using Tukey fences over the
// wake-session reference: NW (low TEMP MED + low ACC SD), LOC (low TEMP MED,
// ACC SD in range), ACTIVE (TEMP MED in range, HR MED and ACC SD above the
// upper fences), OTHER otherwise.
std::vector<ExcludedCategory> categorize_excluded(const EpochSeries& series,
                                                  const std::vector<Index>& excluded,
                                                  const WakeReference& wake_reference);

}  // namespace adasleep::anomaly
