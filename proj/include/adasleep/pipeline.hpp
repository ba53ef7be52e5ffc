#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "adasleep/adaptive.hpp"
#include "adasleep/anomaly.hpp"
#include "adasleep/features.hpp"
#include "adasleep/hmm.hpp"
#include "adasleep/io.hpp"
#include "adasleep/sessions.hpp"

namespace adasleep::pipeline {

inline constexpr const char* kVersion = "0.1.0";

struct ScreeningVariable {
    VariableId variable;
    anomaly::AbnormalSide side;
};

struct PipelineConfig {
    double epoch_length = 60.0;
    std::uint64_t seed = 1;
    std::vector<ScreeningVariable> screening = {
        {{SignalId::HR, StatId::MED}, anomaly::AbnormalSide::HIGH},
        {{SignalId::TEMP, StatId::MED}, anomaly::AbnormalSide::LOW}};
    double max_abnormal_fraction = 0.4;
    std::vector<hmm::ModelConfig> hmm_configs = {
        {{{SignalId::HR, StatId::MED}, {SignalId::HR, StatId::SD}, {SignalId::ACC, StatId::SD}}, 2},
        {{{SignalId::HR, StatId::MED}, {SignalId::HR, StatId::SD}, {SignalId::ACC, StatId::SD}}, 3}};
    double initial_window_seconds = 24.0 * 3600.0;  // relative to each subject's origin
    adaptive::SequencerConfig sequencer;
    int median_window = 5;
    double min_sleep_seconds = 3600.0;
    adaptive::ClockWindow night_window = {20.0, 4.0};
    adaptive::ClockWindow rest_window = {21.0, 22.0};
    adaptive::ClockWindow sleep_window = {3.0, 4.0};
    int jobs = 1;
};

// Throws ConfigError on out-of-bounds values (even K-state limits 2..4,
// odd median window, increasing window candidates, ...).
void validate(const PipelineConfig& cfg);

PipelineConfig load_pipeline_config(const std::filesystem::path& path);
// Canonical JSON (alphabetical keys); also the hashing input for run metadata.
std::string config_to_json(const PipelineConfig& cfg);

// In-memory result of the per-subject detection chain.
struct SubjectArtifacts {
    EpochSeries epochs;
    io::ScreeningOutcome screening;
    anomaly::FilterResult filtered;
    std::optional<hmm::SelectResult> hmm_selection;
    double selected_si = 0.0;
    adaptive::LabeledTimeline timeline;  // post-smoothing statuses
    std::vector<sessions::Session> session_list;
    std::vector<anomaly::ExcludedCategory> categories;
    std::vector<features::FeatureRow> feature_rows;
};

// ingest -> anomaly screening -> HMM bootstrap -> sequential labeling ->
// smoothing/sessions -> excluded-epoch categorization -> per-day features.
// An unusable subject (abnormal fraction above the limit) stops after
// screening with usable = false.
SubjectArtifacts detect_subject(const std::string& subject_id,
                                const std::vector<RawStream>& streams,
                                double origin,
                                const PipelineConfig& cfg);

struct SubjectOutcome {
    std::string subject_id;
    bool ok = false;
    bool usable = false;
    double abnormal_fraction = 0.0;
    std::string error;
};

struct RunReport {
    std::vector<SubjectOutcome> subjects;
    std::filesystem::path out_dir;

    bool any_failed() const {
        for (const auto& s : subjects)
            if (!s.ok) return true;
        return false;
    }
    int exit_code() const { return any_failed() ? 1 : 0; }
};

// Full cohort run: per-subject artifact directories plus the cohort feature
// table, report and run metadata. Subject failures are isolated; the report
// carries them.
RunReport run_pipeline(const std::filesystem::path& manifest_path,
                       const PipelineConfig& cfg,
                       const std::filesystem::path& out_dir,
                       const std::vector<std::string>& subject_filter = {});

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct PcaResult {
    std::vector<Index> rows;       // epochs the scores belong to
    Matrix scores;                 // n x 2
    Vector explained_ratio;        // all components, descending
    std::vector<std::string> dropped_columns;  // constant columns removed
};

// First two principal components of the centered, unit-scaled summary
// statistics over non-NA epochs. Throws when fewer than 3 usable epochs or
// rank < 2 after dropping constant columns.
PcaResult pca_diagnostics(const EpochSeries& series);

void write_pca_csv(const std::filesystem::path& path, const EpochSeries& series,
                   const PcaResult& pca, const adaptive::LabeledTimeline& timeline);

// ---------------------------------------------------------------------------
// Outcome evaluation
// ---------------------------------------------------------------------------

struct BinaryFeatureResult {
    std::string feature;
    double coef = 0.0;  // slope of the full-data marginal fit
    double auc = 0.0;   // LOOCV
    int n = 0;
    int skipped_folds = 0;
};

struct OrdinalFeatureResult {
    std::string feature;
    double coef_level1 = 0.0;
    double coef_level2 = 0.0;
    std::array<double, 3> auc{};  // one-vs-rest Early/Mid/Late, LOOCV
    int n = 0;
    int skipped_folds = 0;
};

struct EvalResult {
    std::vector<BinaryFeatureResult> binary;    // ranked by AUC descending
    std::vector<OrdinalFeatureResult> ordinal;  // ranked by Late AUC descending
    std::vector<std::string> top_features;      // up to 3, by binary AUC
    Matrix correlations;                        // Pearson among top features
    double joint_auc = 0.0;                     // LOOCV of the joint top-feature logistic
};

// Marginal logistic and continuation-ratio screening of every feature for one
// study day. Throws DataError listing unmatched subject ids between the
// feature table and the labels.
EvalResult evaluate(const features::FeatureTable& table,
                    const io::OutcomeLabels& labels,
                    int day);

void write_eval_csv(const std::filesystem::path& dir, const EvalResult& result);

}  // namespace adasleep::pipeline
