#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adasleep/adaptive.hpp"
#include "adasleep/anomaly.hpp"
#include "adasleep/epoch_series.hpp"
#include "adasleep/features.hpp"
#include "adasleep/hmm.hpp"
#include "adasleep/sessions.hpp"
#include "adasleep/synth.hpp"

namespace adasleep::io {

// shortest round-trippable decimal representation
std::string format_double(double v);

std::uint64_t fnv1a64(const std::string& data);

// ---------------------------------------------------------------------------
// Manifests and raw signals
// ---------------------------------------------------------------------------

struct SignalFile {
    SignalId signal;
    std::filesystem::path file;  // resolved against the manifest directory
    double sampling_hz = 0.0;
};

struct SubjectManifest {
    std::string subject_id;
    double origin = 0.0;
    std::vector<SignalFile> signals;
};

SubjectManifest read_subject_manifest(const std::filesystem::path& path);

// A cohort manifest {"subjects": [...]} of per-subject manifest paths; a
// single-subject manifest is accepted as a cohort of one.
std::vector<SubjectManifest> read_cohort_manifest(const std::filesystem::path& path);

// Column layouts: `timestamp,value`, or `timestamp,x,y,z` reduced to the
// Euclidean norm at read time.
RawStream read_signal_csv(const std::filesystem::path& path, SignalId signal, double sampling_hz);

void write_signal_csv(const std::filesystem::path& path, const RawStream& stream);

// ---------------------------------------------------------------------------
// Pipeline artifacts
// ---------------------------------------------------------------------------

void write_epochs_csv(const std::filesystem::path& path, const EpochSeries& series);
EpochSeries read_epochs_csv(const std::filesystem::path& path,
                            const std::string& subject_id = "");

struct ScreeningOutcome {
    std::vector<anomaly::CutoffRule> rules;
    double abnormal_fraction = 0.0;
    bool usable = true;
    double max_abnormal_fraction = 0.4;
};

void write_cutoffs_json(const std::filesystem::path& path, const std::string& subject_id,
                        const ScreeningOutcome& outcome);

void write_hmm_model_json(const std::filesystem::path& path, const hmm::HmmModel& model,
                          double selected_si);
hmm::HmmModel read_hmm_model_json(const std::filesystem::path& path);

void write_timeline_csv(const std::filesystem::path& path, const EpochSeries& series,
                        const adaptive::LabeledTimeline& timeline);

void write_audit_jsonl(const std::filesystem::path& path,
                       const std::vector<adaptive::BatchAudit>& audits);

void write_sessions_csv(const std::filesystem::path& path, const std::string& subject_id,
                        const std::vector<sessions::Session>& session_list);
std::vector<sessions::Session> read_sessions_csv(const std::filesystem::path& path,
                                                 const std::string& subject_id);

void write_categories_csv(const std::filesystem::path& path, const std::string& subject_id,
                          const EpochSeries& series, const std::vector<Index>& excluded,
                          const std::vector<anomaly::ExcludedCategory>& categories);

void write_category_counts_csv(const std::filesystem::path& path, const std::string& subject_id,
                               const std::vector<anomaly::ExcludedCategory>& categories);

void write_features_csv(const std::filesystem::path& path, const features::FeatureTable& table);
features::FeatureTable read_features_csv(const std::filesystem::path& path);

// subject -> (binary label, optional ordinal level in {1,2,3})
struct OutcomeLabels {
    std::map<std::string, int> binary;
    std::map<std::string, int> ordinal;
};

OutcomeLabels read_labels_csv(const std::filesystem::path& path);

void write_ground_truth_csv(const std::filesystem::path& path, const synth::SimConfig& cfg,
                            const std::vector<synth::TruthState>& truth);

// Write the generated streams, a matching subject manifest, and the ground
// truth; returns the manifest path.
std::filesystem::path write_subject_dataset(const std::filesystem::path& dir,
                                            const synth::SimConfig& cfg,
                                            const synth::SubjectData& data);

}  // namespace adasleep::io
