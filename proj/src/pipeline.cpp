#include "adasleep/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adasleep/ingest.hpp"
#include "adasleep/predict.hpp"

namespace adasleep::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

void validate(const PipelineConfig& cfg) {
    if (!(cfg.epoch_length > 0.0)) throw ConfigError("config: epoch_length must be > 0");
    if (!(cfg.max_abnormal_fraction >= 0.0 && cfg.max_abnormal_fraction <= 1.0))
        throw ConfigError("config: max_abnormal_fraction must be in [0,1]");
    if (cfg.hmm_configs.empty()) throw ConfigError("config: empty HMM configuration pool");
    for (const auto& hc : cfg.hmm_configs) {
        if (hc.K < 2 || hc.K > 4) throw ConfigError("config: HMM state count must be in [2,4]");
        if (hc.feature_ids.empty()) throw ConfigError("config: HMM feature set must be nonempty");
    }
    if (!(cfg.initial_window_seconds > 0.0))
        throw ConfigError("config: initial_window_seconds must be > 0");
    if (!(cfg.sequencer.batch_seconds > 0.0))
        throw ConfigError("config: sequencer batch length must be > 0");
    if (cfg.sequencer.window_candidates.empty())
        throw ConfigError("config: sequencer needs window candidates");
    for (std::size_t i = 1; i < cfg.sequencer.window_candidates.size(); ++i)
        if (cfg.sequencer.window_candidates[i] <= cfg.sequencer.window_candidates[i - 1])
            throw ConfigError("config: window candidates must be strictly increasing");
    if (cfg.median_window < 3 || cfg.median_window % 2 == 0)
        throw ConfigError("config: median_window must be odd and >= 3");
    if (cfg.min_sleep_seconds < 0.0) throw ConfigError("config: min_sleep_seconds must be >= 0");
    if (cfg.jobs < 1) throw ConfigError("config: jobs must be >= 1");
}

namespace {

json window_to_json(const adaptive::ClockWindow& w) {
    return {{"start_hour", w.start_hour}, {"end_hour", w.end_hour}};
}

adaptive::ClockWindow window_from_json(const json& j, const adaptive::ClockWindow& fallback) {
    adaptive::ClockWindow w = fallback;
    if (j.is_object()) {
        w.start_hour = j.value("start_hour", w.start_hour);
        w.end_hour = j.value("end_hour", w.end_hour);
    }
    return w;
}

}  // namespace

std::string config_to_json(const PipelineConfig& cfg) {
    json j;
    j["epoch_length"] = cfg.epoch_length;
    j["seed"] = cfg.seed;
    j["max_abnormal_fraction"] = cfg.max_abnormal_fraction;
    j["initial_window_seconds"] = cfg.initial_window_seconds;
    j["median_window"] = cfg.median_window;
    j["min_sleep_seconds"] = cfg.min_sleep_seconds;
    j["jobs"] = cfg.jobs;
    j["screening"] = json::array();
    for (const auto& s : cfg.screening)
        j["screening"].push_back(
            {{"signal", to_string(s.variable.signal)},
             {"stat", to_string(s.variable.stat)},
             {"abnormal_side", s.side == anomaly::AbnormalSide::LOW ? "low" : "high"}});
    j["hmm_configs"] = json::array();
    for (const auto& hc : cfg.hmm_configs) {
        json fj = json::array();
        for (const auto& f : hc.feature_ids)
            fj.push_back({{"signal", to_string(f.signal)}, {"stat", to_string(f.stat)}});
        j["hmm_configs"].push_back({{"K", hc.K}, {"features", fj}});
    }
    j["sequencer"] = {{"batch_seconds", cfg.sequencer.batch_seconds},
                      {"window_candidates", cfg.sequencer.window_candidates},
                      {"gamma", cfg.sequencer.gamma},
                      {"min_class_count", cfg.sequencer.min_class_count}};
    j["night_window"] = window_to_json(cfg.night_window);
    j["rest_window"] = window_to_json(cfg.rest_window);
    j["sleep_window"] = window_to_json(cfg.sleep_window);
    return j.dump(2);
}

PipelineConfig load_pipeline_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed config JSON: " + std::string(e.what()));
    }

    PipelineConfig cfg;
    try {
        cfg.epoch_length = j.value("epoch_length", cfg.epoch_length);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.max_abnormal_fraction = j.value("max_abnormal_fraction", cfg.max_abnormal_fraction);
        cfg.initial_window_seconds = j.value("initial_window_seconds", cfg.initial_window_seconds);
        cfg.median_window = j.value("median_window", cfg.median_window);
        cfg.min_sleep_seconds = j.value("min_sleep_seconds", cfg.min_sleep_seconds);
        cfg.jobs = j.value("jobs", cfg.jobs);
        if (j.contains("screening")) {
            cfg.screening.clear();
            for (const auto& s : j["screening"]) {
                ScreeningVariable v;
                v.variable = {signal_from_string(s.at("signal").get<std::string>()),
                              stat_from_string(s.at("stat").get<std::string>())};
                const std::string side = s.value("abnormal_side", "low");
                if (side != "low" && side != "high")
                    throw ConfigError("config: abnormal_side must be `low` or `high`");
                v.side = side == "low" ? anomaly::AbnormalSide::LOW : anomaly::AbnormalSide::HIGH;
                cfg.screening.push_back(v);
            }
        }
        if (j.contains("hmm_configs")) {
            cfg.hmm_configs.clear();
            for (const auto& hc : j["hmm_configs"]) {
                hmm::ModelConfig mc;
                mc.K = hc.at("K").get<int>();
                for (const auto& f : hc.at("features"))
                    mc.feature_ids.push_back(
                        {signal_from_string(f.at("signal").get<std::string>()),
                         stat_from_string(f.at("stat").get<std::string>())});
                cfg.hmm_configs.push_back(std::move(mc));
            }
        }
        if (j.contains("sequencer")) {
            const auto& s = j["sequencer"];
            cfg.sequencer.batch_seconds = s.value("batch_seconds", cfg.sequencer.batch_seconds);
            if (s.contains("window_candidates"))
                cfg.sequencer.window_candidates =
                    s["window_candidates"].get<std::vector<double>>();
            cfg.sequencer.gamma = s.value("gamma", cfg.sequencer.gamma);
            cfg.sequencer.min_class_count =
                s.value("min_class_count", cfg.sequencer.min_class_count);
        }
        if (j.contains("night_window"))
            cfg.night_window = window_from_json(j["night_window"], cfg.night_window);
        if (j.contains("rest_window"))
            cfg.rest_window = window_from_json(j["rest_window"], cfg.rest_window);
        if (j.contains("sleep_window"))
            cfg.sleep_window = window_from_json(j["sleep_window"], cfg.sleep_window);
    } catch (const json::exception& e) {
        throw ConfigError("invalid config " + path.string() + ": " + e.what());
    }
    validate(cfg);
    return cfg;
}

// ---------------------------------------------------------------------------
// Per-subject detection
// ---------------------------------------------------------------------------

SubjectArtifacts detect_subject(const std::string& subject_id,
                                const std::vector<RawStream>& streams,
                                double origin,
                                const PipelineConfig& cfg) {
    validate(cfg);
    SubjectArtifacts art;
    art.epochs = ingest::segment_and_summarize(streams, cfg.epoch_length, origin, subject_id);
    const auto n = art.epochs.n_epochs();

    // adaptive cutoffs on the configured screening variables
    std::vector<Index> usable_all = usable_epochs(art.epochs);
    for (const auto& sv : cfg.screening) {
        const Index c = art.epochs.col(sv.variable);  // throws if absent
        std::vector<double> values;
        values.reserve(usable_all.size());
        for (Index j : usable_all) values.push_back(art.epochs.stats(j, c));
        const std::uint64_t var_seed = cfg.seed ^ io::fnv1a64(to_string(sv.variable));
        art.screening.rules.push_back(
            anomaly::compute_cutoff(values, var_seed, sv.side, sv.variable));
    }
    art.filtered = anomaly::filter_epochs(art.epochs, art.screening.rules);
    art.screening.max_abnormal_fraction = cfg.max_abnormal_fraction;
    art.screening.abnormal_fraction =
        usable_all.empty() ? 0.0
                           : static_cast<double>(art.filtered.excluded.size()) /
                                 static_cast<double>(usable_all.size());
    art.screening.usable = art.screening.abnormal_fraction <= cfg.max_abnormal_fraction;

    if (!art.screening.usable) {
        art.timeline.status.assign(static_cast<std::size_t>(n), adaptive::EpochStatus::NA);
        art.timeline.provenance.assign(static_cast<std::size_t>(n), adaptive::Provenance::NONE);
        art.timeline.batch.assign(static_cast<std::size_t>(n), -1);
        for (Index j : art.filtered.excluded)
            art.timeline.status[static_cast<std::size_t>(j)] = adaptive::EpochStatus::ABNORMAL;
        return art;
    }

    // HMM bootstrap on the initial window, then sequential labeling
    const double t_n0 = origin + cfg.initial_window_seconds;
    art.hmm_selection = hmm::select_model(art.filtered.clean, t_n0, cfg.hmm_configs, cfg.seed);
    art.selected_si = art.hmm_selection->si;
    art.timeline = adaptive::sequential_label(art.filtered.clean,
                                              art.hmm_selection->model.feature_ids,
                                              art.hmm_selection->rows,
                                              art.hmm_selection->labels, t_n0, cfg.sequencer);
    for (Index j : art.filtered.excluded) {
        art.timeline.status[static_cast<std::size_t>(j)] = adaptive::EpochStatus::ABNORMAL;
        art.timeline.provenance[static_cast<std::size_t>(j)] = adaptive::Provenance::NONE;
    }

    // median smoothing of the sleep/wake labels
    std::vector<int> labels(static_cast<std::size_t>(n), sessions::kGap);
    for (Index j = 0; j < n; ++j) {
        const auto st = art.timeline.status[static_cast<std::size_t>(j)];
        if (st == adaptive::EpochStatus::SLEEP) labels[static_cast<std::size_t>(j)] = 1;
        if (st == adaptive::EpochStatus::WAKE) labels[static_cast<std::size_t>(j)] = 0;
    }
    const std::vector<int> smoothed = sessions::median_smooth(labels, cfg.median_window);
    for (Index j = 0; j < n; ++j) {
        const auto i = static_cast<std::size_t>(j);
        if (smoothed[i] == sessions::kGap || smoothed[i] == labels[i]) continue;
        art.timeline.status[i] =
            smoothed[i] == 1 ? adaptive::EpochStatus::SLEEP : adaptive::EpochStatus::WAKE;
        art.timeline.provenance[i] = adaptive::Provenance::SMOOTHED;
    }

    art.session_list = sessions::partition_sessions(smoothed, origin, cfg.epoch_length,
                                                    cfg.min_sleep_seconds, cfg.median_window);
    sessions::assign_day(art.session_list, origin, cfg.night_window);

    // categorize what the screening excluded, against wake-session fences
    if (!art.filtered.excluded.empty()) {
        anomaly::WakeReference ref;
        const Index c_temp = art.epochs.col(SignalId::TEMP, StatId::MED);
        const Index c_acc = art.epochs.col(SignalId::ACC, StatId::SD);
        const Index c_hr = art.epochs.col(SignalId::HR, StatId::MED);
        for (const auto& s : art.session_list) {
            if (s.kind != 0) continue;
            for (Index j : usable_epochs(art.filtered.clean, s.onset, s.offset)) {
                ref.temp_med.push_back(art.epochs.stats(j, c_temp));
                ref.acc_sd.push_back(art.epochs.stats(j, c_acc));
                ref.hr_med.push_back(art.epochs.stats(j, c_hr));
            }
        }
        art.categories = anomaly::categorize_excluded(art.epochs, art.filtered.excluded, ref);
    }

    int max_day = -1;
    for (const auto& s : art.session_list) max_day = std::max(max_day, s.assigned_day);
    for (int day = 0; day <= max_day; ++day) {
        bool any = false;
        for (const auto& s : art.session_list) any = any || s.assigned_day == day;
        if (!any) continue;
        art.feature_rows.push_back(
            features::extract_features(art.session_list, art.filtered.clean, day, origin));
    }
    return art;
}

// ---------------------------------------------------------------------------
// Cohort run
// ---------------------------------------------------------------------------

namespace {

void write_subject_artifacts(const fs::path& dir, const SubjectArtifacts& art) {
    io::write_epochs_csv(dir / "epochs.csv", art.epochs);
    io::write_cutoffs_json(dir / "cutoffs.json", art.epochs.subject_id, art.screening);
    io::write_timeline_csv(dir / "timeline.csv", art.epochs, art.timeline);
    if (!art.screening.usable) return;
    if (art.hmm_selection)
        io::write_hmm_model_json(dir / "hmm_model.json", art.hmm_selection->model,
                                 art.selected_si);
    io::write_audit_jsonl(dir / "audit.jsonl", art.timeline.audits);
    io::write_sessions_csv(dir / "sessions.csv", art.epochs.subject_id, art.session_list);
    io::write_categories_csv(dir / "excluded_categories.csv", art.epochs.subject_id, art.epochs,
                             art.filtered.excluded, art.categories);
    io::write_category_counts_csv(dir / "excluded_counts.csv", art.epochs.subject_id,
                                  art.categories);
}

struct SubjectRun {
    SubjectOutcome outcome;
    std::vector<features::FeatureRow> feature_rows;
};

SubjectRun process_subject(const io::SubjectManifest& manifest, const PipelineConfig& cfg,
                           const fs::path& out_dir) {
    SubjectRun run;
    run.outcome.subject_id = manifest.subject_id;
    try {
        std::vector<RawStream> streams;
        for (const auto& sf : manifest.signals)
            streams.push_back(io::read_signal_csv(sf.file, sf.signal, sf.sampling_hz));
        const SubjectArtifacts art =
            detect_subject(manifest.subject_id, streams, manifest.origin, cfg);
        write_subject_artifacts(out_dir / manifest.subject_id, art);
        run.outcome.ok = true;
        run.outcome.usable = art.screening.usable;
        run.outcome.abnormal_fraction = art.screening.abnormal_fraction;
        run.feature_rows = art.feature_rows;
    } catch (const std::exception& e) {
        run.outcome.ok = false;
        run.outcome.error = e.what();
    }
    return run;
}

}  // namespace

RunReport run_pipeline(const fs::path& manifest_path, const PipelineConfig& cfg,
                       const fs::path& out_dir, const std::vector<std::string>& subject_filter) {
    validate(cfg);
    std::vector<io::SubjectManifest> manifests = io::read_cohort_manifest(manifest_path);
    if (!subject_filter.empty()) {
        std::vector<io::SubjectManifest> kept;
        for (auto& m : manifests) {
            if (std::find(subject_filter.begin(), subject_filter.end(), m.subject_id) !=
                subject_filter.end())
                kept.push_back(std::move(m));
        }
        manifests = std::move(kept);
        if (manifests.empty()) throw ConfigError("run_pipeline: subject filter matched nothing");
    }
    std::sort(manifests.begin(), manifests.end(),
              [](const auto& a, const auto& b) { return a.subject_id < b.subject_id; });
    for (std::size_t i = 1; i < manifests.size(); ++i)
        if (manifests[i].subject_id == manifests[i - 1].subject_id)
            throw ConfigError("run_pipeline: duplicate subject id " + manifests[i].subject_id);

    fs::create_directories(out_dir);

    std::vector<SubjectRun> runs(manifests.size());
    if (cfg.jobs <= 1) {
        for (std::size_t i = 0; i < manifests.size(); ++i)
            runs[i] = process_subject(manifests[i], cfg, out_dir);
    } else {
        std::vector<std::future<SubjectRun>> futures;
        futures.reserve(manifests.size());
        for (const auto& m : manifests)
            futures.push_back(std::async(std::launch::async, process_subject, std::cref(m),
                                         std::cref(cfg), std::cref(out_dir)));
        for (std::size_t i = 0; i < futures.size(); ++i) runs[i] = futures[i].get();
    }

    RunReport report;
    report.out_dir = out_dir;
    features::FeatureTable table;
    for (const auto& run : runs) {
        report.subjects.push_back(run.outcome);
        for (const auto& row : run.feature_rows) table.rows.push_back(row);
    }
    io::write_features_csv(out_dir / "features.csv", table);

    json rep;
    rep["subjects"] = json::array();
    for (const auto& s : report.subjects) {
        json sj;
        sj["subject_id"] = s.subject_id;
        sj["ok"] = s.ok;
        sj["usable"] = s.usable;
        sj["abnormal_fraction"] = s.abnormal_fraction;
        if (!s.error.empty()) sj["error"] = s.error;
        rep["subjects"].push_back(sj);
    }
    std::ofstream(out_dir / "report.json") << rep.dump(2) << '\n';

    const std::string canonical = config_to_json(cfg);
    json meta;
    meta["config_hash"] = io::fnv1a64(canonical);
    meta["seed"] = cfg.seed;
    meta["version"] = kVersion;
    meta["subject_count"] = manifests.size();
    std::ofstream(out_dir / "run_metadata.json") << meta.dump(2) << '\n';
    std::ofstream(out_dir / "config.json") << canonical << '\n';

    return report;
}

// ---------------------------------------------------------------------------
// PCA diagnostics
// ---------------------------------------------------------------------------

PcaResult pca_diagnostics(const EpochSeries& series) {
    PcaResult out;
    out.rows = usable_epochs(series);
    const auto n = static_cast<Index>(out.rows.size());
    if (n < 3) throw DataError("pca_diagnostics: need at least 3 non-NA epochs");

    Matrix x(n, series.stats.cols());
    for (Index i = 0; i < n; ++i) x.row(i) = series.stats.row(out.rows[static_cast<std::size_t>(i)]);

    std::vector<Index> kept;
    for (Index c = 0; c < x.cols(); ++c) {
        const double mean = x.col(c).mean();
        const double sd =
            std::sqrt((x.col(c).array() - mean).square().sum() / static_cast<double>(n - 1));
        if (sd < 1e-12) {
            out.dropped_columns.push_back(series.column_name(c));
        } else {
            kept.push_back(c);
        }
    }
    if (static_cast<Index>(kept.size()) < 2)
        throw DataError("pca_diagnostics: rank < 2 after dropping constant columns");

    Matrix z(n, static_cast<Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) {
        const auto c = kept[k];
        const double mean = x.col(c).mean();
        const double sd =
            std::sqrt((x.col(c).array() - mean).square().sum() / static_cast<double>(n - 1));
        z.col(static_cast<Index>(k)) = (x.col(c).array() - mean) / sd;
    }

    const Matrix corr = z.transpose() * z / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(corr);
    if (eig.info() != Eigen::Success) throw DataError("pca_diagnostics: eigendecomposition failed");
    const Vector evals = eig.eigenvalues();  // ascending
    const auto d = evals.size();
    if (!(evals(d - 2) > 1e-12)) throw DataError("pca_diagnostics: rank < 2 after scaling");

    out.explained_ratio = evals.reverse() / evals.sum();
    Matrix components(z.cols(), 2);
    components.col(0) = eig.eigenvectors().col(d - 1);
    components.col(1) = eig.eigenvectors().col(d - 2);
    for (Index c = 0; c < 2; ++c) {
        Index arg = 0;
        components.col(c).cwiseAbs().maxCoeff(&arg);
        if (components(arg, c) < 0.0) components.col(c) = -components.col(c);
    }
    out.scores = z * components;
    return out;
}

void write_pca_csv(const fs::path& path, const EpochSeries& series, const PcaResult& pca,
                   const adaptive::LabeledTimeline& timeline) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "epoch_start,status,pc1,pc2\n";
    for (Index i = 0; i < pca.scores.rows(); ++i) {
        const Index j = pca.rows[static_cast<std::size_t>(i)];
        out << io::format_double(series.epoch_start(j)) << ','
            << to_string(timeline.status[static_cast<std::size_t>(j)]) << ','
            << io::format_double(pca.scores(i, 0)) << ',' << io::format_double(pca.scores(i, 1))
            << '\n';
    }
}

// ---------------------------------------------------------------------------
// Outcome evaluation
// ---------------------------------------------------------------------------

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = static_cast<double>(a.size());
    const double ma = mean_of(a), mb = mean_of(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    (void)n;
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

EvalResult evaluate(const features::FeatureTable& table, const io::OutcomeLabels& labels,
                    int day) {
    std::map<std::string, const features::FeatureRow*> rows;
    for (const auto& row : table.rows) {
        if (row.day != day) continue;
        if (!rows.emplace(row.subject_id, &row).second)
            throw DataError("evaluate: duplicate feature row for subject " + row.subject_id);
    }
    if (rows.empty()) throw DataError("evaluate: no feature rows for day " + std::to_string(day));

    const auto check_matched = [&](const std::map<std::string, int>& m, const char* what) {
        std::string missing;
        for (const auto& [id, _] : m)
            if (!rows.count(id)) missing += id + " ";
        for (const auto& [id, _] : rows)
            if (!m.count(id)) missing += id + " ";
        if (!missing.empty())
            throw DataError(std::string("evaluate: unmatched subject ids for ") + what + ": " +
                            missing);
    };

    const auto& schema = features::feature_schema();
    EvalResult out;

    if (!labels.binary.empty()) {
        check_matched(labels.binary, "binary labels");
        for (std::size_t f = 0; f < schema.size(); ++f) {
            std::vector<double> x;
            std::vector<int> y;
            for (const auto& [id, row] : rows) {
                if (!row->present[f]) continue;
                x.push_back(row->values[f]);
                y.push_back(labels.binary.at(id) ? 1 : 0);
            }
            const auto n1 = std::count(y.begin(), y.end(), 1);
            const auto n0 = static_cast<long>(y.size()) - n1;
            if (x.size() < 4 || n1 < 2 || n0 < 2) continue;
            try {
                BinaryFeatureResult r;
                r.feature = schema[f];
                r.coef = predict::fit_logistic(x, y).beta1();
                const auto cv = predict::loocv_auc(x, y);
                r.auc = cv.auc;
                r.skipped_folds = cv.skipped_folds;
                r.n = static_cast<int>(x.size());
                out.binary.push_back(std::move(r));
            } catch (const std::exception&) {
                // feature unusable for this outcome; skip it
            }
        }
        std::sort(out.binary.begin(), out.binary.end(), [](const auto& a, const auto& b) {
            return a.auc > b.auc || (a.auc == b.auc && a.feature < b.feature);
        });
    }

    if (!labels.ordinal.empty()) {
        check_matched(labels.ordinal, "ordinal labels");
        for (std::size_t f = 0; f < schema.size(); ++f) {
            std::vector<double> x;
            std::vector<int> y;
            for (const auto& [id, row] : rows) {
                if (!row->present[f]) continue;
                x.push_back(row->values[f]);
                y.push_back(labels.ordinal.at(id));
            }
            if (x.size() < 4) continue;
            try {
                OrdinalFeatureResult r;
                r.feature = schema[f];
                const auto m = predict::fit_continuation_ratio(x, y);
                r.coef_level1 = m.level1_fitted ? m.level1.beta1() : 0.0;
                r.coef_level2 = m.level2_fitted ? m.level2.beta1() : 0.0;
                const auto cv = predict::loocv_auc_ordinal(x, y);
                r.auc = cv.auc_per_class;
                r.skipped_folds = cv.skipped_folds;
                r.n = static_cast<int>(x.size());
                out.ordinal.push_back(std::move(r));
            } catch (const std::exception&) {
            }
        }
        std::sort(out.ordinal.begin(), out.ordinal.end(), [](const auto& a, const auto& b) {
            return a.auc[2] > b.auc[2] || (a.auc[2] == b.auc[2] && a.feature < b.feature);
        });
    }

    // correlations and a joint model over the top binary features
    const std::size_t top_n = std::min<std::size_t>(3, out.binary.size());
    for (std::size_t i = 0; i < top_n; ++i) out.top_features.push_back(out.binary[i].feature);
    if (top_n >= 1) {
        std::vector<std::size_t> idx;
        for (const auto& name : out.top_features)
            idx.push_back(static_cast<std::size_t>(
                std::find(schema.begin(), schema.end(), name) - schema.begin()));

        std::vector<std::string> common;
        for (const auto& [id, row] : rows) {
            bool all = true;
            for (auto fi : idx) all = all && row->present[fi];
            if (all) common.push_back(id);
        }

        out.correlations = Matrix::Identity(static_cast<Index>(top_n), static_cast<Index>(top_n));
        std::vector<std::vector<double>> cols(top_n);
        for (std::size_t c = 0; c < top_n; ++c)
            for (const auto& id : common) cols[c].push_back(rows.at(id)->values[idx[c]]);
        for (std::size_t a = 0; a < top_n; ++a)
            for (std::size_t b = a + 1; b < top_n; ++b)
                out.correlations(static_cast<Index>(a), static_cast<Index>(b)) =
                    out.correlations(static_cast<Index>(b), static_cast<Index>(a)) =
                        pearson(cols[a], cols[b]);

        if (!labels.binary.empty() && common.size() >= 4) {
            Matrix x(static_cast<Index>(common.size()), static_cast<Index>(top_n));
            std::vector<int> y;
            for (std::size_t i = 0; i < common.size(); ++i) {
                for (std::size_t c = 0; c < top_n; ++c)
                    x(static_cast<Index>(i), static_cast<Index>(c)) = cols[c][i];
                y.push_back(labels.binary.at(common[i]) ? 1 : 0);
            }
            try {
                out.joint_auc = predict::loocv_auc(x, y).auc;
            } catch (const std::exception&) {
                out.joint_auc = 0.0;
            }
        }
    }
    return out;
}

void write_eval_csv(const fs::path& dir, const EvalResult& result) {
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "results_binary.csv");
        out << "feature,coef,auc,n,skipped_folds\n";
        for (const auto& r : result.binary)
            out << r.feature << ',' << io::format_double(r.coef) << ','
                << io::format_double(r.auc) << ',' << r.n << ',' << r.skipped_folds << '\n';
    }
    {
        std::ofstream out(dir / "results_ordinal.csv");
        out << "feature,coef_level1,coef_level2,auc_early,auc_mid,auc_late,n,skipped_folds\n";
        for (const auto& r : result.ordinal)
            out << r.feature << ',' << io::format_double(r.coef_level1) << ','
                << io::format_double(r.coef_level2) << ',' << io::format_double(r.auc[0]) << ','
                << io::format_double(r.auc[1]) << ',' << io::format_double(r.auc[2]) << ',' << r.n
                << ',' << r.skipped_folds << '\n';
    }
    {
        std::ofstream out(dir / "correlations.csv");
        out << "feature";
        for (const auto& name : result.top_features) out << ',' << name;
        out << '\n';
        for (std::size_t a = 0; a < result.top_features.size(); ++a) {
            out << result.top_features[a];
            for (std::size_t b = 0; b < result.top_features.size(); ++b)
                out << ','
                    << io::format_double(
                           result.correlations(static_cast<Index>(a), static_cast<Index>(b)));
            out << '\n';
        }
    }
    {
        json j;
        j["top_features"] = result.top_features;
        j["joint_auc"] = result.joint_auc;
        std::ofstream(dir / "eval_summary.json") << j.dump(2) << '\n';
    }
}

}  // namespace adasleep::pipeline
