// Command-line front end for the sleep/wake detection pipeline.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adasleep/ingest.hpp"
#include "adasleep/io.hpp"
#include "adasleep/pipeline.hpp"
#include "adasleep/synth.hpp"

namespace fs = std::filesystem;
using namespace adasleep;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string manifest_path;
    std::string out_path;
    std::vector<std::string> subjects;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int day = 0;
};

pipeline::PipelineConfig load_config(const CommonOptions& opt) {
    pipeline::PipelineConfig cfg;
    if (!opt.config_path.empty()) cfg = pipeline::load_pipeline_config(opt.config_path);
    if (opt.seed_set) cfg.seed = opt.seed;
    pipeline::validate(cfg);
    return cfg;
}

std::vector<std::string> split_subjects(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& entry : raw) {
        std::stringstream ss(entry);
        std::string id;
        while (std::getline(ss, id, ','))
            if (!id.empty()) out.push_back(id);
    }
    return out;
}

int cmd_ingest(const CommonOptions& opt) {
    const auto cfg = load_config(opt);
    for (const auto& m : io::read_cohort_manifest(opt.manifest_path)) {
        const auto filter = split_subjects(opt.subjects);
        if (!filter.empty() &&
            std::find(filter.begin(), filter.end(), m.subject_id) == filter.end())
            continue;
        std::vector<RawStream> streams;
        for (const auto& sf : m.signals)
            streams.push_back(io::read_signal_csv(sf.file, sf.signal, sf.sampling_hz));
        const EpochSeries series =
            ingest::segment_and_summarize(streams, cfg.epoch_length, m.origin, m.subject_id);
        io::write_epochs_csv(fs::path(opt.out_path) / m.subject_id / "epochs.csv", series);
        std::cout << m.subject_id << ": " << series.n_epochs() << " epochs\n";
    }
    return 0;
}

int cmd_detect(const CommonOptions& opt) {
    const auto cfg = load_config(opt);
    const auto report =
        pipeline::run_pipeline(opt.manifest_path, cfg, opt.out_path, split_subjects(opt.subjects));
    for (const auto& s : report.subjects) {
        std::cout << s.subject_id << ": "
                  << (s.ok ? (s.usable ? "ok" : "unusable (abnormal fraction "
                                                    + io::format_double(s.abnormal_fraction) + ")")
                           : "FAILED: " + s.error)
                  << '\n';
    }
    return report.exit_code();
}

int cmd_features(const CommonOptions& opt, const std::string& artifacts_dir) {
    features::FeatureTable table;
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(artifacts_dir))
        if (entry.is_directory() && fs::exists(entry.path() / "sessions.csv")) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        const std::string subject = dir.filename().string();
        const EpochSeries epochs = io::read_epochs_csv(dir / "epochs.csv", subject);
        auto session_list = io::read_sessions_csv(dir / "sessions.csv", subject);
        int max_day = -1;
        for (const auto& s : session_list) max_day = std::max(max_day, s.assigned_day);
        for (int day = 0; day <= max_day; ++day) {
            bool any = false;
            for (const auto& s : session_list) any = any || s.assigned_day == day;
            if (any)
                table.rows.push_back(
                    features::extract_features(session_list, epochs, day, epochs.origin));
        }
    }
    io::write_features_csv(opt.out_path, table);
    std::cout << "wrote " << table.rows.size() << " feature rows\n";
    return 0;
}

int cmd_evaluate(const CommonOptions& opt, const std::string& features_path,
                 const std::string& labels_path) {
    const auto table = io::read_features_csv(features_path);
    const auto labels = io::read_labels_csv(labels_path);
    const auto result = pipeline::evaluate(table, labels, opt.day);
    pipeline::write_eval_csv(opt.out_path, result);
    const std::size_t show = std::min<std::size_t>(5, result.binary.size());
    for (std::size_t i = 0; i < show; ++i)
        std::cout << result.binary[i].feature << "  coef=" << io::format_double(result.binary[i].coef)
                  << "  auc=" << io::format_double(result.binary[i].auc) << '\n';
    if (!result.top_features.empty())
        std::cout << "joint top-" << result.top_features.size()
                  << " auc=" << io::format_double(result.joint_auc) << '\n';
    return 0;
}

int cmd_simulate(const CommonOptions& opt, const std::string& sim_path) {
    synth::SimConfig cfg = synth::default_sim_config();
    if (!sim_path.empty()) {
        std::ifstream in(sim_path);
        if (!in) throw ConfigError("cannot read sim config " + sim_path);
        nlohmann::json j;
        in >> j;
        cfg.subject_id = j.value("subject_id", cfg.subject_id);
        cfg.days = j.value("days", cfg.days);
        cfg.epoch_length = j.value("epoch_length", cfg.epoch_length);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("sleep_blocks")) {
            cfg.sleep_blocks.clear();
            for (const auto& b : j["sleep_blocks"])
                cfg.sleep_blocks.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
        }
        if (j.contains("abnormal_segments")) {
            for (const auto& seg : j["abnormal_segments"]) {
                synth::AbnormalSegment a;
                a.start = seg.at("start").get<double>();
                a.end = seg.at("end").get<double>();
                const std::string kind = seg.at("kind").get<std::string>();
                if (kind == "NW") a.kind = synth::TruthState::NW;
                else if (kind == "LOC") a.kind = synth::TruthState::LOC;
                else if (kind == "ACTIVE") a.kind = synth::TruthState::ACTIVE;
                else throw ConfigError("unknown abnormal segment kind: " + kind);
                cfg.abnormal_segments.push_back(a);
            }
        }
    }
    if (opt.seed_set) cfg.seed = opt.seed;
    const auto data = synth::generate_subject(cfg);
    const auto manifest = io::write_subject_dataset(opt.out_path, cfg, data);
    std::cout << "wrote " << manifest << '\n';
    return 0;
}

int cmd_fig3(const CommonOptions& opt, int n_seeds, int n_per_class) {
    std::vector<std::uint64_t> seeds;
    const std::uint64_t base = opt.seed_set ? opt.seed : 1;
    for (int s = 0; s < n_seeds; ++s) seeds.push_back(base + static_cast<std::uint64_t>(s));

    std::ostringstream csv;
    csv << "mu,si_projection_mean,si_euclidean_mean,n_per_class,n_seeds\n";
    for (double mu : {0.0, 1.5, 3.0}) {
        const auto r = synth::fig3_experiment(mu, n_per_class, seeds);
        csv << io::format_double(mu) << ',' << io::format_double(r.mean_si_projection) << ','
            << io::format_double(r.mean_si_euclidean) << ',' << n_per_class << ',' << n_seeds
            << '\n';
        std::cout << "mu=" << mu << "  SI(projection)=" << r.mean_si_projection
                  << "  SI(euclidean)=" << r.mean_si_euclidean << '\n';
    }
    if (!opt.out_path.empty()) {
        std::ofstream out(opt.out_path);
        out << csv.str();
    }
    return 0;
}

int cmd_diagnose(const CommonOptions& opt, const std::string& artifacts_dir) {
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(artifacts_dir))
        if (entry.is_directory() && fs::exists(entry.path() / "epochs.csv")) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    const auto filter = split_subjects(opt.subjects);
    for (const auto& dir : dirs) {
        const std::string subject = dir.filename().string();
        if (!filter.empty() && std::find(filter.begin(), filter.end(), subject) == filter.end())
            continue;
        const EpochSeries epochs = io::read_epochs_csv(dir / "epochs.csv", subject);
        const auto pca = pipeline::pca_diagnostics(epochs);

        // reuse detected statuses when a timeline exists
        adaptive::LabeledTimeline timeline;
        timeline.status.assign(static_cast<std::size_t>(epochs.n_epochs()),
                               adaptive::EpochStatus::NA);
        timeline.provenance.assign(timeline.status.size(), adaptive::Provenance::NONE);
        timeline.batch.assign(timeline.status.size(), -1);
        const fs::path tl = dir / "timeline.csv";
        if (fs::exists(tl)) {
            std::ifstream in(tl);
            std::string line;
            std::getline(in, line);
            std::size_t j = 0;
            while (std::getline(in, line) && j < timeline.status.size()) {
                const auto comma = line.find(',');
                const auto next = line.find(',', comma + 1);
                const std::string status = line.substr(comma + 1, next - comma - 1);
                if (status == "sleep") timeline.status[j] = adaptive::EpochStatus::SLEEP;
                else if (status == "wake") timeline.status[j] = adaptive::EpochStatus::WAKE;
                else if (status == "abnormal") timeline.status[j] = adaptive::EpochStatus::ABNORMAL;
                ++j;
            }
        }
        pipeline::write_pca_csv(fs::path(opt.out_path) / (subject + "_pca.csv"), epochs, pca,
                                timeline);
        std::cout << subject << ": PC1 explains " << io::format_double(pca.explained_ratio(0))
                  << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised sleep/wake detection from multimodal wearable time series"};
    app.require_subcommand(1);

    CommonOptions opt;
    std::string artifacts_dir, features_path, labels_path, sim_path;
    int n_seeds = 100, n_per_class = 100;

    const auto add_common = [&](CLI::App* cmd, bool needs_out = true) {
        cmd->add_option("--config", opt.config_path, "pipeline config JSON");
        if (needs_out) cmd->add_option("--out", opt.out_path, "output path")->required();
        cmd->add_option("--seed", opt.seed, "seed override")
            ->each([&](const std::string&) { opt.seed_set = true; });
        cmd->add_option("--subjects", opt.subjects, "comma-separated subject ids");
    };

    auto* ingest_cmd = app.add_subcommand("ingest", "segment and summarize raw signals");
    ingest_cmd->add_option("--manifest", opt.manifest_path, "cohort or subject manifest")->required();
    add_common(ingest_cmd);

    auto* detect_cmd = app.add_subcommand("detect", "run the full detection pipeline");
    detect_cmd->add_option("--manifest", opt.manifest_path, "cohort or subject manifest")->required();
    add_common(detect_cmd);

    auto* features_cmd = app.add_subcommand("features", "re-extract per-day features from artifacts");
    features_cmd->add_option("--artifacts", artifacts_dir, "detect output directory")->required();
    add_common(features_cmd);

    auto* evaluate_cmd = app.add_subcommand("evaluate", "marginal predictive screening of features");
    evaluate_cmd->add_option("--features", features_path, "features CSV")->required();
    evaluate_cmd->add_option("--labels", labels_path, "labels CSV (subject,binary[,ordinal])")->required();
    evaluate_cmd->add_option("--day", opt.day, "study day to evaluate");
    add_common(evaluate_cmd);

    auto* simulate_cmd = app.add_subcommand("simulate", "generate a synthetic subject dataset");
    simulate_cmd->add_option("--sim", sim_path, "simulation config JSON");
    add_common(simulate_cmd);

    auto* fig3_cmd = app.add_subcommand("fig3", "separability index simulation");
    fig3_cmd->add_option("--seeds", n_seeds, "number of seeds");
    fig3_cmd->add_option("--n", n_per_class, "samples per class");
    fig3_cmd->add_option("--out", opt.out_path, "output CSV (optional)");
    fig3_cmd->add_option("--seed", opt.seed, "base seed")
        ->each([&](const std::string&) { opt.seed_set = true; });

    auto* diagnose_cmd = app.add_subcommand("diagnose", "PCA diagnostics per subject");
    diagnose_cmd->add_option("--artifacts", artifacts_dir, "detect output directory")->required();
    add_common(diagnose_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest_cmd->parsed()) return cmd_ingest(opt);
        if (detect_cmd->parsed()) return cmd_detect(opt);
        if (features_cmd->parsed()) return cmd_features(opt, artifacts_dir);
        if (evaluate_cmd->parsed()) return cmd_evaluate(opt, features_path, labels_path);
        if (simulate_cmd->parsed()) return cmd_simulate(opt, sim_path);
        if (fig3_cmd->parsed()) return cmd_fig3(opt, n_seeds, n_per_class);
        if (diagnose_cmd->parsed()) return cmd_diagnose(opt, artifacts_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
