#include "adasleep/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace adasleep::io {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // keep the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char probe[40];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(probe, "%lf", &back);
        if (back == v) return probe;
    }
    return buf;
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

json load_json(const fs::path& path) {
    auto in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

}  // namespace

SubjectManifest read_subject_manifest(const fs::path& path) {
    const json j = load_json(path);
    SubjectManifest m;
    try {
        m.subject_id = j.at("subject_id").get<std::string>();
        m.origin = j.value("origin", 0.0);
        for (const auto& s : j.at("signals")) {
            SignalFile f;
            f.signal = signal_from_string(s.at("signal").get<std::string>());
            f.file = path.parent_path() / s.at("file").get<std::string>();
            f.sampling_hz = s.at("sampling_hz").get<double>();
            m.signals.push_back(f);
        }
    } catch (const json::exception& e) {
        throw ConfigError("invalid subject manifest " + path.string() + ": " + e.what());
    }
    if (m.signals.empty()) throw ConfigError("subject manifest lists no signals: " + path.string());
    return m;
}

std::vector<SubjectManifest> read_cohort_manifest(const fs::path& path) {
    const json j = load_json(path);
    if (j.contains("subject_id")) return {read_subject_manifest(path)};
    std::vector<SubjectManifest> out;
    try {
        for (const auto& entry : j.at("subjects"))
            out.push_back(read_subject_manifest(path.parent_path() / entry.get<std::string>()));
    } catch (const json::exception& e) {
        throw ConfigError("invalid cohort manifest " + path.string() + ": " + e.what());
    }
    if (out.empty()) throw ConfigError("cohort manifest lists no subjects: " + path.string());
    return out;
}

RawStream read_signal_csv(const fs::path& path, SignalId signal, double sampling_hz) {
    auto in = open_in(path);
    RawStream s;
    s.signal = signal;
    s.sampling_hz = sampling_hz;

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty signal file: " + path.string());
    const auto header = split_csv_line(line);
    const bool triaxial = header.size() == 4;
    if (header.empty() || header[0] != "timestamp" || (header.size() != 2 && !triaxial))
        throw DataError("unexpected signal CSV header in " + path.string());

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size())
            throw DataError("ragged row in signal CSV " + path.string());
        s.timestamps.push_back(std::stod(f[0]));
        if (triaxial) {
            const double x = std::stod(f[1]), y = std::stod(f[2]), z = std::stod(f[3]);
            s.values.push_back(std::sqrt(x * x + y * y + z * z));
        } else {
            s.values.push_back(std::stod(f[1]));
        }
    }
    return s;
}

void write_signal_csv(const fs::path& path, const RawStream& stream) {
    auto out = open_out(path);
    out << "timestamp,value\n";
    for (std::size_t i = 0; i < stream.timestamps.size(); ++i)
        out << format_double(stream.timestamps[i]) << ',' << format_double(stream.values[i])
            << '\n';
}

void write_epochs_csv(const fs::path& path, const EpochSeries& series) {
    auto out = open_out(path);
    out << "epoch_start";
    for (Index c = 0; c < series.stats.cols(); ++c) out << ',' << series.column_name(c);
    out << ",na\n";
    for (Index j = 0; j < series.n_epochs(); ++j) {
        out << format_double(series.epoch_start(j));
        const bool na = series.na_mask[static_cast<std::size_t>(j)];
        for (Index c = 0; c < series.stats.cols(); ++c) {
            out << ',';
            if (!na) out << format_double(series.stats(j, c));
        }
        out << ',' << (na ? 1 : 0) << '\n';
    }
}

EpochSeries read_epochs_csv(const fs::path& path, const std::string& subject_id) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty epochs CSV: " + path.string());
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header.front() != "epoch_start" || header.back() != "na")
        throw DataError("unexpected epochs CSV header in " + path.string());

    EpochSeries s;
    s.subject_id = subject_id;
    const auto n_cols = static_cast<Index>(header.size()) - 2;
    if (n_cols % 3 != 0) throw DataError("epochs CSV column count not a multiple of 3");
    for (Index c = 0; c < n_cols; c += 3) {
        const std::string& name = header[static_cast<std::size_t>(c) + 1];
        s.signals.push_back(signal_from_string(name.substr(0, name.find('_'))));
    }

    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    s.stats = Matrix::Constant(static_cast<Index>(rows.size()), n_cols,
                               std::numeric_limits<double>::quiet_NaN());
    s.na_mask.assign(rows.size(), false);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != header.size())
            throw DataError("ragged row in epochs CSV " + path.string());
        const double start = std::stod(rows[r][0]);
        if (r == 0) s.origin = start;
        if (r == 1) s.epoch_length = start - s.origin;
        const bool na = rows[r].back() == "1";
        s.na_mask[r] = na;
        if (na) continue;
        for (Index c = 0; c < n_cols; ++c)
            s.stats(static_cast<Index>(r), c) = std::stod(rows[r][static_cast<std::size_t>(c) + 1]);
    }
    return s;
}

void write_cutoffs_json(const fs::path& path, const std::string& subject_id,
                        const ScreeningOutcome& outcome) {
    json j;
    j["subject_id"] = subject_id;
    j["abnormal_fraction"] = outcome.abnormal_fraction;
    j["max_abnormal_fraction"] = outcome.max_abnormal_fraction;
    j["usable"] = outcome.usable;
    j["rules"] = json::array();
    for (const auto& r : outcome.rules) {
        j["rules"].push_back(
            {{"signal", to_string(r.variable.signal)},
             {"stat", to_string(r.variable.stat)},
             {"cutoff", r.cutoff},
             {"direction",
              r.direction == anomaly::CutoffDirection::LOWER_BOUND ? "lower_bound" : "upper_bound"},
             {"active", r.active},
             {"separation_ratio", r.separation_ratio}});
    }
    open_out(path) << j.dump(2) << '\n';
}

void write_hmm_model_json(const fs::path& path, const hmm::HmmModel& model, double selected_si) {
    json j;
    j["K"] = model.K;
    j["seed"] = model.seed;
    j["selected_si"] = selected_si;
    j["log_likelihood"] = model.log_likelihood;
    j["features"] = json::array();
    for (const auto& f : model.feature_ids)
        j["features"].push_back({{"signal", to_string(f.signal)}, {"stat", to_string(f.stat)}});
    const auto to_rows = [](const Matrix& m) {
        json rows = json::array();
        for (Index r = 0; r < m.rows(); ++r) {
            json row = json::array();
            for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            rows.push_back(row);
        }
        return rows;
    };
    j["means"] = to_rows(model.means);
    j["transition"] = to_rows(model.transition);
    j["covariances"] = json::array();
    for (const auto& cov : model.covariances) j["covariances"].push_back(to_rows(cov));
    j["initial"] = json::array();
    for (Index k = 0; k < model.initial.size(); ++k) j["initial"].push_back(model.initial(k));
    open_out(path) << j.dump(2) << '\n';
}

hmm::HmmModel read_hmm_model_json(const fs::path& path) {
    const json j = load_json(path);
    hmm::HmmModel m;
    m.K = j.at("K").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.log_likelihood = j.value("log_likelihood", 0.0);
    for (const auto& f : j.at("features"))
        m.feature_ids.push_back({signal_from_string(f.at("signal").get<std::string>()),
                                 stat_from_string(f.at("stat").get<std::string>())});
    const auto from_rows = [](const json& rows) {
        Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.at(0).size()));
        for (Index r = 0; r < m.rows(); ++r)
            for (Index c = 0; c < m.cols(); ++c)
                m(r, c) = rows.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
        return m;
    };
    m.means = from_rows(j.at("means"));
    m.transition = from_rows(j.at("transition"));
    for (const auto& cov : j.at("covariances")) m.covariances.push_back(from_rows(cov));
    m.initial.resize(static_cast<Index>(j.at("initial").size()));
    for (Index k = 0; k < m.initial.size(); ++k)
        m.initial(k) = j.at("initial").at(static_cast<std::size_t>(k)).get<double>();
    return m;
}

void write_timeline_csv(const fs::path& path, const EpochSeries& series,
                        const adaptive::LabeledTimeline& timeline) {
    auto out = open_out(path);
    out << "epoch_start,status,provenance,batch\n";
    for (Index j = 0; j < series.n_epochs(); ++j) {
        const auto i = static_cast<std::size_t>(j);
        out << format_double(series.epoch_start(j)) << ',' << to_string(timeline.status[i]) << ','
            << to_string(timeline.provenance[i]) << ',' << timeline.batch[i] << '\n';
    }
}

void write_audit_jsonl(const fs::path& path, const std::vector<adaptive::BatchAudit>& audits) {
    auto out = open_out(path);
    for (const auto& a : audits) {
        json j;
        j["batch"] = a.batch;
        j["t_start"] = a.t_start;
        j["t_end"] = a.t_end;
        j["skipped"] = a.skipped;
        j["fallback"] = a.fallback;
        j["chosen_window"] = a.chosen_window;
        j["n_sleep"] = a.n_sleep;
        j["n_wake"] = a.n_wake;
        j["candidates"] = json::array();
        for (const auto& c : a.candidates) {
            json cj;
            cj["window"] = c.window_seconds;
            cj["eligible"] = c.eligible;
            if (c.eligible) cj["si"] = c.si;
            j["candidates"].push_back(cj);
        }
        out << j.dump() << '\n';
    }
}

void write_sessions_csv(const fs::path& path, const std::string& subject_id,
                        const std::vector<sessions::Session>& session_list) {
    auto out = open_out(path);
    out << "subject,kind,onset,offset,assigned_day,is_night_sleep\n";
    for (const auto& s : session_list) {
        out << subject_id << ',' << (s.kind == 1 ? "sleep" : "wake") << ','
            << format_double(s.onset) << ',' << format_double(s.offset) << ',' << s.assigned_day
            << ',' << (s.is_night_sleep ? 1 : 0) << '\n';
    }
}

std::vector<sessions::Session> read_sessions_csv(const fs::path& path,
                                                 const std::string& subject_id) {
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<sessions::Session> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 6) throw DataError("ragged row in sessions CSV " + path.string());
        if (!subject_id.empty() && f[0] != subject_id) continue;
        sessions::Session s;
        s.kind = f[1] == "sleep" ? 1 : 0;
        s.onset = std::stod(f[2]);
        s.offset = std::stod(f[3]);
        s.assigned_day = std::stoi(f[4]);
        s.is_night_sleep = f[5] == "1";
        out.push_back(s);
    }
    return out;
}

void write_categories_csv(const fs::path& path, const std::string& subject_id,
                          const EpochSeries& series, const std::vector<Index>& excluded,
                          const std::vector<anomaly::ExcludedCategory>& categories) {
    auto out = open_out(path);
    out << "subject,epoch_start,category\n";
    for (std::size_t i = 0; i < excluded.size(); ++i)
        out << subject_id << ',' << format_double(series.epoch_start(excluded[i])) << ','
            << to_string(categories[i]) << '\n';
}

void write_category_counts_csv(const fs::path& path, const std::string& subject_id,
                               const std::vector<anomaly::ExcludedCategory>& categories) {
    int counts[4] = {0, 0, 0, 0};
    for (const auto c : categories) ++counts[static_cast<int>(c)];
    auto out = open_out(path);
    out << "subject,category,count\n";
    for (int c = 0; c < 4; ++c)
        out << subject_id << ',' << to_string(static_cast<anomaly::ExcludedCategory>(c)) << ','
            << counts[c] << '\n';
}

void write_features_csv(const fs::path& path, const features::FeatureTable& table) {
    auto out = open_out(path);
    out << "subject,day";
    for (const auto& name : features::feature_schema()) out << ',' << name;
    out << '\n';
    for (const auto& row : table.rows) {
        out << row.subject_id << ',' << row.day;
        for (std::size_t i = 0; i < row.values.size(); ++i) {
            out << ',';
            if (row.present[i]) out << format_double(row.values[i]);
        }
        out << '\n';
    }
}

features::FeatureTable read_features_csv(const fs::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty features CSV: " + path.string());
    const auto header = split_csv_line(line);
    const auto& schema = features::feature_schema();
    if (header.size() != schema.size() + 2)
        throw DataError("features CSV column count does not match the schema");

    features::FeatureTable t;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) throw DataError("ragged row in features CSV");
        features::FeatureRow row;
        row.subject_id = f[0];
        row.day = std::stoi(f[1]);
        row.values.assign(schema.size(), std::numeric_limits<double>::quiet_NaN());
        row.present.assign(schema.size(), false);
        for (std::size_t i = 0; i < schema.size(); ++i) {
            if (!f[i + 2].empty()) {
                row.values[i] = std::stod(f[i + 2]);
                row.present[i] = true;
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

OutcomeLabels read_labels_csv(const fs::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty labels file: " + path.string());
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "subject")
        throw DataError("labels CSV must start with `subject,<binary>[,<ordinal>]`");

    OutcomeLabels out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) throw DataError("ragged row in labels CSV");
        if (!f[1].empty()) out.binary[f[0]] = std::stoi(f[1]);
        if (f.size() > 2 && !f[2].empty()) out.ordinal[f[0]] = std::stoi(f[2]);
    }
    return out;
}

void write_ground_truth_csv(const fs::path& path, const synth::SimConfig& cfg,
                            const std::vector<synth::TruthState>& truth) {
    auto out = open_out(path);
    out << "epoch_start,state\n";
    for (std::size_t j = 0; j < truth.size(); ++j)
        out << format_double(static_cast<double>(j) * cfg.epoch_length) << ','
            << to_string(truth[j]) << '\n';
}

std::filesystem::path write_subject_dataset(const fs::path& dir, const synth::SimConfig& cfg,
                                            const synth::SubjectData& data) {
    fs::create_directories(dir);
    json manifest;
    manifest["subject_id"] = cfg.subject_id;
    manifest["origin"] = 0.0;
    manifest["signals"] = json::array();
    for (const auto& stream : data.streams) {
        std::string name = to_string(stream.signal);
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        const std::string file = name + ".csv";
        write_signal_csv(dir / file, stream);
        manifest["signals"].push_back({{"signal", to_string(stream.signal)},
                                       {"file", file},
                                       {"sampling_hz", stream.sampling_hz}});
    }
    const fs::path manifest_path = dir / "manifest.json";
    open_out(manifest_path) << manifest.dump(2) << '\n';
    write_ground_truth_csv(dir / "ground_truth.csv", cfg, data.truth);
    return manifest_path;
}

}  // namespace adasleep::io
