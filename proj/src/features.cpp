#include "adasleep/features.hpp"

#include <cmath>
#include <limits>

namespace adasleep::features {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLogFloor = 1e-6;

const std::vector<SignalId> kSignals = {SignalId::ACC, SignalId::HR, SignalId::TEMP,
                                        SignalId::EDA};
const std::vector<StatId> kStats = {StatId::MEAN, StatId::MED, StatId::SD};

std::vector<std::string> build_schema() {
    std::vector<std::string> names;
    names.reserve(196);
    names.push_back("sleep.duration.total");
    names.push_back("sleep.duration.night");
    names.push_back("sleep.onset");
    names.push_back("sleep.offset");
    for (const char* kind : {"sleep", "wake"}) {
        for (SignalId sig : kSignals) {
            for (StatId st : kStats) {
                const std::string base =
                    std::string(kind) + "." + to_string(VariableId{sig, st});
                names.push_back(base + ".mean");
                names.push_back(base + ".median");
                names.push_back(base + ".sd");
                names.push_back(base + ".lin.coef0");
                names.push_back(base + ".lin.coef1");
                names.push_back(base + ".quad.coef0");
                names.push_back(base + ".quad.coef1");
                names.push_back(base + ".quad.coef2");
            }
        }
    }
    return names;
}

// least-squares polynomial fit of y against t, degree+1 coefficients
// (intercept first); empty when the design is rank deficient
std::vector<double> poly_fit(const std::vector<double>& t, const std::vector<double>& y,
                             int degree) {
    const auto n = static_cast<Index>(t.size());
    const Index cols = degree + 1;
    if (n < cols) return {};
    Matrix design(n, cols);
    for (Index i = 0; i < n; ++i) {
        double p = 1.0;
        for (Index c = 0; c < cols; ++c) {
            design(i, c) = p;
            p *= t[static_cast<std::size_t>(i)];
        }
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < cols) return {};
    const Vector b = qr.solve(Eigen::Map<const Vector>(y.data(), n));
    return std::vector<double>(b.data(), b.data() + b.size());
}

}  // namespace

const std::vector<std::string>& feature_schema() {
    static const std::vector<std::string> schema = build_schema();
    return schema;
}

bool is_log_transformed(const std::string& name) {
    return name.find("_SD") != std::string::npos || name.find(".sd") != std::string::npos;
}

FeatureRow extract_features(const std::vector<sessions::Session>& session_list,
                            const EpochSeries& clean,
                            int day,
                            double day_origin) {
    const auto& schema = feature_schema();
    FeatureRow row;
    row.subject_id = clean.subject_id;
    row.day = day;
    row.values.assign(schema.size(), kNaN);
    row.present.assign(schema.size(), false);

    std::size_t idx = 0;
    const auto put = [&](double v) {
        row.values[idx] = v;
        row.present[idx] = std::isfinite(v);
        ++idx;
    };
    const auto put_missing = [&] {
        ++idx;
    };

    std::vector<const sessions::Session*> sleep_sessions, wake_sessions;
    const sessions::Session* night = nullptr;
    for (const auto& s : session_list) {
        if (s.assigned_day != day) continue;
        if (s.kind == 1) {
            sleep_sessions.push_back(&s);
            if (s.is_night_sleep) night = &s;
        } else {
            wake_sessions.push_back(&s);
        }
    }

    // durations (hours) and night-sleep boundary clock times relative to the
    // start of the assigned day; offset may run past 24 into the next morning
    if (sleep_sessions.empty()) {
        put_missing();
    } else {
        double total = 0.0;
        for (const auto* s : sleep_sessions) total += s->duration();
        put(total / 3600.0);
    }
    if (night == nullptr) {
        put_missing();
        put_missing();
        put_missing();
    } else {
        const double day_start = day_origin + 24.0 * 3600.0 * day;
        put(night->duration() / 3600.0);
        put((night->onset - day_start) / 3600.0);
        put((night->offset - day_start) / 3600.0);
    }

    for (const auto* group : {&sleep_sessions, &wake_sessions}) {
        for (SignalId sig : kSignals) {
            for (StatId st : kStats) {
                std::vector<double> values, hours;
                if (clean.has({sig, st})) {
                    const Index c = clean.col(sig, st);
                    for (const auto* s : *group) {
                        for (Index j = 0; j < clean.n_epochs(); ++j) {
                            if (clean.na_mask[static_cast<std::size_t>(j)]) continue;
                            const double t = clean.epoch_start(j);
                            if (t < s->onset || t >= s->offset) continue;
                            values.push_back(clean.stats(j, c));
                            hours.push_back((t - s->onset) / 3600.0);
                        }
                    }
                }
                if (values.empty()) {
                    for (int k = 0; k < 8; ++k) put_missing();
                    continue;
                }
                put(mean_of(values));
                put(median(values));
                put(sample_sd(values));
                const auto lin = poly_fit(hours, values, 1);
                if (lin.empty()) {
                    put_missing();
                    put_missing();
                } else {
                    put(lin[0]);
                    put(lin[1]);
                }
                const auto quad = poly_fit(hours, values, 2);
                if (quad.empty()) {
                    put_missing();
                    put_missing();
                    put_missing();
                } else {
                    put(quad[0]);
                    put(quad[1]);
                    put(quad[2]);
                }
            }
        }
    }

    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (row.present[i] && is_log_transformed(schema[i]))
            row.values[i] = std::log(std::max(row.values[i], kLogFloor));
    }
    return row;
}

}  // namespace adasleep::features
