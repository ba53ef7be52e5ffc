#include "adasleep/synth.hpp"

#include <algorithm>
#include <cmath>

#include "adasleep/adaptive.hpp"
#include "adasleep/lda.hpp"

namespace adasleep::synth {

const char* to_string(TruthState s) {
    switch (s) {
        case TruthState::WAKE: return "wake";
        case TruthState::SLEEP: return "sleep";
        case TruthState::NW: return "NW";
        case TruthState::LOC: return "LOC";
        case TruthState::ACTIVE: return "ACTIVE";
    }
    return "?";
}

SimConfig default_sim_config() {
    SimConfig cfg;
    cfg.sleep[SignalId::HR] = {55.0, 3.0, 2.0, 0.0};
    cfg.sleep[SignalId::ACC] = {0.06, 0.030, 0.005, 0.25};
    cfg.sleep[SignalId::TEMP] = {34.2, 0.30, 0.30, 0.0};
    cfg.sleep[SignalId::EDA] = {0.30, 0.10, 0.05, 0.0};

    cfg.wake[SignalId::HR] = {61.0, 3.3, 2.0, 0.0};
    cfg.wake[SignalId::ACC] = {0.20, 0.045, 0.020, 0.25};
    cfg.wake[SignalId::TEMP] = {33.8, 0.35, 0.35, 0.0};
    cfg.wake[SignalId::EDA] = {0.50, 0.15, 0.08, 0.0};

    // device off the wrist: ambient temperature, still accelerometer,
    // erratic low heart rate
    cfg.nw[SignalId::HR] = {45.0, 10.0, 4.0, 0.0};
    cfg.nw[SignalId::ACC] = {0.004, 0.003, 0.001, 0.0};
    cfg.nw[SignalId::TEMP] = {22.0, 0.30, 0.20, 0.0};
    cfg.nw[SignalId::EDA] = {0.02, 0.01, 0.005, 0.0};

    // sensor lifted off the skin but still worn: low temperature, wake-like motion
    cfg.loc[SignalId::HR] = {63.0, 4.0, 2.0, 0.0};
    cfg.loc[SignalId::ACC] = {0.20, 0.045, 0.010, 0.0};
    cfg.loc[SignalId::TEMP] = {27.0, 0.50, 0.30, 0.0};
    cfg.loc[SignalId::EDA] = {0.10, 0.05, 0.02, 0.0};

    // vigorous activity: elevated heart rate and movement, normal temperature
    cfg.active[SignalId::HR] = {110.0, 6.0, 3.0, 0.0};
    cfg.active[SignalId::ACC] = {1.20, 0.60, 0.10, 0.0};
    cfg.active[SignalId::TEMP] = {33.6, 0.35, 0.20, 0.0};
    cfg.active[SignalId::EDA] = {0.90, 0.25, 0.10, 0.0};
    return cfg;
}

namespace {

bool in_sleep_block(const SimConfig& cfg, double t) {
    const double hours = t / 3600.0;
    for (const auto& [start_h, end_h] : cfg.sleep_blocks) {
        // the block repeats every day; check the two candidate repetitions
        for (int d : {static_cast<int>(std::floor((hours - start_h) / 24.0)),
                      static_cast<int>(std::floor((hours - start_h) / 24.0)) + 1}) {
            const double s = 24.0 * d + start_h;
            if (hours >= s && hours < s + (end_h - start_h)) return true;
        }
    }
    return false;
}

const Emission& emission_for(const SimConfig& cfg, TruthState st, SignalId sig) {
    const std::map<SignalId, Emission>* m = nullptr;
    switch (st) {
        case TruthState::SLEEP: m = &cfg.sleep; break;
        case TruthState::WAKE: m = &cfg.wake; break;
        case TruthState::NW: m = &cfg.nw; break;
        case TruthState::LOC: m = &cfg.loc; break;
        case TruthState::ACTIVE: m = &cfg.active; break;
    }
    const auto it = m->find(sig);
    if (it == m->end()) throw ConfigError(std::string("no emission configured for ") + to_string(sig));
    return it->second;
}

}  // namespace

SubjectData generate_subject(const SimConfig& cfg) {
    if (cfg.days < 1) throw ConfigError("generate_subject: days must be >= 1");
    if (!(cfg.epoch_length > 0.0)) throw ConfigError("generate_subject: epoch_length must be > 0");
    for (const auto& [sig, e] : cfg.sleep)
        if (!(e.sd > 0.0)) throw ConfigError("generate_subject: emission sd must be > 0");
    for (std::size_t i = 0; i < cfg.abnormal_segments.size(); ++i) {
        const auto& a = cfg.abnormal_segments[i];
        if (!(a.end > a.start)) throw ConfigError("generate_subject: empty abnormal segment");
        for (std::size_t j = i + 1; j < cfg.abnormal_segments.size(); ++j) {
            const auto& b = cfg.abnormal_segments[j];
            if (a.start < b.end && b.start < a.end)
                throw ConfigError("generate_subject: overlapping abnormal segments");
        }
    }

    const double total_seconds = cfg.days * 24.0 * 3600.0;
    const auto n_epochs = static_cast<Index>(std::round(total_seconds / cfg.epoch_length));

    SubjectData out;
    out.truth.reserve(static_cast<std::size_t>(n_epochs));
    for (Index j = 0; j < n_epochs; ++j) {
        const double mid = (static_cast<double>(j) + 0.5) * cfg.epoch_length;
        TruthState st = in_sleep_block(cfg, mid) ? TruthState::SLEEP : TruthState::WAKE;
        for (const auto& seg : cfg.abnormal_segments) {
            if (mid >= seg.start && mid < seg.end) {
                st = seg.kind;
                break;
            }
        }
        out.truth.push_back(st);
    }

    Rng rng(cfg.seed);
    for (const auto& [sig, hz] : cfg.sampling_hz) {
        if (!(hz > 0.0)) throw ConfigError("generate_subject: sampling rate must be > 0");
        RawStream stream;
        stream.signal = sig;
        stream.sampling_hz = hz;
        const auto per_epoch = static_cast<Index>(std::round(hz * cfg.epoch_length));
        stream.timestamps.reserve(static_cast<std::size_t>(n_epochs * per_epoch));
        stream.values.reserve(static_cast<std::size_t>(n_epochs * per_epoch));

        for (Index j = 0; j < n_epochs; ++j) {
            const TruthState st = out.truth[static_cast<std::size_t>(j)];
            const Emission& e = emission_for(cfg, st, sig);
            const int day = static_cast<int>(
                std::floor(static_cast<double>(j) * cfg.epoch_length / 86400.0));
            double drift = 0.0;
            if (st == TruthState::SLEEP) {
                const auto it = cfg.sleep_drift_per_day.find(sig);
                if (it != cfg.sleep_drift_per_day.end()) drift = day * it->second;
            } else if (st == TruthState::WAKE) {
                const auto it = cfg.wake_drift_per_day.find(sig);
                if (it != cfg.wake_drift_per_day.end()) drift = day * it->second;
            }
            const double offset = e.epoch_jitter_sd > 0.0 ? rng.normal(0.0, e.epoch_jitter_sd) : 0.0;
            const double factor = e.sd_log_jitter > 0.0 ? std::exp(rng.normal(0.0, e.sd_log_jitter)) : 1.0;
            const double mean = e.mean + drift + offset;
            const double sd = e.sd * factor;
            const double t0 = static_cast<double>(j) * cfg.epoch_length;
            for (Index s = 0; s < per_epoch; ++s) {
                stream.timestamps.push_back(t0 + static_cast<double>(s) / hz);
                stream.values.push_back(rng.normal(mean, sd));
            }
        }
        out.streams.push_back(std::move(stream));
    }
    return out;
}

Fig3Result fig3_experiment(double mu, int n_per_class, const std::vector<std::uint64_t>& seeds) {
    if (n_per_class < 2) throw ConfigError("fig3_experiment: need at least 2 samples per class");
    if (seeds.empty()) throw ConfigError("fig3_experiment: need at least one seed");

    Fig3Result out;
    for (std::uint64_t seed : seeds) {
        Rng rng(seed);
        const Index n = 2 * n_per_class;
        Matrix x(n, 2);
        std::vector<int> y(static_cast<std::size_t>(n));
        for (Index i = 0; i < n_per_class; ++i) {
            x(i, 0) = rng.normal();
            x(i, 1) = rng.normal();
            y[static_cast<std::size_t>(i)] = 0;
        }
        for (Index i = n_per_class; i < n; ++i) {
            x(i, 0) = mu + rng.normal();
            x(i, 1) = mu + rng.normal();
            y[static_cast<std::size_t>(i)] = 1;
        }
        const lda::LdaClassifier c = lda::fit_lda(x, y);
        out.si_projection.push_back(adaptive::separability_index(x, y, c.w));
        out.si_euclidean.push_back(adaptive::si_euclidean(x, y));
    }
    out.mean_si_projection = mean_of(out.si_projection);
    out.mean_si_euclidean = mean_of(out.si_euclidean);
    return out;
}

}  // namespace adasleep::synth
