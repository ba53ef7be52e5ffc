#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "adasleep/epoch_series.hpp"

namespace adasleep::synth {

// Ground-truth epoch states produced by the generator.
enum class TruthState { WAKE = 0, SLEEP = 1, NW = 2, LOC = 3, ACTIVE = 4 };

const char* to_string(TruthState s);

// Emission model for one signal in one state: samples within an epoch are
// N(mean + drift + epoch offset, sd * epoch factor), with the per-epoch
// offset ~ N(0, epoch_jitter_sd) and factor = exp(N(0, sd_log_jitter)).
struct Emission {
    double mean = 0.0;
    double sd = 1.0;
    double epoch_jitter_sd = 0.0;
    double sd_log_jitter = 0.0;
};

struct AbnormalSegment {
    double start = 0.0;  // seconds since origin
    double end = 0.0;
    TruthState kind = TruthState::NW;
};

struct SimConfig {
    std::string subject_id = "synthetic";
    int days = 7;
    double epoch_length = 60.0;
    // clock-hour sleep blocks repeated daily; end > 24 runs into the next morning
    std::vector<std::pair<double, double>> sleep_blocks = {{23.0, 31.0}};
    std::map<SignalId, double> sampling_hz = {{SignalId::ACC, 8.0},
                                              {SignalId::HR, 1.0},
                                              {SignalId::TEMP, 2.0},
                                              {SignalId::EDA, 2.0}};
    // emissions per state; NW/LOC/ACTIVE override sleep/wake entirely
    std::map<SignalId, Emission> sleep, wake, nw, loc, active;
    // additive per-day mean drift, accumulated as day_index * rate
    std::map<SignalId, double> sleep_drift_per_day, wake_drift_per_day;
    std::vector<AbnormalSegment> abnormal_segments;
    std::uint64_t seed = 1;
};

// Physiologically plausible defaults: clearly but not extremely separated
// sleep/wake emissions, ambient-temperature NW, low-TEMP LOC with wake-like
// motion, elevated-HR/ACC ACTIVE.
SimConfig default_sim_config();

struct SubjectData {
    std::vector<RawStream> streams;
    std::vector<TruthState> truth;  // one state per epoch of the generated grid
};

// Deterministic per seed. Throws ConfigError on overlapping abnormal
// segments. The truth sequence length equals the epoch grid the ingest stage
// produces for the same epoch length and origin 0.
SubjectData generate_subject(const SimConfig& cfg);

struct Fig3Result {
    double mean_si_projection = 0.0;
    double mean_si_euclidean = 0.0;
    std::vector<double> si_projection;  // per seed
    std::vector<double> si_euclidean;
};

// Two bivariate normal classes with unit variances and zero correlation,
// class 0 at the origin and class 1 at (mu, mu); SI under the fitted Fisher
// direction and under Euclidean distance, averaged over seeds.
Fig3Result fig3_experiment(double mu, int n_per_class, const std::vector<std::uint64_t>& seeds);

}  // namespace adasleep::synth
