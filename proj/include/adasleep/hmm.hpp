#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adasleep/epoch_series.hpp"

namespace adasleep::hmm {

// K-state Gaussian hidden Markov model over a subset of summary statistics.
struct HmmModel {
    int K = 0;
    std::vector<VariableId> feature_ids;
    Matrix means;                       // K x dim
    std::vector<Matrix> covariances;    // K symmetric positive-definite dim x dim
    Matrix transition;                  // K x K row-stochastic
    Vector initial;                     // K-simplex
    double log_likelihood = 0.0;        // final training log-likelihood
    std::vector<double> loglik_trace;   // per-EM-iteration log-likelihood
    std::uint64_t seed = 0;
};

struct ModelConfig {
    std::vector<VariableId> feature_ids;
    int K = 2;
};

// Baum-Welch on a single observation sequence (rows of obs). K-means
// initialized means, per-cluster covariances, uniform initial distribution,
// 0.9-diagonal transitions; 5 seeded restarts, best final likelihood kept.
// Covariances are floored by 1e-6 of the per-feature variance. Converges on
// relative log-likelihood change < 1e-6 or 500 iterations.
// Requires K >= 2 and obs.rows() >= 10*K*dim.
HmmModel fit_hmm(const Matrix& obs, int K, std::uint64_t seed);

// Scaled-forward total log-likelihood of the observation sequence.
double log_likelihood(const HmmModel& model, const Matrix& obs);

// Viterbi decoding of the jointly most probable state path; argmax ties break
// toward the lower state index.
std::vector<int> decode(const HmmModel& model, const Matrix& obs);

// Map latent states to sleep/wake: the single state with the lowest mean
// heart-rate component is sleep (1); with no HR feature, the lowest ACC SD
// mean; with neither, the lowest first-feature mean. Everything else is wake.
std::vector<int> derive_sleep_labels(const HmmModel& model, const std::vector<int>& states);

// Index of the sleep state under the same rule.
int sleep_state(const HmmModel& model);

struct SelectResult {
    HmmModel model;
    std::vector<Index> rows;    // usable epoch indices of the initial window
    std::vector<int> labels;    // derived sleep/wake labels aligned with rows
    double si = 0.0;            // SI of the labeled window under the fitted Fisher direction
    std::size_t config_index = 0;
};

// Fit every candidate configuration on the initial window of `clean`
// (epoch starts before initial_window_end), score each by the SI of its
// derived labels under the Fisher direction fitted to those labels, and keep
// the maximum. Ties break toward fewer features, then smaller K.
// Throws FittingError listing per-config causes when every config fails.
SelectResult select_model(const EpochSeries& clean,
                          double initial_window_end,
                          const std::vector<ModelConfig>& configs,
                          std::uint64_t seed);

}  // namespace adasleep::hmm
