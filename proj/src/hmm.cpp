#include "adasleep/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "adasleep/adaptive.hpp"
#include "adasleep/lda.hpp"

namespace adasleep::hmm {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kRelTol = 1e-6;
constexpr int kRestarts = 5;

struct GaussianState {
    Vector mean;
    Eigen::LLT<Matrix> llt;
    double log_norm = 0.0;  // -0.5*(d*log(2pi) + log|Sigma|)
    bool ok = false;
};

GaussianState prepare_state(const Vector& mean, const Matrix& cov) {
    GaussianState g;
    g.mean = mean;
    g.llt.compute(cov);
    if (g.llt.info() != Eigen::Success) return g;
    double log_det = 0.0;
    const auto& l = g.llt.matrixLLT();
    for (Index i = 0; i < cov.rows(); ++i) {
        if (!(l(i, i) > 0.0)) return g;
        log_det += 2.0 * std::log(l(i, i));
    }
    g.log_norm = -0.5 * (static_cast<double>(cov.rows()) * std::log(2.0 * M_PI) + log_det);
    g.ok = true;
    return g;
}

double log_density(const GaussianState& g, const Vector& x) {
    const Vector d = x - g.mean;
    const Vector s = g.llt.matrixL().solve(d);
    return g.log_norm - 0.5 * s.squaredNorm();
}

// log emission densities, rows = time, cols = state
Matrix emission_log_probs(const HmmModel& m, const Matrix& obs) {
    std::vector<GaussianState> states;
    states.reserve(static_cast<std::size_t>(m.K));
    for (int k = 0; k < m.K; ++k) {
        GaussianState g = prepare_state(m.means.row(k).transpose(),
                                        m.covariances[static_cast<std::size_t>(k)]);
        if (!g.ok) throw FittingError("hmm: covariance not positive-definite");
        states.push_back(std::move(g));
    }
    Matrix out(obs.rows(), m.K);
    for (Index t = 0; t < obs.rows(); ++t)
        for (int k = 0; k < m.K; ++k)
            out(t, k) = log_density(states[static_cast<std::size_t>(k)], obs.row(t).transpose());
    return out;
}

struct ForwardBackward {
    Matrix alpha;          // scaled forward variables
    Matrix beta;           // scaled backward variables
    Vector scale;          // per-step normalizers
    double log_likelihood = 0.0;
};

ForwardBackward forward_backward(const HmmModel& m, const Matrix& log_b) {
    const auto T = log_b.rows();
    const int K = m.K;

    // shift each row to its max before exponentiating
    Matrix b(T, K);
    Vector row_shift(T);
    for (Index t = 0; t < T; ++t) {
        const double mx = log_b.row(t).maxCoeff();
        row_shift(t) = mx;
        for (int k = 0; k < K; ++k) b(t, k) = std::exp(log_b(t, k) - mx);
    }

    ForwardBackward fb;
    fb.alpha.resize(T, K);
    fb.beta.resize(T, K);
    fb.scale.resize(T);

    fb.alpha.row(0) = (m.initial.transpose().array() * b.row(0).array()).matrix();
    fb.scale(0) = fb.alpha.row(0).sum();
    if (!(fb.scale(0) > 0.0) || !std::isfinite(fb.scale(0)))
        throw FittingError("hmm: forward pass underflow");
    fb.alpha.row(0) /= fb.scale(0);
    for (Index t = 1; t < T; ++t) {
        fb.alpha.row(t) =
            ((fb.alpha.row(t - 1) * m.transition).array() * b.row(t).array()).matrix();
        fb.scale(t) = fb.alpha.row(t).sum();
        if (!(fb.scale(t) > 0.0) || !std::isfinite(fb.scale(t)))
            throw FittingError("hmm: forward pass underflow");
        fb.alpha.row(t) /= fb.scale(t);
    }

    fb.beta.row(T - 1).setOnes();
    for (Index t = T - 2; t >= 0; --t) {
        fb.beta.row(t) =
            (m.transition * (b.row(t + 1).array() * fb.beta.row(t + 1).array()).matrix().transpose())
                .transpose();
        fb.beta.row(t) /= fb.scale(t + 1);
    }

    fb.log_likelihood = fb.scale.array().log().sum() + row_shift.sum();
    return fb;
}

// plain multivariate k-means for EM initialization
std::vector<int> kmeans_rows(const Matrix& obs, int k, Rng& rng) {
    const auto n = obs.rows();
    std::vector<Index> centers;
    centers.push_back(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
    while (static_cast<int>(centers.size()) < k) {
        double best_d = -1.0;
        Index best_i = 0;
        for (Index i = 0; i < n; ++i) {
            double d = std::numeric_limits<double>::infinity();
            for (Index c : centers) d = std::min(d, (obs.row(i) - obs.row(c)).squaredNorm());
            if (d > best_d) {
                best_d = d;
                best_i = i;
            }
        }
        centers.push_back(best_i);
    }

    Matrix mu(k, obs.cols());
    for (int c = 0; c < k; ++c) mu.row(c) = obs.row(centers[static_cast<std::size_t>(c)]);

    std::vector<int> assign(static_cast<std::size_t>(n), 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (Index i = 0; i < n; ++i) {
            int best = 0;
            double bd = (obs.row(i) - mu.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                const double d = (obs.row(i) - mu.row(c)).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (assign[static_cast<std::size_t>(i)] != best) {
                assign[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        Matrix sum = Matrix::Zero(k, obs.cols());
        std::vector<int> cnt(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            sum.row(assign[static_cast<std::size_t>(i)]) += obs.row(i);
            ++cnt[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
        }
        for (int c = 0; c < k; ++c)
            if (cnt[static_cast<std::size_t>(c)] > 0)
                mu.row(c) = sum.row(c) / cnt[static_cast<std::size_t>(c)];
    }
    return assign;
}

HmmModel run_em(const Matrix& obs, int K, std::uint64_t restart_seed, const Vector& cov_floor) {
    const auto T = obs.rows();
    const auto dim = obs.cols();
    Rng rng(restart_seed);

    HmmModel m;
    m.K = K;
    m.means.resize(K, dim);
    m.covariances.assign(static_cast<std::size_t>(K), Matrix::Zero(dim, dim));
    m.initial = Vector::Constant(K, 1.0 / K);
    m.transition = Matrix::Constant(K, K, 0.1 / std::max(1, K - 1));
    m.transition.diagonal().setConstant(0.9);

    const std::vector<int> assign = kmeans_rows(obs, K, rng);
    std::vector<int> cnt(static_cast<std::size_t>(K), 0);
    for (int a : assign) ++cnt[static_cast<std::size_t>(a)];
    for (int k = 0; k < K; ++k)
        if (cnt[static_cast<std::size_t>(k)] == 0)
            throw FittingError("hmm: empty initialization cluster");
    Matrix sum = Matrix::Zero(K, dim);
    for (Index t = 0; t < T; ++t) sum.row(assign[static_cast<std::size_t>(t)]) += obs.row(t);
    for (int k = 0; k < K; ++k) m.means.row(k) = sum.row(k) / cnt[static_cast<std::size_t>(k)];
    for (Index t = 0; t < T; ++t) {
        const int k = assign[static_cast<std::size_t>(t)];
        const Vector d = obs.row(t).transpose() - m.means.row(k).transpose();
        m.covariances[static_cast<std::size_t>(k)].noalias() += d * d.transpose();
    }
    for (int k = 0; k < K; ++k) {
        m.covariances[static_cast<std::size_t>(k)] /= std::max(1, cnt[static_cast<std::size_t>(k)] - 1);
        m.covariances[static_cast<std::size_t>(k)] += cov_floor.asDiagonal();
    }

    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        const Matrix log_b = emission_log_probs(m, obs);
        const ForwardBackward fb = forward_backward(m, log_b);
        if (!std::isfinite(fb.log_likelihood)) throw FittingError("hmm: non-finite likelihood");
        m.loglik_trace.push_back(fb.log_likelihood);

        Matrix gamma(T, K);
        for (Index t = 0; t < T; ++t) {
            gamma.row(t) = (fb.alpha.row(t).array() * fb.beta.row(t).array()).matrix();
            gamma.row(t) /= gamma.row(t).sum();
        }

        Matrix b(T, K);
        for (Index t = 0; t < T; ++t) {
            const double mx = log_b.row(t).maxCoeff();
            for (int k = 0; k < K; ++k) b(t, k) = std::exp(log_b(t, k) - mx);
        }
        Matrix xi_sum = Matrix::Zero(K, K);
        for (Index t = 0; t + 1 < T; ++t) {
            Matrix xi(K, K);
            for (int i = 0; i < K; ++i)
                for (int j = 0; j < K; ++j)
                    xi(i, j) = fb.alpha(t, i) * m.transition(i, j) * b(t + 1, j) *
                               fb.beta(t + 1, j);
            xi_sum += xi / xi.sum();
        }

        m.initial = gamma.row(0).transpose();
        for (int i = 0; i < K; ++i) {
            const double row_sum = xi_sum.row(i).sum();
            if (row_sum > 0.0) m.transition.row(i) = xi_sum.row(i) / row_sum;
        }

        const Vector occupancy = gamma.colwise().sum().transpose();
        for (int k = 0; k < K; ++k) {
            if (!(occupancy(k) > 0.0)) throw FittingError("hmm: vanishing state occupancy");
            m.means.row(k) = (gamma.col(k).transpose() * obs) / occupancy(k);
            Matrix cov = Matrix::Zero(dim, dim);
            for (Index t = 0; t < T; ++t) {
                const Vector d = obs.row(t).transpose() - m.means.row(k).transpose();
                cov.noalias() += gamma(t, k) * (d * d.transpose());
            }
            cov /= occupancy(k);
            cov = 0.5 * (cov + cov.transpose());
            cov += cov_floor.asDiagonal();
            m.covariances[static_cast<std::size_t>(k)] = cov;
        }

        if (iter > 0 && fb.log_likelihood - prev_ll <
                            kRelTol * std::max(1.0, std::abs(prev_ll))) {
            prev_ll = fb.log_likelihood;
            break;
        }
        prev_ll = fb.log_likelihood;
    }
    m.log_likelihood = prev_ll;

    // exact stochastic normalization
    m.initial /= m.initial.sum();
    for (int i = 0; i < K; ++i) m.transition.row(i) /= m.transition.row(i).sum();
    return m;
}

Index hr_component(const std::vector<VariableId>& features) {
    for (StatId st : {StatId::MED, StatId::MEAN, StatId::SD})
        for (std::size_t i = 0; i < features.size(); ++i)
            if (features[i].signal == SignalId::HR && features[i].stat == st)
                return static_cast<Index>(i);
    for (std::size_t i = 0; i < features.size(); ++i)
        if (features[i].signal == SignalId::ACC && features[i].stat == StatId::SD)
            return static_cast<Index>(i);
    return 0;
}

}  // namespace

HmmModel fit_hmm(const Matrix& obs, int K, std::uint64_t seed) {
    if (K < 2) throw ConfigError("fit_hmm: K must be >= 2");
    const auto dim = obs.cols();
    if (obs.rows() < 10 * static_cast<Index>(K) * dim)
        throw DataError("fit_hmm: need at least 10*K*dim observation rows, have " +
                        std::to_string(obs.rows()));
    if (!obs.allFinite()) throw DataError("fit_hmm: non-finite observations");

    Vector feature_var(dim);
    const Vector col_mean = obs.colwise().mean().transpose();
    for (Index c = 0; c < dim; ++c)
        feature_var(c) = (obs.col(c).array() - col_mean(c)).square().sum() /
                         std::max<double>(1.0, static_cast<double>(obs.rows() - 1));
    const Vector cov_floor = 1e-6 * feature_var;

    HmmModel best;
    bool have = false;
    std::string first_error;
    for (int r = 0; r < kRestarts; ++r) {
        try {
            HmmModel m = run_em(obs, K, seed * 2654435761ULL + static_cast<std::uint64_t>(r),
                                cov_floor);
            if (!have || m.log_likelihood > best.log_likelihood) {
                best = std::move(m);
                have = true;
            }
        } catch (const FittingError& e) {
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!have) throw FittingError("fit_hmm: all restarts failed (" + first_error + ")");
    best.seed = seed;
    return best;
}

double log_likelihood(const HmmModel& model, const Matrix& obs) {
    if (obs.cols() != model.means.cols()) throw DataError("log_likelihood: dimension mismatch");
    return forward_backward(model, emission_log_probs(model, obs)).log_likelihood;
}

std::vector<int> decode(const HmmModel& model, const Matrix& obs) {
    if (obs.cols() != model.means.cols()) throw DataError("decode: dimension mismatch");
    const auto T = obs.rows();
    const int K = model.K;
    const Matrix log_b = emission_log_probs(model, obs);

    Matrix delta(T, K);
    Eigen::MatrixXi psi(T, K);
    Matrix log_a(K, K);
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
            log_a(i, j) = std::log(std::max(model.transition(i, j), 1e-300));

    for (int k = 0; k < K; ++k)
        delta(0, k) = std::log(std::max(model.initial(k), 1e-300)) + log_b(0, k);
    for (Index t = 1; t < T; ++t) {
        for (int j = 0; j < K; ++j) {
            int arg = 0;
            double best = delta(t - 1, 0) + log_a(0, j);
            for (int i = 1; i < K; ++i) {
                const double v = delta(t - 1, i) + log_a(i, j);
                if (v > best) {  // strict: ties stay at the lower index
                    best = v;
                    arg = i;
                }
            }
            delta(t, j) = best + log_b(t, j);
            psi(t, j) = arg;
        }
    }

    std::vector<int> path(static_cast<std::size_t>(T));
    int last = 0;
    double best = delta(T - 1, 0);
    for (int k = 1; k < K; ++k) {
        if (delta(T - 1, k) > best) {
            best = delta(T - 1, k);
            last = k;
        }
    }
    path[static_cast<std::size_t>(T - 1)] = last;
    for (Index t = T - 2; t >= 0; --t)
        path[static_cast<std::size_t>(t)] =
            psi(t + 1, path[static_cast<std::size_t>(t + 1)]);
    return path;
}

int sleep_state(const HmmModel& model) {
    const Index comp = hr_component(model.feature_ids);
    int state = 0;
    for (int k = 1; k < model.K; ++k)
        if (model.means(k, comp) < model.means(state, comp)) state = k;
    return state;
}

std::vector<int> derive_sleep_labels(const HmmModel& model, const std::vector<int>& states) {
    const int sleep = sleep_state(model);
    std::vector<int> y(states.size());
    for (std::size_t t = 0; t < states.size(); ++t) y[t] = states[t] == sleep ? 1 : 0;
    return y;
}

SelectResult select_model(const EpochSeries& clean,
                          double initial_window_end,
                          const std::vector<ModelConfig>& configs,
                          std::uint64_t seed) {
    if (configs.empty()) throw ConfigError("select_model: empty configuration pool");

    const std::vector<Index> rows =
        usable_epochs(clean, -std::numeric_limits<double>::infinity(), initial_window_end);

    std::optional<SelectResult> best;
    std::string failures;
    for (std::size_t ci = 0; ci < configs.size(); ++ci) {
        const auto& cfg = configs[ci];
        try {
            if (cfg.feature_ids.empty()) throw ConfigError("empty feature set");
            const Matrix obs = extract_columns(clean, rows, cfg.feature_ids);
            HmmModel m = fit_hmm(obs, cfg.K, seed + ci);
            m.feature_ids = cfg.feature_ids;
            const std::vector<int> states = decode(m, obs);
            const std::vector<int> labels = derive_sleep_labels(m, states);

            const lda::LdaClassifier c = lda::fit_lda(obs, labels);
            const double si = adaptive::separability_index(obs, labels, c.w);

            const bool better =
                !best || si > best->si ||
                (si == best->si &&
                 (cfg.feature_ids.size() < best->model.feature_ids.size() ||
                  (cfg.feature_ids.size() == best->model.feature_ids.size() &&
                   cfg.K < best->model.K)));
            if (better) {
                SelectResult r;
                r.model = std::move(m);
                r.rows = rows;
                r.labels = labels;
                r.si = si;
                r.config_index = ci;
                best = std::move(r);
            }
        } catch (const std::exception& e) {
            failures += "config " + std::to_string(ci) + ": " + e.what() + "; ";
        }
    }
    if (!best)
        throw FittingError("select_model: all configurations failed (" + failures + ")");
    return *best;
}

}  // namespace adasleep::hmm
