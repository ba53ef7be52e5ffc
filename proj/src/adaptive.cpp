#include "adasleep/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace adasleep::adaptive {

const char* to_string(EpochStatus s) {
    switch (s) {
        case EpochStatus::SLEEP: return "sleep";
        case EpochStatus::WAKE: return "wake";
        case EpochStatus::ABNORMAL: return "abnormal";
        case EpochStatus::NA: return "na";
    }
    return "?";
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::HMM: return "hmm";
        case Provenance::LDA: return "lda";
        case Provenance::SMOOTHED: return "smoothed";
        case Provenance::NONE: return "none";
    }
    return "?";
}

namespace {

// Nearest neighbor of every sample on a 1-D axis, self excluded, distance
// ties broken toward the smallest sample index. Works through value groups so
// exact duplicates resolve the same way the O(n^2) rule would.
std::vector<Index> nearest_neighbors_1d(const std::vector<double>& z) {
    const auto n = static_cast<Index>(z.size());
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        const double za = z[static_cast<std::size_t>(a)], zb = z[static_cast<std::size_t>(b)];
        return za < zb || (za == zb && a < b);
    });

    // groups of equal value, each holding ascending sample indices
    std::vector<std::pair<double, std::vector<Index>>> groups;
    for (Index i : order) {
        const double v = z[static_cast<std::size_t>(i)];
        if (groups.empty() || groups.back().first != v) groups.push_back({v, {}});
        groups.back().second.push_back(i);
    }

    std::vector<Index> nn(static_cast<std::size_t>(n), -1);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& members = groups[g].second;
        for (Index i : members) {
            if (members.size() > 1) {
                // a duplicate sits at distance zero; earliest index wins
                nn[static_cast<std::size_t>(i)] = members[0] == i ? members[1] : members[0];
                continue;
            }
            const double dl = g > 0 ? groups[g].first - groups[g - 1].first
                                    : std::numeric_limits<double>::infinity();
            const double dr = g + 1 < groups.size() ? groups[g + 1].first - groups[g].first
                                                    : std::numeric_limits<double>::infinity();
            if (dl < dr) {
                nn[static_cast<std::size_t>(i)] = groups[g - 1].second[0];
            } else if (dr < dl) {
                nn[static_cast<std::size_t>(i)] = groups[g + 1].second[0];
            } else {
                nn[static_cast<std::size_t>(i)] =
                    std::min(groups[g - 1].second[0], groups[g + 1].second[0]);
            }
        }
    }
    return nn;
}

double agreement_fraction(const std::vector<int>& y, const std::vector<Index>& nn) {
    Index same = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        // (y + y_nn + 1) mod 2: 1 when the labels agree
        if ((y[i] + y[static_cast<std::size_t>(nn[i])] + 1) % 2 == 1) ++same;
    }
    return static_cast<double>(same) / static_cast<double>(y.size());
}

}  // namespace

double separability_index(const Matrix& x, const std::vector<int>& y, const Vector& w) {
    if (x.rows() < 2) throw DataError("separability_index: need at least 2 samples");
    if (static_cast<std::size_t>(x.rows()) != y.size())
        throw DataError("separability_index: label count mismatch");
    if (x.cols() != w.size()) throw DataError("separability_index: direction dimension mismatch");

    const Vector z = x * w;
    std::vector<double> zv(z.data(), z.data() + z.size());
    return agreement_fraction(y, nearest_neighbors_1d(zv));
}

double si_euclidean(const Matrix& x, const std::vector<int>& y) {
    const auto n = x.rows();
    if (n < 2) throw DataError("si_euclidean: need at least 2 samples");
    if (static_cast<std::size_t>(n) != y.size())
        throw DataError("si_euclidean: label count mismatch");

    std::vector<Index> nn(static_cast<std::size_t>(n), -1);
    for (Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        Index best_j = -1;
        for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = (x.row(i) - x.row(j)).squaredNorm();
            if (d < best) {  // strict: earlier index wins ties
                best = d;
                best_j = j;
            }
        }
        nn[static_cast<std::size_t>(i)] = best_j;
    }
    return agreement_fraction(y, nn);
}

std::vector<MarginalSiEntry> marginal_si_screen(const EpochSeries& series,
                                                const ClockWindow& rest_window,
                                                const ClockWindow& sleep_window) {
    std::vector<Index> rows;
    std::vector<int> labels;
    for (Index j : usable_epochs(series)) {
        const double hour = std::fmod((series.epoch_start(j) - series.origin) / 3600.0, 24.0);
        if (rest_window.contains(hour)) {
            rows.push_back(j);
            labels.push_back(0);
        } else if (sleep_window.contains(hour)) {
            rows.push_back(j);
            labels.push_back(1);
        }
    }
    const auto n_rest = std::count(labels.begin(), labels.end(), 0);
    const auto n_sleep = std::count(labels.begin(), labels.end(), 1);
    if (n_rest == 0) throw DataError("marginal_si_screen: resting window contains no usable epochs");
    if (n_sleep == 0) throw DataError("marginal_si_screen: sleeping window contains no usable epochs");

    const Vector w1 = Vector::Ones(1);
    std::vector<MarginalSiEntry> out;
    for (std::size_t si_idx = 0; si_idx < series.signals.size(); ++si_idx) {
        for (int st = 0; st < 3; ++st) {
            const VariableId var{series.signals[si_idx], static_cast<StatId>(st)};
            Matrix x = extract_columns(series, rows, {var});

            MarginalSiEntry e;
            e.variable = var;
            e.si = separability_index(x, labels, w1);

            // fraction of zero-distance pairs, via duplicate value counts
            std::vector<double> vals(x.data(), x.data() + x.rows());
            std::sort(vals.begin(), vals.end());
            double tied = 0.0;
            std::size_t run = 1;
            for (std::size_t i = 1; i <= vals.size(); ++i) {
                if (i < vals.size() && vals[i] == vals[i - 1]) {
                    ++run;
                } else {
                    tied += 0.5 * static_cast<double>(run) * static_cast<double>(run - 1);
                    run = 1;
                }
            }
            const double n = static_cast<double>(vals.size());
            e.zero_pair_fraction = tied / (0.5 * n * (n - 1.0));
            e.uninformative = e.zero_pair_fraction > 0.5;
            out.push_back(e);
        }
    }
    return out;
}

LabeledTimeline sequential_label(const EpochSeries& clean,
                                 const std::vector<VariableId>& features,
                                 const std::vector<Index>& init_rows,
                                 const std::vector<int>& init_labels,
                                 double initial_window_end,
                                 const SequencerConfig& cfg) {
    if (cfg.batch_seconds <= 0.0) throw ConfigError("sequential_label: batch length must be > 0");
    if (cfg.window_candidates.empty())
        throw ConfigError("sequential_label: no window candidates");
    for (std::size_t i = 1; i < cfg.window_candidates.size(); ++i)
        if (cfg.window_candidates[i] <= cfg.window_candidates[i - 1])
            throw ConfigError("sequential_label: window candidates must be strictly increasing");
    if (init_rows.size() != init_labels.size())
        throw ConfigError("sequential_label: init rows/labels size mismatch");

    const auto n = clean.n_epochs();
    LabeledTimeline tl;
    tl.status.assign(static_cast<std::size_t>(n), EpochStatus::NA);
    tl.provenance.assign(static_cast<std::size_t>(n), Provenance::NONE);
    tl.batch.assign(static_cast<std::size_t>(n), -1);

    std::vector<int> committed(static_cast<std::size_t>(n), -1);
    int init0 = 0, init1 = 0;
    for (std::size_t i = 0; i < init_rows.size(); ++i) {
        const Index r = init_rows[i];
        if (clean.epoch_start(r) >= initial_window_end)
            throw ConfigError("sequential_label: init row beyond the initial window end");
        committed[static_cast<std::size_t>(r)] = init_labels[i];
        tl.status[static_cast<std::size_t>(r)] =
            init_labels[i] == 1 ? EpochStatus::SLEEP : EpochStatus::WAKE;
        tl.provenance[static_cast<std::size_t>(r)] = Provenance::HMM;
        (init_labels[i] == 1 ? init1 : init0) += 1;
    }
    if (init0 == 0 || init1 == 0)
        throw FittingError(
            "sequential_label: initial segment has a single class; "
            "choose a different initial window end or HMM configuration");

    const auto dim = static_cast<int>(features.size());
    const int min_per_class = std::max(cfg.min_class_count, dim + 1);

    std::optional<lda::LdaClassifier> last_good;
    int batch_index = 0;
    for (double current = initial_window_end; current < clean.span_end();
         current += cfg.batch_seconds, ++batch_index) {
        BatchAudit audit;
        audit.batch = batch_index;
        audit.t_start = current;
        audit.t_end = current + cfg.batch_seconds;

        const std::vector<Index> test_rows =
            usable_epochs(clean, current, current + cfg.batch_seconds);
        if (test_rows.empty()) {
            audit.skipped = true;
            tl.audits.push_back(std::move(audit));
            continue;
        }
        const Matrix x_test = extract_columns(clean, test_rows, features);

        struct Candidate {
            lda::LdaClassifier classifier;
            std::vector<int> predictions;
            double si = 0.0;
        };
        std::optional<Candidate> best;
        double best_si = -1.0;

        for (double d : cfg.window_candidates) {
            WindowCandidateAudit ca;
            ca.window_seconds = d;

            std::vector<Index> train_rows;
            std::vector<int> train_labels;
            for (Index r : usable_epochs(clean, current - d, current)) {
                const int lab = committed[static_cast<std::size_t>(r)];
                if (lab >= 0) {
                    train_rows.push_back(r);
                    train_labels.push_back(lab);
                }
            }
            const auto n1 = std::count(train_labels.begin(), train_labels.end(), 1);
            const auto n0 = static_cast<long>(train_labels.size()) - n1;
            if (n0 < min_per_class || n1 < min_per_class) {
                audit.candidates.push_back(ca);
                continue;
            }

            try {
                const Matrix x_train = extract_columns(clean, train_rows, features);
                Candidate cand;
                cand.classifier = lda::fit_lda(x_train, train_labels, cfg.gamma);
                cand.predictions.reserve(test_rows.size());
                for (Index i = 0; i < x_test.rows(); ++i)
                    cand.predictions.push_back(
                        lda::classify(cand.classifier, x_test.row(i).transpose()));

                Matrix joint(x_train.rows() + x_test.rows(), x_train.cols());
                joint << x_train, x_test;
                std::vector<int> joint_labels = train_labels;
                joint_labels.insert(joint_labels.end(), cand.predictions.begin(),
                                    cand.predictions.end());
                cand.si = separability_index(joint, joint_labels, cand.classifier.w);

                ca.eligible = true;
                ca.si = cand.si;
                // ties go to the larger window, so >= while scanning ascending
                if (cand.si >= best_si) {
                    best_si = cand.si;
                    best = std::move(cand);
                    audit.chosen_window = d;
                }
            } catch (const FittingError&) {
                // single-class degeneracies etc: window dropped from candidacy
            }
            audit.candidates.push_back(ca);
        }

        std::vector<int> predictions;
        if (best) {
            predictions = best->predictions;
            last_good = best->classifier;
        } else {
            if (!last_good)
                throw FittingError(
                    "sequential_label: no eligible training window and no previous classifier");
            audit.fallback = true;
            audit.chosen_window = 0.0;
            predictions.reserve(test_rows.size());
            for (Index i = 0; i < x_test.rows(); ++i)
                predictions.push_back(lda::classify(*last_good, x_test.row(i).transpose()));
        }

        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            const Index r = test_rows[i];
            committed[static_cast<std::size_t>(r)] = predictions[i];
            tl.status[static_cast<std::size_t>(r)] =
                predictions[i] == 1 ? EpochStatus::SLEEP : EpochStatus::WAKE;
            tl.provenance[static_cast<std::size_t>(r)] = Provenance::LDA;
            tl.batch[static_cast<std::size_t>(r)] = batch_index;
            (predictions[i] == 1 ? audit.n_sleep : audit.n_wake) += 1;
        }
        tl.audits.push_back(std::move(audit));
    }

    return tl;
}

}  // namespace adasleep::adaptive
