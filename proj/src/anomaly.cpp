#include "adasleep/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace adasleep::anomaly {

const char* to_string(ExcludedCategory c) {
    switch (c) {
        case ExcludedCategory::NW: return "NW";
        case ExcludedCategory::LOC: return "LOC";
        case ExcludedCategory::ACTIVE: return "ACTIVE";
        case ExcludedCategory::OTHER: return "OTHER";
    }
    return "?";
}

namespace {

struct LloydResult {
    std::vector<double> centroids;  // unordered
    std::vector<int> assignments;
    double wcss = 0.0;
};

LloydResult lloyd_1d(const std::vector<double>& values, int k, Rng& rng) {
    const std::size_t n = values.size();
    std::vector<double> centroids;
    centroids.reserve(static_cast<std::size_t>(k));

    // farthest-point (greedy) seeding from a random start
    centroids.push_back(values[rng.below(n)]);
    while (static_cast<int>(centroids.size()) < k) {
        double best_d = -1.0;
        double best_v = centroids[0];
        for (double v : values) {
            double d = std::numeric_limits<double>::infinity();
            for (double c : centroids) d = std::min(d, std::abs(v - c));
            if (d > best_d) {
                best_d = d;
                best_v = v;
            }
        }
        centroids.push_back(best_v);
    }

    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < 200; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double bd = std::abs(values[i] - centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = std::abs(values[i] - centroids[static_cast<std::size_t>(c)]);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
        std::vector<int> cnt(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            sum[static_cast<std::size_t>(assign[i])] += values[i];
            ++cnt[static_cast<std::size_t>(assign[i])];
        }
        for (int c = 0; c < k; ++c) {
            if (cnt[static_cast<std::size_t>(c)] > 0)
                centroids[static_cast<std::size_t>(c)] =
                    sum[static_cast<std::size_t>(c)] / cnt[static_cast<std::size_t>(c)];
        }
        if (!changed && iter > 0) break;
    }

    LloydResult r;
    r.centroids = centroids;
    r.assignments = assign;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = values[i] - centroids[static_cast<std::size_t>(assign[i])];
        r.wcss += d * d;
    }
    return r;
}

}  // namespace

ClusterSummary kmeans_1d(const std::vector<double>& values, int k, std::uint64_t seed) {
    if (k < 1) throw ConfigError("kmeans_1d: k must be >= 1");
    std::set<double> distinct(values.begin(), values.end());
    if (static_cast<int>(distinct.size()) < k)
        throw DataError("kmeans_1d: fewer distinct values than clusters");

    LloydResult best;
    bool have = false;
    for (int restart = 0; restart < 20; ++restart) {
        Rng rng(seed * 1000003ULL + static_cast<std::uint64_t>(restart));
        LloydResult r = lloyd_1d(values, k, rng);
        if (!have || r.wcss < best.wcss) {
            best = std::move(r);
            have = true;
        }
    }

    // reorder clusters by descending centroid
    std::vector<int> order(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) order[static_cast<std::size_t>(c)] = c;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return best.centroids[static_cast<std::size_t>(a)] > best.centroids[static_cast<std::size_t>(b)];
    });
    std::vector<int> rank(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;

    ClusterSummary out;
    out.wcss = best.wcss;
    out.centroids.resize(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r)
        out.centroids[static_cast<std::size_t>(r)] =
            best.centroids[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
    out.assignments.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        out.assignments[i] = rank[static_cast<std::size_t>(best.assignments[i])];
    return out;
}

CutoffRule compute_cutoff(const std::vector<double>& values,
                          std::uint64_t seed,
                          AbnormalSide side,
                          VariableId variable) {
    ClusterSummary cs = kmeans_1d(values, 3, seed);
    const double mu1 = cs.centroids[0], mu2 = cs.centroids[1], mu3 = cs.centroids[2];

    // Normal set by the inter-centroid gap rule, mirrored for variables whose
    // abnormal tail is high: the middle cluster joins the normal side only
    // when it sits closer to the normal extreme than to the abnormal one.
    std::vector<bool> is_normal_cluster(3, false);
    if (side == AbnormalSide::LOW) {
        is_normal_cluster[0] = true;
        is_normal_cluster[1] = std::abs(mu2 - mu1) < std::abs(mu3 - mu2);
    } else {
        is_normal_cluster[2] = true;
        is_normal_cluster[1] = std::abs(mu2 - mu3) < std::abs(mu1 - mu2);
    }

    std::vector<double> normal_values, abnormal_values;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (is_normal_cluster[static_cast<std::size_t>(cs.assignments[i])]) {
            cs.normal_set.push_back(static_cast<int>(i));
            normal_values.push_back(values[i]);
        } else {
            abnormal_values.push_back(values[i]);
        }
    }
    const double mu_nor = mean_of(normal_values);
    const double mu_abn = mean_of(abnormal_values);

    CutoffRule rule;
    rule.variable = variable;
    if (mu_nor > mu_abn) {
        rule.direction = CutoffDirection::LOWER_BOUND;
        rule.cutoff = quantile(normal_values, 0.025);
    } else {
        rule.direction = CutoffDirection::UPPER_BOUND;
        rule.cutoff = quantile(normal_values, 0.975);
    }

    // separation guard: the gap between the normal set and the adjacent
    // abnormal cluster, relative to the flanking within-cluster spread
    const int boundary = is_normal_cluster[1] ? 1 : (side == AbnormalSide::LOW ? 0 : 2);
    const int adjacent = side == AbnormalSide::LOW ? boundary + 1 : boundary - 1;
    std::vector<double> flank_a, flank_b;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (cs.assignments[i] == boundary) flank_a.push_back(values[i]);
        if (cs.assignments[i] == adjacent) flank_b.push_back(values[i]);
    }
    const double spread = std::max({sample_sd(flank_a), sample_sd(flank_b), 1e-12});
    const double gap = std::abs(cs.centroids[static_cast<std::size_t>(boundary)] -
                                cs.centroids[static_cast<std::size_t>(adjacent)]);
    rule.separation_ratio = gap / spread;
    rule.active = rule.separation_ratio >= kMinSeparationRatio;
    return rule;
}

FilterResult filter_epochs(const EpochSeries& series, const std::vector<CutoffRule>& rules) {
    for (const auto& r : rules) {
        if (!series.has(r.variable))
            throw ConfigError("filter_epochs: rule variable " + to_string(r.variable) +
                              " absent from series");
    }

    FilterResult out;
    out.clean = series;
    for (Index j = 0; j < series.n_epochs(); ++j) {
        if (series.na_mask[static_cast<std::size_t>(j)]) continue;
        bool violates = false;
        for (const auto& r : rules) {
            if (!r.active) continue;
            const double v = series.stats(j, series.col(r.variable));
            if (r.direction == CutoffDirection::LOWER_BOUND ? v < r.cutoff : v > r.cutoff) {
                violates = true;
                break;
            }
        }
        if (violates) {
            out.excluded.push_back(j);
            out.clean.na_mask[static_cast<std::size_t>(j)] = true;
        }
    }
    return out;
}

TukeyFences tukey_fences(const std::vector<double>& values) {
    if (values.empty()) throw DataError("tukey_fences: empty sample");
    const double q1 = quantile(values, 0.25);
    const double q3 = quantile(values, 0.75);
    const double iqr = q3 - q1;
    return {q1 - 1.5 * iqr, q3 + 1.5 * iqr};
}

std::vector<ExcludedCategory> categorize_excluded(const EpochSeries& series,
                                                  const std::vector<Index>& excluded,
                                                  const WakeReference& wake_reference) {
    if (wake_reference.temp_med.empty() || wake_reference.acc_sd.empty() ||
        wake_reference.hr_med.empty())
        throw DataError("categorize_excluded: empty wake reference");

    const TukeyFences temp_f = tukey_fences(wake_reference.temp_med);
    const TukeyFences acc_f = tukey_fences(wake_reference.acc_sd);
    const TukeyFences hr_f = tukey_fences(wake_reference.hr_med);

    const Index c_temp = series.col(SignalId::TEMP, StatId::MED);
    const Index c_acc = series.col(SignalId::ACC, StatId::SD);
    const Index c_hr = series.col(SignalId::HR, StatId::MED);

    const auto in_range = [](double v, const TukeyFences& f) { return v >= f.low && v <= f.up; };

    std::vector<ExcludedCategory> out;
    out.reserve(excluded.size());
    for (Index j : excluded) {
        const double temp = series.stats(j, c_temp);
        const double acc = series.stats(j, c_acc);
        const double hr = series.stats(j, c_hr);
        ExcludedCategory cat = ExcludedCategory::OTHER;
        if (temp < temp_f.low && acc < acc_f.low) {
            cat = ExcludedCategory::NW;
        } else if (temp < temp_f.low && in_range(acc, acc_f)) {
            cat = ExcludedCategory::LOC;
        } else if (in_range(temp, temp_f) && hr > hr_f.up && acc > acc_f.up) {
            cat = ExcludedCategory::ACTIVE;
        }
        out.push_back(cat);
    }
    return out;
}

}  // namespace adasleep::anomaly
