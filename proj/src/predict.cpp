#include "adasleep/predict.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adasleep::predict {

namespace {

constexpr double kCoefCap = 30.0;
constexpr double kTol = 1e-8;
constexpr int kMaxIter = 100;

double expit(double eta) {
    return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

// log(1 + e^eta), overflow-safe
double log1pexp(double eta) { return std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta))); }

double log_likelihood(const Matrix& design, const std::vector<int>& y, const Vector& beta) {
    double ll = 0.0;
    for (Index i = 0; i < design.rows(); ++i) {
        const double eta = design.row(i).dot(beta);
        ll += y[static_cast<std::size_t>(i)] * eta - log1pexp(eta);
    }
    return ll;
}

}  // namespace

BinaryModel fit_logistic(const Matrix& x, const std::vector<int>& y) {
    const auto n = x.rows();
    if (static_cast<std::size_t>(n) != y.size())
        throw DataError("fit_logistic: label count mismatch");
    const auto n1 = std::count(y.begin(), y.end(), 1);
    if (n1 == 0 || n1 == static_cast<long>(y.size()))
        throw FittingError("fit_logistic: single-class labels");

    Matrix design(n, x.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(x.cols()) = x;
    const auto dim = design.cols();

    BinaryModel m;
    m.beta = Vector::Zero(dim);
    double ll = log_likelihood(design, y, m.beta);
    m.loglik_trace.push_back(ll);

    for (int iter = 0; iter < kMaxIter; ++iter) {
        Matrix xtwx = Matrix::Zero(dim, dim);
        Vector grad = Vector::Zero(dim);
        for (Index i = 0; i < n; ++i) {
            const double p = expit(design.row(i).dot(m.beta));
            const double w = std::max(p * (1.0 - p), 1e-12);
            xtwx.noalias() += w * design.row(i).transpose() * design.row(i);
            grad.noalias() +=
                (y[static_cast<std::size_t>(i)] - p) * design.row(i).transpose();
        }
        Vector step = xtwx.ldlt().solve(grad);
        if (!step.allFinite()) break;

        // step halving keeps the log-likelihood non-decreasing
        double new_ll = log_likelihood(design, y, m.beta + step);
        int halvings = 0;
        while (new_ll < ll && halvings < 30) {
            step *= 0.5;
            new_ll = log_likelihood(design, y, m.beta + step);
            ++halvings;
        }
        if (new_ll < ll) break;
        m.beta += step;
        ll = new_ll;
        m.loglik_trace.push_back(ll);

        if (m.beta.cwiseAbs().maxCoeff() > kCoefCap) {
            // diverging coefficients: complete or quasi-complete separation
            m.beta = m.beta.cwiseMax(-kCoefCap).cwiseMin(kCoefCap);
            m.converged = false;
            return m;
        }
        if (step.cwiseAbs().maxCoeff() < kTol) {
            m.converged = true;
            return m;
        }
    }
    m.converged = false;
    return m;
}

BinaryModel fit_logistic(const std::vector<double>& x, const std::vector<int>& y) {
    Matrix design(static_cast<Index>(x.size()), 1);
    for (std::size_t i = 0; i < x.size(); ++i) design(static_cast<Index>(i), 0) = x[i];
    return fit_logistic(design, y);
}

double predict_probability(const BinaryModel& m, const Vector& x) {
    double eta = m.beta(0);
    for (Index i = 0; i < x.size(); ++i) eta += m.beta(i + 1) * x(i);
    return expit(eta);
}

double predict_probability(const BinaryModel& m, double x) {
    return expit(m.beta(0) + m.beta(1) * x);
}

OrdinalModel fit_continuation_ratio(const std::vector<double>& x, const std::vector<int>& y) {
    if (x.size() != y.size()) throw DataError("fit_continuation_ratio: size mismatch");
    int counts[3] = {0, 0, 0};
    for (int v : y) {
        if (v < 1 || v > 3) throw DataError("fit_continuation_ratio: labels must be in {1,2,3}");
        ++counts[v - 1];
    }
    if (counts[0] == 0 || counts[1] == 0 || counts[2] == 0)
        throw DataError("fit_continuation_ratio: every level must be populated");

    OrdinalModel m;
    std::vector<int> target1(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) target1[i] = y[i] == 1 ? 1 : 0;
    try {
        m.level1 = fit_logistic(x, target1);
        m.level1_fitted = true;
    } catch (const FittingError&) {
    }

    std::vector<double> x2;
    std::vector<int> target2;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] >= 2) {
            x2.push_back(x[i]);
            target2.push_back(y[i] == 2 ? 1 : 0);
        }
    }
    if (x2.empty()) throw DataError("fit_continuation_ratio: empty conditioning subset");
    try {
        m.level2 = fit_logistic(x2, target2);
        m.level2_fitted = true;
    } catch (const FittingError&) {
    }
    return m;
}

std::array<double, 3> class_probabilities(const OrdinalModel& m, double x) {
    const double p1 = m.level1_fitted ? predict_probability(m.level1, x) : 0.5;
    const double p2_given = m.level2_fitted ? predict_probability(m.level2, x) : 0.5;
    return {p1, (1.0 - p1) * p2_given, (1.0 - p1) * (1.0 - p2_given)};
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw DataError("auc: size mismatch");
    const auto n = scores.size();
    const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const auto n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("auc: labels are single-class");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // average ranks over tied scores
    std::vector<double> rank(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }

    double rank_sum_pos = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        if (labels[k] == 1) rank_sum_pos += rank[k];
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

LoocvBinaryResult loocv_auc(const Matrix& x, const std::vector<int>& y) {
    const auto n = x.rows();
    if (n < 4) throw DataError("loocv_auc: need at least 4 samples");

    LoocvBinaryResult out;
    std::vector<double> held_scores;
    std::vector<int> held_labels;
    for (Index i = 0; i < n; ++i) {
        Matrix xt(n - 1, x.cols());
        std::vector<int> yt;
        yt.reserve(static_cast<std::size_t>(n - 1));
        Index r = 0;
        for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            xt.row(r++) = x.row(j);
            yt.push_back(y[static_cast<std::size_t>(j)]);
        }
        try {
            const BinaryModel m = fit_logistic(xt, yt);
            held_scores.push_back(predict_probability(m, x.row(i).transpose()));
            held_labels.push_back(y[static_cast<std::size_t>(i)]);
        } catch (const FittingError&) {
            ++out.skipped_folds;
        }
    }
    out.auc = auc(held_scores, held_labels);
    return out;
}

LoocvBinaryResult loocv_auc(const std::vector<double>& x, const std::vector<int>& y) {
    Matrix design(static_cast<Index>(x.size()), 1);
    for (std::size_t i = 0; i < x.size(); ++i) design(static_cast<Index>(i), 0) = x[i];
    return loocv_auc(design, y);
}

LoocvOrdinalResult loocv_auc_ordinal(const std::vector<double>& x, const std::vector<int>& y) {
    if (x.size() < 4) throw DataError("loocv_auc_ordinal: need at least 4 samples");

    LoocvOrdinalResult out;
    std::vector<std::array<double, 3>> held_probs;
    std::vector<int> held_labels;
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<double> xt;
        std::vector<int> yt;
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (j == i) continue;
            xt.push_back(x[j]);
            yt.push_back(y[j]);
        }
        try {
            const OrdinalModel m = fit_continuation_ratio(xt, yt);
            held_probs.push_back(class_probabilities(m, x[i]));
            held_labels.push_back(y[i]);
        } catch (const DataError&) {
            ++out.skipped_folds;
        }
    }
    for (int cls = 1; cls <= 3; ++cls) {
        std::vector<double> scores;
        std::vector<int> labels;
        for (std::size_t i = 0; i < held_probs.size(); ++i) {
            scores.push_back(held_probs[i][static_cast<std::size_t>(cls - 1)]);
            labels.push_back(held_labels[i] == cls ? 1 : 0);
        }
        out.auc_per_class[static_cast<std::size_t>(cls - 1)] = auc(scores, labels);
    }
    return out;
}

}  // namespace adasleep::predict
