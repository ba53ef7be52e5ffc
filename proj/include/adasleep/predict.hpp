#pragma once

#include <array>
#include <vector>

#include "adasleep/common.hpp"

namespace adasleep::predict {

// Logistic regression fit. beta holds the intercept first, then one slope per
// column of the design. converged is false when IRLS hit the iteration cap or
// complete separation (coefficients capped at |beta| = 30).
struct BinaryModel {
    Vector beta;
    bool converged = false;
    std::vector<double> loglik_trace;  // per accepted IRLS iteration

    double beta0() const { return beta(0); }
    double beta1() const { return beta(1); }
};

// Maximum likelihood by iteratively reweighted least squares with step
// halving (log-likelihood never decreases across iterations). Convergence at
// max coefficient change < 1e-8 or 100 iterations.
// Throws FittingError when y is single-class.
BinaryModel fit_logistic(const Matrix& x, const std::vector<int>& y);
BinaryModel fit_logistic(const std::vector<double>& x, const std::vector<int>& y);

double predict_probability(const BinaryModel& m, const Vector& x);
double predict_probability(const BinaryModel& m, double x);

// Continuation-ratio model on ordinal y in {1,2,3}: level-1 logit on all
// samples (target y==1), level-2 logit on the y>=2 subset (target y==2).
// A conditional subset that is single-class leaves that level unfitted
// (fitted=false) rather than failing the whole model.
struct OrdinalModel {
    BinaryModel level1;
    BinaryModel level2;
    bool level1_fitted = false;
    bool level2_fitted = false;
};

OrdinalModel fit_continuation_ratio(const std::vector<double>& x, const std::vector<int>& y);

// Implied class probabilities (P(Y=1), P(Y=2), P(Y=3)); they sum to one by
// construction.
std::array<double, 3> class_probabilities(const OrdinalModel& m, double x);

// Mann-Whitney AUC via average ranks: fraction of (positive, negative) pairs
// with the positive scored higher, ties counted half.
// Throws DataError when labels are single-class.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct LoocvBinaryResult {
    double auc = 0.0;
    int skipped_folds = 0;  // folds whose training labels were single-class
};

// Leave-one-out: fit on all-but-i, score i, AUC over held-out scores.
LoocvBinaryResult loocv_auc(const std::vector<double>& x, const std::vector<int>& y);
LoocvBinaryResult loocv_auc(const Matrix& x, const std::vector<int>& y);

struct LoocvOrdinalResult {
    std::array<double, 3> auc_per_class{};  // one-vs-rest by implied class probability
    int skipped_folds = 0;
};

LoocvOrdinalResult loocv_auc_ordinal(const std::vector<double>& x, const std::vector<int>& y);

}  // namespace adasleep::predict
