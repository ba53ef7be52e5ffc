#pragma once

#include <vector>

#include "adasleep/common.hpp"

namespace adasleep::lda {

// Fisher's linear discriminant with the variance-weighted quadratic decision
// rule on projected scores.
struct LdaClassifier {
    Vector w;                 // projection direction, S_W^-1 (mean1 - mean0)
    double z_mean0 = 0.0;     // class-conditional projected-score means
    double z_mean1 = 0.0;
    double z_var0 = 0.0;      // class-conditional projected-score variances (n-1)
    double z_var1 = 0.0;
    double gamma = 1.0;       // multiplicative threshold factor
    Vector centroid0;
    Vector centroid1;
    Matrix within_scatter;

    double score(const Vector& x) const { return w.dot(x); }
};

// Fit on labeled samples (rows of x, labels in {0,1}). The within-class
// scatter is solved directly when well conditioned; a ridge of
// 1e-8 * trace(S_W)/dim (escalated tenfold as needed) is added only when the
// plain solve is unreliable, so exact small instances stay exact.
// Throws FittingError when either class has fewer than 2 samples.
LdaClassifier fit_lda(const Matrix& x, const std::vector<int>& y, double gamma = 1.0);

// Decision rule: 1 iff (z-z0)^2/var0 - (z-z1)^2/var1 > log(gamma*var1/var0);
// the boundary itself goes to 0 (wake).
int classify(const LdaClassifier& c, const Vector& x);

// Separability criterion J(w): between-class over within-class variation of
// the projected scores. Used as a local-optimality probe in tests.
double fisher_criterion(const Matrix& x, const std::vector<int>& y, const Vector& w);

}  // namespace adasleep::lda
