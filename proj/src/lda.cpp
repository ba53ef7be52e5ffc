#include "adasleep/lda.hpp"

#include <cmath>

namespace adasleep::lda {

namespace {

// Solve S_W v = rhs, adding ridge only when the plain factorization is
// unreliable.
Vector solve_within(const Matrix& sw, const Vector& rhs) {
    const auto dim = sw.rows();
    Eigen::LDLT<Matrix> ldlt(sw);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        const Vector v = ldlt.solve(rhs);
        const double residual = (sw * v - rhs).norm();
        if (v.allFinite() && residual <= 1e-10 * (rhs.norm() + 1.0)) return v;
    }
    double lambda = 1e-8 * sw.trace() / static_cast<double>(dim);
    if (!(lambda > 0.0)) lambda = 1e-12;
    for (int attempt = 0; attempt < 40; ++attempt, lambda *= 10.0) {
        Matrix reg = sw + lambda * Matrix::Identity(dim, dim);
        Eigen::LDLT<Matrix> f(reg);
        if (f.info() != Eigen::Success) continue;
        const Vector v = f.solve(rhs);
        if (v.allFinite()) return v;
    }
    throw FittingError("fit_lda: within-class scatter not solvable");
}

}  // namespace

LdaClassifier fit_lda(const Matrix& x, const std::vector<int>& y, double gamma) {
    if (static_cast<std::size_t>(x.rows()) != y.size())
        throw DataError("fit_lda: label count does not match sample count");
    if (!x.allFinite()) throw DataError("fit_lda: non-finite inputs");

    Index n0 = 0, n1 = 0;
    for (int label : y) (label == 1 ? n1 : n0) += 1;
    if (n0 < 2 || n1 < 2)
        throw FittingError("fit_lda: both classes need >= 2 samples (have " +
                           std::to_string(n0) + "/" + std::to_string(n1) + ")");

    const auto dim = x.cols();
    Vector m0 = Vector::Zero(dim), m1 = Vector::Zero(dim);
    for (Index i = 0; i < x.rows(); ++i)
        (y[static_cast<std::size_t>(i)] == 1 ? m1 : m0) += x.row(i).transpose();
    m0 /= static_cast<double>(n0);
    m1 /= static_cast<double>(n1);

    Matrix sw = Matrix::Zero(dim, dim);
    for (Index i = 0; i < x.rows(); ++i) {
        const Vector d = x.row(i).transpose() - (y[static_cast<std::size_t>(i)] == 1 ? m1 : m0);
        sw.noalias() += d * d.transpose();
    }

    LdaClassifier c;
    c.w = solve_within(sw, m1 - m0);
    c.gamma = gamma;
    c.centroid0 = m0;
    c.centroid1 = m1;
    c.within_scatter = sw;

    double s0 = 0.0, s1 = 0.0, ss0 = 0.0, ss1 = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
        const double z = c.w.dot(x.row(i));
        if (y[static_cast<std::size_t>(i)] == 1) {
            s1 += z;
        } else {
            s0 += z;
        }
    }
    c.z_mean0 = s0 / static_cast<double>(n0);
    c.z_mean1 = s1 / static_cast<double>(n1);
    for (Index i = 0; i < x.rows(); ++i) {
        const double z = c.w.dot(x.row(i));
        if (y[static_cast<std::size_t>(i)] == 1) {
            ss1 += (z - c.z_mean1) * (z - c.z_mean1);
        } else {
            ss0 += (z - c.z_mean0) * (z - c.z_mean0);
        }
    }
    c.z_var0 = ss0 / static_cast<double>(n0 - 1);
    c.z_var1 = ss1 / static_cast<double>(n1 - 1);
    return c;
}

int classify(const LdaClassifier& c, const Vector& x) {
    if (x.size() != c.w.size()) throw DataError("classify: dimension mismatch");
    const double z = c.w.dot(x);
    const double lhs = (z - c.z_mean0) * (z - c.z_mean0) / c.z_var0 -
                       (z - c.z_mean1) * (z - c.z_mean1) / c.z_var1;
    const double rhs = std::log(c.gamma * c.z_var1 / c.z_var0);
    return lhs > rhs ? 1 : 0;
}

double fisher_criterion(const Matrix& x, const std::vector<int>& y, const Vector& w) {
    double s0 = 0.0, s1 = 0.0, n0 = 0.0, n1 = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
        const double z = w.dot(x.row(i));
        if (y[static_cast<std::size_t>(i)] == 1) {
            s1 += z;
            n1 += 1.0;
        } else {
            s0 += z;
            n0 += 1.0;
        }
    }
    const double zbar1 = s1 / n1, zbar0 = s0 / n0;
    const double zbar = (s0 + s1) / (n0 + n1);
    double within = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
        const double z = w.dot(x.row(i));
        const double m = y[static_cast<std::size_t>(i)] == 1 ? zbar1 : zbar0;
        within += (z - m) * (z - m);
    }
    const double between = (zbar1 - zbar) * (zbar1 - zbar) + (zbar0 - zbar) * (zbar0 - zbar);
    return between / within;
}

}  // namespace adasleep::lda
