#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "adasleep/errors.hpp"

namespace adasleep {

using Scalar = double;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Signal / summary-statistic identifiers
// ---------------------------------------------------------------------------

enum class SignalId { ACC, HR, TEMP, EDA };
enum class StatId { MEAN, MED, SD };

inline const char* to_string(SignalId s) {
    switch (s) {
        case SignalId::ACC: return "ACC";
        case SignalId::HR: return "HR";
        case SignalId::TEMP: return "TEMP";
        case SignalId::EDA: return "EDA";
    }
    return "?";
}

inline const char* to_string(StatId s) {
    switch (s) {
        case StatId::MEAN: return "MEAN";
        case StatId::MED: return "MED";
        case StatId::SD: return "SD";
    }
    return "?";
}

inline SignalId signal_from_string(const std::string& s) {
    if (s == "ACC") return SignalId::ACC;
    if (s == "HR") return SignalId::HR;
    if (s == "TEMP") return SignalId::TEMP;
    if (s == "EDA") return SignalId::EDA;
    throw ConfigError("unknown signal id: " + s);
}

inline StatId stat_from_string(const std::string& s) {
    if (s == "MEAN") return StatId::MEAN;
    if (s == "MED") return StatId::MED;
    if (s == "SD") return StatId::SD;
    throw ConfigError("unknown summary statistic: " + s);
}

// One column of the epoch summary grid: a (signal, statistic) pair.
struct VariableId {
    SignalId signal;
    StatId stat;

    friend bool operator==(const VariableId& a, const VariableId& b) {
        return a.signal == b.signal && a.stat == b.stat;
    }
    friend bool operator!=(const VariableId& a, const VariableId& b) { return !(a == b); }
};

inline std::string to_string(const VariableId& v) {
    return std::string(to_string(v.signal)) + "_" + to_string(v.stat);
}

// ---------------------------------------------------------------------------
// Deterministic RNG
//
// Gaussian draws use Box-Muller on mt19937_64 uniforms instead of
// std::normal_distribution, which is not pinned by the standard.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() {
        // strictly inside (0,1) so log() below is safe
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Quantiles (type-7: linear interpolation of order statistics)
// ---------------------------------------------------------------------------

// q-quantile of an unsorted sample; copies and sorts internally.
inline double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw DataError("quantile of empty sample");
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

inline double mean_of(const std::vector<double>& values) {
    if (values.empty()) throw DataError("mean of empty sample");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

// sample standard deviation (n-1 denominator); 0 for a single value
inline double sample_sd(const std::vector<double>& values) {
    if (values.empty()) throw DataError("sd of empty sample");
    if (values.size() == 1) return 0.0;
    const double m = mean_of(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / (static_cast<double>(values.size()) - 1.0));
}

}  // namespace adasleep
