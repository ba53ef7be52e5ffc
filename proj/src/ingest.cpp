#include "adasleep/ingest.hpp"

#include <cmath>
#include <limits>

namespace adasleep::ingest {

namespace {

struct EpochAccumulator {
    std::vector<double> samples;
};

}  // namespace

EpochSeries segment_and_summarize(const std::vector<RawStream>& streams,
                                  double epoch_length,
                                  double origin,
                                  const std::string& subject_id) {
    if (streams.empty()) throw ConfigError("segment_and_summarize: no input streams");
    if (!(epoch_length > 0.0)) throw ConfigError("segment_and_summarize: epoch_length must be > 0");

    double last_t = -std::numeric_limits<double>::infinity();
    for (const auto& s : streams) {
        if (s.timestamps.empty()) throw ConfigError(std::string("empty stream: ") + to_string(s.signal));
        if (!(s.sampling_hz > 0.0))
            throw ConfigError(std::string("non-positive sampling rate for ") + to_string(s.signal));
        for (std::size_t i = 1; i < s.timestamps.size(); ++i) {
            if (!(s.timestamps[i] > s.timestamps[i - 1]))
                throw DataError(std::string("non-monotone timestamps in signal ") + to_string(s.signal));
        }
        last_t = std::max(last_t, s.timestamps.back());
    }

    EpochSeries out;
    out.subject_id = subject_id;
    out.epoch_length = epoch_length;
    out.origin = origin;
    for (const auto& s : streams) out.signals.push_back(s.signal);

    const auto n_epochs =
        last_t >= origin ? static_cast<Index>(std::floor((last_t - origin) / epoch_length)) + 1 : 0;
    const auto p = static_cast<Index>(streams.size());
    out.stats = Matrix::Constant(n_epochs, 3 * p, std::numeric_limits<double>::quiet_NaN());
    out.na_mask.assign(static_cast<std::size_t>(n_epochs), false);

    std::vector<std::vector<EpochAccumulator>> acc(
        static_cast<std::size_t>(p),
        std::vector<EpochAccumulator>(static_cast<std::size_t>(n_epochs)));

    for (std::size_t si = 0; si < streams.size(); ++si) {
        const auto& s = streams[si];
        for (std::size_t i = 0; i < s.timestamps.size(); ++i) {
            const double rel = (s.timestamps[i] - origin) / epoch_length;
            if (rel < 0.0) continue;
            const auto j = static_cast<Index>(std::floor(rel));
            if (j >= n_epochs) continue;
            acc[si][static_cast<std::size_t>(j)].samples.push_back(s.values[i]);
        }
    }

    for (Index j = 0; j < n_epochs; ++j) {
        bool na = false;
        for (std::size_t si = 0; si < streams.size(); ++si) {
            const double designed = streams[si].sampling_hz * epoch_length;
            const auto observed = static_cast<double>(acc[si][static_cast<std::size_t>(j)].samples.size());
            if (observed < 0.9 * designed) {
                na = true;
                break;
            }
        }
        out.na_mask[static_cast<std::size_t>(j)] = na;
        if (na) continue;
        for (std::size_t si = 0; si < streams.size(); ++si) {
            const auto& v = acc[si][static_cast<std::size_t>(j)].samples;
            const auto c0 = static_cast<Index>(3 * si);
            out.stats(j, c0 + 0) = mean_of(v);
            out.stats(j, c0 + 1) = median(v);
            out.stats(j, c0 + 2) = sample_sd(v);
        }
    }

    return out;
}

}  // namespace adasleep::ingest
