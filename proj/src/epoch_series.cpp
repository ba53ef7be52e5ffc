#include "adasleep/epoch_series.hpp"

namespace adasleep {

std::vector<Index> usable_epochs(const EpochSeries& series, double t_from, double t_to) {
    std::vector<Index> rows;
    for (Index j = 0; j < series.n_epochs(); ++j) {
        if (series.na_mask[static_cast<std::size_t>(j)]) continue;
        const double t = series.epoch_start(j);
        if (t >= t_from && t < t_to) rows.push_back(j);
    }
    return rows;
}

Matrix extract_columns(const EpochSeries& series,
                       const std::vector<Index>& rows,
                       const std::vector<VariableId>& variables) {
    std::vector<Index> cols;
    cols.reserve(variables.size());
    for (const auto& v : variables) cols.push_back(series.col(v));

    Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < cols.size(); ++c)
            out(static_cast<Index>(i), static_cast<Index>(c)) = series.stats(rows[i], cols[c]);
    return out;
}

}  // namespace adasleep
