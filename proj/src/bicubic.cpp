#include "octgate/bicubic.hpp"
#include "octgate/scan.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace octgate {

namespace {

std::vector<CubicTaps> axis_taps(Eigen::Index n_in, int n_out) {
    std::vector<CubicTaps> taps;
    taps.reserve(static_cast<std::size_t>(n_out));
    const double scale = static_cast<double>(n_in) / static_cast<double>(n_out);
    for (int d = 0; d < n_out; ++d) taps.push_back(cubic_taps((d + 0.5) * scale - 0.5, n_in));
    return taps;
}

}  // namespace

Grid resize_bicubic(const Grid& input, int target_rows, int target_cols) {
    if (input.rows() < 2 || input.cols() < 2)
        throw std::invalid_argument("resize_bicubic: input must be at least 2x2, got " +
                                    std::to_string(input.rows()) + "x" + std::to_string(input.cols()));
    if (target_rows < 1 || target_cols < 1) throw std::invalid_argument("resize_bicubic: empty target");

    const auto col_taps = axis_taps(input.cols(), target_cols);
    const auto row_taps = axis_taps(input.rows(), target_rows);

    // horizontal pass: rows stay, cols resampled
    Grid horizontal(input.rows(), target_cols);
    for (Eigen::Index r = 0; r < input.rows(); ++r) {
        for (int c = 0; c < target_cols; ++c) {
            const auto& t = col_taps[static_cast<std::size_t>(c)];
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) acc += t.weight[k] * input(r, t.index[k]);
            horizontal(r, c) = acc;
        }
    }

    Grid output(target_rows, target_cols);
    for (int r = 0; r < target_rows; ++r) {
        const auto& t = row_taps[static_cast<std::size_t>(r)];
        output.row(r) = t.weight[0] * horizontal.row(t.index[0]) + t.weight[1] * horizontal.row(t.index[1]) +
                        t.weight[2] * horizontal.row(t.index[2]) + t.weight[3] * horizontal.row(t.index[3]);
    }
    return output;
}

}  // namespace octgate
