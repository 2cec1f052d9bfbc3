#pragma once

#include <string>
#include <vector>

namespace mgg::eval {

struct LossTable {
    std::vector<std::string> columns; ///< header without the leading `iteration`
    std::vector<double> iterations;
    std::vector<std::vector<double>> values; ///< [column][row]
};

/// Reads a loss-log CSV. @throws IoError / ValidationError.
LossTable read_loss_log(const std::string& path);

/// Standalone SVG line chart of one series.
std::string render_line_svg(const std::string& title, const std::vector<double>& x, const std::vector<double>& y);

/// One `<column>.svg` per loss column in `directory`; returns the written paths.
std::vector<std::string> write_loss_plots(const LossTable& table, const std::string& directory);

} // namespace mgg::eval
