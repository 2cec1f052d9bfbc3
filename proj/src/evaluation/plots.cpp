#include "evaluation/plots.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "core/error.hpp"

namespace mgg::eval {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream in(line);
    for (std::string cell; std::getline(in, cell, ',');) {
        out.push_back(cell);
    }
    return out;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += ch;
        }
    }
    return out;
}

} // namespace

LossTable read_loss_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open loss log " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("loss log " + path + " is empty");
    }
    std::vector<std::string> header = split(line);
    if (header.size() < 2 || header.front() != "iteration") {
        throw ValidationError("loss log " + path + ": header must start with 'iteration'");
    }
    LossTable table;
    table.columns.assign(header.begin() + 1, header.end());
    table.values.assign(table.columns.size(), {});
    int number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells = split(line);
        if (cells.size() != header.size()) {
            throw ValidationError(fmt::format("loss log {} line {}: expected {} fields", path, number, header.size()));
        }
        try {
            table.iterations.push_back(std::stod(cells[0]));
            for (std::size_t k = 1; k < cells.size(); ++k) {
                table.values[k - 1].push_back(std::stod(cells[k]));
            }
        } catch (const std::exception&) {
            throw ValidationError(fmt::format("loss log {} line {}: non-numeric field", path, number));
        }
    }
    return table;
}

std::string render_line_svg(const std::string& title, const std::vector<double>& x, const std::vector<double>& y) {
    constexpr double width = 640, height = 360, left = 70, right = 20, top = 40, bottom = 40;
    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        width, height, width, height, width / 2, escape(title));
    if (x.empty() || x.size() != y.size()) {
        return svg + "</svg>\n";
    }
    const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
    const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
    double xmin = *xmin_it, xmax = *xmax_it, ymin = *ymin_it, ymax = *ymax_it;
    if (xmax == xmin) {
        xmax = xmin + 1;
    }
    if (ymax == ymin) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * (width - left - right); };
    auto py = [&](double v) { return height - bottom - (v - ymin) / (ymax - ymin) * (height - top - bottom); };
    svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", left, top,
                       height - bottom);
    svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", left,
                       height - bottom, width - right);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" "
                       "text-anchor=\"end\">{:.4g}</text>\n",
                       left - 4, top + 4, ymax);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" "
                       "text-anchor=\"end\">{:.4g}</text>\n",
                       left - 4, height - bottom, ymin);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{:g}</text>\n", left,
                       height - bottom + 16, xmin);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" "
                       "text-anchor=\"end\">{:g}</text>\n",
                       width - right, height - bottom + 16, xmax);
    svg += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!std::isfinite(y[k])) {
            continue;
        }
        svg += fmt::format("{}{:.2f},{:.2f}", k ? " " : "", px(x[k]), py(y[k]));
    }
    svg += "\"/>\n</svg>\n";
    return svg;
}

std::vector<std::string> write_loss_plots(const LossTable& table, const std::string& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) {
        throw IoError("cannot create plot directory " + directory + ": " + ec.message());
    }
    std::vector<std::string> written;
    for (std::size_t k = 0; k < table.columns.size(); ++k) {
        const std::string path = (std::filesystem::path(directory) / (table.columns[k] + ".svg")).string();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + path);
        }
        out << render_line_svg(table.columns[k], table.iterations, table.values[k]);
        written.push_back(path);
    }
    return written;
}

} // namespace mgg::eval
