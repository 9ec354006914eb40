#include "infdds/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <vector>

namespace infdds {

namespace {

constexpr int kWidth = 900;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 60;
constexpr int kMarginRight = 180;
constexpr int kMarginTop = 30;
constexpr int kMarginBottom = 50;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void plot_trajectories(const TrajectoryLog& log, const std::filesystem::path& out_svg) {
    if (log.rows.empty()) throw std::runtime_error("plot_trajectories: empty trajectory");

    // per-dataset series in step order (rows are already step-ordered)
    std::map<int, std::string> names;
    std::map<int, std::vector<std::pair<long, double>>> series;
    long max_step = 0;
    for (const auto& r : log.rows) {
        names[r.dataset_id] = r.dataset_name;
        series[r.dataset_id].emplace_back(r.step, r.probability);
        max_step = std::max(max_step, r.step);
    }

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto sx = [&](long step) {
        const double f = max_step > 0 ? static_cast<double>(step) / max_step : 0.0;
        return kMarginLeft + f * plot_w;
    };
    auto sy = [&](double p) { return kMarginTop + (1.0 - p) * plot_h; };

    std::ofstream out(out_svg);
    if (!out) throw std::runtime_error("cannot write svg: " + out_svg.string());
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

    // axes and gridlines
    for (int i = 0; i <= 4; ++i) {
        const double p = i / 4.0;
        out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << fmt(sy(p)) << "\" x2=\""
            << kWidth - kMarginRight << "\" y2=\"" << fmt(sy(p))
            << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(sy(p) + 4)
            << "\" text-anchor=\"end\" font-size=\"12\">" << fmt(p) << "</text>\n";
    }
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << fmt(sy(0.0)) << "\" x2=\""
        << kWidth - kMarginRight << "\" y2=\"" << fmt(sy(0.0))
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
        << "\" y2=\"" << fmt(sy(0.0)) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << (kMarginLeft + plot_w / 2) << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">step</text>\n";
    out << "<text x=\"16\" y=\"" << (kMarginTop + plot_h / 2)
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
        << (kMarginTop + plot_h / 2) << ")\">sampling probability</text>\n";
    out << "<text x=\"" << kMarginLeft << "\" y=\"" << fmt(sy(0.0) + 18)
        << "\" text-anchor=\"middle\" font-size=\"12\">0</text>\n";
    out << "<text x=\"" << kWidth - kMarginRight << "\" y=\"" << fmt(sy(0.0) + 18)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << max_step << "</text>\n";

    size_t color = 0;
    for (const auto& [id, pts] : series) {
        out << "<polyline fill=\"none\" stroke=\""
            << kPalette[color % (sizeof(kPalette) / sizeof(kPalette[0]))]
            << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < pts.size(); ++i) {
            if (i) out << " ";
            out << fmt(sx(pts[i].first)) << "," << fmt(sy(pts[i].second));
        }
        out << "\"/>\n";
        const double ly = kMarginTop + 16.0 * (color + 1);
        out << "<line x1=\"" << kWidth - kMarginRight + 12 << "\" y1=\"" << fmt(ly - 4)
            << "\" x2=\"" << kWidth - kMarginRight + 36 << "\" y2=\"" << fmt(ly - 4)
            << "\" stroke=\"" << kPalette[color % (sizeof(kPalette) / sizeof(kPalette[0]))]
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kWidth - kMarginRight + 42 << "\" y=\"" << fmt(ly)
            << "\" font-size=\"12\">" << xml_escape(names[id]) << "</text>\n";
        ++color;
    }
    out << "</svg>\n";
}

void plot_trajectories(const std::filesystem::path& csv_path,
                       const std::filesystem::path& out_svg) {
    plot_trajectories(TrajectoryLog::read_csv(csv_path), out_svg);
}

}  // namespace infdds
