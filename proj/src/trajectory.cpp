#include "infdds/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace infdds {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

void TrajectoryLog::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trajectory: " + path.string());
    out << kTrajectorySchema << "\n" << kTrajectoryHeader << "\n";
    for (const auto& r : rows) {
        out << r.step << "," << r.dataset_id << "," << r.dataset_name << ","
            << fmt_double(r.probability) << ",";
        if (r.influence) out << fmt_double(*r.influence);
        out << ",";
        if (r.dev_metric) out << fmt_double(*r.dev_metric);
        out << "," << r.strategy << "," << r.seed << "\n";
    }
}

TrajectoryLog TrajectoryLog::read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trajectory: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kTrajectorySchema)
        throw std::runtime_error("unknown trajectory schema in " + path.string() +
                                 " (expected '" + kTrajectorySchema + "')");
    if (!std::getline(in, line) || line != kTrajectoryHeader)
        throw std::runtime_error("bad trajectory header in " + path.string());

    TrajectoryLog log;
    size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 8)
            throw std::runtime_error("bad trajectory row at " + path.string() + ":" +
                                     std::to_string(lineno));
        TrajectoryRow r;
        r.step = std::stol(f[0]);
        r.dataset_id = std::stoi(f[1]);
        r.dataset_name = f[2];
        r.probability = std::stod(f[3]);
        if (!f[4].empty()) r.influence = std::stod(f[4]);
        if (!f[5].empty()) r.dev_metric = std::stod(f[5]);
        r.strategy = f[6];
        r.seed = std::stoull(f[7]);
        log.rows.push_back(std::move(r));
    }
    return log;
}

}  // namespace infdds
