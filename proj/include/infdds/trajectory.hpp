#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace infdds {

/// One logged (step, dataset) observation. Influence is only present on
/// meta-round steps for datasets in the round's subsample; dev_metric only
/// on evaluation steps. Blank means "not measured", never zero.
struct TrajectoryRow {
    long step = 0;
    int dataset_id = 0;
    std::string dataset_name;
    double probability = 0.0;
    std::optional<double> influence;
    std::optional<double> dev_metric;
    std::string strategy;
    uint64_t seed = 0;
};

struct TrajectoryLog {
    std::vector<TrajectoryRow> rows;

    void write_csv(const std::filesystem::path& path) const;
    // Rejects unknown schema versions.
    static TrajectoryLog read_csv(const std::filesystem::path& path);
};

inline constexpr const char* kTrajectorySchema = "# infdds-trajectory v1";
inline constexpr const char* kTrajectoryHeader =
    "step,dataset_id,dataset_name,probability,influence,dev_metric,strategy,seed";

}  // namespace infdds
