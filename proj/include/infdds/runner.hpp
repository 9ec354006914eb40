#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "infdds/config.hpp"
#include "infdds/corpus.hpp"
#include "infdds/eval.hpp"
#include "infdds/meta.hpp"

namespace infdds {

struct RunArtifacts {
    std::filesystem::path dir;
    ExperimentConfig config;
    TrainResult result;
    double mean_dev_ndcg = 0.0;
    double mean_test_ndcg = 0.0;
    double wall_clock_s = 0.0;
};

// Train per config, then write trajectory.csv, best.ckpt, scores.csv,
// config.echo.cfg and report.txt under config.run.out_dir.
RunArtifacts execute_run(const ExperimentConfig& config);

// CLI entry: load + override + validate config, run, report errors as a
// single machine-readable JSON line on stderr. Returns the process exit
// status (0 ok, 2 config error, 3 runtime failure).
int run_experiment(const std::filesystem::path& config_path,
                   const std::vector<std::string>& overrides);

struct PerQueryScore {
    std::string split;  // dev | test
    std::string devset;
    int query_index = 0;
    double ndcg = 0.0;
    double recall = 0.0;
};

std::vector<PerQueryScore> read_scores(const std::filesystem::path& run_dir);

struct CompareResult {
    double mean_a = 0.0;
    double mean_b = 0.0;
    TTestResult ttest;
    size_t n = 0;
};

// Paired t-test between two runs' per-query NDCG on the given split,
// matching on (devset, query index).
CompareResult compare_runs(const std::filesystem::path& run_a,
                           const std::filesystem::path& run_b, const std::string& split);

// Merge each aligned dev set into its training domain, redraw a train split
// of the original size, and form the fold's dev set from the remainder; test
// sets pass through untouched. Every dev set must carry a domain alignment.
std::vector<Corpus> resample_splits(const Corpus& corpus, int folds, Rng& rng);

}  // namespace infdds
