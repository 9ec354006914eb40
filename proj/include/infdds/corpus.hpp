#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "infdds/rng.hpp"

namespace infdds {

using TextPair = std::pair<std::string, std::string>;  // (query, positive)

/// One training domain: a named pool of (query, positive) pairs. The unit
/// over which sampling probabilities are learned.
struct DomainDataset {
    int id = 0;
    std::string name;
    std::vector<TextPair> pairs;

    size_t size() const { return pairs.size(); }
};

struct DevQuery {
    std::string text;
    std::map<std::string, int> qrels;  // passage id -> relevance grade
};

/// Held-out retrieval data: queries with judgments over a frozen passage
/// pool. Supplies the reward signal and the evaluation targets.
struct DevSet {
    int id = 0;
    std::string name;
    std::vector<DevQuery> queries;
    std::vector<std::pair<std::string, std::string>> passages;  // (id, text), file order
    std::map<std::string, size_t> passage_index;                // id -> position in passages
    std::string aligned_domain;  // training domain this set is drawn from ("" if unknown)
};

struct Corpus {
    std::vector<DomainDataset> train;
    std::vector<DevSet> dev;
    std::vector<DevSet> test;

    std::vector<size_t> train_sizes() const;
};

// Manifest is a JSON file:
//   {"train":[{"name":..,"pairs":..}],
//    "dev":[{"name":..,"queries":..,"passages":..,"domain":..?}], "test":[...]}
// Paths are relative to the manifest location. Pair files hold one
// {"q":..,"p":..} record per line; passage files {"id":..,"text":..};
// query files {"q":..,"qrels":{id:grade}}.
Corpus load_corpus(const std::filesystem::path& manifest_path);

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

// batch_size draws: without replacement when batch_size <= |dataset|
// (a partial shuffle), with replacement otherwise.
std::vector<TextPair> sample_batch(const DomainDataset& dataset, size_t batch_size, Rng& rng);

struct SynthSpec {
    int domains = 4;
    int pairs_per_domain = 400;
    int vocab_tokens = 400;              // distinct token strings in the universe
    int topical_tokens_per_domain = 40;  // per-domain topical vocabulary size
    int common_tokens = 40;              // shared filler vocabulary
    double topical_overlap = 0.0;        // fraction of topical tokens shared with the next domain
    std::vector<int> dev_target_domains = {0};
    int dev_queries = 64;
    int test_queries = 64;
    int distractor_passages = 192;
    uint64_t seed = 1;
};

// Multi-domain synthetic corpus: each domain owns a topical vocabulary and a
// set of concepts (token combinations shared between a query and its
// positive). Dev/test sets draw fresh queries from the target domain with
// the generating positive judged relevant and distractors frozen at
// generation time.
Corpus generate_synthetic(const SynthSpec& spec);

// Convenience: generate, write to dir, return the loaded-back corpus path.
std::filesystem::path write_synthetic(const SynthSpec& spec, const std::filesystem::path& dir);

}  // namespace infdds
