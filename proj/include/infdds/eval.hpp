#pragma once

#include <span>
#include <string>
#include <vector>

#include "infdds/corpus.hpp"
#include "infdds/retriever.hpp"

namespace infdds {

struct EvalResult {
    std::vector<double> per_query_ndcg;    // queries with >= 1 relevant passage only
    std::vector<double> per_query_recall;
    double mean_ndcg = 0.0;
    double mean_recall = 0.0;
    size_t queries_scored = 0;
    size_t queries_skipped = 0;  // zero relevant passages
};

// DCG_k / IDCG_k with gain = grade and discount 1/log2(rank+1), rank from 1.
// `ranked_grades` is the grade of each retrieved item in ranked order;
// `all_grades` holds the grades of every judged item (for the ideal DCG).
// Returns 0 when nothing relevant exists.
double ndcg_at_k(std::span<const int> ranked_grades, std::span<const int> all_grades, size_t k);

// Encode all passages once, rank by dot product with deterministic
// tie-break on ascending passage id, score NDCG@k and recall@k per query.
// `query_subset` restricts scoring to those query indices (empty = all).
EvalResult evaluate_retrieval(const ModelParams& params, const DevSet& dev_set, size_t k,
                              std::span<const int> query_subset = {});

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    long df = 0;
};

// Two-sided paired t-test; all-zero differences report p = 1, zero-variance
// nonzero-mean differences report p = 0 (printed as p < 1e-12).
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta function (exposed for the t-CDF and its tests).
double incomplete_beta(double a, double b, double x);

}  // namespace infdds
