#include "infdds/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace infdds {

namespace {

double dcg(std::span<const int> grades, size_t k) {
    double s = 0.0;
    const size_t n = std::min(k, grades.size());
    for (size_t r = 0; r < n; ++r)
        s += static_cast<double>(grades[r]) / std::log2(static_cast<double>(r) + 2.0);
    return s;
}

// continued fraction for the incomplete beta (Lentz's method)
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lbeta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    const double front = std::exp(lbeta + a * std::log(x) + b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double ndcg_at_k(std::span<const int> ranked_grades, std::span<const int> all_grades, size_t k) {
    if (k == 0) throw std::invalid_argument("ndcg_at_k: k must be >= 1");
    std::vector<int> ideal(all_grades.begin(), all_grades.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());
    const double idcg = dcg(ideal, k);
    if (idcg == 0.0) return 0.0;
    return dcg(ranked_grades, k) / idcg;
}

EvalResult evaluate_retrieval(const ModelParams& params, const DevSet& dev_set, size_t k,
                              std::span<const int> query_subset) {
    if (dev_set.passages.empty()) throw std::runtime_error("evaluate_retrieval: no passages");

    std::vector<std::string> passage_texts;
    passage_texts.reserve(dev_set.passages.size());
    for (const auto& [pid, text] : dev_set.passages) passage_texts.push_back(text);
    const Matrix pu = encode(params, passage_texts);

    std::vector<int> indices;
    if (query_subset.empty()) {
        indices.resize(dev_set.queries.size());
        std::iota(indices.begin(), indices.end(), 0);
    } else {
        indices.assign(query_subset.begin(), query_subset.end());
    }

    std::vector<std::string> query_texts;
    query_texts.reserve(indices.size());
    for (int qi : indices) query_texts.push_back(dev_set.queries[qi].text);
    const Matrix qu = encode(params, query_texts);

    EvalResult res;
    const size_t np = dev_set.passages.size();
    std::vector<size_t> order(np);
    std::vector<double> scores(np);

    for (size_t row = 0; row < indices.size(); ++row) {
        const DevQuery& q = dev_set.queries[indices[row]];
        size_t relevant = 0;
        for (const auto& [pid, g] : q.qrels)
            if (g > 0) ++relevant;
        if (relevant == 0) {
            ++res.queries_skipped;
            continue;
        }

        for (size_t j = 0; j < np; ++j) {
            double s = 0.0;
            for (size_t d = 0; d < pu.cols; ++d) s += qu(row, d) * pu(j, d);
            scores[j] = s;
        }
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return dev_set.passages[a].first < dev_set.passages[b].first;
        });

        std::vector<int> ranked(np, 0);
        std::vector<int> judged;
        judged.reserve(q.qrels.size());
        for (const auto& [pid, g] : q.qrels) judged.push_back(g);
        size_t hits = 0;
        for (size_t r = 0; r < np; ++r) {
            auto it = q.qrels.find(dev_set.passages[order[r]].first);
            const int g = (it == q.qrels.end()) ? 0 : it->second;
            ranked[r] = g;
            if (r < k && g > 0) ++hits;
        }
        res.per_query_ndcg.push_back(ndcg_at_k(ranked, judged, k));
        res.per_query_recall.push_back(static_cast<double>(hits) / static_cast<double>(relevant));
        ++res.queries_scored;
    }

    if (res.queries_scored > 0) {
        res.mean_ndcg = std::accumulate(res.per_query_ndcg.begin(), res.per_query_ndcg.end(), 0.0) /
                        static_cast<double>(res.queries_scored);
        res.mean_recall =
            std::accumulate(res.per_query_recall.begin(), res.per_query_recall.end(), 0.0) /
            static_cast<double>(res.queries_scored);
    }
    return res;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("paired_t_test: size mismatch");
    const size_t n = a.size();
    if (n < 2) throw std::invalid_argument("paired_t_test: need n >= 2");

    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = (a[i] - b[i]) - mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(n - 1);

    TTestResult res;
    res.df = static_cast<long>(n) - 1;
    if (var == 0.0) {
        if (mean == 0.0) {
            res.t = 0.0;
            res.p = 1.0;  // identical samples, by convention
        } else {
            res.t = mean > 0 ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity();
            res.p = 0.0;  // reported as p < 1e-12
        }
        return res;
    }
    res.t = mean / std::sqrt(var / static_cast<double>(n));
    const double df = static_cast<double>(res.df);
    res.p = incomplete_beta(df / 2.0, 0.5, df / (df + res.t * res.t));
    return res;
}

}  // namespace infdds
