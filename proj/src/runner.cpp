#include "infdds/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace infdds {

namespace fs = std::filesystem;

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_scores(const fs::path& path, const std::string& split,
                  const std::vector<DevSet>& sets, const ModelParams& params,
                  std::ofstream& out) {
    (void)path;
    for (const auto& ds : sets) {
        const EvalResult res = evaluate_retrieval(params, ds, 10);
        size_t row = 0;
        for (size_t qi = 0; qi < ds.queries.size(); ++qi) {
            bool has_rel = false;
            for (const auto& [pid, g] : ds.queries[qi].qrels)
                if (g > 0) { has_rel = true; break; }
            if (!has_rel) continue;
            out << split << "," << ds.name << "," << qi << ","
                << fmt_double(res.per_query_ndcg[row]) << ","
                << fmt_double(res.per_query_recall[row]) << "\n";
            ++row;
        }
    }
}

double mean_ndcg_over(const std::vector<DevSet>& sets, const ModelParams& params,
                      std::vector<std::pair<std::string, double>>* per_set = nullptr) {
    if (sets.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& ds : sets) {
        const double m = evaluate_retrieval(params, ds, 10).mean_ndcg;
        if (per_set) per_set->emplace_back(ds.name, m);
        sum += m;
    }
    return sum / static_cast<double>(sets.size());
}

}  // namespace

RunArtifacts execute_run(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();

    RunArtifacts art;
    art.config = config;
    art.dir = config.run.out_dir;
    fs::create_directories(art.dir);

    const Corpus corpus = load_corpus(config.run.corpus);
    art.result = train(corpus, config.train);

    art.result.log.write_csv(art.dir / "trajectory.csv");
    save_checkpoint(art.result.params, art.dir / "best.ckpt");
    {
        std::ofstream echo(art.dir / "config.echo.cfg");
        echo << config_echo(config);
    }

    std::vector<std::pair<std::string, double>> dev_per_set, test_per_set;
    art.mean_dev_ndcg = mean_ndcg_over(corpus.dev, art.result.params, &dev_per_set);
    art.mean_test_ndcg = mean_ndcg_over(corpus.test, art.result.params, &test_per_set);

    {
        std::ofstream scores(art.dir / "scores.csv");
        scores << "split,devset,query_index,ndcg10,recall10\n";
        write_scores(art.dir, "dev", corpus.dev, art.result.params, scores);
        write_scores(art.dir, "test", corpus.test, art.result.params, scores);
    }

    art.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ofstream rep(art.dir / "report.txt");
    rep << "# infdds run report v1\n";
    rep << "strategy = " << strategy_name(config.train.strategy) << "\n";
    rep << "seed = " << config.train.seed << "\n";
    rep << "wall_clock_s = " << fmt_double(art.wall_clock_s) << "\n";
    rep << "meta_rounds = " << art.result.meta_rounds << "\n";
    rep << "best_step = " << art.result.best_step << "\n";
    rep << "best_dev_ndcg10 = " << fmt_double(art.result.best_dev_metric) << "\n";
    rep << "final_dev_ndcg10 = " << fmt_double(art.result.final_dev_metric) << "\n";
    rep << "[dev]\n";
    for (const auto& [name, m] : dev_per_set) rep << name << " ndcg10 = " << fmt_double(m) << "\n";
    rep << "mean_ndcg10 = " << fmt_double(art.mean_dev_ndcg) << "\n";
    rep << "[test]\n";
    for (const auto& [name, m] : test_per_set) rep << name << " ndcg10 = " << fmt_double(m) << "\n";
    rep << "mean_ndcg10 = " << fmt_double(art.mean_test_ndcg) << "\n";
    rep << "[rounds]\n";
    for (const auto& rs : art.result.round_stats)
        rep << "step=" << rs.step << " reward_std=" << fmt_double(rs.reward_std)
            << " update_norm=" << fmt_double(rs.applied_update_norm) << "\n";

    if (!config.run.compare_to.empty()) {
        rep << "[compare]\n";
        rep << "baseline = " << config.run.compare_to << "\n";
        try {
            const CompareResult cr = compare_runs(art.dir, config.run.compare_to, "test");
            rep << "split = test\n";
            rep << "n = " << cr.n << "\n";
            rep << "mean_this = " << fmt_double(cr.mean_a) << "\n";
            rep << "mean_baseline = " << fmt_double(cr.mean_b) << "\n";
            rep << "t = " << fmt_double(cr.ttest.t) << "\n";
            rep << "p = " << fmt_double(cr.ttest.p) << "\n";
        } catch (const std::exception& e) {
            rep << "error = " << e.what() << "\n";
        }
    }

    rep << "[config]\n" << config_echo(config);
    return art;
}

int run_experiment(const fs::path& config_path, const std::vector<std::string>& overrides) {
    try {
        RawConfig raw = load_config_file(config_path);
        apply_overrides(raw, overrides);
        const ExperimentConfig cfg = build_config(raw);
        if (cfg.run.corpus.empty()) throw ConfigError({"run.corpus: required for run"});
        const RunArtifacts art = execute_run(cfg);
        std::printf("run complete: best dev ndcg@10 %.4f (step %ld), test ndcg@10 %.4f -> %s\n",
                    art.result.best_dev_metric, art.result.best_step, art.mean_test_ndcg,
                    art.dir.string().c_str());
        return 0;
    } catch (const ConfigError& e) {
        nlohmann::json j{{"error", "config"}, {"problems", e.problems}};
        std::fprintf(stderr, "%s\n", j.dump().c_str());
        return 2;
    } catch (const std::exception& e) {
        nlohmann::json j{{"error", "runtime"}, {"message", e.what()}};
        std::fprintf(stderr, "%s\n", j.dump().c_str());
        return 3;
    }
}

std::vector<PerQueryScore> read_scores(const fs::path& run_dir) {
    const fs::path path = run_dir / "scores.csv";
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "split,devset,query_index,ndcg10,recall10")
        throw std::runtime_error("unexpected scores header in " + path.string());
    std::vector<PerQueryScore> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        PerQueryScore s;
        std::string field;
        std::getline(ss, s.split, ',');
        std::getline(ss, s.devset, ',');
        std::getline(ss, field, ',');
        s.query_index = std::stoi(field);
        std::getline(ss, field, ',');
        s.ndcg = std::stod(field);
        std::getline(ss, field, ',');
        s.recall = std::stod(field);
        out.push_back(std::move(s));
    }
    return out;
}

CompareResult compare_runs(const fs::path& run_a, const fs::path& run_b,
                           const std::string& split) {
    const auto sa = read_scores(run_a);
    const auto sb = read_scores(run_b);
    std::map<std::pair<std::string, int>, double> by_query;
    for (const auto& s : sb)
        if (s.split == split) by_query[{s.devset, s.query_index}] = s.ndcg;

    std::vector<double> a, b;
    for (const auto& s : sa) {
        if (s.split != split) continue;
        auto it = by_query.find({s.devset, s.query_index});
        if (it == by_query.end()) continue;
        a.push_back(s.ndcg);
        b.push_back(it->second);
    }
    if (a.size() < 2)
        throw std::runtime_error("compare_runs: fewer than 2 matched queries on split '" + split +
                                 "'");
    CompareResult cr;
    cr.n = a.size();
    for (double v : a) cr.mean_a += v;
    for (double v : b) cr.mean_b += v;
    cr.mean_a /= static_cast<double>(cr.n);
    cr.mean_b /= static_cast<double>(cr.n);
    cr.ttest = paired_t_test(a, b);
    return cr;
}

std::vector<Corpus> resample_splits(const Corpus& corpus, int folds, Rng& rng) {
    if (folds < 1) throw std::invalid_argument("resample_splits: folds must be >= 1");

    // dev pairs merge into their aligned training domain
    std::map<std::string, int> domain_by_name;
    for (const auto& d : corpus.train) domain_by_name[d.name] = d.id;
    std::vector<std::vector<int>> devsets_of_domain(corpus.train.size());
    for (const auto& ds : corpus.dev) {
        auto it = domain_by_name.find(ds.aligned_domain);
        if (it == domain_by_name.end())
            throw std::runtime_error("resample_splits: dev set '" + ds.name +
                                     "' has no domain alignment (manifest field 'domain')");
        devsets_of_domain[it->second].push_back(ds.id);
    }

    auto dev_pairs_of = [&](const DevSet& ds) {
        std::vector<TextPair> pairs;
        for (const auto& q : ds.queries) {
            for (const auto& [pid, g] : q.qrels) {
                if (g > 0) {
                    pairs.emplace_back(q.text, ds.passages[ds.passage_index.at(pid)].second);
                    break;
                }
            }
        }
        return pairs;
    };

    std::vector<Corpus> out;
    for (int f = 0; f < folds; ++f) {
        Rng fold_rng = rng.split(static_cast<uint64_t>(f));
        Corpus fold;
        fold.test = corpus.test;

        for (const auto& domain : corpus.train) {
            // merged pool: original train pairs + aligned dev pairs
            std::vector<TextPair> pool = domain.pairs;
            for (int dsid : devsets_of_domain[domain.id]) {
                const auto extra = dev_pairs_of(corpus.dev[dsid]);
                pool.insert(pool.end(), extra.begin(), extra.end());
            }
            for (size_t i = pool.size(); i > 1; --i)
                std::swap(pool[i - 1], pool[fold_rng.below(i)]);

            DomainDataset nd;
            nd.id = domain.id;
            nd.name = domain.name;
            nd.pairs.assign(pool.begin(), pool.begin() + static_cast<long>(domain.size()));
            fold.train.push_back(std::move(nd));

            // remainder becomes the fold's dev, round-robin over the domain's
            // dev sets, reusing each set's frozen non-relevant passages
            const auto& aligned = devsets_of_domain[domain.id];
            if (aligned.empty()) continue;
            std::vector<std::vector<TextPair>> per_set(aligned.size());
            size_t slot = 0;
            for (size_t i = domain.size(); i < pool.size(); ++i) {
                per_set[slot % aligned.size()].push_back(pool[i]);
                ++slot;
            }
            for (size_t a = 0; a < aligned.size(); ++a) {
                const DevSet& orig = corpus.dev[aligned[a]];
                if (per_set[a].empty())
                    throw std::runtime_error(
                        "resample_splits: dev set '" + orig.name +
                        "' too small to leave a nonempty fold dev");
                DevSet nds;
                nds.id = static_cast<int>(fold.dev.size());
                nds.name = orig.name;
                nds.aligned_domain = orig.aligned_domain;

                // relevant passage ids in the original set (to find distractors)
                std::set<std::string> relevant_ids;
                for (const auto& q : orig.queries)
                    for (const auto& [pid, g] : q.qrels)
                        if (g > 0) relevant_ids.insert(pid);

                char buf[32];
                for (size_t i = 0; i < per_set[a].size(); ++i) {
                    std::snprintf(buf, sizeof(buf), "p%04zu", i);
                    DevQuery q;
                    q.text = per_set[a][i].first;
                    q.qrels[buf] = 1;
                    nds.passage_index[buf] = nds.passages.size();
                    nds.passages.emplace_back(buf, per_set[a][i].second);
                    nds.queries.push_back(std::move(q));
                }
                for (const auto& [pid, text] : orig.passages) {
                    if (relevant_ids.count(pid)) continue;
                    const std::string nid = "x-" + pid;
                    nds.passage_index[nid] = nds.passages.size();
                    nds.passages.emplace_back(nid, text);
                }
                fold.dev.push_back(std::move(nds));
            }
        }
        if (fold.dev.empty())
            throw std::runtime_error("resample_splits: no dev sets could be formed");
        out.push_back(std::move(fold));
    }
    return out;
}

}  // namespace infdds
