// Experiment driver: synthetic data generation, training runs, evaluation,
// trajectory plots, run comparison, and train/dev resampling.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "infdds/config.hpp"
#include "infdds/plot.hpp"
#include "infdds/runner.hpp"

namespace fs = std::filesystem;
using namespace infdds;

int main(int argc, char** argv) {
    CLI::App app{"infdds: influence-guided dynamic data sampling experiments"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic multi-domain corpus");
    SynthSpec spec;
    std::string gen_out = "data/synthetic4";
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--domains", spec.domains, "number of training domains");
    gen->add_option("--pairs", spec.pairs_per_domain, "pairs per domain");
    gen->add_option("--vocab", spec.vocab_tokens, "token universe size");
    gen->add_option("--topical", spec.topical_tokens_per_domain, "topical tokens per domain");
    gen->add_option("--common", spec.common_tokens, "shared filler tokens");
    gen->add_option("--overlap", spec.topical_overlap, "topical overlap fraction in [0,1)");
    gen->add_option("--dev-targets", spec.dev_target_domains, "dev/test target domain ids");
    gen->add_option("--dev-queries", spec.dev_queries, "queries per dev set");
    gen->add_option("--test-queries", spec.test_queries, "queries per test set");
    gen->add_option("--distractors", spec.distractor_passages, "easy distractors per set");
    gen->add_option("--seed", spec.seed, "generator seed");

    // run
    auto* run = app.add_subcommand("run", "run a training experiment from a config file");
    std::string config_path;
    std::vector<std::string> overrides;
    run->add_option("--config", config_path, "config file")->required();
    run->add_option("--set", overrides, "override config keys (section.key=value)");

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
    std::string ckpt_path, eval_corpus, eval_split = "test";
    ev->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    ev->add_option("--corpus", eval_corpus, "corpus manifest")->required();
    ev->add_option("--split", eval_split, "dev or test");

    // plot
    auto* plot = app.add_subcommand("plot", "render trajectory CSV as SVG");
    std::string csv_path, svg_path;
    plot->add_option("--csv", csv_path, "trajectory csv")->required();
    plot->add_option("--out", svg_path, "output svg")->required();

    // compare
    auto* cmp = app.add_subcommand("compare", "paired t-test between two runs");
    std::string run_a, run_b, cmp_split = "test";
    cmp->add_option("--a", run_a, "first run directory")->required();
    cmp->add_option("--b", run_b, "second run directory")->required();
    cmp->add_option("--split", cmp_split, "dev or test");

    // resample
    auto* rs = app.add_subcommand("resample", "write resampled train/dev folds");
    std::string rs_corpus, rs_out = "data/folds";
    int rs_folds = 5;
    uint64_t rs_seed = 1;
    rs->add_option("--corpus", rs_corpus, "corpus manifest")->required();
    rs->add_option("--folds", rs_folds, "number of folds");
    rs->add_option("--out", rs_out, "output directory root");
    rs->add_option("--seed", rs_seed, "resampling seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const fs::path manifest = write_synthetic(spec, gen_out);
            std::printf("wrote corpus: %s\n", manifest.string().c_str());
            return 0;
        }
        if (run->parsed()) {
            return run_experiment(config_path, overrides);
        }
        if (ev->parsed()) {
            const ModelParams params = load_checkpoint(ckpt_path);
            const Corpus corpus = load_corpus(eval_corpus);
            const auto& sets = eval_split == "dev" ? corpus.dev : corpus.test;
            if (sets.empty()) {
                std::fprintf(stderr, "no %s sets in corpus\n", eval_split.c_str());
                return 3;
            }
            double sum = 0.0;
            for (const auto& ds : sets) {
                const EvalResult res = evaluate_retrieval(params, ds, 10);
                std::printf("%s ndcg@10 = %.4f recall@10 = %.4f (%zu queries, %zu skipped)\n",
                            ds.name.c_str(), res.mean_ndcg, res.mean_recall, res.queries_scored,
                            res.queries_skipped);
                sum += res.mean_ndcg;
            }
            std::printf("mean ndcg@10 = %.4f\n", sum / static_cast<double>(sets.size()));
            return 0;
        }
        if (plot->parsed()) {
            plot_trajectories(fs::path(csv_path), fs::path(svg_path));
            std::printf("wrote plot: %s\n", svg_path.c_str());
            return 0;
        }
        if (cmp->parsed()) {
            const CompareResult cr = compare_runs(run_a, run_b, cmp_split);
            std::printf("split=%s n=%zu mean_a=%.4f mean_b=%.4f t=%.4f p=%.6g\n",
                        cmp_split.c_str(), cr.n, cr.mean_a, cr.mean_b, cr.ttest.t, cr.ttest.p);
            return 0;
        }
        if (rs->parsed()) {
            const Corpus corpus = load_corpus(rs_corpus);
            Rng rng(rs_seed);
            const auto folds = resample_splits(corpus, rs_folds, rng);
            for (size_t f = 0; f < folds.size(); ++f) {
                const fs::path dir = fs::path(rs_out) / ("fold" + std::to_string(f));
                write_corpus(folds[f], dir);
                std::printf("wrote fold %zu: %s\n", f, (dir / "manifest.json").string().c_str());
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 1;
}
