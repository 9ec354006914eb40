#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "infdds/corpus.hpp"
#include "infdds/eval.hpp"
#include "infdds/retriever.hpp"

using namespace infdds;
namespace fs = std::filesystem;

namespace {

fs::path make_tmp_dir(const char* tag) {
    fs::path dir = fs::temp_directory_path() / (std::string("infdds-test-") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

std::set<std::string> topical_tokens_of(const DomainDataset& d) {
    std::set<std::string> out;
    for (const auto& [q, p] : d.pairs) {
        std::stringstream ss(q + " " + p);
        std::string tok;
        while (ss >> tok)
            if (tok[0] == 't') out.insert(tok);
    }
    return out;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("load_corpus: two-domain fixture") {
    const fs::path dir = make_tmp_dir("fixture");
    write_file(dir / "a.jsonl",
               R"({"q":"alpha one","p":"alpha body one"}
{"q":"alpha two","p":"alpha body two"}
{"q":"alpha three","p":"alpha body three"}
)");
    write_file(dir / "b.jsonl",
               R"({"q":"beta one","p":"beta body one"}
{"q":"beta two","p":"beta body two"}
{"q":"beta three","p":"beta body three"}
)");
    write_file(dir / "dev.passages.jsonl",
               R"({"id":"p1","text":"alpha body one"}
{"id":"p2","text":"beta body one"}
)");
    write_file(dir / "dev.queries.jsonl",
               R"({"q":"alpha one","qrels":{"p1":1}}
)");
    write_file(dir / "manifest.json", R"({
      "train": [{"name":"alpha","pairs":"a.jsonl"}, {"name":"beta","pairs":"b.jsonl"}],
      "dev": [{"name":"dev0","queries":"dev.queries.jsonl","passages":"dev.passages.jsonl"}]
    })");

    const Corpus c = load_corpus(dir / "manifest.json");
    REQUIRE(c.train.size() == 2);
    CHECK(c.train[0].name == "alpha");
    CHECK(c.train[0].id == 0);
    CHECK(c.train[1].id == 1);
    CHECK(c.train[0].size() == 3);
    CHECK(c.train[1].size() == 3);
    CHECK(c.dev.size() == 1);

    // order-stable reload
    const Corpus c2 = load_corpus(dir / "manifest.json");
    CHECK(c2.train[0].name == c.train[0].name);
    CHECK(c2.train[1].name == c.train[1].name);
}

TEST_CASE("load_corpus: dangling qrels id is an error naming the id") {
    const fs::path dir = make_tmp_dir("dangling");
    write_file(dir / "a.jsonl", R"({"q":"x","p":"y"}
)");
    write_file(dir / "dev.passages.jsonl", R"({"id":"p1","text":"y"}
)");
    write_file(dir / "dev.queries.jsonl", R"({"q":"x","qrels":{"ghost-17":1}}
)");
    write_file(dir / "manifest.json", R"({
      "train": [{"name":"a","pairs":"a.jsonl"}],
      "dev": [{"name":"dev0","queries":"dev.queries.jsonl","passages":"dev.passages.jsonl"}]
    })");
    CHECK_THROWS_WITH_AS(load_corpus(dir / "manifest.json"), doctest::Contains("ghost-17"),
                         std::runtime_error);
}

TEST_CASE("load_corpus: malformed line reports file and line number") {
    const fs::path dir = make_tmp_dir("malformed");
    write_file(dir / "a.jsonl", "{\"q\":\"x\",\"p\":\"y\"}\nnot json at all\n");
    write_file(dir / "manifest.json", R"({"train":[{"name":"a","pairs":"a.jsonl"}],"dev":[]})");
    CHECK_THROWS_WITH_AS(load_corpus(dir / "manifest.json"), doctest::Contains("a.jsonl:2"),
                         std::runtime_error);
}

TEST_CASE("load_corpus: duplicate passage ids rejected") {
    const fs::path dir = make_tmp_dir("dup");
    write_file(dir / "a.jsonl", R"({"q":"x","p":"y"}
)");
    write_file(dir / "dev.passages.jsonl",
               "{\"id\":\"p1\",\"text\":\"y\"}\n{\"id\":\"p1\",\"text\":\"z\"}\n");
    write_file(dir / "dev.queries.jsonl", R"({"q":"x","qrels":{"p1":1}}
)");
    write_file(dir / "manifest.json", R"({
      "train": [{"name":"a","pairs":"a.jsonl"}],
      "dev": [{"name":"dev0","queries":"dev.queries.jsonl","passages":"dev.passages.jsonl"}]
    })");
    CHECK_THROWS_WITH_AS(load_corpus(dir / "manifest.json"), doctest::Contains("p1"),
                         std::runtime_error);
}

TEST_CASE("round-trip: generate -> write -> load is structurally equal") {
    SynthSpec spec;
    spec.domains = 3;
    spec.pairs_per_domain = 20;
    spec.dev_queries = 8;
    spec.test_queries = 8;
    spec.distractor_passages = 12;
    spec.seed = 77;
    const Corpus a = generate_synthetic(spec);
    const fs::path dir = make_tmp_dir("roundtrip");
    write_corpus(a, dir);
    const Corpus b = load_corpus(dir / "manifest.json");

    REQUIRE(a.train.size() == b.train.size());
    for (size_t i = 0; i < a.train.size(); ++i) {
        CHECK(a.train[i].name == b.train[i].name);
        REQUIRE(a.train[i].pairs.size() == b.train[i].pairs.size());
        for (size_t j = 0; j < a.train[i].pairs.size(); ++j)
            CHECK(a.train[i].pairs[j] == b.train[i].pairs[j]);
    }
    REQUIRE(a.dev.size() == b.dev.size());
    for (size_t i = 0; i < a.dev.size(); ++i) {
        CHECK(a.dev[i].name == b.dev[i].name);
        CHECK(a.dev[i].aligned_domain == b.dev[i].aligned_domain);
        REQUIRE(a.dev[i].passages.size() == b.dev[i].passages.size());
        for (size_t j = 0; j < a.dev[i].passages.size(); ++j)
            CHECK(a.dev[i].passages[j] == b.dev[i].passages[j]);
        REQUIRE(a.dev[i].queries.size() == b.dev[i].queries.size());
        for (size_t j = 0; j < a.dev[i].queries.size(); ++j) {
            CHECK(a.dev[i].queries[j].text == b.dev[i].queries[j].text);
            CHECK(a.dev[i].queries[j].qrels == b.dev[i].queries[j].qrels);
        }
    }
    CHECK(a.test.size() == b.test.size());
}

TEST_CASE("sample_batch: singleton repeats, full size permutes, empty errors") {
    DomainDataset one{0, "one", {{"q", "p"}}};
    Rng rng(5);
    const auto batch = sample_batch(one, 4, rng);
    REQUIRE(batch.size() == 4);
    for (const auto& b : batch) CHECK(b == one.pairs[0]);

    DomainDataset four{1, "four", {{"q0", "p0"}, {"q1", "p1"}, {"q2", "p2"}, {"q3", "p3"}}};
    const auto perm = sample_batch(four, 4, rng);
    std::set<std::string> seen;
    for (const auto& [q, p] : perm) seen.insert(q);
    CHECK(seen.size() == 4);

    DomainDataset empty{2, "empty", {}};
    CHECK_THROWS_AS(sample_batch(empty, 1, rng), std::runtime_error);
}

TEST_CASE("sample_batch: draw frequencies uniform (chi-squared, alpha = 0.01)") {
    DomainDataset four{0, "four", {{"q0", "p0"}, {"q1", "p1"}, {"q2", "p2"}, {"q3", "p3"}}};
    Rng rng(123);
    const int n = 100000;
    std::map<std::string, int> counts;
    for (int i = 0; i < n; ++i) counts[sample_batch(four, 1, rng)[0].first] += 1;

    const double expect = n / 4.0;
    double chi2 = 0.0;
    for (const auto& [k, c] : counts) {
        CHECK(std::abs(c - expect) < 3.0 * std::sqrt(n * 0.25 * 0.75));
        chi2 += (c - expect) * (c - expect) / expect;
    }
    CHECK(chi2 < 11.345);  // chi2(df=3) critical value at alpha = 0.01
}

TEST_CASE("generate_synthetic: disjoint topical vocabularies at overlap 0") {
    SynthSpec spec;
    spec.domains = 4;
    spec.pairs_per_domain = 50;
    spec.topical_overlap = 0.0;
    spec.seed = 9;
    const Corpus c = generate_synthetic(spec);
    std::vector<std::set<std::string>> topical;
    for (const auto& d : c.train) topical.push_back(topical_tokens_of(d));
    for (size_t i = 0; i < topical.size(); ++i) {
        for (size_t j = i + 1; j < topical.size(); ++j) {
            for (const auto& tok : topical[i]) CHECK(topical[j].count(tok) == 0);
        }
    }
}

TEST_CASE("generate_synthetic: dev positives carry target-domain topical tokens") {
    SynthSpec spec;
    spec.domains = 3;
    spec.pairs_per_domain = 60;
    spec.dev_target_domains = {0};
    spec.dev_queries = 16;
    spec.seed = 4;
    const Corpus c = generate_synthetic(spec);
    const auto domain0 = topical_tokens_of(c.train[0]);
    REQUIRE(c.dev.size() == 1);
    CHECK(c.dev[0].aligned_domain == "domain0");
    for (const auto& q : c.dev[0].queries) {
        for (const auto& [pid, g] : q.qrels) {
            if (g <= 0) continue;
            const auto& text = c.dev[0].passages[c.dev[0].passage_index.at(pid)].second;
            std::stringstream ss(text);
            std::string tok;
            bool found = false;
            while (ss >> tok)
                if (domain0.count(tok)) found = true;
            CHECK(found);
        }
    }
}

TEST_CASE("generate_synthetic: fixed seed is bit-identical; vocab too small errors") {
    SynthSpec spec;
    spec.domains = 2;
    spec.pairs_per_domain = 10;
    spec.seed = 31;
    const Corpus a = generate_synthetic(spec);
    const Corpus b = generate_synthetic(spec);
    for (size_t i = 0; i < a.train.size(); ++i)
        CHECK(a.train[i].pairs == b.train[i].pairs);

    SynthSpec tiny = spec;
    tiny.vocab_tokens = 10;
    CHECK_THROWS_WITH_AS(generate_synthetic(tiny), doctest::Contains("vocab too small"),
                         std::runtime_error);
}

TEST_CASE("generate_synthetic: in-domain training beats off-domain on the target dev set") {
    SynthSpec spec;
    spec.domains = 3;
    spec.pairs_per_domain = 200;
    spec.dev_target_domains = {0};
    spec.dev_queries = 32;
    spec.distractor_passages = 96;
    spec.seed = 2;
    const Corpus c = generate_synthetic(spec);

    auto trained_ndcg = [&](int domain, uint64_t seed) {
        Rng rng(seed);
        Rng init = rng.split(0);
        ModelParams p = ModelParams::init(1024, 16, 16, 0.02, init);
        auto opt = OptimizerState::adam({0.02, 10, 0}, 0.9, 0.999, 1e-8, p.tensors_copy());
        Rng steps = rng.split(1);
        for (int s = 0; s < 200; ++s) train_step(p, opt, c.train[domain], 16, steps);
        return evaluate_retrieval(p, c.dev[0], 10).mean_ndcg;
    };

    double mean0 = 0.0, mean2 = 0.0;
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        mean0 += trained_ndcg(0, seed);
        mean2 += trained_ndcg(2, seed);
    }
    CHECK(mean0 / 5.0 > mean2 / 5.0);
}

}  // TEST_SUITE
