#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "infdds/corpus.hpp"

namespace infdds {

namespace {

constexpr uint64_t kPairStream = 0x70;
constexpr uint64_t kDevStream = 0xD0;
constexpr uint64_t kTestStream = 0xE0;

std::string tok(const char* prefix, int i) { return prefix + std::to_string(i); }

struct DomainVocab {
    std::vector<std::string> topical;
    std::vector<std::string> common;

    std::string draw_topical(Rng& rng) const { return topical[rng.below(topical.size())]; }
    std::string draw_common(Rng& rng) const { return common[rng.below(common.size())]; }
};

std::string join(std::vector<std::string> parts, Rng& rng) {
    // shuffle token order so position carries no signal
    for (size_t i = parts.size(); i > 1; --i) std::swap(parts[i - 1], parts[rng.below(i)]);
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ' ';
        out += parts[i];
    }
    return out;
}

// A concept is a pair of topical tokens shared between a query and its
// positive; retrieval quality on a domain hinges on resolving its concepts.
struct Concept {
    std::string a, b;
};

Concept draw_concept(const DomainVocab& v, Rng& rng) {
    Concept c;
    c.a = v.draw_topical(rng);
    do {
        c.b = v.draw_topical(rng);
    } while (c.b == c.a);
    return c;
}

std::string make_query(const Concept& c, const DomainVocab& v, Rng& rng) {
    return join({c.a, c.b, v.draw_common(rng)}, rng);
}

std::string make_positive(const Concept& c, const DomainVocab& v, Rng& rng) {
    return join({c.a, c.b, v.draw_topical(rng), v.draw_common(rng)}, rng);
}

std::string make_offtopic(const DomainVocab& v, Rng& rng) {
    return join({v.draw_topical(rng), v.draw_topical(rng), v.draw_topical(rng),
                 v.draw_common(rng)},
                rng);
}

DevSet make_devset(int id, const std::string& name, int target, int n_queries,
                   int n_distractors, const std::vector<DomainVocab>& vocabs, Rng rng) {
    const DomainVocab& tv = vocabs[target];
    DevSet ds;
    ds.id = id;
    ds.name = name;

    char buf[32];
    for (int i = 0; i < n_queries; ++i) {
        Concept c = draw_concept(tv, rng);
        DevQuery q;
        q.text = make_query(c, tv, rng);
        std::snprintf(buf, sizeof(buf), "p%04d", i);
        q.qrels[buf] = 1;
        ds.passage_index[buf] = ds.passages.size();
        ds.passages.emplace_back(buf, make_positive(c, tv, rng));
        ds.queries.push_back(std::move(q));

        // two hard distractors sharing one concept token each
        for (int h = 0; h < 2; ++h) {
            std::snprintf(buf, sizeof(buf), "h%04d-%d", i, h);
            std::string text = join({h == 0 ? c.a : c.b, tv.draw_topical(rng),
                                     tv.draw_topical(rng), tv.draw_common(rng)},
                                    rng);
            ds.passage_index[buf] = ds.passages.size();
            ds.passages.emplace_back(buf, std::move(text));
        }
    }
    // easy distractors cycle over every domain's distribution, frozen here
    for (int i = 0; i < n_distractors; ++i) {
        std::snprintf(buf, sizeof(buf), "d%04d", i);
        const DomainVocab& dv = vocabs[i % vocabs.size()];
        ds.passage_index[buf] = ds.passages.size();
        ds.passages.emplace_back(buf, make_offtopic(dv, rng));
    }
    return ds;
}

}  // namespace

Corpus generate_synthetic(const SynthSpec& spec) {
    if (spec.domains < 1) throw std::invalid_argument("generate_synthetic: domains must be >= 1");
    if (spec.topical_tokens_per_domain < 2)
        throw std::invalid_argument("generate_synthetic: need >= 2 topical tokens per domain");
    if (spec.topical_overlap < 0.0 || spec.topical_overlap >= 1.0)
        throw std::invalid_argument("generate_synthetic: topical_overlap must be in [0,1)");

    const int t = spec.topical_tokens_per_domain;
    const int stride =
        std::max(1, static_cast<int>(std::lround(t * (1.0 - spec.topical_overlap))));
    const int topical_needed = (spec.domains - 1) * stride + t;
    if (spec.common_tokens + topical_needed > spec.vocab_tokens)
        throw std::runtime_error(
            "generate_synthetic: vocab too small for requested topical partition (need " +
            std::to_string(spec.common_tokens + topical_needed) + " tokens, have " +
            std::to_string(spec.vocab_tokens) + ")");

    std::vector<std::string> common;
    for (int i = 0; i < spec.common_tokens; ++i) common.push_back(tok("c", i));

    std::vector<DomainVocab> vocabs(spec.domains);
    for (int d = 0; d < spec.domains; ++d) {
        vocabs[d].common = common;
        for (int i = 0; i < t; ++i) vocabs[d].topical.push_back(tok("t", d * stride + i));
    }

    Rng root(spec.seed);
    Corpus corpus;
    for (int d = 0; d < spec.domains; ++d) {
        DomainDataset ds;
        ds.id = d;
        ds.name = "domain" + std::to_string(d);
        Rng rng = root.split(kPairStream + static_cast<uint64_t>(d));
        for (int i = 0; i < spec.pairs_per_domain; ++i) {
            Concept c = draw_concept(vocabs[d], rng);
            ds.pairs.emplace_back(make_query(c, vocabs[d], rng),
                                  make_positive(c, vocabs[d], rng));
        }
        corpus.train.push_back(std::move(ds));
    }

    int dev_id = 0, test_id = 0;
    for (int target : spec.dev_target_domains) {
        if (target < 0 || target >= spec.domains)
            throw std::invalid_argument("generate_synthetic: dev target domain out of range");
        const std::string dom = "domain" + std::to_string(target);
        DevSet dev = make_devset(dev_id, "dev-" + dom, target, spec.dev_queries,
                                 spec.distractor_passages, vocabs,
                                 root.split(kDevStream + static_cast<uint64_t>(target)));
        dev.aligned_domain = dom;
        corpus.dev.push_back(std::move(dev));
        ++dev_id;

        DevSet test = make_devset(test_id, "test-" + dom, target, spec.test_queries,
                                  spec.distractor_passages, vocabs,
                                  root.split(kTestStream + static_cast<uint64_t>(target)));
        test.aligned_domain = dom;
        corpus.test.push_back(std::move(test));
        ++test_id;
    }
    return corpus;
}

std::filesystem::path write_synthetic(const SynthSpec& spec, const std::filesystem::path& dir) {
    Corpus corpus = generate_synthetic(spec);
    write_corpus(corpus, dir);
    return dir / "manifest.json";
}

}  // namespace infdds
