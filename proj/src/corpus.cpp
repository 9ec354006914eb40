#include "infdds/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace infdds {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_or_throw(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open file: " + p.string());
    return in;
}

json parse_line(const std::string& line, const fs::path& file, size_t lineno) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::runtime_error("malformed record at " + file.string() + ":" +
                                 std::to_string(lineno));
    }
    return j;
}

std::vector<TextPair> load_pairs(const fs::path& file) {
    auto in = open_or_throw(file);
    std::vector<TextPair> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse_line(line, file, lineno);
        if (!j.contains("q") || !j.contains("p") || !j["q"].is_string() || !j["p"].is_string())
            throw std::runtime_error("malformed record at " + file.string() + ":" +
                                     std::to_string(lineno) + " (need string fields q, p)");
        out.emplace_back(j["q"].get<std::string>(), j["p"].get<std::string>());
    }
    return out;
}

DevSet load_devset(int id, const std::string& name, const fs::path& queries_file,
                   const fs::path& passages_file, const std::string& aligned_domain) {
    DevSet ds;
    ds.id = id;
    ds.name = name;
    ds.aligned_domain = aligned_domain;

    {
        auto in = open_or_throw(passages_file);
        std::string line;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            json j = parse_line(line, passages_file, lineno);
            if (!j.contains("id") || !j.contains("text"))
                throw std::runtime_error("malformed record at " + passages_file.string() + ":" +
                                         std::to_string(lineno) + " (need id, text)");
            std::string pid = j["id"].get<std::string>();
            if (ds.passage_index.count(pid))
                throw std::runtime_error("duplicate passage id '" + pid + "' in " +
                                         passages_file.string());
            ds.passage_index[pid] = ds.passages.size();
            ds.passages.emplace_back(std::move(pid), j["text"].get<std::string>());
        }
    }
    {
        auto in = open_or_throw(queries_file);
        std::string line;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            json j = parse_line(line, queries_file, lineno);
            if (!j.contains("q") || !j.contains("qrels") || !j["qrels"].is_object())
                throw std::runtime_error("malformed record at " + queries_file.string() + ":" +
                                         std::to_string(lineno) + " (need q, qrels)");
            DevQuery q;
            q.text = j["q"].get<std::string>();
            for (auto& [pid, grade] : j["qrels"].items()) {
                if (!ds.passage_index.count(pid))
                    throw std::runtime_error("qrels references unknown passage id '" + pid +
                                             "' at " + queries_file.string() + ":" +
                                             std::to_string(lineno));
                q.qrels[pid] = grade.get<int>();
            }
            ds.queries.push_back(std::move(q));
        }
    }

    const bool any_relevant = std::any_of(ds.queries.begin(), ds.queries.end(), [](const DevQuery& q) {
        return std::any_of(q.qrels.begin(), q.qrels.end(), [](auto& kv) { return kv.second > 0; });
    });
    if (!any_relevant)
        throw std::runtime_error("dev set '" + name + "' has no query with a relevant passage");
    return ds;
}

void check_unique_names(const std::vector<std::string>& names, const std::string& split) {
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (!seen.insert(n).second)
            throw std::runtime_error("duplicate " + split + " name '" + n + "' in manifest");
    }
}

}  // namespace

std::vector<size_t> Corpus::train_sizes() const {
    std::vector<size_t> out;
    out.reserve(train.size());
    for (const auto& d : train) out.push_back(d.size());
    return out;
}

Corpus load_corpus(const fs::path& manifest_path) {
    auto in = open_or_throw(manifest_path);
    json m = json::parse(in, nullptr, false);
    if (m.is_discarded() || !m.is_object())
        throw std::runtime_error("malformed manifest: " + manifest_path.string());
    const fs::path base = manifest_path.parent_path();

    Corpus corpus;
    std::vector<std::string> train_names, dev_names;

    if (!m.contains("train") || !m["train"].is_array() || m["train"].empty())
        throw std::runtime_error("manifest needs a nonempty train list");
    for (const auto& e : m["train"]) {
        DomainDataset d;
        d.id = static_cast<int>(corpus.train.size());
        d.name = e.at("name").get<std::string>();
        d.pairs = load_pairs(base / e.at("pairs").get<std::string>());
        if (d.pairs.empty())
            throw std::runtime_error("train dataset '" + d.name + "' is empty");
        train_names.push_back(d.name);
        corpus.train.push_back(std::move(d));
    }
    check_unique_names(train_names, "train");

    auto load_dev_list = [&](const char* key, std::vector<DevSet>& out) {
        if (!m.contains(key)) return;
        for (const auto& e : m[key]) {
            std::string aligned;
            if (e.contains("domain")) aligned = e["domain"].get<std::string>();
            out.push_back(load_devset(static_cast<int>(out.size()),
                                      e.at("name").get<std::string>(),
                                      base / e.at("queries").get<std::string>(),
                                      base / e.at("passages").get<std::string>(), aligned));
            dev_names.push_back(out.back().name);
        }
    };
    load_dev_list("dev", corpus.dev);
    load_dev_list("test", corpus.test);
    check_unique_names(dev_names, "dev/test");

    if (corpus.dev.empty()) throw std::runtime_error("manifest needs at least one dev set");
    return corpus;
}

void write_corpus(const Corpus& corpus, const fs::path& dir) {
    fs::create_directories(dir);
    json manifest;

    auto write_pairs = [&](const DomainDataset& d) {
        const std::string fname = d.name + ".pairs.jsonl";
        std::ofstream out(dir / fname);
        for (const auto& [q, p] : d.pairs) out << json{{"q", q}, {"p", p}}.dump() << "\n";
        return fname;
    };
    auto write_devset = [&](const DevSet& ds) {
        const std::string qf = ds.name + ".queries.jsonl";
        const std::string pf = ds.name + ".passages.jsonl";
        {
            std::ofstream out(dir / pf);
            for (const auto& [pid, text] : ds.passages)
                out << json{{"id", pid}, {"text", text}}.dump() << "\n";
        }
        {
            std::ofstream out(dir / qf);
            for (const auto& q : ds.queries) {
                json qr = json::object();
                for (const auto& [pid, g] : q.qrels) qr[pid] = g;
                out << json{{"q", q.text}, {"qrels", qr}}.dump() << "\n";
            }
        }
        json e{{"name", ds.name}, {"queries", qf}, {"passages", pf}};
        if (!ds.aligned_domain.empty()) e["domain"] = ds.aligned_domain;
        return e;
    };

    manifest["train"] = json::array();
    for (const auto& d : corpus.train)
        manifest["train"].push_back({{"name", d.name}, {"pairs", write_pairs(d)}});
    manifest["dev"] = json::array();
    for (const auto& ds : corpus.dev) manifest["dev"].push_back(write_devset(ds));
    manifest["test"] = json::array();
    for (const auto& ds : corpus.test) manifest["test"].push_back(write_devset(ds));

    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
}

std::vector<TextPair> sample_batch(const DomainDataset& dataset, size_t batch_size, Rng& rng) {
    if (dataset.pairs.empty()) throw std::runtime_error("sample_batch: empty dataset");
    if (batch_size == 0) throw std::invalid_argument("sample_batch: batch_size must be >= 1");

    std::vector<TextPair> batch;
    batch.reserve(batch_size);
    const size_t n = dataset.pairs.size();
    if (batch_size > n) {
        for (size_t i = 0; i < batch_size; ++i)
            batch.push_back(dataset.pairs[rng.below(n)]);
    } else {
        // partial Fisher-Yates: first batch_size entries of a seeded shuffle
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        for (size_t i = 0; i < batch_size; ++i) {
            const size_t j = i + rng.below(n - i);
            std::swap(idx[i], idx[j]);
            batch.push_back(dataset.pairs[idx[i]]);
        }
    }
    return batch;
}

}  // namespace infdds
