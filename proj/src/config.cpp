#include "infdds/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace infdds {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Collects every problem so the error names all offending keys at once.
struct Validator {
    const RawConfig& raw;
    std::vector<std::string> problems;
    std::map<std::string, std::set<std::string>> consumed;

    explicit Validator(const RawConfig& r) : raw(r) {}

    const std::string* find(const std::string& sec, const std::string& key) {
        consumed[sec].insert(key);
        auto s = raw.find(sec);
        if (s == raw.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second;
    }

    void bad(const std::string& sec, const std::string& key, const std::string& why) {
        problems.push_back(sec + "." + key + ": " + why);
    }

    void get_string(const std::string& sec, const std::string& key, std::string& out) {
        if (const auto* v = find(sec, key)) out = *v;
    }

    void get_double(const std::string& sec, const std::string& key, double& out) {
        const auto* v = find(sec, key);
        if (!v) return;
        if (*v == "inf") {
            out = std::numeric_limits<double>::infinity();
            return;
        }
        try {
            size_t pos = 0;
            const double d = std::stod(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("");
            out = d;
        } catch (...) {
            bad(sec, key, "expected a number, got '" + *v + "'");
        }
    }

    void get_long(const std::string& sec, const std::string& key, long& out) {
        const auto* v = find(sec, key);
        if (!v) return;
        try {
            size_t pos = 0;
            const long d = std::stol(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("");
            out = d;
        } catch (...) {
            bad(sec, key, "expected an integer, got '" + *v + "'");
        }
    }

    void get_size(const std::string& sec, const std::string& key, size_t& out) {
        long tmp = static_cast<long>(out);
        get_long(sec, key, tmp);
        if (tmp < 0) {
            bad(sec, key, "must be >= 0");
            return;
        }
        out = static_cast<size_t>(tmp);
    }

    void get_u64(const std::string& sec, const std::string& key, uint64_t& out) {
        const auto* v = find(sec, key);
        if (!v) return;
        try {
            size_t pos = 0;
            const unsigned long long d = std::stoull(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("");
            out = d;
        } catch (...) {
            bad(sec, key, "expected an unsigned integer, got '" + *v + "'");
        }
    }

    void get_bool(const std::string& sec, const std::string& key, bool& out) {
        const auto* v = find(sec, key);
        if (!v) return;
        if (*v == "true") out = true;
        else if (*v == "false") out = false;
        else bad(sec, key, "expected true/false, got '" + *v + "'");
    }

    void get_weights(const std::string& sec, const std::string& key, std::vector<double>& out) {
        const auto* v = find(sec, key);
        if (!v || v->empty()) return;
        std::vector<double> parsed;
        std::stringstream ss(*v);
        std::string item;
        bool ok = true;
        while (std::getline(ss, item, ',')) {
            try {
                size_t pos = 0;
                item = trim(item);
                parsed.push_back(std::stod(item, &pos));
                if (pos != item.size()) throw std::invalid_argument("");
            } catch (...) {
                ok = false;
            }
        }
        if (!ok || parsed.empty())
            bad(sec, key, "expected a comma-separated number list, got '" + *v + "'");
        else
            out = std::move(parsed);
    }

    void flag_unknown() {
        for (const auto& [sec, kv] : raw) {
            auto it = consumed.find(sec);
            if (it == consumed.end()) {
                problems.push_back(sec + ": unknown section");
                continue;
            }
            for (const auto& [key, val] : kv) {
                (void)val;
                if (!it->second.count(key)) problems.push_back(sec + "." + key + ": unknown key");
            }
        }
    }
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> probs)
    : std::runtime_error("config validation failed:\n  " + [&probs] {
          std::string joined;
          for (size_t i = 0; i < probs.size(); ++i) {
              if (i) joined += "\n  ";
              joined += probs[i];
          }
          return joined;
      }()),
      problems(std::move(probs)) {}

RawConfig parse_config_text(const std::string& text, const std::string& origin) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line, section;
    size_t lineno = 0;
    std::vector<std::string> problems;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            raw[section];
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos || section.empty()) {
            problems.push_back(origin + ":" + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        raw[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return raw;
}

RawConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

void apply_overrides(RawConfig& raw, const std::vector<std::string>& overrides) {
    std::vector<std::string> problems;
    for (const auto& spec : overrides) {
        const size_t eq = spec.find('=');
        const size_t dot = spec.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
            problems.push_back("--set '" + spec + "': expected section.key=value");
            continue;
        }
        raw[trim(spec.substr(0, dot))][trim(spec.substr(dot + 1, eq - dot - 1))] =
            trim(spec.substr(eq + 1));
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
}

ExperimentConfig build_config(const RawConfig& raw) {
    ExperimentConfig cfg;
    Validator v(raw);

    v.get_string("run", "corpus", cfg.run.corpus);
    v.get_string("run", "out_dir", cfg.run.out_dir);
    v.get_string("run", "compare_to", cfg.run.compare_to);
    if (cfg.run.out_dir.empty()) {
        const char* env = std::getenv("INFDDS_OUT_DIR");
        cfg.run.out_dir = env ? env : "runs";
    }
    std::string strat = strategy_name(cfg.train.strategy);
    v.get_string("run", "strategy", strat);
    try {
        cfg.train.strategy = strategy_from_name(strat);
    } catch (const std::exception&) {
        v.bad("run", "strategy", "expected static|cooldown|inf-dds|grad-align, got '" + strat + "'");
    }
    v.get_u64("run", "seed", cfg.train.seed);
    v.get_long("run", "total_steps", cfg.train.total_steps);
    v.get_size("run", "batch_size", cfg.train.batch_size);
    v.get_long("run", "eval_every", cfg.train.eval_every);

    v.get_size("model", "vocab_buckets", cfg.train.model.vocab_buckets);
    v.get_size("model", "d", cfg.train.model.d);
    v.get_size("model", "d_out", cfg.train.model.d_out);
    v.get_double("model", "t_sim", cfg.train.model.t_sim);

    std::string kind = cfg.train.optim.kind == OptKind::Adam ? "adam" : "sgd";
    v.get_string("optimizer", "kind", kind);
    if (kind == "adam") cfg.train.optim.kind = OptKind::Adam;
    else if (kind == "sgd") cfg.train.optim.kind = OptKind::SgdMomentum;
    else v.bad("optimizer", "kind", "expected adam|sgd, got '" + kind + "'");
    v.get_double("optimizer", "base_lr", cfg.train.optim.base_lr);
    v.get_long("optimizer", "warmup_steps", cfg.train.optim.warmup_steps);
    v.get_long("optimizer", "decay_horizon", cfg.train.optim.decay_horizon);
    v.get_double("optimizer", "momentum", cfg.train.optim.momentum);
    v.get_double("optimizer", "beta1", cfg.train.optim.beta1);
    v.get_double("optimizer", "beta2", cfg.train.optim.beta2);
    v.get_double("optimizer", "eps", cfg.train.optim.eps);

    v.get_string("sampler", "init", cfg.train.sampler.init);
    if (cfg.train.sampler.init != "temperature" && cfg.train.sampler.init != "weights")
        v.bad("sampler", "init", "expected temperature|weights, got '" + cfg.train.sampler.init + "'");
    v.get_double("sampler", "tau", cfg.train.sampler.tau);
    v.get_weights("sampler", "weights", cfg.train.sampler.weights);
    v.get_double("sampler", "scorer_lr", cfg.train.sampler.scorer_lr);
    std::string mode =
        cfg.train.sampler.mode == ScorerMode::ConditionalLogProb ? "conditional" : "full";
    v.get_string("sampler", "mode", mode);
    if (mode == "conditional") cfg.train.sampler.mode = ScorerMode::ConditionalLogProb;
    else if (mode == "full") cfg.train.sampler.mode = ScorerMode::FullLogProb;
    else v.bad("sampler", "mode", "expected conditional|full, got '" + mode + "'");
    v.get_bool("sampler", "center_rewards", cfg.train.sampler.center_rewards);
    v.get_bool("sampler", "ascend", cfg.train.sampler.ascend);

    v.get_long("meta", "warmup_steps", cfg.train.meta.warmup_steps);
    v.get_long("meta", "update_every", cfg.train.meta.update_every);
    long l = cfg.train.meta.l;
    v.get_long("meta", "l", l);
    cfg.train.meta.l = static_cast<int>(l);
    v.get_size("meta", "subsample_size", cfg.train.meta.subsample_size);
    std::string weighting =
        cfg.train.meta.weighting == ReptileWeighting::SoftmaxTau ? "softmax" : "reward-normalized";
    v.get_string("meta", "weighting", weighting);
    if (weighting == "softmax") cfg.train.meta.weighting = ReptileWeighting::SoftmaxTau;
    else if (weighting == "reward-normalized")
        cfg.train.meta.weighting = ReptileWeighting::RewardNormalized;
    else v.bad("meta", "weighting", "expected softmax|reward-normalized, got '" + weighting + "'");
    v.get_double("meta", "reptile_tau", cfg.train.meta.reptile_tau);
    v.get_bool("meta", "reptile_enabled", cfg.train.meta.reptile_enabled);
    std::string metric =
        cfg.train.meta.metric == InfluenceMetric::NegInfoNce ? "neg-infonce" : "ndcg";
    v.get_string("meta", "metric", metric);
    if (metric == "neg-infonce") cfg.train.meta.metric = InfluenceMetric::NegInfoNce;
    else if (metric == "ndcg") cfg.train.meta.metric = InfluenceMetric::NdcgAt10;
    else v.bad("meta", "metric", "expected neg-infonce|ndcg, got '" + metric + "'");
    v.get_size("meta", "dev_batch_size", cfg.train.meta.dev_batch_size);
    v.get_bool("meta", "per_step_accumulation", cfg.train.meta.per_step_accumulation);
    v.get_bool("meta", "interleave_ordinary", cfg.train.meta.interleave_ordinary);

    v.get_double("cooldown", "tau_start", cfg.train.cooldown.tau_start);
    v.get_double("cooldown", "tau_end", cfg.train.cooldown.tau_end);
    v.get_double("cooldown", "switch_fraction", cfg.train.cooldown.switch_fraction);

    // cross-field checks
    if (cfg.train.total_steps < 1) v.bad("run", "total_steps", "must be >= 1");
    if (cfg.train.batch_size < 2) v.bad("run", "batch_size", "must be >= 2 (in-batch negatives)");
    if (cfg.train.eval_every < 1) v.bad("run", "eval_every", "must be >= 1");
    if (!(cfg.train.model.t_sim > 0.0)) v.bad("model", "t_sim", "must be > 0");
    if (cfg.train.model.vocab_buckets < 2) v.bad("model", "vocab_buckets", "must be >= 2");
    if (cfg.train.meta.update_every < 1) v.bad("meta", "update_every", "must be >= 1");
    if (cfg.train.meta.l < 0) v.bad("meta", "l", "must be >= 0");
    if (cfg.train.meta.warmup_steps < 0) v.bad("meta", "warmup_steps", "must be >= 0");
    if (cfg.train.sampler.init == "weights" && cfg.train.sampler.weights.empty())
        v.bad("sampler", "weights", "required when sampler.init = weights");

    v.flag_unknown();
    if (!v.problems.empty()) throw ConfigError(std::move(v.problems));
    return cfg;
}

std::string config_echo(const ExperimentConfig& config) {
    const TrainConfig& t = config.train;
    std::ostringstream out;
    out << "# infdds config (effective)\n";
    out << "[run]\n";
    out << "corpus = " << config.run.corpus << "\n";
    out << "out_dir = " << config.run.out_dir << "\n";
    if (!config.run.compare_to.empty()) out << "compare_to = " << config.run.compare_to << "\n";
    out << "strategy = " << strategy_name(t.strategy) << "\n";
    out << "seed = " << t.seed << "\n";
    out << "total_steps = " << t.total_steps << "\n";
    out << "batch_size = " << t.batch_size << "\n";
    out << "eval_every = " << t.eval_every << "\n";
    out << "[model]\n";
    out << "vocab_buckets = " << t.model.vocab_buckets << "\n";
    out << "d = " << t.model.d << "\n";
    out << "d_out = " << t.model.d_out << "\n";
    out << "t_sim = " << fmt_double(t.model.t_sim) << "\n";
    out << "[optimizer]\n";
    out << "kind = " << (t.optim.kind == OptKind::Adam ? "adam" : "sgd") << "\n";
    out << "base_lr = " << fmt_double(t.optim.base_lr) << "\n";
    out << "warmup_steps = " << t.optim.warmup_steps << "\n";
    out << "decay_horizon = " << t.optim.decay_horizon << "\n";
    out << "momentum = " << fmt_double(t.optim.momentum) << "\n";
    out << "beta1 = " << fmt_double(t.optim.beta1) << "\n";
    out << "beta2 = " << fmt_double(t.optim.beta2) << "\n";
    out << "eps = " << fmt_double(t.optim.eps) << "\n";
    out << "[sampler]\n";
    out << "init = " << t.sampler.init << "\n";
    out << "tau = " << fmt_double(t.sampler.tau) << "\n";
    if (!t.sampler.weights.empty()) {
        out << "weights = ";
        for (size_t i = 0; i < t.sampler.weights.size(); ++i) {
            if (i) out << ",";
            out << fmt_double(t.sampler.weights[i]);
        }
        out << "\n";
    }
    out << "scorer_lr = " << fmt_double(t.sampler.scorer_lr) << "\n";
    out << "mode = " << (t.sampler.mode == ScorerMode::ConditionalLogProb ? "conditional" : "full")
        << "\n";
    out << "center_rewards = " << (t.sampler.center_rewards ? "true" : "false") << "\n";
    out << "ascend = " << (t.sampler.ascend ? "true" : "false") << "\n";
    out << "[meta]\n";
    out << "warmup_steps = " << t.meta.warmup_steps << "\n";
    out << "update_every = " << t.meta.update_every << "\n";
    out << "l = " << t.meta.l << "\n";
    out << "subsample_size = " << t.meta.subsample_size << "\n";
    out << "weighting = "
        << (t.meta.weighting == ReptileWeighting::SoftmaxTau ? "softmax" : "reward-normalized")
        << "\n";
    out << "reptile_tau = " << fmt_double(t.meta.reptile_tau) << "\n";
    out << "reptile_enabled = " << (t.meta.reptile_enabled ? "true" : "false") << "\n";
    out << "metric = " << (t.meta.metric == InfluenceMetric::NegInfoNce ? "neg-infonce" : "ndcg")
        << "\n";
    out << "dev_batch_size = " << t.meta.dev_batch_size << "\n";
    out << "per_step_accumulation = " << (t.meta.per_step_accumulation ? "true" : "false") << "\n";
    out << "interleave_ordinary = " << (t.meta.interleave_ordinary ? "true" : "false") << "\n";
    out << "[cooldown]\n";
    out << "tau_start = " << fmt_double(t.cooldown.tau_start) << "\n";
    out << "tau_end = " << fmt_double(t.cooldown.tau_end) << "\n";
    out << "switch_fraction = " << fmt_double(t.cooldown.switch_fraction) << "\n";
    return out.str();
}

}  // namespace infdds
