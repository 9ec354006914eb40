#include "infdds/retriever.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace infdds {

namespace {

// FNV-1a, stable across platforms
uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

struct EncodeCache {
    std::vector<std::vector<uint32_t>> buckets;  // per text
    Matrix pooled;                               // B x d
    Matrix projected;                            // B x d_out
    std::vector<double> norms;                   // per text
    Matrix unit;                                 // B x d_out
};

EncodeCache encode_with_cache(const ModelParams& params, std::span<const std::string> texts) {
    const size_t b = texts.size();
    const size_t d = params.E.cols;
    EncodeCache c;
    c.buckets.resize(b);
    c.pooled = Matrix(b, d);
    c.norms.resize(b);

    const auto vocab = static_cast<uint32_t>(params.E.rows);
    for (size_t i = 0; i < b; ++i) {
        c.buckets[i] = tokenize_hash(texts[i], vocab);
        if (c.buckets[i].empty())
            throw std::runtime_error("encode: empty token sequence in text " + std::to_string(i));
        const double inv = 1.0 / static_cast<double>(c.buckets[i].size());
        for (uint32_t bk : c.buckets[i]) {
            auto row = params.E.row(bk);
            for (size_t j = 0; j < d; ++j) c.pooled(i, j) += row[j] * inv;
        }
    }
    c.projected = matmul(c.pooled, params.W);
    c.unit = c.projected;
    for (size_t i = 0; i < b; ++i) {
        double n2 = 0.0;
        for (size_t j = 0; j < c.unit.cols; ++j) n2 += c.unit(i, j) * c.unit(i, j);
        const double n = std::sqrt(n2);
        if (!(n > 0.0) || !std::isfinite(n))
            throw std::runtime_error("encode: degenerate zero-norm projection for text " +
                                     std::to_string(i));
        c.norms[i] = n;
        for (size_t j = 0; j < c.unit.cols; ++j) c.unit(i, j) /= n;
    }
    return c;
}

// softmax rows of Q P^T / t, with the diagonal as targets
struct SoftmaxCache {
    Matrix probs;     // B x B
    double loss = 0.0;
};

SoftmaxCache diag_softmax(const Matrix& q, const Matrix& p, double t_sim) {
    const size_t b = q.rows;
    Matrix sims = matmul_nt(q, p);
    scale(sims, 1.0 / t_sim);
    require_finite(sims, "similarity matrix");

    SoftmaxCache c;
    c.probs = Matrix(b, b);
    double loss = 0.0;
    for (size_t i = 0; i < b; ++i) {
        double mx = sims(i, 0);
        for (size_t j = 1; j < b; ++j) mx = std::max(mx, sims(i, j));
        double denom = 0.0;
        for (size_t j = 0; j < b; ++j) {
            c.probs(i, j) = std::exp(sims(i, j) - mx);
            denom += c.probs(i, j);
        }
        for (size_t j = 0; j < b; ++j) c.probs(i, j) /= denom;
        loss += -(sims(i, i) - mx - std::log(denom));
    }
    c.loss = loss / static_cast<double>(b);
    return c;
}

}  // namespace

const std::vector<std::string>& ModelParams::tensor_names() {
    static const std::vector<std::string> names = {"E", "W"};
    return names;
}

ModelParams ModelParams::init(size_t vocab_buckets, size_t d, size_t d_out, double t_sim,
                              Rng& rng) {
    if (vocab_buckets < 2) throw std::invalid_argument("init: vocab_buckets must be >= 2");
    if (!(t_sim > 0.0)) throw std::invalid_argument("init: t_sim must be > 0");
    ModelParams p;
    p.t_sim = t_sim;
    p.E = Matrix(vocab_buckets, d);
    p.W = Matrix(d, d_out);
    for (double& v : p.E.data) v = 0.1 * rng.normal();
    // near-identity projection keeps initial encodings non-degenerate
    for (size_t i = 0; i < d && i < d_out; ++i) p.W(i, i) = 1.0;
    for (double& v : p.W.data) v += 0.05 * rng.normal();
    return p;
}

std::vector<uint32_t> tokenize_hash(std::string_view text, uint32_t vocab_buckets) {
    if (vocab_buckets < 2) throw std::invalid_argument("tokenize_hash: vocab_buckets must be >= 2");
    std::vector<uint32_t> out;
    size_t i = 0;
    const size_t n = text.size();
    std::string tokbuf;
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        size_t start = i;
        while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) {
            tokbuf.assign(text.substr(start, i - start));
            for (char& ch : tokbuf) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
            out.push_back(static_cast<uint32_t>(fnv1a(tokbuf) % vocab_buckets));
        }
    }
    return out;
}

Matrix encode(const ModelParams& params, std::span<const std::string> texts) {
    return encode_with_cache(params, texts).unit;
}

double info_nce_loss(const Matrix& q, const Matrix& p, double t_sim) {
    if (q.rows != p.rows || q.cols != p.cols)
        throw std::invalid_argument("info_nce_loss: Q/P shape mismatch");
    if (q.rows < 2) throw std::invalid_argument("info_nce_loss: need batch size >= 2");
    if (!(t_sim > 0.0)) throw std::invalid_argument("info_nce_loss: t_sim must be > 0");
    return diag_softmax(q, p, t_sim).loss;
}

LossGrads loss_and_grads(const ModelParams& params, std::span<const TextPair> batch) {
    const size_t b = batch.size();
    if (b < 2) throw std::invalid_argument("loss_and_grads: need batch size >= 2");

    std::vector<std::string> queries, passages;
    queries.reserve(b);
    passages.reserve(b);
    for (const auto& [q, p] : batch) {
        queries.push_back(q);
        passages.push_back(p);
    }
    EncodeCache qc = encode_with_cache(params, queries);
    EncodeCache pc = encode_with_cache(params, passages);
    SoftmaxCache sm = diag_softmax(qc.unit, pc.unit, params.t_sim);

    // dL/ds_ij = (probs_ij - delta_ij) / B
    const double coef = 1.0 / (static_cast<double>(b) * params.t_sim);
    Matrix gq(b, qc.unit.cols);  // dL/d(unit query rows)
    Matrix gp(b, pc.unit.cols);
    for (size_t i = 0; i < b; ++i) {
        for (size_t j = 0; j < b; ++j) {
            const double w = (sm.probs(i, j) - (i == j ? 1.0 : 0.0)) * coef;
            for (size_t k = 0; k < gq.cols; ++k) {
                gq(i, k) += w * pc.unit(j, k);
                gp(j, k) += w * qc.unit(i, k);
            }
        }
    }

    LossGrads out;
    out.loss = sm.loss;
    out.grad_e = Matrix(params.E.rows, params.E.cols);
    out.grad_w = Matrix(params.W.rows, params.W.cols);

    auto backprop_tower = [&](const EncodeCache& cache, const Matrix& gunit) {
        const size_t d = params.E.cols;
        Matrix gproj(b, cache.unit.cols);
        for (size_t i = 0; i < b; ++i) {
            // u = z / |z|: dz = (g - (g.u) u) / |z|
            double gu = 0.0;
            for (size_t k = 0; k < gunit.cols; ++k) gu += gunit(i, k) * cache.unit(i, k);
            for (size_t k = 0; k < gunit.cols; ++k)
                gproj(i, k) = (gunit(i, k) - gu * cache.unit(i, k)) / cache.norms[i];
        }
        // z = h W: dW += h^T gz, dh = gz W^T
        Matrix gw = matmul_tn(cache.pooled, gproj);
        add_scaled(out.grad_w, gw, 1.0);
        Matrix gpool = matmul_nt(gproj, params.W);
        for (size_t i = 0; i < b; ++i) {
            const double inv = 1.0 / static_cast<double>(cache.buckets[i].size());
            for (uint32_t bk : cache.buckets[i]) {
                for (size_t j = 0; j < d; ++j) out.grad_e(bk, j) += gpool(i, j) * inv;
            }
        }
    };
    backprop_tower(qc, gq);
    backprop_tower(pc, gp);
    return out;
}

StepResult train_step(ModelParams& params, OptimizerState& opt, const DomainDataset& dataset,
                      size_t batch_size, Rng& rng) {
    const auto batch = sample_batch(dataset, batch_size, rng);
    LossGrads lg = loss_and_grads(params, batch);
    std::vector<Matrix> tensors = {std::move(params.E), std::move(params.W)};
    const std::vector<Matrix> grads = {std::move(lg.grad_e), std::move(lg.grad_w)};
    const double lr = optimizer_step(tensors, grads, opt, ModelParams::tensor_names());
    params.E = std::move(tensors[0]);
    params.W = std::move(tensors[1]);
    return {lg.loss, lr};
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    out << "infdds-ckpt 1\n";
    out << "t_sim ";
    put(params.t_sim);
    out << "\n";
    auto dump = [&](const char* name, const Matrix& m) {
        out << name << " " << m.rows << " " << m.cols << "\n";
        for (size_t i = 0; i < m.rows; ++i) {
            for (size_t j = 0; j < m.cols; ++j) {
                if (j) out << " ";
                put(m(i, j));
            }
            out << "\n";
        }
    };
    dump("E", params.E);
    dump("W", params.W);
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "infdds-ckpt" || version != 1)
        throw std::runtime_error("checkpoint version mismatch in " + path.string() +
                                 " (expected infdds-ckpt 1)");
    ModelParams p;
    std::string key;
    in >> key >> p.t_sim;
    if (key != "t_sim") throw std::runtime_error("corrupt checkpoint: " + path.string());
    auto read_matrix = [&](const char* name) {
        std::string n;
        size_t r = 0, c = 0;
        in >> n >> r >> c;
        if (n != name) throw std::runtime_error("corrupt checkpoint: " + path.string());
        Matrix m(r, c);
        for (double& v : m.data) in >> v;
        if (!in) throw std::runtime_error("truncated checkpoint: " + path.string());
        return m;
    };
    p.E = read_matrix("E");
    p.W = read_matrix("W");
    return p;
}

}  // namespace infdds
