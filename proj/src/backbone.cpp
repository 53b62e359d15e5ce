#include "tempo/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "tempo/errors.hpp"
#include "tempo/kernels/kernels.hpp"

namespace tempo::backbone {
namespace {

Matrix normal(std::size_t r, std::size_t c, double stddev, std::mt19937_64& rng) {
    Matrix m(r, c);
    std::normal_distribution<double> g(0.0, stddev);
    for (double& v : m.data) v = g(rng);
    return m;
}

Matrix uniform(std::size_t r, std::size_t c, double bound, std::mt19937_64& rng) {
    Matrix m(r, c);
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& v : m.data) v = u(rng);
    return m;
}

std::string lname(std::size_t l, const char* what) {
    return "backbone.l" + std::to_string(l) + "." + what;
}

ag::Var projection(ag::Tape& t, ag::Var x, ParamStore& s, std::size_t l, const char* w, const char* b,
                   const char* lora, const BackboneConfig& cfg) {
    ag::Var y = ag::add_row(ag::matmul(x, t.param(s.at(lname(l, w)))), t.param(s.at(lname(l, b))));
    if (cfg.lora && lora) {
        const std::string base = std::string("lora_") + lora;
        ag::Var a = t.param(s.at(lname(l, (base + "_a").c_str())));
        ag::Var bb = t.param(s.at(lname(l, (base + "_b").c_str())));
        ag::Var delta = ag::matmul(ag::matmul(x, bb), a);
        y = ag::add(y, ag::scale(delta, cfg.lora_alpha / static_cast<double>(cfg.lora_rank)));
    }
    return y;
}

} // namespace

void BackboneConfig::validate() const {
    if (layers < 1) throw ConfigError("backbone: layers must be >= 1");
    if (heads < 1 || embed_dim % heads != 0) throw ConfigError("backbone: embed_dim must be divisible by heads");
    if (mlp_mult < 1) throw ConfigError("backbone: mlp_mult must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("backbone: dropout must be in [0, 1)");
    if (lora && lora_rank < 1) throw ConfigError("backbone: lora rank must be >= 1");
}

std::string policy_name(FreezePolicy p) { return p == FreezePolicy::from_scratch ? "from_scratch" : "gpt_style"; }

FreezePolicy parse_policy(const std::string& name) {
    if (name == "from_scratch") return FreezePolicy::from_scratch;
    if (name == "gpt_style") return FreezePolicy::gpt_style;
    throw ConfigError("unknown freeze policy '" + name + "'");
}

void init_backbone(ParamStore& s, const BackboneConfig& cfg, std::size_t max_tokens) {
    cfg.validate();
    if (max_tokens < 1) throw std::invalid_argument("init_backbone: max_tokens must be >= 1");
    std::mt19937_64 rng(cfg.seed ^ 0x6a09e667f3bcc908ULL);
    // Adapters draw from their own stream so toggling LoRA leaves the other weights unchanged.
    std::mt19937_64 lora_rng(cfg.seed ^ 0xbb67ae8584caa73bULL);
    const std::size_t d = cfg.embed_dim;
    const std::size_t hidden = d * cfg.mlp_mult;
    const double proj_std = 0.02 / std::sqrt(2.0 * static_cast<double>(cfg.layers));
    s.add("backbone.wpe", ParamGroup::position_embedding, normal(max_tokens, d, 0.01, rng));
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        s.add(lname(l, "ln1_g"), ParamGroup::layer_norm, Matrix(1, d, 1.0));
        s.add(lname(l, "ln1_b"), ParamGroup::layer_norm, Matrix(1, d));
        for (const char* w : {"wq", "wk", "wv"}) s.add(lname(l, w), ParamGroup::attention_core, normal(d, d, 0.02, rng));
        for (const char* b : {"bq", "bk", "bv"}) s.add(lname(l, b), ParamGroup::attention_core, Matrix(1, d));
        s.add(lname(l, "wo"), ParamGroup::attention_core, normal(d, d, proj_std, rng));
        s.add(lname(l, "bo"), ParamGroup::attention_core, Matrix(1, d));
        if (cfg.lora) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(d));
            for (const char* base : {"lora_q", "lora_v"}) {
                s.add(lname(l, (std::string(base) + "_a").c_str()), ParamGroup::lora,
                      uniform(cfg.lora_rank, d, bound, lora_rng));
                s.add(lname(l, (std::string(base) + "_b").c_str()), ParamGroup::lora, Matrix(d, cfg.lora_rank));
            }
        }
        s.add(lname(l, "ln2_g"), ParamGroup::layer_norm, Matrix(1, d, 1.0));
        s.add(lname(l, "ln2_b"), ParamGroup::layer_norm, Matrix(1, d));
        s.add(lname(l, "w1"), ParamGroup::mlp_core, normal(d, hidden, 0.02, rng));
        s.add(lname(l, "b1"), ParamGroup::mlp_core, Matrix(1, hidden));
        s.add(lname(l, "w2"), ParamGroup::mlp_core, normal(hidden, d, proj_std, rng));
        s.add(lname(l, "b2"), ParamGroup::mlp_core, Matrix(1, d));
    }
    s.add("backbone.lnf_g", ParamGroup::layer_norm, Matrix(1, d, 1.0));
    s.add("backbone.lnf_b", ParamGroup::layer_norm, Matrix(1, d));
}

ag::Var forward(ag::Tape& t, ag::Var seq, ParamStore& s, const BackboneConfig& cfg, std::mt19937_64* rng) {
    const std::size_t T = seq.rows();
    const std::size_t d = cfg.embed_dim;
    if (T < 1) throw std::invalid_argument("backbone: empty sequence");
    if (seq.cols() != d) throw std::invalid_argument("backbone: sequence width differs from embed_dim");
    Parameter& wpe = s.at("backbone.wpe");
    if (T > wpe.value.rows)
        throw std::invalid_argument("backbone: sequence length " + std::to_string(T) +
                                    " exceeds positional table of " + std::to_string(wpe.value.rows));
    const double drop = rng ? cfg.dropout : 0.0;
    const std::size_t dh = d / cfg.heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

    ag::Var h = ag::add(seq, ag::slice_rows(t.param(wpe), 0, T));
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        ag::Var x = ag::layer_norm(h, t.param(s.at(lname(l, "ln1_g"))), t.param(s.at(lname(l, "ln1_b"))), 1e-5);
        ag::Var q = projection(t, x, s, l, "wq", "bq", "q", cfg);
        ag::Var k = projection(t, x, s, l, "wk", "bk", nullptr, cfg);
        ag::Var v = projection(t, x, s, l, "wv", "bv", "v", cfg);
        std::vector<ag::Var> heads;
        heads.reserve(cfg.heads);
        for (std::size_t hd = 0; hd < cfg.heads; ++hd) {
            ag::Var qh = ag::slice_cols(q, hd * dh, (hd + 1) * dh);
            ag::Var kh = ag::slice_cols(k, hd * dh, (hd + 1) * dh);
            ag::Var vh = ag::slice_cols(v, hd * dh, (hd + 1) * dh);
            ag::Var att = ag::softmax_rows(ag::scale(ag::matmul_nt(qh, kh), inv_sqrt), cfg.causal);
            heads.push_back(ag::matmul(att, vh));
        }
        ag::Var merged = cfg.heads == 1 ? heads.front() : ag::concat_cols(heads);
        ag::Var attn_out = ag::add_row(ag::matmul(merged, t.param(s.at(lname(l, "wo")))),
                                       t.param(s.at(lname(l, "bo"))));
        if (drop > 0.0) attn_out = ag::dropout(attn_out, drop, *rng);
        h = ag::add(h, attn_out);

        ag::Var y = ag::layer_norm(h, t.param(s.at(lname(l, "ln2_g"))), t.param(s.at(lname(l, "ln2_b"))), 1e-5);
        y = ag::gelu(ag::add_row(ag::matmul(y, t.param(s.at(lname(l, "w1")))), t.param(s.at(lname(l, "b1")))));
        y = ag::add_row(ag::matmul(y, t.param(s.at(lname(l, "w2")))), t.param(s.at(lname(l, "b2"))));
        if (drop > 0.0) y = ag::dropout(y, drop, *rng);
        h = ag::add(h, y);
    }
    return ag::layer_norm(h, t.param(s.at("backbone.lnf_g")), t.param(s.at("backbone.lnf_b")), 1e-5);
}

Matrix apply_lora(const Matrix& w, const Matrix& a, const Matrix& b, double alpha, std::size_t rank) {
    if (rank < 1 || a.rows != rank || b.cols != rank || b.rows != w.rows || a.cols != w.cols)
        throw std::invalid_argument("apply_lora: shape mismatch");
    Matrix ba(w.rows, w.cols);
    kernels::active().gemm_nn(b.data.data(), a.data.data(), ba.data.data(), b.rows, rank, a.cols);
    Matrix out = w;
    const double s = alpha / static_cast<double>(rank);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * ba[i];
    return out;
}

bool group_trainable(ParamGroup group, FreezePolicy policy) {
    if (policy == FreezePolicy::from_scratch) return true;
    return group != ParamGroup::attention_core && group != ParamGroup::mlp_core;
}

void set_freeze_policy(ParamStore& store, FreezePolicy policy) {
    for (Parameter& p : store.all()) p.trainable = group_trainable(p.group, policy);
}

double compute_gradients(ParamStore& store, const LossFn& loss_fn) {
    store.zero_grad();
    ag::Tape tape;
    ag::Var loss = loss_fn(tape);
    if (loss.value().size() != 1) throw std::invalid_argument("compute_gradients: loss must be scalar");
    tape.backward(loss);
    return loss.scalar();
}

GradCheckReport grad_check(ParamStore& store, const LossFn& loss_fn, double h, std::size_t samples_per_group,
                           std::uint64_t seed, double analytic_scale) {
    compute_gradients(store, loss_fn);
    const auto eval = [&] {
        ag::Tape tape;
        return loss_fn(tape).scalar();
    };

    struct Coord {
        std::size_t param;
        std::size_t index;
    };
    std::map<ParamGroup, std::vector<Coord>> all, nonzero;
    auto& ps = store.all();
    for (std::size_t p = 0; p < ps.size(); ++p) {
        if (!ps[p].trainable) continue;
        for (std::size_t i = 0; i < ps[p].value.size(); ++i) {
            all[ps[p].group].push_back({p, i});
            if (std::abs(ps[p].grad[i]) > 1e-12) nonzero[ps[p].group].push_back({p, i});
        }
    }

    std::mt19937_64 rng(seed);
    GradCheckReport report;
    for (auto& [group, coords] : all) {
        // Half the budget goes to coordinates with a nonzero analytic gradient,
        // the rest is uniform over the whole group.
        std::vector<Coord> picked;
        std::set<std::pair<std::size_t, std::size_t>> seen;
        auto draw = [&](std::vector<Coord>& pool, std::size_t n) {
            std::shuffle(pool.begin(), pool.end(), rng);
            for (std::size_t i = 0; i < pool.size() && n > 0; ++i)
                if (seen.insert({pool[i].param, pool[i].index}).second) {
                    picked.push_back(pool[i]);
                    --n;
                }
        };
        auto& nz = nonzero[group];
        const std::size_t want_nz = std::min(nz.size(), (samples_per_group + 1) / 2);
        draw(nz, want_nz);
        draw(coords, samples_per_group - want_nz);

        GroupCheck& gc = report.groups[group];
        for (const Coord& c : picked) {
            Parameter& prm = ps[c.param];
            const double orig = prm.value[c.index];
            prm.value[c.index] = orig + h;
            const double fp = eval();
            prm.value[c.index] = orig - h;
            const double fm = eval();
            prm.value[c.index] = orig;
            const double numeric = (fp - fm) / (2.0 * h);
            const double analytic = prm.grad[c.index] * analytic_scale;
            const double rel = std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
            report.samples.push_back({prm.name, c.index, analytic, numeric, rel});
            gc.max_rel_error = std::max(gc.max_rel_error, rel);
            ++gc.samples;
            report.max_rel_error = std::max(report.max_rel_error, rel);
        }
    }
    return report;
}

} // namespace tempo::backbone
