#include "mtlqa/model.hpp"

#include <cmath>
#include <stdexcept>

#include "engine.hpp"
#include "mtlqa/rng.hpp"

namespace mtlqa {

namespace {
constexpr double kLnEps = 1e-5;
}

std::string classification_mode_name(ClassificationMode m) {
    return m == ClassificationMode::SoftmaxSingleLabel ? "softmax_single_label"
                                                       : "sigmoid_multi_label";
}

ClassificationMode classification_mode_from_name(const std::string& name) {
    if (name == "softmax_single_label") return ClassificationMode::SoftmaxSingleLabel;
    if (name == "sigmoid_multi_label") return ClassificationMode::SigmoidMultiLabel;
    throw std::invalid_argument("unknown classification mode: \"" + name + "\"");
}

void EncoderConfig::validate() const {
    if (vocab_size < 5) throw std::invalid_argument("vocab_size must cover the reserved tokens");
    if (hidden_dim <= 0 || feedforward_dim <= 0 || num_heads <= 0 || max_seq_len < 3) {
        throw std::invalid_argument("model dimensions must be positive");
    }
    if (hidden_dim % num_heads != 0) {
        throw std::invalid_argument("hidden_dim must be divisible by num_heads");
    }
    if (num_shared_layers < 0 || num_task_layers < 0 ||
        num_shared_layers + num_task_layers == 0) {
        throw std::invalid_argument("need at least one transformer layer");
    }
    for (int d : span_head_dims) {
        if (d <= 0) throw std::invalid_argument("span head dims must be positive");
    }
    if (class_head_dims.empty() || class_head_dims.back() != kNumCategories) {
        throw std::invalid_argument("class head must end with width 5");
    }
    for (int d : class_head_dims) {
        if (d <= 0) throw std::invalid_argument("class head dims must be positive");
    }
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw std::invalid_argument("dropout_rate must be in [0, 1)");
    }
}

EncoderConfig EncoderConfig::desk_preset(int vocab_size) {
    EncoderConfig c;
    c.vocab_size = vocab_size;
    return c;
}

EncoderConfig EncoderConfig::paper_preset(int vocab_size) {
    EncoderConfig c;
    c.vocab_size = vocab_size;
    c.hidden_dim = 768;
    c.num_heads = 12;
    c.num_shared_layers = 6;
    c.num_task_layers = 6;
    c.feedforward_dim = 3072;
    c.max_seq_len = 512;
    c.span_head_dims = {512, 256};
    c.class_head_dims = {512, 256, 5};
    return c;
}

EncoderConfig EncoderConfig::tiny_preset(int vocab_size) {
    EncoderConfig c;
    c.vocab_size = vocab_size;
    c.hidden_dim = 8;
    c.num_heads = 2;
    c.num_shared_layers = 2;
    c.num_task_layers = 1;
    c.feedforward_dim = 16;
    c.max_seq_len = 8;
    c.span_head_dims = {8, 4};
    c.class_head_dims = {8, 4, 5};
    c.dropout_rate = 0.0;
    return c;
}

int ModelParams::find(const std::string& name) const {
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        if (tensors[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

namespace {

enum class InitKind { Zero, One, Uniform };

struct Builder {
    ModelParams p;
    std::vector<InitKind> kinds;
    std::vector<int> fan_ins;
    std::size_t total = 0;

    int add(std::string name, std::vector<int> shape, bool no_decay, ParamGroup g, InitKind kind,
            int fan_in = 0) {
        TensorInfo t;
        t.name = std::move(name);
        t.shape = std::move(shape);
        t.size = 1;
        for (int d : t.shape) t.size *= static_cast<std::size_t>(d);
        t.offset = total;
        t.no_decay = no_decay;
        t.group = g;
        total += t.size;
        p.tensors.push_back(std::move(t));
        kinds.push_back(kind);
        fan_ins.push_back(fan_in);
        return static_cast<int>(p.tensors.size()) - 1;
    }

    LinearIx linear(const std::string& name, int out, int in, ParamGroup g) {
        LinearIx ix;
        ix.w = add(name + ".weight", {out, in}, false, g, InitKind::Uniform, in);
        ix.b = add(name + ".bias", {out}, true, g, InitKind::Zero);
        return ix;
    }

    LayerIx layer(const std::string& prefix, const EncoderConfig& c, ParamGroup g) {
        LayerIx ix;
        ix.q = linear(prefix + ".attn.query", c.hidden_dim, c.hidden_dim, g);
        ix.k = linear(prefix + ".attn.key", c.hidden_dim, c.hidden_dim, g);
        ix.v = linear(prefix + ".attn.value", c.hidden_dim, c.hidden_dim, g);
        ix.o = linear(prefix + ".attn.output", c.hidden_dim, c.hidden_dim, g);
        ix.ln1_g = add(prefix + ".ln1.gain", {c.hidden_dim}, true, g, InitKind::One);
        ix.ln1_b = add(prefix + ".ln1.bias", {c.hidden_dim}, true, g, InitKind::Zero);
        ix.ff1 = linear(prefix + ".ffn.fc1", c.feedforward_dim, c.hidden_dim, g);
        ix.ff2 = linear(prefix + ".ffn.fc2", c.hidden_dim, c.feedforward_dim, g);
        ix.ln2_g = add(prefix + ".ln2.gain", {c.hidden_dim}, true, g, InitKind::One);
        ix.ln2_b = add(prefix + ".ln2.bias", {c.hidden_dim}, true, g, InitKind::Zero);
        return ix;
    }
};

}  // namespace

ModelParams init_params(const EncoderConfig& config, std::uint64_t seed) {
    config.validate();
    Builder b;
    b.p.config = config;
    const int D = config.hidden_dim;

    b.p.ix.tok_emb = b.add("embeddings.token", {config.vocab_size, D}, false,
                           ParamGroup::Embedding, InitKind::Uniform, D);
    b.p.ix.pos_emb = b.add("embeddings.position", {config.max_seq_len, D}, false,
                           ParamGroup::Embedding, InitKind::Uniform, D);
    b.p.ix.seg_emb =
        b.add("embeddings.segment", {2, D}, false, ParamGroup::Embedding, InitKind::Uniform, D);
    b.p.ix.emb_ln_g = b.add("embeddings.ln.gain", {D}, true, ParamGroup::Embedding, InitKind::One);
    b.p.ix.emb_ln_b =
        b.add("embeddings.ln.bias", {D}, true, ParamGroup::Embedding, InitKind::Zero);

    for (int l = 0; l < config.num_shared_layers; ++l) {
        b.p.ix.shared.push_back(
            b.layer("shared." + std::to_string(l), config, ParamGroup::Shared));
    }
    for (int l = 0; l < config.num_task_layers; ++l) {
        b.p.ix.qa.push_back(b.layer("qa." + std::to_string(l), config, ParamGroup::QaBranch));
    }
    for (int l = 0; l < config.num_task_layers; ++l) {
        b.p.ix.cls.push_back(b.layer("cls." + std::to_string(l), config, ParamGroup::ClsBranch));
    }

    int in = D;
    for (std::size_t i = 0; i < config.span_head_dims.size(); ++i) {
        b.p.ix.span_head.push_back(b.linear("span_head." + std::to_string(i),
                                            config.span_head_dims[i], in, ParamGroup::SpanHead));
        in = config.span_head_dims[i];
    }
    b.p.ix.span_head.push_back(
        b.linear("span_head." + std::to_string(config.span_head_dims.size()), 2, in,
                 ParamGroup::SpanHead));

    in = D;
    for (std::size_t i = 0; i < config.class_head_dims.size(); ++i) {
        b.p.ix.class_head.push_back(b.linear("class_head." + std::to_string(i),
                                             config.class_head_dims[i], in,
                                             ParamGroup::ClassHead));
        in = config.class_head_dims[i];
    }

    b.p.values.assign(b.total, 0.0);
    Rng rng(seed);
    for (std::size_t t = 0; t < b.p.tensors.size(); ++t) {
        double* v = b.p.values.data() + b.p.tensors[t].offset;
        switch (b.kinds[t]) {
            case InitKind::Zero:
                break;
            case InitKind::One:
                for (std::size_t i = 0; i < b.p.tensors[t].size; ++i) v[i] = 1.0;
                break;
            case InitKind::Uniform: {
                const double bound = 1.0 / std::sqrt(static_cast<double>(b.fan_ins[t]));
                for (std::size_t i = 0; i < b.p.tensors[t].size; ++i) {
                    v[i] = rng.next_uniform(bound);
                }
                break;
            }
        }
    }
    return b.p;
}

// ---------------------------------------------------------------------------
// Kernels. Weights are [out, in] row-major; sequences are [T, dim] row-major.
// ---------------------------------------------------------------------------

namespace {

void linear_forward(const double* x, const double* w, const double* b, double* y, int T, int in,
                    int out) {
    for (int t = 0; t < T; ++t) {
        const double* xt = x + static_cast<std::size_t>(t) * in;
        double* yt = y + static_cast<std::size_t>(t) * out;
        for (int o = 0; o < out; ++o) {
            const double* wo = w + static_cast<std::size_t>(o) * in;
            double acc = b[o];
            for (int i = 0; i < in; ++i) acc += wo[i] * xt[i];
            yt[o] = acc;
        }
    }
}

// dx may be null when the input gradient is not needed (first layer inputs).
void linear_backward(const double* x, const double* w, const double* dy, double* dx, double* dw,
                     double* db, int T, int in, int out) {
    for (int t = 0; t < T; ++t) {
        const double* xt = x + static_cast<std::size_t>(t) * in;
        const double* dyt = dy + static_cast<std::size_t>(t) * out;
        if (dx != nullptr) {
            double* dxt = dx + static_cast<std::size_t>(t) * in;
            for (int o = 0; o < out; ++o) {
                const double* wo = w + static_cast<std::size_t>(o) * in;
                const double g = dyt[o];
                for (int i = 0; i < in; ++i) dxt[i] += g * wo[i];
            }
        }
        for (int o = 0; o < out; ++o) {
            double* dwo = dw + static_cast<std::size_t>(o) * in;
            const double g = dyt[o];
            for (int i = 0; i < in; ++i) dwo[i] += g * xt[i];
            db[o] += g;
        }
    }
}

void layernorm_forward(const double* x, const double* gain, const double* bias, double* y,
                       double* mean, double* rstd, int T, int D) {
    for (int t = 0; t < T; ++t) {
        const double* xt = x + static_cast<std::size_t>(t) * D;
        double* yt = y + static_cast<std::size_t>(t) * D;
        double mu = 0.0;
        for (int i = 0; i < D; ++i) mu += xt[i];
        mu /= D;
        double var = 0.0;
        for (int i = 0; i < D; ++i) {
            const double d = xt[i] - mu;
            var += d * d;
        }
        var /= D;
        const double rs = 1.0 / std::sqrt(var + kLnEps);
        for (int i = 0; i < D; ++i) yt[i] = gain[i] * (xt[i] - mu) * rs + bias[i];
        mean[t] = mu;
        rstd[t] = rs;
    }
}

void layernorm_backward(const double* x, const double* gain, const double* mean,
                        const double* rstd, const double* dy, double* dx, double* dgain,
                        double* dbias, int T, int D) {
    for (int t = 0; t < T; ++t) {
        const double* xt = x + static_cast<std::size_t>(t) * D;
        const double* dyt = dy + static_cast<std::size_t>(t) * D;
        double* dxt = dx + static_cast<std::size_t>(t) * D;
        const double mu = mean[t], rs = rstd[t];
        double m1 = 0.0, m2 = 0.0;
        for (int i = 0; i < D; ++i) {
            const double xhat = (xt[i] - mu) * rs;
            const double dxhat = dyt[i] * gain[i];
            m1 += dxhat;
            m2 += dxhat * xhat;
            dgain[i] += dyt[i] * xhat;
            dbias[i] += dyt[i];
        }
        m1 /= D;
        m2 /= D;
        for (int i = 0; i < D; ++i) {
            const double xhat = (xt[i] - mu) * rs;
            const double dxhat = dyt[i] * gain[i];
            dxt[i] += rs * (dxhat - m1 - xhat * m2);
        }
    }
}

void attention_forward(const double* q, const double* k, const double* v, double* att,
                       double* ctx, int T, int D, int H) {
    const int hd = D / H;
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
    for (int h = 0; h < H; ++h) {
        const int col = h * hd;
        double* att_h = att + static_cast<std::size_t>(h) * T * T;
        for (int i = 0; i < T; ++i) {
            const double* qi = q + static_cast<std::size_t>(i) * D + col;
            double* row = att_h + static_cast<std::size_t>(i) * T;
            double maxv = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < T; ++j) {
                const double* kj = k + static_cast<std::size_t>(j) * D + col;
                double s = 0.0;
                for (int c = 0; c < hd; ++c) s += qi[c] * kj[c];
                row[j] = s * scale;
                if (row[j] > maxv) maxv = row[j];
            }
            double sum = 0.0;
            for (int j = 0; j < T; ++j) {
                row[j] = std::exp(row[j] - maxv);
                sum += row[j];
            }
            const double inv = 1.0 / sum;
            for (int j = 0; j < T; ++j) row[j] *= inv;

            double* ci = ctx + static_cast<std::size_t>(i) * D + col;
            for (int c = 0; c < hd; ++c) ci[c] = 0.0;
            for (int j = 0; j < T; ++j) {
                const double a = row[j];
                const double* vj = v + static_cast<std::size_t>(j) * D + col;
                for (int c = 0; c < hd; ++c) ci[c] += a * vj[c];
            }
        }
    }
}

void attention_backward(const double* q, const double* k, const double* v, const double* att,
                        const double* dctx, double* dq, double* dk, double* dv, int T, int D,
                        int H) {
    const int hd = D / H;
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
    std::vector<double> ds(static_cast<std::size_t>(T));
    for (int h = 0; h < H; ++h) {
        const int col = h * hd;
        const double* att_h = att + static_cast<std::size_t>(h) * T * T;
        for (int i = 0; i < T; ++i) {
            const double* arow = att_h + static_cast<std::size_t>(i) * T;
            const double* dci = dctx + static_cast<std::size_t>(i) * D + col;
            // datt and the softmax Jacobian, fused.
            double inner = 0.0;
            for (int j = 0; j < T; ++j) {
                const double* vj = v + static_cast<std::size_t>(j) * D + col;
                double da = 0.0;
                for (int c = 0; c < hd; ++c) da += dci[c] * vj[c];
                ds[j] = da;
                inner += arow[j] * da;
            }
            for (int j = 0; j < T; ++j) ds[j] = arow[j] * (ds[j] - inner) * scale;

            const double* qi = q + static_cast<std::size_t>(i) * D + col;
            double* dqi = dq + static_cast<std::size_t>(i) * D + col;
            for (int j = 0; j < T; ++j) {
                const double* kj = k + static_cast<std::size_t>(j) * D + col;
                double* dkj = dk + static_cast<std::size_t>(j) * D + col;
                const double g = ds[j];
                for (int c = 0; c < hd; ++c) {
                    dqi[c] += g * kj[c];
                    dkj[c] += g * qi[c];
                }
                double* dvj = dv + static_cast<std::size_t>(j) * D + col;
                const double a = arow[j];
                for (int c = 0; c < hd; ++c) dvj[c] += a * dci[c];
            }
        }
    }
}

void make_dropout_mask(std::vector<double>& mask, std::size_t n, double rate, Rng& rng) {
    mask.resize(n);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < n; ++i) {
        mask[i] = rng.next_double() < rate ? 0.0 : keep_scale;
    }
}

void apply_mask(const std::vector<double>& mask, const double* x, double* y, std::size_t n) {
    if (mask.empty()) {
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * mask[i];
    }
}

void relu(const double* pre, double* post, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) post[i] = pre[i] > 0.0 ? pre[i] : 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

namespace engine {

const std::vector<double>& Caches::h_shared() const {
    return shared.empty() ? x0 : shared.back().out;
}
const std::vector<double>& Caches::h_qa() const { return qa.empty() ? h_shared() : qa.back().out; }
const std::vector<double>& Caches::h_cls() const {
    return cls.empty() ? h_shared() : cls.back().out;
}

namespace {

void layer_forward(const ModelParams& p, const LayerIx& ix, const std::vector<double>& input,
                   LayerCaches& L, int T, Rng* drop_rng, double rate) {
    const int D = p.config.hidden_dim;
    const int F = p.config.feedforward_dim;
    const int H = p.config.num_heads;
    const std::size_t TD = static_cast<std::size_t>(T) * D;

    L.x = input;
    L.q.resize(TD);
    L.k.resize(TD);
    L.v.resize(TD);
    linear_forward(L.x.data(), p.data(ix.q.w), p.data(ix.q.b), L.q.data(), T, D, D);
    linear_forward(L.x.data(), p.data(ix.k.w), p.data(ix.k.b), L.k.data(), T, D, D);
    linear_forward(L.x.data(), p.data(ix.v.w), p.data(ix.v.b), L.v.data(), T, D, D);

    L.att.resize(static_cast<std::size_t>(H) * T * T);
    L.ctx.resize(TD);
    attention_forward(L.q.data(), L.k.data(), L.v.data(), L.att.data(), L.ctx.data(), T, D, H);

    L.attn_proj.resize(TD);
    linear_forward(L.ctx.data(), p.data(ix.o.w), p.data(ix.o.b), L.attn_proj.data(), T, D, D);

    L.drop1.clear();
    if (drop_rng != nullptr) make_dropout_mask(L.drop1, TD, rate, *drop_rng);
    L.res1.resize(TD);
    apply_mask(L.drop1, L.attn_proj.data(), L.res1.data(), TD);
    for (std::size_t i = 0; i < TD; ++i) L.res1[i] += L.x[i];

    L.y1.resize(TD);
    L.ln1_mean.resize(T);
    L.ln1_rstd.resize(T);
    layernorm_forward(L.res1.data(), p.data(ix.ln1_g), p.data(ix.ln1_b), L.y1.data(),
                      L.ln1_mean.data(), L.ln1_rstd.data(), T, D);

    const std::size_t TF = static_cast<std::size_t>(T) * F;
    L.ff1_pre.resize(TF);
    linear_forward(L.y1.data(), p.data(ix.ff1.w), p.data(ix.ff1.b), L.ff1_pre.data(), T, D, F);
    std::vector<double> ff1_post(TF);
    relu(L.ff1_pre.data(), ff1_post.data(), TF);
    L.ff2.resize(TD);
    linear_forward(ff1_post.data(), p.data(ix.ff2.w), p.data(ix.ff2.b), L.ff2.data(), T, F, D);

    L.drop2.clear();
    if (drop_rng != nullptr) make_dropout_mask(L.drop2, TD, rate, *drop_rng);
    L.res2.resize(TD);
    apply_mask(L.drop2, L.ff2.data(), L.res2.data(), TD);
    for (std::size_t i = 0; i < TD; ++i) L.res2[i] += L.y1[i];

    L.out.resize(TD);
    L.ln2_mean.resize(T);
    L.ln2_rstd.resize(T);
    layernorm_forward(L.res2.data(), p.data(ix.ln2_g), p.data(ix.ln2_b), L.out.data(),
                      L.ln2_mean.data(), L.ln2_rstd.data(), T, D);
}

// Returns the gradient w.r.t. the layer input.
std::vector<double> layer_backward(const ModelParams& p, const LayerIx& ix, const LayerCaches& L,
                                   const std::vector<double>& dout, double* grad, int T) {
    const int D = p.config.hidden_dim;
    const int F = p.config.feedforward_dim;
    const int H = p.config.num_heads;
    const std::size_t TD = static_cast<std::size_t>(T) * D;
    const std::size_t TF = static_cast<std::size_t>(T) * F;
    auto G = [&](int t) { return grad + p.tensors[t].offset; };

    std::vector<double> d_res2(TD, 0.0);
    layernorm_backward(L.res2.data(), p.data(ix.ln2_g), L.ln2_mean.data(), L.ln2_rstd.data(),
                       dout.data(), d_res2.data(), G(ix.ln2_g), G(ix.ln2_b), T, D);

    std::vector<double> d_y1 = d_res2;  // residual path
    std::vector<double> d_ff2(TD);
    apply_mask(L.drop2, d_res2.data(), d_ff2.data(), TD);

    std::vector<double> ff1_post(TF);
    relu(L.ff1_pre.data(), ff1_post.data(), TF);
    std::vector<double> d_ff1_post(TF, 0.0);
    linear_backward(ff1_post.data(), p.data(ix.ff2.w), d_ff2.data(), d_ff1_post.data(),
                    G(ix.ff2.w), G(ix.ff2.b), T, F, D);
    for (std::size_t i = 0; i < TF; ++i) {
        if (L.ff1_pre[i] <= 0.0) d_ff1_post[i] = 0.0;
    }
    linear_backward(L.y1.data(), p.data(ix.ff1.w), d_ff1_post.data(), d_y1.data(), G(ix.ff1.w),
                    G(ix.ff1.b), T, D, F);

    std::vector<double> d_res1(TD, 0.0);
    layernorm_backward(L.res1.data(), p.data(ix.ln1_g), L.ln1_mean.data(), L.ln1_rstd.data(),
                       d_y1.data(), d_res1.data(), G(ix.ln1_g), G(ix.ln1_b), T, D);

    std::vector<double> dx = d_res1;  // residual path
    std::vector<double> d_attn_proj(TD);
    apply_mask(L.drop1, d_res1.data(), d_attn_proj.data(), TD);

    std::vector<double> d_ctx(TD, 0.0);
    linear_backward(L.ctx.data(), p.data(ix.o.w), d_attn_proj.data(), d_ctx.data(), G(ix.o.w),
                    G(ix.o.b), T, D, D);

    std::vector<double> dq(TD, 0.0), dk(TD, 0.0), dv(TD, 0.0);
    attention_backward(L.q.data(), L.k.data(), L.v.data(), L.att.data(), d_ctx.data(), dq.data(),
                       dk.data(), dv.data(), T, D, H);

    linear_backward(L.x.data(), p.data(ix.q.w), dq.data(), dx.data(), G(ix.q.w), G(ix.q.b), T, D,
                    D);
    linear_backward(L.x.data(), p.data(ix.k.w), dk.data(), dx.data(), G(ix.k.w), G(ix.k.b), T, D,
                    D);
    linear_backward(L.x.data(), p.data(ix.v.w), dv.data(), dx.data(), G(ix.v.w), G(ix.v.b), T, D,
                    D);
    return dx;
}

}  // namespace

void head_forward(const ModelParams& p, const std::vector<LinearIx>& linears, const double* in,
                  int R, int in_dim, std::vector<std::vector<double>>& pre,
                  std::vector<double>& out) {
    pre.resize(linears.size());
    std::vector<double> act(in, in + static_cast<std::size_t>(R) * in_dim);
    int d_in = in_dim;
    for (std::size_t l = 0; l < linears.size(); ++l) {
        const int d_out = p.tensors[linears[l].w].shape[0];
        pre[l].resize(static_cast<std::size_t>(R) * d_out);
        linear_forward(act.data(), p.data(linears[l].w), p.data(linears[l].b), pre[l].data(), R,
                       d_in, d_out);
        if (l + 1 < linears.size()) {
            act.resize(pre[l].size());
            relu(pre[l].data(), act.data(), pre[l].size());
        } else {
            out = pre[l];
        }
        d_in = d_out;
    }
}

// d_out is the gradient at the final linear output; returns d_input rows.
std::vector<double> head_backward(const ModelParams& p, const std::vector<LinearIx>& linears,
                                  const std::vector<std::vector<double>>& pre, const double* in,
                                  int R, int in_dim, const std::vector<double>& d_out,
                                  double* grad);
std::vector<double> head_backward(const ModelParams& p, const std::vector<LinearIx>& linears,
                                  const std::vector<std::vector<double>>& pre, const double* in,
                                  int R, int in_dim, const std::vector<double>& d_out,
                                  double* grad) {
    auto G = [&](int t) { return grad + p.tensors[t].offset; };
    std::vector<double> dy = d_out;
    for (std::size_t l = linears.size(); l-- > 0;) {
        const int d_outdim = p.tensors[linears[l].w].shape[0];
        const int d_indim = p.tensors[linears[l].w].shape[1];
        // Input activation of this linear.
        std::vector<double> act;
        const double* act_ptr;
        if (l == 0) {
            act_ptr = in;
        } else {
            act.resize(pre[l - 1].size());
            relu(pre[l - 1].data(), act.data(), act.size());
            act_ptr = act.data();
        }
        std::vector<double> dx(static_cast<std::size_t>(R) * d_indim, 0.0);
        linear_backward(act_ptr, p.data(linears[l].w), dy.data(), dx.data(), G(linears[l].w),
                        G(linears[l].b), R, d_indim, d_outdim);
        if (l > 0) {
            for (std::size_t i = 0; i < dx.size(); ++i) {
                if (pre[l - 1][i] <= 0.0) dx[i] = 0.0;
            }
        }
        dy = std::move(dx);
    }
    (void)in_dim;
    return dy;
}

}  // namespace

void forward(const ModelParams& p, const TokenizedPair& pair, const DropoutPlan& drop,
             Caches& C) {
    const EncoderConfig& cfg = p.config;
    const int D = cfg.hidden_dim;
    if (pair.seq_len() != cfg.max_seq_len) {
        throw std::invalid_argument("input must be padded to max_seq_len");
    }
    const int T = pair.n_real;
    C.T = T;
    C.ids.assign(pair.ids.begin(), pair.ids.begin() + T);
    C.seg.assign(pair.segment_ids.begin(), pair.segment_ids.begin() + T);
    for (int id : C.ids) {
        if (id < 0 || id >= cfg.vocab_size) {
            throw std::out_of_range("token id " + std::to_string(id) +
                                    " outside vocabulary of size " +
                                    std::to_string(cfg.vocab_size));
        }
    }

    Rng drop_rng(mix_seed(drop.seed, 0x9044c1));
    Rng* rng = drop.enabled && drop.rate > 0.0 ? &drop_rng : nullptr;

    const std::size_t TD = static_cast<std::size_t>(T) * D;
    C.emb_sum.resize(TD);
    const double* tok = p.data(p.ix.tok_emb);
    const double* pos = p.data(p.ix.pos_emb);
    const double* seg = p.data(p.ix.seg_emb);
    for (int t = 0; t < T; ++t) {
        double* row = C.emb_sum.data() + static_cast<std::size_t>(t) * D;
        const double* tr = tok + static_cast<std::size_t>(C.ids[t]) * D;
        const double* pr = pos + static_cast<std::size_t>(t) * D;
        const double* sr = seg + static_cast<std::size_t>(C.seg[t]) * D;
        for (int i = 0; i < D; ++i) row[i] = tr[i] + pr[i] + sr[i];
    }
    C.emb_ln_out.resize(TD);
    C.emb_mean.resize(T);
    C.emb_rstd.resize(T);
    layernorm_forward(C.emb_sum.data(), p.data(p.ix.emb_ln_g), p.data(p.ix.emb_ln_b),
                      C.emb_ln_out.data(), C.emb_mean.data(), C.emb_rstd.data(), T, D);
    C.emb_drop.clear();
    if (rng != nullptr) make_dropout_mask(C.emb_drop, TD, drop.rate, *rng);
    C.x0.resize(TD);
    apply_mask(C.emb_drop, C.emb_ln_out.data(), C.x0.data(), TD);

    C.shared.resize(p.ix.shared.size());
    const std::vector<double>* x_in = &C.x0;
    for (std::size_t l = 0; l < p.ix.shared.size(); ++l) {
        layer_forward(p, p.ix.shared[l], *x_in, C.shared[l], T, rng, drop.rate);
        x_in = &C.shared[l].out;
    }
    const std::vector<double>& shared_out = *x_in;

    C.qa.resize(p.ix.qa.size());
    const std::vector<double>* qa_in = &shared_out;
    for (std::size_t l = 0; l < p.ix.qa.size(); ++l) {
        layer_forward(p, p.ix.qa[l], *qa_in, C.qa[l], T, rng, drop.rate);
        qa_in = &C.qa[l].out;
    }
    C.cls.resize(p.ix.cls.size());
    const std::vector<double>* cls_in = &shared_out;
    for (std::size_t l = 0; l < p.ix.cls.size(); ++l) {
        layer_forward(p, p.ix.cls[l], *cls_in, C.cls[l], T, rng, drop.rate);
        cls_in = &C.cls[l].out;
    }

    head_forward(p, p.ix.span_head, qa_in->data(), T, D, C.span_pre, C.span_logits);
    std::vector<double> cls_out;
    head_forward(p, p.ix.class_head, cls_in->data(), 1, D, C.cls_pre, cls_out);
    for (int c = 0; c < kNumCategories; ++c) C.class_logits[c] = cls_out[c];
}

void backward(const ModelParams& p, const Caches& C, const std::vector<double>& d_span,
              const std::array<double, kNumCategories>& d_class, bool do_qa, bool do_cls,
              double* grad) {
    const int D = p.config.hidden_dim;
    const int T = C.T;
    const std::size_t TD = static_cast<std::size_t>(T) * D;

    std::vector<double> d_shared(TD, 0.0);

    if (do_qa) {
        std::vector<double> d_hqa =
            head_backward(p, p.ix.span_head, C.span_pre, C.h_qa().data(), T, D, d_span, grad);
        for (std::size_t l = C.qa.size(); l-- > 0;) {
            d_hqa = layer_backward(p, p.ix.qa[l], C.qa[l], d_hqa, grad, T);
        }
        for (std::size_t i = 0; i < TD; ++i) d_shared[i] += d_hqa[i];
    }
    if (do_cls) {
        std::vector<double> d_logits(d_class.begin(), d_class.end());
        std::vector<double> d_pooled =
            head_backward(p, p.ix.class_head, C.cls_pre, C.h_cls().data(), 1, D, d_logits, grad);
        std::vector<double> d_hcls(TD, 0.0);
        for (int i = 0; i < D; ++i) d_hcls[i] = d_pooled[i];
        for (std::size_t l = C.cls.size(); l-- > 0;) {
            d_hcls = layer_backward(p, p.ix.cls[l], C.cls[l], d_hcls, grad, T);
        }
        for (std::size_t i = 0; i < TD; ++i) d_shared[i] += d_hcls[i];
    }

    for (std::size_t l = C.shared.size(); l-- > 0;) {
        d_shared = layer_backward(p, p.ix.shared[l], C.shared[l], d_shared, grad, T);
    }

    std::vector<double> d_emb_ln(TD);
    apply_mask(C.emb_drop, d_shared.data(), d_emb_ln.data(), TD);
    std::vector<double> d_emb_sum(TD, 0.0);
    layernorm_backward(C.emb_sum.data(), p.data(p.ix.emb_ln_g), C.emb_mean.data(),
                       C.emb_rstd.data(), d_emb_ln.data(), d_emb_sum.data(),
                       grad + p.tensors[p.ix.emb_ln_g].offset,
                       grad + p.tensors[p.ix.emb_ln_b].offset, T, D);

    double* dtok = grad + p.tensors[p.ix.tok_emb].offset;
    double* dpos = grad + p.tensors[p.ix.pos_emb].offset;
    double* dseg = grad + p.tensors[p.ix.seg_emb].offset;
    for (int t = 0; t < T; ++t) {
        const double* row = d_emb_sum.data() + static_cast<std::size_t>(t) * D;
        double* tr = dtok + static_cast<std::size_t>(C.ids[t]) * D;
        double* pr = dpos + static_cast<std::size_t>(t) * D;
        double* sr = dseg + static_cast<std::size_t>(C.seg[t]) * D;
        for (int i = 0; i < D; ++i) {
            tr[i] += row[i];
            pr[i] += row[i];
            sr[i] += row[i];
        }
    }
}

}  // namespace engine

// ---------------------------------------------------------------------------
// Inference wrappers
// ---------------------------------------------------------------------------

EncoderOutput forward_encoder(const ModelParams& p, const TokenizedPair& pair) {
    engine::Caches C;
    engine::forward(p, pair, engine::DropoutPlan{}, C);
    const int D = p.config.hidden_dim;
    const int S = pair.seq_len();
    EncoderOutput out;
    out.n_real = C.T;
    out.seq_len = S;
    out.hidden = D;
    const std::size_t real = static_cast<std::size_t>(C.T) * D;
    const std::size_t full = static_cast<std::size_t>(S) * D;
    auto expand = [&](const std::vector<double>& src) {
        std::vector<double> dst(full, 0.0);
        for (std::size_t i = 0; i < real; ++i) dst[i] = src[i];
        return dst;
    };
    out.h_shared = expand(C.h_shared());
    out.h_qa = expand(C.h_qa());
    out.h_cls = expand(C.h_cls());
    out.pooled.assign(C.h_cls().begin(), C.h_cls().begin() + D);
    return out;
}

SpanLogits span_head(const ModelParams& p, const EncoderOutput& out,
                     const std::vector<std::uint8_t>& attention) {
    const int S = out.seq_len;
    if (static_cast<int>(attention.size()) != S) {
        throw std::invalid_argument("attention flags do not match sequence length");
    }
    std::vector<std::vector<double>> pre;
    std::vector<double> logits;
    engine::head_forward_public(p, p.ix.span_head, out.h_qa.data(), out.n_real, out.hidden, pre,
                                logits);
    SpanLogits sl;
    sl.start.assign(S, kMaskedLogit);
    sl.end.assign(S, kMaskedLogit);
    for (int t = 0; t < out.n_real; ++t) {
        if (attention[t] == 0) continue;
        sl.start[t] = logits[static_cast<std::size_t>(t) * 2];
        sl.end[t] = logits[static_cast<std::size_t>(t) * 2 + 1];
    }
    return sl;
}

ClassLogits class_head(const ModelParams& p, const EncoderOutput& out) {
    std::vector<std::vector<double>> pre;
    std::vector<double> logits;
    engine::head_forward_public(p, p.ix.class_head, out.pooled.data(), 1, out.hidden, pre, logits);
    ClassLogits cl{};
    for (int c = 0; c < kNumCategories; ++c) cl[c] = logits[c];
    return cl;
}

TokenSpan decode_span(const std::vector<double>& start_logits,
                      const std::vector<double>& end_logits, const std::vector<bool>& valid,
                      int max_answer_len) {
    const int n = static_cast<int>(start_logits.size());
    if (max_answer_len <= 0) throw std::invalid_argument("max_answer_len must be positive");
    int best_s = -1, best_e = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < n; ++s) {
        if (!valid[s]) continue;
        for (int e = s; e < n && e - s < max_answer_len; ++e) {
            if (!valid[e]) continue;
            const double score = start_logits[s] + end_logits[e];
            if (score > best) {
                best = score;
                best_s = s;
                best_e = e;
            }
        }
    }
    if (best_s < 0) throw std::runtime_error("no valid span position to decode");
    return TokenSpan{best_s, best_e};
}

TokenSpan decode_span(const SpanLogits& logits, const TokenizedPair& pair, int max_answer_len) {
    std::vector<bool> valid(pair.seq_len());
    for (int i = 0; i < pair.seq_len(); ++i) valid[i] = pair.offsets[i].has_value();
    return decode_span(logits.start, logits.end, valid, max_answer_len);
}

std::array<double, kNumCategories> softmax_probs(const ClassLogits& logits) {
    std::array<double, kNumCategories> p{};
    double maxv = logits[0];
    for (double z : logits) maxv = std::max(maxv, z);
    double sum = 0.0;
    for (int c = 0; c < kNumCategories; ++c) {
        p[c] = std::exp(logits[c] - maxv);
        sum += p[c];
    }
    for (double& v : p) v /= sum;
    return p;
}

std::array<double, kNumCategories> sigmoid_probs(const ClassLogits& logits) {
    std::array<double, kNumCategories> p{};
    for (int c = 0; c < kNumCategories; ++c) {
        const double z = logits[c];
        p[c] = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    }
    return p;
}

CategoryLabel argmax_category(const ClassLogits& logits) {
    int best = 0;
    for (int c = 1; c < kNumCategories; ++c) {
        if (logits[c] > logits[best]) best = c;
    }
    return static_cast<CategoryLabel>(best);
}

}  // namespace mtlqa
