#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mtlqa/encode.hpp"

namespace mtlqa {

enum class ClassificationMode { SoftmaxSingleLabel, SigmoidMultiLabel };

std::string classification_mode_name(ClassificationMode m);
ClassificationMode classification_mode_from_name(const std::string& name);

// Architecture: embedding layer, a shared transformer stack, and two
// parameter-disjoint task stacks (answer extraction / classification), each
// topped by an MLP head. Head dim lists give the hidden widths; the class
// head list ends with the 5-way output width.
struct EncoderConfig {
    int vocab_size = 0;
    int hidden_dim = 64;
    int num_heads = 4;
    int num_shared_layers = 2;
    int num_task_layers = 2;
    int feedforward_dim = 128;
    int max_seq_len = 128;
    std::vector<int> span_head_dims = {32, 16};
    std::vector<int> class_head_dims = {32, 16, 5};
    ClassificationMode classification_mode = ClassificationMode::SoftmaxSingleLabel;
    double dropout_rate = 0.1;

    void validate() const;

    // hidden 64, 4 heads, 2 shared + 2 task layers, FFN 128, seq 128.
    static EncoderConfig desk_preset(int vocab_size);
    // The full-scale shape (12 layers as 6 shared + 6 task, hidden 768,
    // heads [512,256]); kept for shape tests, far too large to train here.
    static EncoderConfig paper_preset(int vocab_size);
    // hidden 8, seq 8, 2 shared + 1 task layer; used by gradient checks.
    static EncoderConfig tiny_preset(int vocab_size);
};

enum class ParamGroup { Embedding, Shared, QaBranch, ClsBranch, SpanHead, ClassHead };

struct TensorInfo {
    std::string name;
    std::vector<int> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
    bool no_decay = false;  // layer-norm and bias parameters skip weight decay
    ParamGroup group = ParamGroup::Embedding;
};

struct LinearIx {
    int w = -1, b = -1;
};
struct LayerIx {
    LinearIx q, k, v, o;
    int ln1_g = -1, ln1_b = -1;
    LinearIx ff1, ff2;
    int ln2_g = -1, ln2_b = -1;
};
struct ParamIndex {
    int tok_emb = -1, pos_emb = -1, seg_emb = -1, emb_ln_g = -1, emb_ln_b = -1;
    std::vector<LayerIx> shared, qa, cls;
    std::vector<LinearIx> span_head, class_head;
};

// All trainable weights in one flat buffer; tensors records names, shapes and
// group membership for the optimizer, checkpoints and gradient tests.
struct ModelParams {
    EncoderConfig config;
    std::vector<TensorInfo> tensors;
    std::vector<double> values;
    ParamIndex ix;

    std::size_t num_params() const { return values.size(); }
    const double* data(int t) const { return values.data() + tensors[t].offset; }
    double* data(int t) { return values.data() + tensors[t].offset; }
    int find(const std::string& name) const;  // -1 when absent
};

// Deterministic scaled-uniform initialization (bound 1/sqrt(fan_in); layer
// norm gain 1, all biases 0).
ModelParams init_params(const EncoderConfig& config, std::uint64_t seed);

// Sentinel for masked span-logit positions: most negative finite value, so a
// softmax over real positions never sees a NaN.
inline constexpr double kMaskedLogit = -std::numeric_limits<double>::max();

struct EncoderOutput {
    int n_real = 0;
    int seq_len = 0;
    int hidden = 0;
    // Row-major [seq_len, hidden]; pad rows are zero.
    std::vector<double> h_shared, h_qa, h_cls;
    std::vector<double> pooled;  // h_cls at the [CLS] position
};

struct SpanLogits {
    std::vector<double> start, end;  // [seq_len]; pads carry kMaskedLogit
};

using ClassLogits = std::array<double, kNumCategories>;

// Inference path (dropout off). Attention never crosses into pad positions.
EncoderOutput forward_encoder(const ModelParams& p, const TokenizedPair& pair);
SpanLogits span_head(const ModelParams& p, const EncoderOutput& out,
                     const std::vector<std::uint8_t>& attention);
ClassLogits class_head(const ModelParams& p, const EncoderOutput& out);

// Argmax over {(s,e): s <= e, e-s < max_answer_len, valid[s] && valid[e]} of
// start[s]+end[e]; ties prefer the smaller s, then smaller e.
TokenSpan decode_span(const std::vector<double>& start_logits,
                      const std::vector<double>& end_logits, const std::vector<bool>& valid,
                      int max_answer_len);
// Valid positions are the non-special context tokens of the pair.
TokenSpan decode_span(const SpanLogits& logits, const TokenizedPair& pair, int max_answer_len);

std::array<double, kNumCategories> softmax_probs(const ClassLogits& logits);
std::array<double, kNumCategories> sigmoid_probs(const ClassLogits& logits);
CategoryLabel argmax_category(const ClassLogits& logits);

}  // namespace mtlqa
