#pragma once

// Internal forward/backward engine shared by the inference wrappers
// (model.cpp) and the training loop (training.cpp). Everything here works on
// the effective (non-pad) prefix of the sequence; pad positions never enter
// the computation, which is what makes pad invariance exact.

#include <array>
#include <cstdint>
#include <vector>

#include "mtlqa/model.hpp"

namespace mtlqa::engine {

struct DropoutPlan {
    bool enabled = false;
    double rate = 0.0;
    std::uint64_t seed = 0;
};

struct LayerCaches {
    std::vector<double> x;          // layer input [T,D]
    std::vector<double> q, k, v;    // [T,D]
    std::vector<double> att;        // softmaxed scores [H,T,T]
    std::vector<double> ctx;        // attention-weighted values [T,D]
    std::vector<double> attn_proj;  // output projection, pre-dropout [T,D]
    std::vector<double> drop1;      // dropout mask or empty [T,D]
    std::vector<double> res1;       // x + drop(attn_proj) [T,D]
    std::vector<double> ln1_mean, ln1_rstd;  // [T]
    std::vector<double> y1;                  // LN1 output [T,D]
    std::vector<double> ff1_pre;             // [T,F]
    std::vector<double> ff2;                 // pre-dropout [T,D]
    std::vector<double> drop2;               // [T,D]
    std::vector<double> res2;                // [T,D]
    std::vector<double> ln2_mean, ln2_rstd;  // [T]
    std::vector<double> out;                 // [T,D]
};

struct Caches {
    int T = 0;  // effective sequence length
    std::vector<int> ids, seg;
    std::vector<double> emb_sum;              // [T,D]
    std::vector<double> emb_mean, emb_rstd;   // [T]
    std::vector<double> emb_ln_out;           // [T,D]
    std::vector<double> emb_drop;             // [T,D]
    std::vector<double> x0;                   // encoder input [T,D]
    std::vector<LayerCaches> shared, qa, cls;
    std::vector<std::vector<double>> span_pre;  // per head layer, [T,dim]
    std::vector<double> span_logits;            // [T,2]
    std::vector<std::vector<double>> cls_pre;   // per head layer, [dim]
    std::array<double, kNumCategories> class_logits{};

    const std::vector<double>& h_shared() const;
    const std::vector<double>& h_qa() const;
    const std::vector<double>& h_cls() const;
};

void forward(const ModelParams& p, const TokenizedPair& pair, const DropoutPlan& drop, Caches& C);

// Backpropagates from head-output gradients into `grad` (flat, same layout as
// params.values). d_span is [T,2] over the effective length. Disabled sides
// are skipped entirely, so their parameter gradients stay exactly zero.
void backward(const ModelParams& p, const Caches& C, const std::vector<double>& d_span,
              const std::array<double, kNumCategories>& d_class, bool do_qa, bool do_cls,
              double* grad);

}  // namespace mtlqa::engine
