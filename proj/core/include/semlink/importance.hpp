#pragma once

#include "semlink/semcodec.hpp"

namespace semlink {

// Per-feature importance: g from pooled task gradients, v from mean absolute
// cosine similarity to the other features, omega the normalized product.
struct ImportanceWeights {
    Vec g;
    Vec v;
    Vec omega; // sums to 1, entries >= 0
};

// Signed pooled mean per feature: (1/(W*H*N)) sum_n sum_ij grads(n, k*WH+ij).
// Useful when averaging relevance over a calibration set before taking the
// magnitude. class_index >= 0 pools only that output row.
Vec str_pooled_mean(const Mat& grads, int C, int W, int H, int class_index = -1);

// g_k = |str_pooled_mean(...)_k|.
// grads: N x (C*W*H) as produced by grad_logits_wrt_features.
// class_index >= 0 pools only that output row (non-default variant).
Vec str_weights(const Mat& grads, int C, int W, int H, int class_index = -1);

// <a,b> / (|a||b|); zero-norm inputs return 0 by convention.
double cosine_similarity(const double* a, const double* b, int n);
double cosine_similarity(const Vec& a, const Vec& b);

// v_k = (1/(C-1)) sum_{j != k} |sim(map_k, map_j)|. Requires C >= 2.
Vec isr_weights(const FeatureMaps& a);

// omega = (g .* v) / sum(g .* v); an all-zero product degenerates to the
// uniform vector so downstream allocators never divide by zero.
ImportanceWeights combine(const Vec& g, const Vec& v);

} // namespace semlink
