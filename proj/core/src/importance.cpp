#include "semlink/importance.hpp"

#include <cmath>
#include <stdexcept>

namespace semlink {

Vec str_pooled_mean(const Mat& grads, int C, int W, int H, int class_index) {
    const int ms = W * H;
    if (grads.cols != C * ms)
        throw std::invalid_argument("str_weights: gradient width != C*W*H");
    if (class_index >= grads.rows)
        throw std::invalid_argument("str_weights: class index out of range");
    const int n_lo = class_index < 0 ? 0 : class_index;
    const int n_hi = class_index < 0 ? grads.rows : class_index + 1;
    const double denom = double(ms) * double(n_hi - n_lo);
    Vec g(size_t(C), 0.0);
    for (int k = 0; k < C; ++k) {
        double acc = 0.0;
        for (int n = n_lo; n < n_hi; ++n) {
            for (int e = 0; e < ms; ++e) acc += grads(n, k * ms + e);
        }
        g[size_t(k)] = acc / denom;
    }
    return g;
}

Vec str_weights(const Mat& grads, int C, int W, int H, int class_index) {
    Vec g = str_pooled_mean(grads, C, W, H, class_index);
    for (auto& v : g) v = std::abs(v);
    return g;
}

double cosine_similarity(const double* a, const double* b, int n) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int i = 0; i < n; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double cosine_similarity(const Vec& a, const Vec& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("cosine_similarity: shape mismatch");
    return cosine_similarity(a.data(), b.data(), int(a.size()));
}

Vec isr_weights(const FeatureMaps& a) {
    if (a.C < 2) throw std::invalid_argument("isr_weights: need at least 2 features");
    const int ms = a.map_size();
    Vec v(size_t(a.C), 0.0);
    for (int k = 0; k < a.C; ++k) {
        double acc = 0.0;
        for (int j = 0; j < a.C; ++j) {
            if (j == k) continue;
            acc += std::abs(cosine_similarity(a.map(k), a.map(j), ms));
        }
        v[size_t(k)] = acc / double(a.C - 1);
    }
    return v;
}

ImportanceWeights combine(const Vec& g, const Vec& v) {
    if (g.size() != v.size()) throw std::invalid_argument("combine: length mismatch");
    ImportanceWeights w;
    w.g = g;
    w.v = v;
    w.omega.resize(g.size());
    double sum = 0.0;
    for (size_t i = 0; i < g.size(); ++i) {
        w.omega[i] = g[i] * v[i];
        sum += w.omega[i];
    }
    if (sum > 0.0) {
        for (auto& o : w.omega) o /= sum;
    } else {
        for (auto& o : w.omega) o = 1.0 / double(g.size());
    }
    return w;
}

} // namespace semlink
