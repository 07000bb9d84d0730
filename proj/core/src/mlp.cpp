#include "semlink/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "semlink/rng.hpp"

namespace semlink {

Vec matvec(const Mat& m, const Vec& x) {
    if (int(x.size()) != m.cols) throw std::invalid_argument("matvec: dimension mismatch");
    Vec y(size_t(m.rows), 0.0);
    for (int r = 0; r < m.rows; ++r) {
        double acc = 0.0;
        const double* row = m.a.data() + size_t(r) * size_t(m.cols);
        for (int c = 0; c < m.cols; ++c) acc += row[c] * x[size_t(c)];
        y[size_t(r)] = acc;
    }
    return y;
}

Mlp Mlp::make(const std::vector<int>& sizes, uint64_t seed) {
    if (sizes.size() < 2) throw std::invalid_argument("mlp: need at least in/out sizes");
    Rng rng(seed);
    Mlp m;
    for (size_t l = 0; l + 1 < sizes.size(); ++l) {
        Mat w(sizes[l + 1], sizes[l]);
        double s = 1.0 / std::sqrt(double(sizes[l]));
        for (auto& v : w.a) v = s * rng.gaussian();
        m.w.push_back(std::move(w));
        m.b.emplace_back(size_t(sizes[l + 1]), 0.0);
    }
    return m;
}

Vec Mlp::forward(const Vec& x, Cache* cache, const std::vector<Vec>* hidden_masks) const {
    if (cache) {
        cache->input = x;
        cache->act.clear();
    }
    Vec cur = x;
    for (size_t l = 0; l < w.size(); ++l) {
        Vec z = matvec(w[l], cur);
        for (size_t i = 0; i < z.size(); ++i) z[i] += b[l][i];
        if (l + 1 < w.size()) {
            for (auto& v : z) v = std::tanh(v);
            if (hidden_masks && l < hidden_masks->size() && !(*hidden_masks)[l].empty()) {
                for (size_t i = 0; i < z.size(); ++i) z[i] *= (*hidden_masks)[l][i];
            }
        }
        if (cache) cache->act.push_back(z);
        cur = std::move(z);
    }
    return cur;
}

Mlp::Grad Mlp::Grad::zeros_like(const Mlp& m) {
    Grad g;
    for (const auto& wl : m.w) g.w.emplace_back(wl.rows, wl.cols);
    for (const auto& bl : m.b) g.b.emplace_back(bl.size(), 0.0);
    return g;
}

void Mlp::Grad::add_scaled(const Grad& other, double s) {
    for (size_t l = 0; l < w.size(); ++l) {
        for (size_t i = 0; i < w[l].a.size(); ++i) w[l].a[i] += s * other.w[l].a[i];
        for (size_t i = 0; i < b[l].size(); ++i) b[l][i] += s * other.b[l][i];
    }
}

void Mlp::Grad::scale(double s) {
    for (auto& wl : w)
        for (auto& v : wl.a) v *= s;
    for (auto& bl : b)
        for (auto& v : bl) v *= s;
}

void Mlp::backward(const Cache& cache, const Vec& dl_dout, Grad& g, Vec* dl_dx,
                   const std::vector<Vec>* hidden_masks) const {
    if (cache.act.size() != w.size())
        throw std::invalid_argument("mlp backward: cache does not match network");
    Vec delta = dl_dout; // dL/dz at current layer (output layer is linear)
    for (size_t li = w.size(); li-- > 0;) {
        const Vec& in = li == 0 ? cache.input : cache.act[li - 1];
        for (int r = 0; r < w[li].rows; ++r) {
            double d = delta[size_t(r)];
            g.b[li][size_t(r)] += d;
            double* grow = g.w[li].a.data() + size_t(r) * size_t(w[li].cols);
            for (int c = 0; c < w[li].cols; ++c) grow[c] += d * in[size_t(c)];
        }
        if (li == 0 && dl_dx == nullptr) break;
        // dL/d(activation of previous layer)
        Vec dprev(size_t(w[li].cols), 0.0);
        for (int r = 0; r < w[li].rows; ++r) {
            double d = delta[size_t(r)];
            const double* row = w[li].a.data() + size_t(r) * size_t(w[li].cols);
            for (int c = 0; c < w[li].cols; ++c) dprev[size_t(c)] += d * row[c];
        }
        if (li == 0) {
            if (dl_dx) *dl_dx = std::move(dprev);
            break;
        }
        // Through dropout mask then tanh of layer li-1.
        const Vec& a = cache.act[li - 1];
        const Vec* mask = nullptr;
        if (hidden_masks && li - 1 < hidden_masks->size() && !(*hidden_masks)[li - 1].empty())
            mask = &(*hidden_masks)[li - 1];
        for (size_t i = 0; i < dprev.size(); ++i) {
            double ai = a[i];
            if (mask) {
                double mi = (*mask)[i];
                if (mi == 0.0) {
                    dprev[i] = 0.0;
                    continue;
                }
                ai /= mi;        // stored activation includes the mask scale
                dprev[i] *= mi;
            }
            dprev[i] *= (1.0 - ai * ai);
        }
        delta = std::move(dprev);
    }
}

size_t Mlp::param_count() const {
    size_t n = 0;
    for (const auto& wl : w) n += wl.a.size();
    for (const auto& bl : b) n += bl.size();
    return n;
}

std::vector<double*> Mlp::param_ptrs() {
    std::vector<double*> p;
    p.reserve(param_count());
    for (auto& wl : w)
        for (auto& v : wl.a) p.push_back(&v);
    for (auto& bl : b)
        for (auto& v : bl) p.push_back(&v);
    return p;
}

std::vector<const double*> Mlp::param_ptrs() const {
    std::vector<const double*> p;
    p.reserve(param_count());
    for (const auto& wl : w)
        for (const auto& v : wl.a) p.push_back(&v);
    for (const auto& bl : b)
        for (const auto& v : bl) p.push_back(&v);
    return p;
}

void sgd_step(Mlp& m, const Mlp::Grad& g, double lr) {
    for (size_t l = 0; l < m.w.size(); ++l) {
        for (size_t i = 0; i < m.w[l].a.size(); ++i) m.w[l].a[i] -= lr * g.w[l].a[i];
        for (size_t i = 0; i < m.b[l].size(); ++i) m.b[l][i] -= lr * g.b[l][i];
    }
}

AdamState AdamState::zeros_like(const Mlp& net) {
    AdamState st;
    st.m = Mlp::Grad::zeros_like(net);
    st.v = Mlp::Grad::zeros_like(net);
    return st;
}

void adam_step(Mlp& net, const Mlp::Grad& g, AdamState& st, double lr, double beta1,
               double beta2, double eps) {
    st.t += 1;
    double bc1 = 1.0 - std::pow(beta1, double(st.t));
    double bc2 = 1.0 - std::pow(beta2, double(st.t));
    for (size_t l = 0; l < net.w.size(); ++l) {
        for (size_t i = 0; i < net.w[l].a.size(); ++i) {
            double& m = st.m.w[l].a[i];
            double& v = st.v.w[l].a[i];
            double gr = g.w[l].a[i];
            m = beta1 * m + (1.0 - beta1) * gr;
            v = beta2 * v + (1.0 - beta2) * gr * gr;
            net.w[l].a[i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
        }
        for (size_t i = 0; i < net.b[l].size(); ++i) {
            double& m = st.m.b[l][i];
            double& v = st.v.b[l][i];
            double gr = g.b[l][i];
            m = beta1 * m + (1.0 - beta1) * gr;
            v = beta2 * v + (1.0 - beta2) * gr * gr;
            net.b[l][i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + eps);
        }
    }
}

} // namespace semlink
