#pragma once

#include <cstdint>
#include <vector>

namespace semlink {

using Vec = std::vector<double>;

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(size_t(r) * size_t(c), 0.0) {}
    double& operator()(int r, int c) { return a[size_t(r) * size_t(cols) + size_t(c)]; }
    double operator()(int r, int c) const { return a[size_t(r) * size_t(cols) + size_t(c)]; }
};

Vec matvec(const Mat& m, const Vec& x);

// Fully connected network, tanh on hidden layers, linear output. All
// gradients are exact manual backpropagation; no autodiff anywhere.
struct Mlp {
    std::vector<Mat> w; // w[l]: out_l x in_l
    std::vector<Vec> b;

    // sizes = {in, hidden..., out}; weights N(0, 1/sqrt(fan_in)), biases 0.
    static Mlp make(const std::vector<int>& sizes, uint64_t seed);

    int input_dim() const { return w.empty() ? 0 : w.front().cols; }
    int output_dim() const { return w.empty() ? 0 : w.back().rows; }
    int layer_count() const { return int(w.size()); }

    struct Cache {
        Vec input;
        std::vector<Vec> act; // post-activation per layer (last = output)
    };

    // Optional per-hidden-layer dropout masks (values 0 or 1/(1-p)); empty
    // masks disable dropout. Masks must be supplied consistently between
    // forward and backward.
    Vec forward(const Vec& x, Cache* cache = nullptr,
                const std::vector<Vec>* hidden_masks = nullptr) const;

    struct Grad {
        std::vector<Mat> w;
        std::vector<Vec> b;
        static Grad zeros_like(const Mlp& m);
        void add_scaled(const Grad& other, double s);
        void scale(double s);
    };

    // Accumulates parameter gradients into g given dL/d(output); optionally
    // returns dL/d(input).
    void backward(const Cache& cache, const Vec& dl_dout, Grad& g, Vec* dl_dx = nullptr,
                  const std::vector<Vec>* hidden_masks = nullptr) const;

    // Flat parameter access for optimizers and finite-difference checks.
    size_t param_count() const;
    std::vector<double*> param_ptrs();
    std::vector<const double*> param_ptrs() const;
};

void sgd_step(Mlp& m, const Mlp::Grad& g, double lr);

struct AdamState {
    Mlp::Grad m, v;
    int64_t t = 0;
    static AdamState zeros_like(const Mlp& net);
};

void adam_step(Mlp& net, const Mlp::Grad& g, AdamState& st, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

} // namespace semlink
