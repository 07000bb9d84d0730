#pragma once

#include <cstdint>
#include <vector>

#include "semlink/mlp.hpp"

namespace semlink {

// C feature maps of shape W x H, tanh-bounded so every entry lies strictly
// inside (-1, 1).
struct FeatureMaps {
    int C = 0, W = 0, H = 0;
    Vec v; // C*W*H, map-major

    int map_size() const { return W * H; }
    int total() const { return C * W * H; }
    const double* map(int c) const { return v.data() + size_t(c) * size_t(map_size()); }
    double* map(int c) { return v.data() + size_t(c) * size_t(map_size()); }
};

struct TaskOutput {
    Vec logits; // pre-softmax
    int label = 0;
};

// Frozen random projection encoder plus a trainable one-hidden-layer task
// head. Deterministic given the seed.
struct CodecParams {
    int d = 0, C = 0, W = 0, H = 0, N = 0;
    Mat w_enc; // (C*W*H) x d
    Vec b_enc;
    Mlp head; // sizes {C*W*H, hidden, N}, tanh hidden
    uint64_t seed = 0;
    double final_train_accuracy = 0.0;
};

// Balanced Gaussian blobs: class means drawn once on a sphere of radius
// 3*noise_std, samples = mean + N(0, noise_std^2 I), labels round-robin.
struct SyntheticDataset {
    int d = 0;
    int n_classes = 0;
    double noise_std = 1.0;
    std::vector<Vec> inputs;
    std::vector<int> labels;
    std::vector<Vec> class_means;
};

SyntheticDataset generate_dataset(int n, int d, int n_classes, uint64_t seed,
                                  double noise_std = 1.0);

CodecParams make_codec(int d, int C, int W, int H, int n_classes, int hidden,
                       uint64_t seed);

// A = tanh(W_enc x + b_enc), reshaped to C x W x H.
FeatureMaps encode(const Vec& x, const CodecParams& params);

// logits = W2 tanh(W1 vec(A) + b1) + b2; label = argmax (ties -> lowest index).
TaskOutput task_forward(const FeatureMaps& a, const CodecParams& params);

// Exact d(logit_n)/d(A_f) as an N x (C*W*H) matrix, by manual
// backpropagation through the task head.
Mat grad_logits_wrt_features(const FeatureMaps& a, const CodecParams& params);

Vec softmax(const Vec& logits);
double cross_entropy(const Vec& logits, int label);

struct TrainReport {
    std::vector<double> losses; // mean cross-entropy per epoch
    double final_accuracy = 0.0;
};

// Full-batch gradient descent on the task head; the encoder stays frozen.
// Returns the trained params with final_train_accuracy recorded.
struct CodecShape {
    int C = 64, W = 2, H = 2;
    int hidden = 64;
};
CodecParams train_codec(const SyntheticDataset& ds, const CodecShape& shape, int epochs,
                        double lr, uint64_t seed, TrainReport* report = nullptr);

double top1_accuracy(const std::vector<TaskOutput>& outputs, const std::vector<int>& labels);

} // namespace semlink
