#include "semlink/semcodec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "semlink/rng.hpp"

namespace semlink {

SyntheticDataset generate_dataset(int n, int d, int n_classes, uint64_t seed,
                                  double noise_std) {
    if (n < n_classes) throw std::invalid_argument("generate_dataset: n < n_classes");
    if (d < 1 || n_classes < 2) throw std::invalid_argument("generate_dataset: bad shape");
    Rng rng(seed);
    SyntheticDataset ds;
    ds.d = d;
    ds.n_classes = n_classes;
    ds.noise_std = noise_std;
    // 4 sigma of class-mean separation keeps the Bayes-optimal accuracy of a
    // 10-class problem near 0.98; at 3 sigma the ceiling drops to ~0.86,
    // too low a floor for the downstream experiments.
    const double radius = 4.0 * noise_std;
    // Class structure lives in the first half of the input dimensions; the
    // upper half carries only noise. Encoder features that read the noise
    // half are genuinely task-irrelevant, which gives the feature-importance
    // machinery a real spread to work with.
    const int d_sig = std::max(1, d / 2);
    ds.class_means.resize(size_t(n_classes));
    for (auto& mean : ds.class_means) {
        mean.assign(size_t(d), 0.0);
        double norm2 = 0.0;
        for (int j = 0; j < d_sig; ++j) {
            mean[size_t(j)] = rng.gaussian();
            norm2 += mean[size_t(j)] * mean[size_t(j)];
        }
        double s = norm2 > 0.0 ? radius / std::sqrt(norm2) : 0.0;
        for (auto& m : mean) m *= s;
    }
    ds.inputs.resize(size_t(n));
    ds.labels.resize(size_t(n));
    for (int i = 0; i < n; ++i) {
        int label = i % n_classes; // round-robin keeps classes balanced within +-1
        ds.labels[size_t(i)] = label;
        Vec x(static_cast<size_t>(d));
        for (int j = 0; j < d; ++j) {
            x[size_t(j)] = ds.class_means[size_t(label)][size_t(j)] + noise_std * rng.gaussian();
        }
        ds.inputs[size_t(i)] = std::move(x);
    }
    return ds;
}

CodecParams make_codec(int d, int C, int W, int H, int n_classes, int hidden,
                       uint64_t seed) {
    if (d < 1 || C < 1 || W < 1 || H < 1 || n_classes < 2 || hidden < 1)
        throw std::invalid_argument("make_codec: bad shape");
    CodecParams p;
    p.d = d;
    p.C = C;
    p.W = W;
    p.H = H;
    p.N = n_classes;
    p.seed = seed;
    const int f = C * W * H;
    Rng rng(derive_seed(seed, {seed_tag('e', 'n', 'c', 'w')}));
    p.w_enc = Mat(f, d);
    double s = 1.0 / std::sqrt(double(d));
    // Feature maps sweep from the signal half of the input to the noise
    // half (matching the dataset convention): the first map reads only the
    // class-bearing dimensions, the last only noise, so task relevance
    // varies genuinely across features.
    const int d_sig = std::max(1, d / 2);
    for (int r = 0; r < f; ++r) {
        int c = r / (W * H);
        double phase = C > 1 ? 0.5 * M_PI * double(c) / double(C - 1) : 0.0;
        double sig_gain = std::cos(phase);
        double noise_gain = std::sin(phase);
        for (int col = 0; col < d; ++col) {
            double gain = col < d_sig ? sig_gain : noise_gain;
            p.w_enc(r, col) = gain * s * rng.gaussian();
        }
    }
    p.b_enc.assign(size_t(f), 0.0);
    p.head = Mlp::make({f, hidden, n_classes}, derive_seed(seed, {seed_tag('h', 'e', 'a', 'd')}));
    return p;
}

FeatureMaps encode(const Vec& x, const CodecParams& params) {
    if (int(x.size()) != params.d)
        throw std::invalid_argument("encode: input dimension mismatch");
    FeatureMaps a;
    a.C = params.C;
    a.W = params.W;
    a.H = params.H;
    a.v = matvec(params.w_enc, x);
    for (size_t i = 0; i < a.v.size(); ++i) a.v[i] = std::tanh(a.v[i] + params.b_enc[i]);
    return a;
}

TaskOutput task_forward(const FeatureMaps& a, const CodecParams& params) {
    if (a.total() != params.head.input_dim())
        throw std::invalid_argument("task_forward: feature shape mismatch");
    TaskOutput out;
    out.logits = params.head.forward(a.v);
    out.label = int(std::max_element(out.logits.begin(), out.logits.end()) -
                    out.logits.begin()); // max_element keeps the first maximum
    return out;
}

Mat grad_logits_wrt_features(const FeatureMaps& a, const CodecParams& params) {
    if (a.total() != params.head.input_dim())
        throw std::invalid_argument("grad_logits_wrt_features: feature shape mismatch");
    Mlp::Cache cache;
    (void)params.head.forward(a.v, &cache);
    const int f = a.total();
    const int n = params.N;
    Mat grads(n, f);
    auto gbuf = Mlp::Grad::zeros_like(params.head);
    for (int row = 0; row < n; ++row) {
        Vec dout(size_t(n), 0.0);
        dout[size_t(row)] = 1.0;
        Vec dx;
        params.head.backward(cache, dout, gbuf, &dx);
        for (int c = 0; c < f; ++c) grads(row, c) = dx[size_t(c)];
    }
    return grads;
}

Vec softmax(const Vec& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    Vec p(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

double cross_entropy(const Vec& logits, int label) {
    if (label < 0 || size_t(label) >= logits.size())
        throw std::invalid_argument("cross_entropy: label out of range");
    double mx = *std::max_element(logits.begin(), logits.end());
    double lse = 0.0;
    for (double z : logits) lse += std::exp(z - mx);
    return -(logits[size_t(label)] - mx - std::log(lse));
}

CodecParams train_codec(const SyntheticDataset& ds, const CodecShape& shape, int epochs,
                        double lr, uint64_t seed, TrainReport* report) {
    if (ds.inputs.empty()) throw std::invalid_argument("train_codec: empty dataset");
    CodecParams params =
        make_codec(ds.d, shape.C, shape.W, shape.H, ds.n_classes, shape.hidden, seed);

    // Encoder is frozen; feature vectors are fixed across epochs.
    std::vector<FeatureMaps> feats(ds.inputs.size());
    for (size_t i = 0; i < ds.inputs.size(); ++i) feats[i] = encode(ds.inputs[i], params);

    const double inv_n = 1.0 / double(ds.inputs.size());
    if (report) report->losses.clear();
    for (int epoch = 0; epoch < epochs; ++epoch) {
        auto g = Mlp::Grad::zeros_like(params.head);
        double loss = 0.0;
        for (size_t i = 0; i < feats.size(); ++i) {
            Mlp::Cache cache;
            Vec logits = params.head.forward(feats[i].v, &cache);
            loss += cross_entropy(logits, ds.labels[i]);
            Vec dlogits = softmax(logits);
            dlogits[size_t(ds.labels[i])] -= 1.0;
            for (auto& v : dlogits) v *= inv_n;
            params.head.backward(cache, dlogits, g);
        }
        if (report) report->losses.push_back(loss * inv_n);
        sgd_step(params.head, g, lr);
    }

    int correct = 0;
    for (size_t i = 0; i < feats.size(); ++i) {
        if (task_forward(feats[i], params).label == ds.labels[i]) ++correct;
    }
    params.final_train_accuracy = double(correct) * inv_n;
    if (report) report->final_accuracy = params.final_train_accuracy;
    return params;
}

double top1_accuracy(const std::vector<TaskOutput>& outputs, const std::vector<int>& labels) {
    if (outputs.empty()) throw std::invalid_argument("top1_accuracy: empty input");
    if (outputs.size() != labels.size())
        throw std::invalid_argument("top1_accuracy: length mismatch");
    int correct = 0;
    for (size_t i = 0; i < outputs.size(); ++i) {
        if (outputs[i].label == labels[i]) ++correct;
    }
    return double(correct) / double(outputs.size());
}

} // namespace semlink
