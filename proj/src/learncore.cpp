#include "fedhp/learncore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fedhp {

void Dataset::push_back(std::span<const double> features_row, int label) {
    if (features_row.size() != features) throw std::invalid_argument("Dataset: feature width mismatch");
    x.insert(x.end(), features_row.begin(), features_row.end());
    y.push_back(label);
}

Model::Model(ModelKind kind, ModelDims dims)
    : kind_(kind), dims_(dims), params_(param_count(kind, dims), 0.0) {
    if (dims.features == 0 || dims.classes < 2) throw std::invalid_argument("Model: bad dimensions");
    if (kind == ModelKind::Mlp && dims.hidden == 0) throw std::invalid_argument("Model: MLP needs hidden > 0");
}

std::size_t Model::param_count(ModelKind kind, const ModelDims& d) {
    if (kind == ModelKind::SoftmaxRegression) return d.classes * d.features + d.classes;
    return d.hidden * d.features + d.hidden + d.classes * d.hidden + d.classes;
}

Model Model::initial(ModelKind kind, ModelDims dims, Rng& rng) {
    Model m(kind, dims);
    if (kind == ModelKind::Mlp) {
        const double r1 = std::sqrt(6.0 / static_cast<double>(dims.features + dims.hidden));
        const double r2 = std::sqrt(6.0 / static_cast<double>(dims.hidden + dims.classes));
        std::size_t k = 0;
        for (std::size_t i = 0; i < dims.hidden * dims.features; ++i) m.params_[k++] = rng.uniform(-r1, r1);
        k += dims.hidden;
        for (std::size_t i = 0; i < dims.classes * dims.hidden; ++i) m.params_[k++] = rng.uniform(-r2, r2);
    }
    return m;
}

namespace {

struct MlpView {
    std::size_t F, H, C;
    std::size_t w1() const { return 0; }
    std::size_t b1() const { return H * F; }
    std::size_t w2() const { return H * F + H; }
    std::size_t b2() const { return H * F + H + C * H; }
};

// Affine map out = W in + b, W rows x cols at params[w], b at params[b].
void affine(std::span<const double> params, std::size_t w, std::size_t b, std::size_t rows,
            std::size_t cols, std::span<const double> in, std::span<double> out) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = params[b + r];
        const double* wr = params.data() + w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * in[c];
        out[r] = acc;
    }
}

// Log-softmax in place.
void log_softmax(std::span<double> z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    for (double& v : z) v -= lse;
}

void check_rows(const Model& model, const Dataset& data, std::span<const std::size_t> rows) {
    if (rows.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
    if (data.features != model.dims().features) {
        throw std::invalid_argument("loss_and_gradient: feature dimension mismatch");
    }
    for (std::size_t r : rows) {
        if (r >= data.size()) throw std::invalid_argument("loss_and_gradient: row out of range");
        const int label = data.y[r];
        if (label < 0 || static_cast<std::size_t>(label) >= model.dims().classes) {
            throw std::invalid_argument("loss_and_gradient: label out of range");
        }
    }
}

}  // namespace

std::vector<double> Model::logits(std::span<const double> features) const {
    std::vector<double> z(dims_.classes);
    if (kind_ == ModelKind::SoftmaxRegression) {
        affine(params_, 0, dims_.classes * dims_.features, dims_.classes, dims_.features, features, z);
        return z;
    }
    const MlpView v{dims_.features, dims_.hidden, dims_.classes};
    std::vector<double> h(dims_.hidden);
    affine(params_, v.w1(), v.b1(), v.H, v.F, features, h);
    for (double& a : h) a = std::tanh(a);
    affine(params_, v.w2(), v.b2(), v.C, v.H, h, z);
    return z;
}

int Model::predict(std::span<const double> features) const {
    const auto z = logits(features);
    return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

LossGrad loss_and_gradient(const Model& model, const Dataset& data,
                           std::span<const std::size_t> rows) {
    check_rows(model, data, rows);
    const auto& d = model.dims();
    const auto& p = model.params();
    const double scale = 1.0 / static_cast<double>(rows.size());

    LossGrad out;
    out.grad.assign(p.size(), 0.0);
    std::vector<double> z(d.classes);
    std::vector<double> h(d.hidden);
    std::vector<double> dh(d.hidden);

    for (std::size_t r : rows) {
        const auto xr = data.row(r);
        const auto label = static_cast<std::size_t>(data.y[r]);

        if (model.kind() == ModelKind::SoftmaxRegression) {
            affine(p, 0, d.classes * d.features, d.classes, d.features, xr, z);
        } else {
            const MlpView v{d.features, d.hidden, d.classes};
            affine(p, v.w1(), v.b1(), v.H, v.F, xr, h);
            for (double& a : h) a = std::tanh(a);
            affine(p, v.w2(), v.b2(), v.C, v.H, h, z);
        }
        log_softmax(z);
        if (z[label] < kLogProbFloor) {
            out.loss -= kLogProbFloor * scale;
            continue;
        }
        out.loss -= z[label] * scale;

        // dz = softmax - onehot, scaled by 1/b.
        for (std::size_t c = 0; c < d.classes; ++c) {
            z[c] = (std::exp(z[c]) - (c == label ? 1.0 : 0.0)) * scale;
        }

        if (model.kind() == ModelKind::SoftmaxRegression) {
            const std::size_t b_off = d.classes * d.features;
            for (std::size_t c = 0; c < d.classes; ++c) {
                double* gw = out.grad.data() + c * d.features;
                for (std::size_t f = 0; f < d.features; ++f) gw[f] += z[c] * xr[f];
                out.grad[b_off + c] += z[c];
            }
            continue;
        }

        const MlpView v{d.features, d.hidden, d.classes};
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t c = 0; c < v.C; ++c) {
            const double* w2r = p.data() + v.w2() + c * v.H;
            double* g2r = out.grad.data() + v.w2() + c * v.H;
            for (std::size_t k = 0; k < v.H; ++k) {
                g2r[k] += z[c] * h[k];
                dh[k] += w2r[k] * z[c];
            }
            out.grad[v.b2() + c] += z[c];
        }
        for (std::size_t k = 0; k < v.H; ++k) {
            const double da = dh[k] * (1.0 - h[k] * h[k]);
            double* g1r = out.grad.data() + v.w1() + k * v.F;
            for (std::size_t f = 0; f < v.F; ++f) g1r[f] += da * xr[f];
            out.grad[v.b1() + k] += da;
        }
    }
    return out;
}

LossGrad loss_and_gradient(const Model& model, const Dataset& data) {
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return loss_and_gradient(model, data, rows);
}

double accuracy(const Model& model, const Dataset& data) {
    if (data.size() == 0) throw std::invalid_argument("accuracy: empty dataset");
    std::size_t hits = 0;
    for (std::size_t r = 0; r < data.size(); ++r) {
        if (model.predict(data.row(r)) == data.y[r]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

std::vector<std::size_t> sample_batch(std::size_t shard_size, std::size_t batch_size, Rng& rng) {
    std::vector<std::size_t> idx(shard_size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (batch_size >= shard_size) return idx;
    // Partial Fisher-Yates: the first batch_size slots become the sample.
    for (std::size_t i = 0; i < batch_size; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(shard_size - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(batch_size);
    return idx;
}

namespace {

constexpr std::uint64_t kProbeStream = 0x5eed'0f'5167ULL;

double variance_probe(const Model& model, const Dataset& shard, const Vec& full_grad,
                      std::size_t batch_size, std::size_t probes, Rng& rng) {
    if (probes == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t m = 0; m < probes; ++m) {
        const auto rows = sample_batch(shard.size(), batch_size, rng);
        const auto lg = loss_and_gradient(model, shard, rows);
        const double dev = l2_distance(lg.grad, full_grad);
        acc += dev * dev;
    }
    return std::sqrt(acc / static_cast<double>(probes));
}

}  // namespace

LocalUpdateResult local_update(Model& model, const Dataset& shard, const LocalUpdateOptions& opts,
                               Rng& rng) {
    if (opts.tau == 0) throw std::invalid_argument("local_update: tau must be >= 1");
    if (shard.size() == 0) throw std::invalid_argument("local_update: empty shard");
    if (opts.batch_size == 0) throw std::invalid_argument("local_update: batch_size must be >= 1");
    if (!(opts.eta >= 0.0)) throw std::invalid_argument("local_update: eta must be >= 0");

    LocalUpdateResult out;
    const Vec start = model.params();
    const Vec grad_start = loss_and_gradient(model, shard).grad;

    auto& x = model.params();
    out.loss_trace.reserve(opts.tau);
    for (std::size_t k = 0; k < opts.tau; ++k) {
        const auto rows = sample_batch(shard.size(), opts.batch_size, rng);
        const auto lg = loss_and_gradient(model, shard, rows);
        out.loss_trace.push_back(lg.loss);
        for (std::size_t q = 0; q < x.size(); ++q) x[q] -= opts.eta * lg.grad[q];
    }
    if (!all_finite(x)) throw NumericalError("local_update: parameters became non-finite");

    const double moved = l2_distance(x, start);
    out.estimates.update_norm = opts.eta > 0.0 ? moved / opts.eta : 0.0;

    const Vec grad_end = loss_and_gradient(model, shard).grad;
    out.estimates.smoothness =
        moved > 0.0 ? l2_distance(grad_end, grad_start) / moved : opts.previous_smoothness;

    Rng probe_rng = rng.derive(kProbeStream);
    out.estimates.grad_variance =
        variance_probe(model, shard, grad_end, opts.batch_size, opts.variance_probes, probe_rng);
    return out;
}

GradEstimates probe_estimates(const Model& model, const Dataset& shard, double eta,
                              std::size_t batch_size, std::size_t variance_probes, Rng& rng) {
    if (shard.size() == 0) throw std::invalid_argument("probe_estimates: empty shard");
    GradEstimates est;
    const Vec g0 = loss_and_gradient(model, shard).grad;
    Model stepped = model;
    for (std::size_t q = 0; q < g0.size(); ++q) stepped.params()[q] -= eta * g0[q];
    const double moved = l2_distance(stepped.params(), model.params());
    if (moved > 0.0) {
        const Vec g1 = loss_and_gradient(stepped, shard).grad;
        est.smoothness = l2_distance(g1, g0) / moved;
    }
    est.grad_variance = variance_probe(model, shard, g0, batch_size, variance_probes, rng);
    return est;
}

}  // namespace fedhp
