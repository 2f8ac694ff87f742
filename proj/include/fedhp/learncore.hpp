#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedhp/numkit.hpp"

namespace fedhp {

// Labelled feature rows, row-major.
struct Dataset {
    std::size_t features = 0;
    std::size_t classes = 0;
    std::vector<double> x;  // size() * features
    std::vector<int> y;

    std::size_t size() const { return y.size(); }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(x).subspan(r * features, features);
    }
    void push_back(std::span<const double> features_row, int label);
};

enum class ModelKind { SoftmaxRegression, Mlp };

struct ModelDims {
    std::size_t features = 0;
    std::size_t hidden = 0;  // ignored for softmax regression
    std::size_t classes = 0;
};

// Parameter layout:
//   softmax: W (classes x features), b (classes)
//   mlp:     W1 (hidden x features), b1 (hidden), W2 (classes x hidden), b2 (classes)
// The MLP uses tanh hidden units.
class Model {
public:
    Model(ModelKind kind, ModelDims dims);

    static std::size_t param_count(ModelKind kind, const ModelDims& dims);
    // Softmax starts at zero; the MLP draws Glorot-uniform weights from rng.
    static Model initial(ModelKind kind, ModelDims dims, Rng& rng);

    ModelKind kind() const { return kind_; }
    const ModelDims& dims() const { return dims_; }
    std::size_t size() const { return params_.size(); }

    Vec& params() { return params_; }
    const Vec& params() const { return params_; }

    // Logits for one feature row.
    std::vector<double> logits(std::span<const double> features) const;
    int predict(std::span<const double> features) const;

private:
    ModelKind kind_;
    ModelDims dims_;
    Vec params_;
};

struct LossGrad {
    double loss = 0.0;
    Vec grad;
};

// Log-probabilities below this floor are clamped; a clamped sample
// contributes a constant loss and zero gradient.
inline constexpr double kLogProbFloor = -30.0;

// Mean cross-entropy over the selected rows and its exact gradient.
LossGrad loss_and_gradient(const Model& model, const Dataset& data,
                           std::span<const std::size_t> rows);
// Over the whole dataset.
LossGrad loss_and_gradient(const Model& model, const Dataset& data);

double accuracy(const Model& model, const Dataset& data);

struct GradEstimates {
    double smoothness = 0.0;      // L_i
    double grad_variance = 0.0;   // sigma_i (root of the mean squared deviation)
    double update_norm = 0.0;     // ||g_i|| with g_i the sum of the tau step gradients
};

struct LocalUpdateResult {
    GradEstimates estimates;
    std::vector<double> loss_trace;  // mini-batch loss before each step
};

struct LocalUpdateOptions {
    std::size_t tau = 1;
    double eta = 0.1;
    std::size_t batch_size = 32;
    std::size_t variance_probes = 8;
    // Carried into the result when the step leaves the parameters unchanged.
    double previous_smoothness = 0.0;
};

// tau SGD steps x <- x - eta * grad F(x; batch) on fresh mini-batches drawn
// from rng, followed by the smoothness and variance estimates at the end
// point. Only the step batches consume rng; the variance probes run on a
// stream derived from it, so two calls with tau=1 reproduce one call with
// tau=2.
LocalUpdateResult local_update(Model& model, const Dataset& shard, const LocalUpdateOptions& opts,
                               Rng& rng);

// Smoothness and variance estimates at the current point without training.
// The smoothness quotient compares full gradients at x and x - eta * grad f(x).
GradEstimates probe_estimates(const Model& model, const Dataset& shard, double eta,
                              std::size_t batch_size, std::size_t variance_probes, Rng& rng);

// Mini-batch of distinct row indices; the whole shard in order when
// batch_size >= shard size.
std::vector<std::size_t> sample_batch(std::size_t shard_size, std::size_t batch_size, Rng& rng);

}  // namespace fedhp
