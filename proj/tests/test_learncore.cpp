#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <set>

#include "fedhp/dataprep.hpp"
#include "fedhp/learncore.hpp"
#include "oracles.hpp"

using namespace fedhp;

namespace {

Dataset random_dataset(std::size_t n, std::size_t features, std::size_t classes, Rng& rng) {
    Dataset d;
    d.features = features;
    d.classes = classes;
    Vec row(features);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : row) v = rng.normal();
        d.push_back(row, static_cast<int>(rng.below(classes)));
    }
    return d;
}

std::vector<std::size_t> all_rows(const Dataset& d) {
    std::vector<std::size_t> r(d.size());
    std::iota(r.begin(), r.end(), 0);
    return r;
}

double fd_relative_error(ModelKind kind, ModelDims dims, std::uint64_t seed) {
    Rng rng(seed);
    const auto data = random_dataset(6, dims.features, dims.classes, rng);
    Model m = Model::initial(kind, dims, rng);
    for (auto& v : m.params()) v += 0.3 * rng.normal();
    const auto rows = all_rows(data);
    const auto analytic = loss_and_gradient(m, data, rows).grad;
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        Model up = m, down = m;
        up.params()[k] += h;
        down.params()[k] -= h;
        const double numeric =
            (loss_and_gradient(up, data, rows).loss - loss_and_gradient(down, data, rows).loss) / (2.0 * h);
        const double scale = std::max({std::abs(numeric), std::abs(analytic[k]), 1e-6});
        worst = std::max(worst, std::abs(numeric - analytic[k]) / scale);
    }
    return worst;
}

}  // namespace

TEST_CASE("parameter counts") {
    CHECK(Model::param_count(ModelKind::SoftmaxRegression, {32, 0, 10}) == 330);
    CHECK(Model::param_count(ModelKind::Mlp, {4, 3, 2}) == 12 + 3 + 6 + 2);
    CHECK_THROWS(Model(ModelKind::SoftmaxRegression, {0, 0, 2}));
    CHECK_THROWS(Model(ModelKind::Mlp, {2, 0, 2}));
}

TEST_CASE("zero softmax parameters give ln 2 loss on two classes") {
    Rng rng(1);
    const auto d = random_dataset(9, 5, 2, rng);
    Model m(ModelKind::SoftmaxRegression, {5, 0, 2});
    CHECK(loss_and_gradient(m, d).loss == doctest::Approx(std::log(2.0)));
}

TEST_CASE("duplicated batch gives identical loss and gradient") {
    Rng rng(2);
    const auto d = random_dataset(7, 4, 3, rng);
    for (auto kind : {ModelKind::SoftmaxRegression, ModelKind::Mlp}) {
        Model m = Model::initial(kind, {4, 5, 3}, rng);
        for (auto& v : m.params()) v += 0.1 * rng.normal();
        const std::vector<std::size_t> once{0, 3, 5};
        const std::vector<std::size_t> twice{0, 3, 5, 0, 3, 5};
        const auto a = loss_and_gradient(m, d, once);
        const auto b = loss_and_gradient(m, d, twice);
        CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-14));
        for (std::size_t k = 0; k < a.grad.size(); ++k) CHECK(a.grad[k] == doctest::Approx(b.grad[k]).epsilon(1e-12));
    }
}

TEST_CASE("twenty finite-difference gradient checks") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto kind = s % 2 == 0 ? ModelKind::SoftmaxRegression : ModelKind::Mlp;
        const ModelDims dims{3 + s % 4, 4, 2 + s % 3};
        CAPTURE(s);
        CHECK(fd_relative_error(kind, dims, 100 + s) < 1e-4);
    }
}

TEST_CASE("softmax gradient matches the independent reference") {
    Rng rng(5);
    const auto d = random_dataset(12, 6, 4, rng);
    Model m(ModelKind::SoftmaxRegression, {6, 0, 4});
    for (auto& v : m.params()) v = rng.normal();
    const auto rows = all_rows(d);
    const auto lib = loss_and_gradient(m, d, rows);
    CHECK(lib.loss == doctest::Approx(oracle::softmax_loss(m.params(), d, rows)).epsilon(1e-12));
    const auto ref = oracle::softmax_grad(m.params(), d, rows);
    for (std::size_t k = 0; k < ref.size(); ++k) CHECK(lib.grad[k] == doctest::Approx(ref[k]).epsilon(1e-10));
}

TEST_CASE("saturated log probabilities are floored with zero gradient") {
    Dataset d;
    d.features = 1;
    d.classes = 2;
    d.push_back(Vec{1.0}, 0);
    Model m(ModelKind::SoftmaxRegression, {1, 0, 2});
    m.params() = {-50.0, 50.0, 0.0, 0.0};  // class 1 logit exceeds class 0 by 100
    const auto lg = loss_and_gradient(m, d);
    CHECK(lg.loss == doctest::Approx(-kLogProbFloor));
    for (double g : lg.grad) CHECK(g == 0.0);
}

TEST_CASE("loss_and_gradient rejects bad batches") {
    Rng rng(1);
    const auto d = random_dataset(3, 2, 2, rng);
    Model m(ModelKind::SoftmaxRegression, {2, 0, 2});
    CHECK_THROWS(loss_and_gradient(m, d, std::vector<std::size_t>{}));
    CHECK_THROWS(loss_and_gradient(m, d, std::vector<std::size_t>{3}));
    Model wide(ModelKind::SoftmaxRegression, {3, 0, 2});
    CHECK_THROWS(loss_and_gradient(wide, d));
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
    Rng rng(3);
    const auto d = random_dataset(20, 3, 3, rng);
    Model m(ModelKind::SoftmaxRegression, {3, 0, 3});
    for (auto& v : m.params()) v = rng.normal();
    const auto before = m.params();
    LocalUpdateOptions opts;
    opts.tau = 1;
    opts.eta = 0.0;
    opts.previous_smoothness = 2.5;
    const auto res = local_update(m, d, opts, rng);
    CHECK(m.params() == before);
    CHECK(res.estimates.update_norm == 0.0);
    CHECK(res.estimates.smoothness == 2.5);  // carried over
}

TEST_CASE("two local steps equal two single-step calls") {
    Rng data_rng(4);
    const auto d = random_dataset(50, 4, 3, data_rng);
    Model a(ModelKind::SoftmaxRegression, {4, 0, 3});
    Model b = a;
    Rng ra(9), rb(9);
    LocalUpdateOptions two;
    two.tau = 2;
    two.batch_size = 8;
    LocalUpdateOptions one = two;
    one.tau = 1;
    local_update(a, d, two, ra);
    local_update(b, d, one, rb);
    local_update(b, d, one, rb);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a.params()[k] == doctest::Approx(b.params()[k]).epsilon(1e-15));
}

TEST_CASE("local update matches the reference SGD step by step") {
    Rng data_rng(8);
    const auto d = random_dataset(40, 3, 2, data_rng);
    Model m(ModelKind::SoftmaxRegression, {3, 0, 2});
    Rng rng(21);
    Rng replay(21);
    LocalUpdateOptions opts;
    opts.tau = 4;
    opts.eta = 0.2;
    opts.batch_size = 10;
    const auto start = m.params();
    const auto res = local_update(m, d, opts, rng);

    auto w = start;
    for (std::size_t k = 0; k < opts.tau; ++k) {
        const auto rows = sample_batch(d.size(), opts.batch_size, replay);
        CHECK(res.loss_trace[k] == doctest::Approx(oracle::softmax_loss(w, d, rows)).epsilon(1e-12));
        const auto g = oracle::softmax_grad(w, d, rows);
        for (std::size_t q = 0; q < w.size(); ++q) w[q] -= opts.eta * g[q];
    }
    for (std::size_t q = 0; q < w.size(); ++q) CHECK(m.params()[q] == doctest::Approx(w[q]).epsilon(1e-12));

    // Smoothness is the difference quotient of full-shard gradients.
    const auto rows = all_rows(d);
    const auto g0 = oracle::softmax_grad(start, d, rows);
    const auto g1 = oracle::softmax_grad(w, d, rows);
    CHECK(res.estimates.smoothness == doctest::Approx(l2_distance(g1, g0) / l2_distance(w, start)).epsilon(1e-9));
    CHECK(res.estimates.update_norm == doctest::Approx(l2_distance(w, start) / opts.eta).epsilon(1e-12));
}

TEST_CASE("full-shard batches have zero gradient variance") {
    Rng rng(6);
    const auto d = random_dataset(16, 3, 2, rng);
    Model m(ModelKind::SoftmaxRegression, {3, 0, 2});
    LocalUpdateOptions opts;
    opts.tau = 3;
    opts.batch_size = 16;
    const auto res = local_update(m, d, opts, rng);
    CHECK(res.estimates.grad_variance == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    opts.batch_size = 2;
    const auto noisy = local_update(m, d, opts, rng);
    CHECK(noisy.estimates.grad_variance > 0.0);
}

TEST_CASE("variance probes do not advance the training stream") {
    Rng data_rng(10);
    const auto d = random_dataset(30, 3, 2, data_rng);
    Model a(ModelKind::SoftmaxRegression, {3, 0, 2});
    Model b = a;
    Rng ra(4), rb(4);
    LocalUpdateOptions opts;
    opts.tau = 2;
    opts.batch_size = 5;
    opts.variance_probes = 8;
    local_update(a, d, opts, ra);
    opts.variance_probes = 1;
    local_update(b, d, opts, rb);
    CHECK(ra.next_u64() == rb.next_u64());
}

TEST_CASE("separable two-class shard has a strictly decreasing loss trace") {
    SyntheticSpec spec;
    spec.classes = 2;
    spec.features = 8;
    spec.samples_per_class = 100;
    spec.cluster_spread = 0.05;
    spec.separation = 3.0;
    const auto data = generate(spec);
    Model m(ModelKind::SoftmaxRegression, {8, 0, 2});
    Rng rng(1);
    LocalUpdateOptions opts;
    opts.tau = 5;
    opts.eta = 0.1;
    opts.batch_size = static_cast<std::size_t>(data.train.size());
    const auto res = local_update(m, data.train, opts, rng);
    REQUIRE(res.loss_trace.size() == 5);
    for (std::size_t k = 1; k < 5; ++k) CHECK(res.loss_trace[k] < res.loss_trace[k - 1]);

    // Same run through the reference trainer.
    const auto ref = oracle::single_worker_sgd(data.train, data.test, 5, 0.1, data.train.size(), 1);
    for (std::size_t k = 0; k < 5; ++k) CHECK(res.loss_trace[k] == doctest::Approx(ref.loss_trace[k]).epsilon(1e-12));
}

TEST_CASE("overflowing parameters raise a numerical error") {
    Rng rng(12);
    const auto d = random_dataset(10, 3, 2, rng);
    Dataset loud = d;
    for (auto& v : loud.x) v *= 1e4;
    Model m(ModelKind::SoftmaxRegression, {3, 0, 2});
    LocalUpdateOptions opts;
    opts.eta = 1e307;  // eta * gradient overflows on the first step
    CHECK_THROWS_AS(local_update(m, loud, opts, rng), NumericalError);

    Model poisoned(ModelKind::SoftmaxRegression, {3, 0, 2});
    poisoned.params()[0] = std::nan("");
    CHECK_THROWS_AS(local_update(poisoned, d, LocalUpdateOptions{}, rng), NumericalError);
}

TEST_CASE("batch sampling") {
    Rng rng(1);
    const auto b = sample_batch(10, 4, rng);
    CHECK(b.size() == 4);
    CHECK(std::set<std::size_t>(b.begin(), b.end()).size() == 4);
    for (auto r : b) CHECK(r < 10);
    CHECK(sample_batch(3, 8, rng) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("accuracy of identical models and of chance") {
    Rng rng(13);
    auto d = random_dataset(4000, 4, 2, rng);
    Model m(ModelKind::SoftmaxRegression, {4, 0, 2});
    for (auto& v : m.params()) v = rng.normal();
    CHECK(std::abs(accuracy(m, d) - 0.5) < 0.05);
}
