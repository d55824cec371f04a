#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "svbrdf/nd/gradcheck.hpp"
#include "svbrdf/nd/graph.hpp"
#include "svbrdf/nd/nn.hpp"
#include "svbrdf/nd/ops.hpp"
#include "svbrdf/rng.hpp"

#include <cstring>

using namespace svbrdf;
using namespace svbrdf::nd;

TEST_CASE("elementwise identities") {
    Tensor x = Tensor::from_data({2, 3}, {1, -2, 3, 0.5, -0.25, 7});
    Tensor zx = Tensor::zeros({2, 3});
    Tensor ox = Tensor::ones({2, 3});
    CHECK(add(x, zx).values() == x.values());
    CHECK(mul(x, ox).values() == x.values());
    CHECK(sub(x, zx).values() == x.values());
}

TEST_CASE("grad of sum(x*x) is 2x") {
    Tensor x = Tensor::param({3}, {1, 2, 3});
    Tensor y = sum_all(mul(x, x));
    backward(y);
    Tensor g = x.grad();
    CHECK(g[0] == doctest::Approx(2.0));
    CHECK(g[1] == doctest::Approx(4.0));
    CHECK(g[2] == doctest::Approx(6.0));
}

TEST_CASE("elementwise shape mismatch names both shapes") {
    Tensor a = Tensor::zeros({2, 3});
    Tensor b = Tensor::zeros({4});
    try {
        add(a, b);
        FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        CHECK(msg.find("[2,3]") != std::string::npos);
        CHECK(msg.find("[4]") != std::string::npos);
    }
}

TEST_CASE("broadcasting is associative on shapes") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        // build three mutually broadcastable shapes over a common base
        Shape base(1 + rng.uniform_index(3) + 1);
        for (int& d : base) d = 1 + static_cast<int>(rng.uniform_index(4));
        auto variant = [&](void) {
            Shape s = base;
            for (int& d : s)
                if (rng.uniform() < 0.4) d = 1;
            // possibly drop leading dims
            size_t drop = rng.uniform_index(s.size());
            return Shape(s.begin() + drop, s.end());
        };
        Shape a = variant(), b = variant(), c = variant();
        Shape ab_c = broadcast_shape(broadcast_shape(a, b), c);
        Shape a_bc = broadcast_shape(a, broadcast_shape(b, c));
        CHECK(ab_c == a_bc);
    }
}

TEST_CASE("matmul identities and gradient") {
    Rng rng(0);
    Tensor a = randn_tensor({4, 4}, rng);
    std::vector<double> iv(16, 0.0);
    for (int i = 0; i < 4; ++i) iv[i * 4 + i] = 1.0;
    Tensor eye = Tensor::from_data({4, 4}, iv);
    CHECK(matmul(a, eye).values() == a.values());
    CHECK(matmul(eye, a).values() == a.values());

    Tensor b = randn_tensor({4, 4}, rng);
    double err_a = grad_check([&](const Tensor& x) { return sum_all(square(matmul(x, b))); }, a);
    double err_b = grad_check([&](const Tensor& x) { return sum_all(square(matmul(a, x))); }, b);
    CHECK(err_a < 1e-5);
    CHECK(err_b < 1e-5);

    CHECK_THROWS_AS(matmul(Tensor::zeros({2, 3}), Tensor::zeros({4, 2})), std::invalid_argument);
}

TEST_CASE("conv2d shape and identity") {
    Rng rng(1);
    Tensor x = randn_tensor({1, 8, 8}, rng);
    Tensor k1 = Tensor::ones({1, 1, 1, 1});
    Tensor y = conv2d(x, k1, 1, 0);
    CHECK(y.values() == x.values());

    // channel-summing 1x1 kernel
    Tensor x3 = randn_tensor({3, 4, 4}, rng);
    Tensor k3 = Tensor::ones({1, 3, 1, 1});
    Tensor ys = conv2d(x3, k3, 1, 0);
    for (int i = 0; i < 16; ++i) {
        CHECK(ys[i] == doctest::Approx(x3[i] + x3[16 + i] + x3[32 + i]));
    }

    Tensor x8 = randn_tensor({1, 8, 8}, rng);
    Tensor k4 = randn_tensor({2, 1, 4, 4}, rng);
    Tensor y2 = conv2d(x8, k4, 2, 1);
    CHECK(y2.shape() == Shape{2, 4, 4});

    CHECK_THROWS_AS(conv2d(Tensor::zeros({1, 2, 2}), Tensor::zeros({1, 1, 5, 5}), 1, 0),
                    std::invalid_argument);
}

TEST_CASE("conv2d kernel gradient vs finite differences") {
    Rng rng(2);
    Tensor x = randn_tensor({1, 1, 5, 5}, rng);
    Tensor k0 = randn_tensor({2, 1, 3, 3}, rng);
    double err = grad_check(
        [&](const Tensor& k) { return sum_all(square(conv2d(x, k, 1, 1))); }, k0);
    CHECK(err < 1e-4);
    double err_in = grad_check(
        [&](const Tensor& xi) { return sum_all(square(conv2d(xi, k0, 2, 1))); }, x);
    CHECK(err_in < 1e-4);
}

TEST_CASE("softmax basics") {
    Tensor c = Tensor::full({4}, 3.25);
    Tensor y = softmax(c, 0);
    for (int i = 0; i < 4; ++i) CHECK(y[i] == doctest::Approx(0.25));

    Tensor hot = Tensor::from_data({2}, {1000.0, 0.0});
    Tensor yh = softmax(hot, 0);
    CHECK(yh[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(yh[1] == doctest::Approx(0.0).epsilon(1e-9));
    double s = yh[0] + yh[1];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-6));

    Rng rng(3);
    Tensor x = randn_tensor({3, 5}, rng);
    double err = grad_check(
        [&](const Tensor& t) { return sum_all(square(softmax(t, 1))); }, x);
    CHECK(err < 1e-5);
}

TEST_CASE("grad_check floor and rejection") {
    Rng rng(4);
    Tensor x = randn_tensor({6}, rng);
    double err = grad_check([](const Tensor& t) { return sum_all(square(t)); }, x);
    CHECK(err < 1e-7);

    double cerr = grad_check([](const Tensor&) { return Tensor::scalar(5.0); }, x);
    CHECK(cerr == 0.0);

    CHECK_THROWS_AS(
        grad_check([](const Tensor&) { return Tensor::scalar(std::nan("")); }, x),
        std::invalid_argument);
}

TEST_CASE("every differentiable op passes grad_check on random inputs") {
    struct OpCase {
        const char* name;
        std::function<Tensor(const Tensor&)> f;
        Shape shape;
        double shift;      // keeps kinky/domain-limited ops away from trouble
        double eps = 1e-4; // fd step; normalization ops need a finer one
    };
    Rng aux(99);
    Tensor other = randn_tensor({3, 4}, aux);
    Tensor mat = randn_tensor({4, 3}, aux);
    Tensor kern = randn_tensor({2, 2, 3, 3}, aux);
    Tensor gamma = Tensor::param({4}, {1.0, 0.9, 1.1, 1.2});
    Tensor beta = Tensor::param({4}, {0.0, 0.1, -0.1, 0.2});
    Tensor wsum = randn_tensor({4, 3, 3}, aux); // linear probe, keeps gradients well away from zero
    std::vector<OpCase> cases = {
        {"add", [&](const Tensor& x) { return sum_all(square(add(x, other))); }, {3, 4}, 0.0},
        {"sub", [&](const Tensor& x) { return sum_all(square(sub(x, other))); }, {3, 4}, 0.0},
        {"mul", [&](const Tensor& x) { return sum_all(square(mul(x, other))); }, {3, 4}, 0.0},
        {"div", [&](const Tensor& x) { return sum_all(square(div(other, x))); }, {3, 4}, 3.0},
        {"mul_bcast", [&](const Tensor& x) { return sum_all(square(mul(x, Tensor::from_data({4}, {1, 2, 3, 4})))); }, {3, 4}, 0.0},
        {"matmul", [&](const Tensor& x) { return sum_all(square(matmul(x, mat))); }, {3, 4}, 0.0},
        {"transpose", [&](const Tensor& x) { return sum_all(square(matmul(transpose2d(x), mat))); }, {4, 3}, 0.0},
        {"softmax", [&](const Tensor& x) { return sum_all(square(softmax(x, -1))); }, {3, 4}, 0.0},
        {"sigmoid", [&](const Tensor& x) { return sum_all(square(sigmoid(x))); }, {3, 4}, 0.0},
        {"silu", [&](const Tensor& x) { return sum_all(square(silu(x))); }, {3, 4}, 0.0},
        {"exp", [&](const Tensor& x) { return sum_all(square(exp_op(x))); }, {3, 4}, 0.0},
        {"log", [&](const Tensor& x) { return sum_all(square(log_op(x))); }, {3, 4}, 4.0},
        {"sqrt", [&](const Tensor& x) { return sum_all(square(sqrt_op(x))); }, {3, 4}, 4.0},
        {"pow", [&](const Tensor& x) { return sum_all(square(pow_scalar(x, -0.5))); }, {3, 4}, 4.0},
        {"relu", [&](const Tensor& x) { return sum_all(square(relu(x))); }, {3, 4}, 2.0},
        {"abs", [&](const Tensor& x) { return sum_all(square(abs_op(x))); }, {3, 4}, 2.0},
        {"mean", [&](const Tensor& x) { return square(mean_all(x)); }, {3, 4}, 0.0},
        {"sum_last", [&](const Tensor& x) { return sum_all(square(sum_last_keepdim(x))); }, {3, 4}, 0.0},
        {"mean_last", [&](const Tensor& x) { return sum_all(square(mean_last_keepdim(x))); }, {3, 4}, 0.0},
        {"reshape", [&](const Tensor& x) { return sum_all(square(reshape(x, {4, 3}))); }, {3, 4}, 0.0},
        {"slice", [&](const Tensor& x) { return sum_all(square(slice0(x, 1, 3))); }, {4, 3}, 0.0},
        {"concat", [&](const Tensor& x) { return sum_all(square(concat0({x, other}))); }, {3, 4}, 0.0},
        {"gather", [&](const Tensor& x) { return sum_all(square(gather_rows(x, {0, 2, 2, 1}))); }, {3, 4}, 0.0},
        {"upsample", [&](const Tensor& x) { return sum_all(square(upsample_nearest2(x))); }, {2, 3, 3}, 0.0},
        {"groupnorm", [&](const Tensor& x) { return sum_all(mul(group_norm(x, 4, gamma, beta), wsum)); }, {4, 3, 3}, 0.0, 1e-5},
        {"hwc_chw", [&](const Tensor& x) { return sum_all(square(hwc_to_chw(x))); }, {3, 3, 2}, 0.0},
        {"chw_hwc", [&](const Tensor& x) { return sum_all(square(chw_to_hwc(x))); }, {2, 3, 3}, 0.0},
        {"conv", [&](const Tensor& x) { return sum_all(square(conv2d(x, kern, 1, 1))); }, {2, 4, 4}, 0.0},
    };
    for (const OpCase& oc : cases) {
        CAPTURE(oc.name);
        double worst = 0.0;
        for (uint64_t seed = 0; seed < 10; ++seed) {
            Rng rng(derive_seed(seed, oc.name));
            Tensor base = randn_tensor(oc.shape, rng, 0.5);
            std::vector<double> v = base.values();
            for (double& x : v) x += oc.shift;
            worst = std::max(worst, grad_check(oc.f, Tensor::from_data(oc.shape, v), oc.eps));
        }
        std::string label = std::string(oc.name) + " worst " + std::to_string(worst);
        CHECK_MESSAGE(worst <= 1e-4, label);
    }
}

TEST_CASE("shared subexpressions accumulate gradients") {
    Tensor x = Tensor::param({3}, {0.5, -1.0, 2.0});
    Tensor g = mul(x, x);
    Tensor y = sum_all(add(g, g));
    backward(y);
    Tensor gx = x.grad();
    CHECK(gx[0] == doctest::Approx(2.0 * 2.0 * 0.5));
    CHECK(gx[1] == doctest::Approx(2.0 * 2.0 * -1.0));
    CHECK(gx[2] == doctest::Approx(2.0 * 2.0 * 2.0));
}

TEST_CASE("graph visits nodes once and unreachable grads are zero") {
    Tensor x = Tensor::param({2}, {1.0, 2.0});
    Tensor unused = Tensor::param({2}, {3.0, 4.0});
    Tensor g = mul(x, x);
    Tensor y = sum_all(add(g, g)); // shared node g appears twice as a parent
    ComputeGraph graph(y);
    // nodes: x, g, add, y  (each exactly once)
    CHECK(graph.node_count() == 4);
    graph.backward();
    Tensor gu = unused.grad();
    CHECK(gu[0] == 0.0);
    CHECK(gu[1] == 0.0);
}

TEST_CASE("ops are deterministic bit for bit") {
    Rng rng(11);
    Tensor x = randn_tensor({4, 6, 6}, rng);
    Tensor k = randn_tensor({3, 4, 3, 3}, rng);
    Tensor y1 = conv2d(x, k, 1, 1);
    Tensor y2 = conv2d(x, k, 1, 1);
    CHECK(std::memcmp(y1.data(), y2.data(), y1.size() * sizeof(double)) == 0);
    Tensor s1 = softmax(x, 0);
    Tensor s2 = softmax(x, 0);
    CHECK(std::memcmp(s1.data(), s2.data(), s1.size() * sizeof(double)) == 0);
}

TEST_CASE("detach blocks gradients (stop-gradient)") {
    Tensor x = Tensor::param({2}, {1.0, 2.0});
    Tensor y = sum_all(mul(x.detach(), x));
    backward(y);
    Tensor g = x.grad();
    // only the tracked factor contributes
    CHECK(g[0] == doctest::Approx(1.0));
    CHECK(g[1] == doctest::Approx(2.0));
}
