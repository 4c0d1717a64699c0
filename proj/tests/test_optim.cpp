#include "sepnet/error.hpp"
#include "sepnet/network.hpp"
#include "sepnet/optim.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

using namespace sepnet;
using testutil::random_matrix;

namespace {

const LrSchedule paper_schedule{0.1, {100, 200, 250}, 0.1};

bool close(double a, double b) { return std::abs(a - b) <= 1e-15 * std::abs(b); }

// Independent loop of the update rule, written out per element.
void oracle_step(std::vector<Matrix>& params, const std::vector<Matrix>& grads, std::vector<Matrix>& velocity,
                 const std::vector<bool>& decay, const ParamMask& mask, double lr, double momentum, double wd) {
    for (std::size_t s = 0; s < params.size(); ++s) {
        if (!mask[s]) continue;
        for (std::size_t i = 0; i < params[s].size(); ++i) {
            double& p = params[s].data()[i];
            double& v = velocity[s].data()[i];
            const double g = grads[s].data()[i] + (decay[s] ? wd : 0.0) * p;
            v = momentum * v + g;
            p = p - lr * v;
        }
    }
}

bool bit_equal(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t s = 0; s < a.size(); ++s)
        if (a[s].size() != b[s].size() ||
            std::memcmp(a[s].data().data(), b[s].data().data(), a[s].size() * sizeof(double)) != 0)
            return false;
    return true;
}

Network small_net(std::uint64_t seed) {
    const std::vector<std::size_t> w{5, 4, 3, 2};
    return Network::initialize(NetworkSpec::mlp(w), seed);
}

} // namespace

TEST_CASE("learning rate schedule boundaries") {
    CHECK(lr_at(paper_schedule, 0) == 0.1);
    CHECK(lr_at(paper_schedule, 99) == 0.1);
    CHECK(close(lr_at(paper_schedule, 100), 0.01));
    CHECK(close(lr_at(paper_schedule, 150), 0.01));
    CHECK(close(lr_at(paper_schedule, 199), 0.01));
    CHECK(close(lr_at(paper_schedule, 200), 0.001));
    CHECK(close(lr_at(paper_schedule, 249), 0.001));
    CHECK(close(lr_at(paper_schedule, 250), 0.0001));
    CHECK(close(lr_at(paper_schedule, 260), 0.0001));
    CHECK(close(lr_at(paper_schedule, 299), 0.0001));

    const LrSchedule flat{0.05, {}, 0.1};
    for (int e : {0, 1, 50, 1000}) CHECK(lr_at(flat, e) == 0.05);

    double prev = lr_at(paper_schedule, 0);
    for (int e = 1; e < 300; ++e) {
        const double lr = lr_at(paper_schedule, e);
        CHECK(lr <= prev);
        prev = lr;
    }
}

TEST_CASE("schedule validation") {
    CHECK_NOTHROW(paper_schedule.validate());
    CHECK_THROWS_AS((LrSchedule{0.1, {10, 10}, 0.1}.validate()), ConfigError);
    CHECK_THROWS_AS((LrSchedule{0.1, {20, 10}, 0.1}.validate()), ConfigError);
    CHECK_THROWS_AS((LrSchedule{0.1, {}, 1.0}.validate()), ConfigError);
    CHECK_THROWS_AS((LrSchedule{0.1, {}, 0.0}.validate()), ConfigError);
}

TEST_CASE("sgd hand examples") {
    const Network net = Network::from_params(NetworkSpec::parse("2-1"), {Matrix{{1.0}, {-2.0}}});
    const ParamMask all{true};

    {
        std::vector<Matrix> p = net.params();
        SgdState s = SgdState::for_network(net, 0.0, 0.0);
        const std::vector<Matrix> g{Matrix{{0.5}, {0.25}}};
        sgd_step(p, g, s, 0.1, all);
        CHECK(p[0](0, 0) == 1.0 - 0.1 * 0.5);
        CHECK(p[0](1, 0) == -2.0 - 0.1 * 0.25);
    }
    {
        std::vector<Matrix> p = net.params();
        SgdState s = SgdState::for_network(net, 0.9, 0.0);
        const std::vector<Matrix> g{Matrix{{1.0}, {1.0}}};
        sgd_step(p, g, s, 0.1, all);
        const double after_one = p[0](0, 0);
        sgd_step(p, g, s, 0.1, all);
        CHECK(std::abs((after_one - p[0](0, 0)) - 0.1 * 1.9) < 1e-15);
    }
    {
        const Network one = Network::from_params(NetworkSpec::parse("1-1"), {Matrix{{1.0}}});
        std::vector<Matrix> p = one.params();
        SgdState s = SgdState::for_network(one, 0.0, 1e-4);
        sgd_step(p, std::vector<Matrix>{Matrix(1, 1)}, s, 0.1, ParamMask{true});
        CHECK(p[0](0, 0) == 1.0 - 0.1 * 1e-4);
    }
}

TEST_CASE("sgd step matches the element loop bit for bit") {
    Rng rng(61);
    for (int trial = 0; trial < 50; ++trial) {
        const Network net = small_net(static_cast<std::uint64_t>(trial));
        std::vector<Matrix> p = net.params();
        std::vector<Matrix> ref = p;
        SgdState s = SgdState::for_network(net, 0.9, 1e-4);
        std::vector<Matrix> v_ref = s.velocity;
        const ParamMask mask = freeze_mask(net, trial % 3 == 0);
        const double lr = rng.uniform(0.001, 0.2);
        for (int step = 0; step < 4; ++step) {
            std::vector<Matrix> g;
            for (const Matrix& m : p) g.push_back(random_matrix(m.rows(), m.cols(), rng));
            sgd_step(p, g, s, lr, mask);
            oracle_step(ref, g, v_ref, s.decay, mask, lr, 0.9, 1e-4);
        }
        CHECK(bit_equal(p, ref));
        CHECK(bit_equal(s.velocity, v_ref));
    }
}

TEST_CASE("biases are not decayed") {
    const Network net = small_net(3);
    const SgdState s = SgdState::for_network(net, 0.9, 1e-4);
    for (std::size_t i = 0; i < net.params().size(); ++i) CHECK(s.decay[i] == !net.param_info(i).is_bias);

    std::vector<Matrix> p = net.params();
    for (double& b : p[1].data()) b = 1.0;
    SgdState st = s;
    std::vector<Matrix> zero;
    for (const Matrix& m : p) zero.emplace_back(m.rows(), m.cols());
    sgd_step(p, zero, st, 0.1, freeze_mask(net, false));
    for (double b : p[1].data()) CHECK(b == 1.0);
}

TEST_CASE("frozen slots keep value and velocity") {
    Rng rng(62);
    const Network net = small_net(4);
    const ParamMask all = freeze_mask(net, false);
    const ParamMask frozen = freeze_mask(net, true);
    for (bool m : all) CHECK(m);
    for (std::size_t i = 0; i < frozen.size(); ++i) CHECK(frozen[i] == (i != net.final_weight_index()));

    std::vector<Matrix> p = net.params();
    SgdState s = SgdState::for_network(net, 0.9, 1e-4);
    const Matrix before = p[net.final_weight_index()];
    for (int step = 0; step < 100; ++step) {
        std::vector<Matrix> g;
        for (const Matrix& m : p) g.push_back(random_matrix(m.rows(), m.cols(), rng));
        sgd_step(p, g, s, 0.1, frozen);
    }
    const Matrix& after = p[net.final_weight_index()];
    CHECK(std::memcmp(before.data().data(), after.data().data(), before.size() * sizeof(double)) == 0);
    CHECK(s.velocity[net.final_weight_index()] == Matrix(after.rows(), after.cols()));
    CHECK_FALSE(p[0] == net.params()[0]);
}

TEST_CASE("sgd errors") {
    const Network net = small_net(5);
    std::vector<Matrix> p = net.params();
    SgdState s = SgdState::for_network(net, 0.9, 1e-4);
    std::vector<Matrix> g;
    for (const Matrix& m : p) g.emplace_back(m.rows(), m.cols());
    const ParamMask mask = freeze_mask(net, false);

    std::vector<Matrix> short_g(g.begin(), g.end() - 1);
    CHECK_THROWS_AS(sgd_step(p, short_g, s, 0.1, mask), ShapeError);
    std::vector<Matrix> wrong = g;
    wrong[0] = Matrix(1, 1);
    CHECK_THROWS_AS(sgd_step(p, wrong, s, 0.1, mask), ShapeError);

    std::vector<Matrix> nan = g;
    nan[2].data()[0] = std::numeric_limits<double>::quiet_NaN();
    const std::vector<Matrix> untouched = p;
    CHECK_THROWS_AS(sgd_step(p, nan, s, 0.1, mask), NumericError);
    CHECK(p == untouched);

    CHECK_THROWS_AS(SgdState::for_network(net, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(SgdState::for_network(net, 0.5, -1.0), ConfigError);
}
