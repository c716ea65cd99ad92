// File: test_approx.cpp
// Description: Network forward/backward, Adam, losses, gradient checks, checkpoints

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "hal/approx/checkpoint.hpp"
#include "hal/approx/encoding.hpp"
#include "hal/approx/gradcheck.hpp"
#include "hal/approx/losses.hpp"
#include "hal/approx/network.hpp"
#include "hal/approx/optim.hpp"
#include "hal/common/error.hpp"
#include "hal/common/rng.hpp"

using namespace hal;
using namespace hal::approx;

namespace {

auto random_input(int rows, int cols, std::uint64_t seed) -> Matrix<double> {
    Rng rng(seed);
    Matrix<double> m(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            m(i, j) = rng.uniform() * 2.0 - 1.0;
        }
    }
    return m;
}

// Naive reference: plain loops over a parameter vector laid out like the
// network (W column-major then b, per layer).
auto reference_forward(const NetConfig& cfg, const Vector<double>& p, const std::vector<double>& x) -> std::vector<double> {
    std::size_t off = 0;
    const int h = cfg.grid_h;
    const int w = cfg.grid_w;
    std::vector<double> grid(x.begin(), x.begin() + h * w * cfg.grid_c);
    int c_in = cfg.grid_c;
    for (const int c_out : cfg.conv) {
        const int cols = 9 * c_in;
        std::vector<double> out(static_cast<std::size_t>(h * w * c_out), 0.0);
        for (int y = 0; y < h; ++y) {
            for (int xx = 0; xx < w; ++xx) {
                for (int o = 0; o < c_out; ++o) {
                    double acc = p[static_cast<Eigen::Index>(off + static_cast<std::size_t>(cols * c_out + o))];
                    for (int ky = 0; ky < 3; ++ky) {
                        for (int kx = 0; kx < 3; ++kx) {
                            const int sy = y + ky - 1;
                            const int sx = xx + kx - 1;
                            if (sy < 0 || sy >= h || sx < 0 || sx >= w) {
                                continue;
                            }
                            for (int c = 0; c < c_in; ++c) {
                                const int col = (ky * 3 + kx) * c_in + c;
                                acc += p[static_cast<Eigen::Index>(off + static_cast<std::size_t>(col * c_out + o))] *
                                       grid[static_cast<std::size_t>((sy * w + sx) * c_in + c)];
                            }
                        }
                    }
                    out[static_cast<std::size_t>((y * w + xx) * c_out + o)] = std::max(acc, 0.0);
                }
            }
        }
        off += static_cast<std::size_t>(cols * c_out + c_out);
        grid = out;
        c_in = c_out;
    }
    std::vector<double> act = cfg.conv.empty() ? x : grid;
    if (!cfg.conv.empty()) {
        act.insert(act.end(), x.end() - cfg.extra, x.end());
    }
    std::vector<int> widths = cfg.hidden;
    widths.push_back(cfg.heads * (cfg.dueling ? cfg.width + 1 : cfg.width));
    for (std::size_t l = 0; l < widths.size(); ++l) {
        const int rows = widths[l];
        const int cols = static_cast<int>(act.size());
        std::vector<double> out(static_cast<std::size_t>(rows));
        for (int r = 0; r < rows; ++r) {
            double acc = p[static_cast<Eigen::Index>(off + static_cast<std::size_t>(rows * cols + r))];
            for (int c = 0; c < cols; ++c) {
                acc += p[static_cast<Eigen::Index>(off + static_cast<std::size_t>(c * rows + r))] * act[static_cast<std::size_t>(c)];
            }
            out[static_cast<std::size_t>(r)] = l + 1 < widths.size() ? std::max(acc, 0.0) : acc;
        }
        off += static_cast<std::size_t>(rows * cols + rows);
        act = out;
    }
    if (!cfg.dueling) {
        return act;
    }
    std::vector<double> q;
    for (int hd = 0; hd < cfg.heads; ++hd) {
        const double v = act[static_cast<std::size_t>(hd * (cfg.width + 1))];
        double mean = 0.0;
        for (int a = 0; a < cfg.width; ++a) {
            mean += act[static_cast<std::size_t>(hd * (cfg.width + 1) + 1 + a)] / cfg.width;
        }
        for (int a = 0; a < cfg.width; ++a) {
            q.push_back(v + act[static_cast<std::size_t>(hd * (cfg.width + 1) + 1 + a)] - mean);
        }
    }
    return q;
}

auto small_conv_config() -> NetConfig {
    NetConfig c;
    c.grid_h = 3;
    c.grid_w = 4;
    c.grid_c = 2;
    c.extra = 3;
    c.conv = {3, 2};
    c.hidden = {5};
    c.heads = 2;
    c.width = 3;
    c.dueling = true;
    return c;
}

}    // namespace

TEST_CASE("zero-weight linear layer gives zero output") {
    NetConfig c;
    c.extra = 4;
    c.width = 3;
    Network<double> net(c, 1);
    net.params().setZero();
    const auto out = net.predict(random_input(4, 5, 2));
    CHECK(out.rows() == 3);
    CHECK(out.cols() == 5);
    CHECK(out.isZero(0.0));
}

TEST_CASE("identity-initialised single layer reproduces its input") {
    NetConfig c;
    c.extra = 4;
    c.width = 4;
    Network<double> net(c, 1);
    net.params().setZero();
    for (int i = 0; i < 4; ++i) {
        net.params()[i * 4 + i] = 1.0;
    }
    const auto x = random_input(4, 6, 3);
    CHECK((net.predict(x) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fixed two-layer network matches hand-computed products") {
    NetConfig c;
    c.extra = 2;
    c.hidden = {2};
    c.width = 1;
    Network<double> net(c, 1);
    // W1 = [[1,-1],[2,0.5]] (column-major: 1,2,-1,0.5), b1 = [0,-1]; W2 = [3,-2], b2 = 0.25
    net.params() << 1, 2, -1, 0.5, 0, -1, 3, -2, 0.25;
    Matrix<double> x(2, 2);
    x << 1, -2, 2, 1;
    // col0: h = relu([1-2, 2+1-1]) = [0, 2] -> 3*0 - 2*2 + .25 = -3.75
    // col1: h = relu([-2-1, -4+0.5-1]) = [0, 0] -> 0.25
    const auto out = net.predict(x);
    CHECK(out(0, 0) == doctest::Approx(-3.75).epsilon(1e-15));
    CHECK(out(0, 1) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("network matches naive loop reference") {
    for (const bool use_conv : {false, true}) {
        NetConfig c = small_conv_config();
        if (!use_conv) {
            c.conv.clear();
        }
        Network<double> net(c, 11);
        const auto x = random_input(c.input_size(), 4, 12);
        const auto out = net.predict(x);
        for (int b = 0; b < 4; ++b) {
            std::vector<double> col(x.col(b).data(), x.col(b).data() + x.rows());
            const auto ref = reference_forward(c, net.params(), col);
            REQUIRE(ref.size() == static_cast<std::size_t>(out.rows()));
            for (std::size_t i = 0; i < ref.size(); ++i) {
                CHECK(out(static_cast<Eigen::Index>(i), b) == doctest::Approx(ref[i]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("forward is pure and shape errors are raised") {
    const NetConfig c = small_conv_config();
    Network<double> net(c, 5);
    const auto x = random_input(c.input_size(), 3, 6);
    const Matrix<double> a = net.forward(x);
    const Matrix<double> b = net.forward(x);
    CHECK(a == b);
    CHECK(net.predict(x) == a);
    CHECK_THROWS_AS(net.forward(random_input(c.input_size() + 1, 2, 1)), ShapeError);
    CHECK_THROWS_AS(net.backward(Matrix<double>::Zero(c.output_size(), 7)), ShapeError);
}

TEST_CASE("float and double networks agree") {
    const NetConfig c = small_conv_config();
    Network<double> d(c, 9);
    Network<float> f(c, 9);
    const auto x = random_input(c.input_size(), 3, 10);
    const Matrix<double> diff = f.predict(x.cast<float>()).cast<double>() - d.predict(x);
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("dueling recombination") {
    Matrix<double> raw(4, 1);
    raw << 0, 1, 2, 3;
    const auto q = dueling_combine<double>(raw, 1, 3);
    CHECK(q(0, 0) == doctest::Approx(-1.0));
    CHECK(q(1, 0) == doctest::Approx(0.0));
    CHECK(q(2, 0) == doctest::Approx(1.0));

    raw << 2.5, 4, 4, 4;
    const auto flat = dueling_combine<double>(raw, 1, 3);
    CHECK((flat.array() - 2.5).abs().maxCoeff() < 1e-15);

    // random heads vs direct formula, and shift invariance of advantages
    const auto r = random_input(2 * 5, 6, 21);
    const auto qr = dueling_combine<double>(r, 2, 4);
    Matrix<double> shifted = r;
    for (int h = 0; h < 2; ++h) {
        shifted.middleRows(h * 5 + 1, 4).array() += 1.75;
    }
    CHECK((dueling_combine<double>(shifted, 2, 4) - qr).cwiseAbs().maxCoeff() < 1e-12);
    for (int b = 0; b < 6; ++b) {
        for (int h = 0; h < 2; ++h) {
            const double mean = (r(h * 5 + 1, b) + r(h * 5 + 2, b) + r(h * 5 + 3, b) + r(h * 5 + 4, b)) / 4.0;
            for (int a = 0; a < 4; ++a) {
                CHECK(qr(h * 4 + a, b) == doctest::Approx(r(h * 5, b) + r(h * 5 + 1 + a, b) - mean));
            }
        }
    }
    CHECK_THROWS_AS(dueling_combine<double>(r, 3, 4), ShapeError);
}

TEST_CASE("adam closed-form steps") {
    AdamConfig cfg;
    Vector<double> p(1);
    p << 0.3;
    Vector<double> g(1);
    g << 1.0;
    Adam<double> adam(cfg, 1);
    adam.step(p, g);
    const double one = -cfg.lr / (1.0 + cfg.eps);
    CHECK(p[0] - 0.3 == doctest::Approx(one).epsilon(1e-12));
    adam.step(p, g);
    // m_hat = v_hat = 1 again after bias correction
    CHECK(p[0] - 0.3 == doctest::Approx(2.0 * one).epsilon(1e-12));
    CHECK(adam.steps() == 2);

    Adam<double> fresh(cfg, 3);
    Vector<double> q = Vector<double>::Constant(3, 1.5);
    fresh.step(q, Vector<double>::Zero(3));
    CHECK(q == Vector<double>::Constant(3, 1.5));

    AdamConfig still = cfg;
    still.lr = 0.0;
    Adam<double> frozen(still, 3);
    const auto g3 = random_input(3, 1, 4).col(0).eval();
    frozen.step(q, g3);
    frozen.step(q, g3);
    CHECK(q == Vector<double>::Constant(3, 1.5));
}

TEST_CASE("adam rejects non-finite gradients without side effects") {
    Adam<double> adam(AdamConfig{}, 2);
    Vector<double> p(2);
    p << 1, 2;
    Vector<double> g(2);
    g << 0.5, std::nan("");
    CHECK_THROWS_AS(adam.step(p, g), NonFiniteError);
    g[1] = INFINITY;
    CHECK_THROWS_AS(adam.step(p, g), NonFiniteError);
    CHECK(adam.steps() == 0);
    CHECK(p[0] == 1.0);
    CHECK(adam.first_moment().isZero(0.0));
    CHECK_THROWS_AS(adam.step(p, Vector<double>::Zero(3)), ShapeError);
}

TEST_CASE("adam clipping bounds the effective gradient") {
    AdamConfig cfg;
    cfg.clip_norm = 1.0;
    Adam<double> adam(cfg, 2);
    Vector<double> p = Vector<double>::Zero(2);
    Vector<double> g(2);
    g << 30, 40;
    adam.step(p, g);
    CHECK(adam.first_moment()[0] == doctest::Approx(0.1 * 0.6));
    CHECK(adam.first_moment()[1] == doctest::Approx(0.1 * 0.8));
}

TEST_CASE("adam state round-trips") {
    Adam<float> adam(AdamConfig{}, 4);
    Vector<float> p = Vector<float>::Ones(4);
    adam.step(p, Vector<float>::Constant(4, 0.25f));
    const auto copy = Adam<float>::deserialize(adam.serialize());
    CHECK(copy.steps() == 1);
    CHECK(copy.first_moment() == adam.first_moment());
    CHECK(copy.second_moment() == adam.second_moment());
    CHECK(copy.config().lr == adam.config().lr);
}

TEST_CASE("target sync is a hard copy") {
    const NetConfig c = small_conv_config();
    Network<float> online(c, 1);
    Network<float> target(c, 2);
    CHECK_FALSE(online == target);
    sync_target(online, target);
    CHECK(online == target);
    const float before = target.params()[0];
    online.params()[0] += 1.0f;
    CHECK(target.params()[0] == before);
    NetConfig other = c;
    other.hidden = {6};
    Network<float> wrong(other, 3);
    CHECK_THROWS_AS(sync_target(online, wrong), ShapeError);
}

TEST_CASE("gradient check: quadratic loss on a linear network") {
    NetConfig c;
    c.extra = 5;
    c.width = 3;
    Network<double> net(c, 4);
    const auto x = random_input(5, 8, 5);
    const auto y = random_input(3, 8, 6);
    const LossFn loss = [&](Network<double>& n, bool grad) {
        const Matrix<double> diff = n.forward(x) - y;
        if (grad) {
            n.backward(2.0 * diff);
        }
        return LossEval{diff.squaredNorm(), false};
    };
    const auto report = gradient_check(net, loss, 1e-6);
    CHECK(report.passed);
    CHECK(report.checked == net.param_count());
    CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("gradient check: TD loss through conv and dueling layers") {
    const NetConfig c = small_conv_config();
    Network<double> net(c, 7);
    Network<double> target(c, 8);
    Rng rng(9);
    const int batch = 6;
    const auto x = random_input(c.input_size(), batch, 10);
    const auto x2 = random_input(c.input_size(), batch, 11);
    std::vector<int> index(batch);
    std::vector<double> weight(batch);
    std::vector<double> y(batch);
    const auto next = target.predict(x2);
    for (int b = 0; b < batch; ++b) {
        const int head = static_cast<int>(rng.uniform_index(2));
        index[static_cast<std::size_t>(b)] = head * 3 + static_cast<int>(rng.uniform_index(3));
        weight[static_cast<std::size_t>(b)] = 0.5 + rng.uniform();
        y[static_cast<std::size_t>(b)] = rng.uniform() + 0.99 * next.middleRows(head * 3, 3).col(b).maxCoeff();
    }
    const LossFn loss = [&](Network<double>& n, bool grad) {
        const auto r = selected_squared_error<double>(n.forward(x), index, y, weight);
        if (grad) {
            n.backward(r.grad);
        }
        return LossEval{r.value, false};
    };
    const auto report = gradient_check(net, loss, 1e-4);
    CHECK(report.passed);
    CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("gradient check: BCE on per-milestone heads") {
    NetConfig c;
    c.extra = 6;
    c.hidden = {8};
    c.heads = 4;
    c.width = 1;
    Network<double> net(c, 3);
    const auto x = random_input(6, 10, 4);
    Rng rng(5);
    Matrix<double> t(4, 10);
    Matrix<double> m(4, 10);
    for (int j = 0; j < 10; ++j) {
        for (int i = 0; i < 4; ++i) {
            t(i, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
            m(i, j) = rng.bernoulli(0.4) ? 1.0 : 0.0;
        }
    }
    const LossFn loss = [&](Network<double>& n, bool grad) {
        const auto r = bce_with_logits<double>(n.forward(x), t, m);
        if (grad) {
            n.backward(r.grad);
        }
        return LossEval{r.value, false};
    };
    CHECK(gradient_check(net, loss, 1e-4).passed);
}

TEST_CASE("gradient check: triplet loss through a shared embedding network") {
    NetConfig c;
    c.extra = 5;
    c.hidden = {7};
    c.width = 3;
    Network<double> net(c, 13);
    const int batch = 5;
    const auto all = random_input(5, 3 * batch, 14);
    const LossFn loss = [&](Network<double>& n, bool grad) {
        const Matrix<double> z = n.forward(all);
        // margin chosen so most samples are active
        const auto r = triplet_loss<double>(z.leftCols(batch), z.middleCols(batch, batch), z.rightCols(batch), 1.0, 1e-6);
        if (grad) {
            n.backward(r.grad);
        }
        return LossEval{r.value, r.at_kink};
    };
    const auto report = gradient_check(net, loss, 1e-4);
    CHECK_FALSE(report.non_differentiable);
    CHECK(report.passed);
}

TEST_CASE("triplet loss values, gradients and kink flag") {
    Matrix<double> a(2, 1);
    Matrix<double> p(2, 1);
    Matrix<double> n(2, 1);
    a << 0, 0;
    p << 1, 0;
    n << 0, 2;
    // 1 - 4 + 1 < 0 -> inactive
    auto r = triplet_loss<double>(a, p, n, 1.0);
    CHECK(r.value == 0.0);
    CHECK(r.grad.isZero(0.0));
    CHECK_FALSE(r.at_kink);
    n << 0, 1;
    // 1 - 1 + 1 = 1
    r = triplet_loss<double>(a, p, n, 1.0);
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(r.grad(0, 0) == doctest::Approx(-2.0));    // 2(n-p) = 2*(-1, 1)
    CHECK(r.grad(1, 0) == doctest::Approx(2.0));
    CHECK(r.grad(0, 1) == doctest::Approx(2.0));     // -2(a-p)
    CHECK(r.grad(1, 2) == doctest::Approx(-2.0));    // 2(a-n)
    // margin boundary: |a-p|^2 - |a-n|^2 + 1 == 0
    n << 0, std::sqrt(2.0);
    r = triplet_loss<double>(a, p, n, 1.0);
    CHECK(r.at_kink);

    NetConfig c;
    c.extra = 2;
    c.width = 2;
    Network<double> net(c, 1);
    net.params().setZero();
    net.params()[0] = 1.0;
    net.params()[3] = 1.0;
    Matrix<double> all(2, 3);
    all << 0, 1, 0, 0, 0, std::sqrt(2.0);
    const LossFn loss = [&](Network<double>& nn, bool grad) {
        const Matrix<double> z = nn.forward(all);
        const auto rr = triplet_loss<double>(z.col(0), z.col(1), z.col(2), 1.0, 1e-9);
        if (grad) {
            nn.backward(rr.grad);
        }
        return LossEval{rr.value, rr.at_kink};
    };
    const auto report = gradient_check(net, loss, 1e-4);
    CHECK(report.non_differentiable);
    CHECK_FALSE(report.passed);
    CHECK(report.checked == 0);
}

TEST_CASE("selected squared error and BCE values") {
    Matrix<double> q(2, 2);
    q << 1, 0, 3, 5;
    std::vector<double> td;
    const auto r = selected_squared_error<double>(q, {1, 0}, {2.0, 1.0}, {1.0, 0.5}, &td);
    // (3-2)^2 * 1 + (0-1)^2 * 0.5 averaged over 2
    CHECK(r.value == doctest::Approx(0.75));
    CHECK(td[0] == doctest::Approx(1.0));
    CHECK(td[1] == doctest::Approx(-1.0));
    CHECK(r.grad(1, 0) == doctest::Approx(1.0));
    CHECK(r.grad(0, 1) == doctest::Approx(-0.5));
    CHECK(r.grad(0, 0) == 0.0);
    CHECK_THROWS_AS(selected_squared_error<double>(q, {2, 0}, {0, 0}, {}), ShapeError);

    Matrix<double> logits(1, 2);
    logits << 0.0, 40.0;
    Matrix<double> t(1, 2);
    t << 1.0, 0.0;
    const auto b = bce_with_logits<double>(logits, t, Matrix<double>::Ones(1, 2));
    CHECK(b.value == doctest::Approx((std::log(2.0) + 40.0) / 2.0));
    CHECK(std::isfinite(b.value));
    CHECK(b.grad(0, 0) == doctest::Approx(-0.25));
}

TEST_CASE("network serialisation round-trips") {
    const NetConfig c = small_conv_config();
    CHECK(NetConfig::parse(c.describe()) == c);
    Network<float> net(c, 17);
    const auto copy = Network<float>::deserialize(net.serialize());
    CHECK(copy == net);
    CHECK_THROWS(Network<double>::deserialize(net.serialize()));
    auto blob = net.serialize();
    blob.pop_back();
    CHECK_THROWS(Network<float>::deserialize(blob));
}

TEST_CASE("checkpoint container round-trips and detects corruption") {
    CheckpointWriter w;
    Network<float> net(small_conv_config(), 3);
    w.add("online", net.serialize());
    w.add("meta", "step=42");
    w.add("empty", "");
    const auto bytes = w.bytes();
    const auto r = CheckpointReader::parse(bytes);
    CHECK(r.version() == kCheckpointVersion);
    CHECK(r.get("meta") == "step=42");
    CHECK(r.get("empty").empty());
    CHECK(Network<float>::deserialize(r.get("online")) == net);
    CHECK_THROWS_AS((void)r.get("missing"), Error);

    for (const std::size_t pos : {std::size_t{9}, bytes.size() / 2, bytes.size() - 6}) {
        auto bad = bytes;
        bad[pos] = static_cast<char>(bad[pos] ^ 0x5a);
        CHECK_THROWS_AS(CheckpointReader::parse(bad), ChecksumError);
    }
    CHECK_THROWS_AS(CheckpointReader::parse(bytes.substr(0, bytes.size() - 3)), Error);
    CHECK_THROWS_AS(CheckpointReader::parse("garbage"), Error);

    const std::string path = "test_approx_ckpt.bin";
    w.save(path);
    CHECK(CheckpointReader::load(path).get("meta") == "step=42");
    std::remove(path.c_str());
    CHECK(crc32_of("123456789") == 0xCBF43926u);
}

TEST_CASE("observation encoding") {
    const std::vector<std::uint8_t> view = {0, 2, 1, 2};
    const std::vector<std::int16_t> inv = {8, 0, 4};
    std::vector<float> col(4 * 3 + 3, -1.0f);
    encode_view<float>(view, inv, 3, col.data(), static_cast<int>(col.size()));
    const std::vector<float> expect = {1, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0, 1, 1, 0, 0.5f};
    CHECK(col == expect);
    CHECK_THROWS_AS(encode_view<float>(view, inv, 2, col.data(), 11), ShapeError);
}
