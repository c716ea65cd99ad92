// File: test_agents.cpp
// Description: Selection rules, schedules, HER, dense rewards and TD losses

#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>

#include "hal/agents/qlearner.hpp"
#include "hal/agents/rewards.hpp"
#include "hal/agents/variant.hpp"
#include "hal/common/error.hpp"

using namespace hal;
using namespace hal::agents;

namespace {

auto chi_square_p(const std::vector<double>& counts, const std::vector<double>& probs) -> double {
    double total = 0.0;
    for (double c : counts) {
        total += c;
    }
    double stat = 0.0;
    int cells = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (probs[i] <= 0.0) {
            CHECK(counts[i] == 0.0);
            continue;
        }
        const double e = total * probs[i];
        stat += (counts[i] - e) * (counts[i] - e) / e;
        ++cells;
    }
    boost::math::chi_squared dist(cells - 1);
    return boost::math::cdf(boost::math::complement(dist, stat));
}

auto mask_of(const std::string& bits) -> grid::AffordanceMask {
    return grid::AffordanceMask::from_string(bits);
}

// Tiny synthetic observation space: 3x3 view, 2 channels, 2 inventory slots.
auto tiny_encoder() -> ObservationEncoder {
    return {3, 2, 2};
}

auto random_obs(Rng& rng) -> replay::ObsRef {
    auto o = std::make_shared<grid::Observation>();
    for (int i = 0; i < 9; ++i) {
        o->view.push_back(static_cast<std::uint8_t>(rng.uniform_index(2)));
    }
    o->inventory = {static_cast<std::int16_t>(rng.uniform_index(4)), static_cast<std::int16_t>(rng.uniform_index(4))};
    return o;
}

auto column(const approx::Matrix<float>& m) -> std::vector<float> {
    return {m.data(), m.data() + m.size()};
}

}    // namespace

TEST_CASE("variant names round-trip") {
    for (const auto v : all_variants()) {
        CHECK(parse_variant(to_string(v)) == v);
    }
    CHECK_THROWS_AS(parse_variant("dqn"), ConfigError);
    CHECK(uses_her(Variant::Hal));
    CHECK_FALSE(uses_her(Variant::HRainbow));
    CHECK_FALSE(is_hierarchical(Variant::RainbowDense));
}

TEST_CASE("linear schedules anneal then hold") {
    ExplorationSchedule s;
    s.set_horizon(1000);
    CHECK(s.controller.at(0) == doctest::Approx(0.5));
    CHECK(s.controller.at(500) == doctest::Approx(0.275));
    CHECK(s.controller.at(1000) == doctest::Approx(0.05));
    CHECK(s.controller.at(5000) == doctest::Approx(0.05));
    CHECK(s.meta.at(250) == doctest::Approx(0.2 - 0.15 * 0.25));
    CHECK(s.affordance.at(2000) == 0.0);
}

TEST_CASE("action selection") {
    Rng rng(1);
    const std::vector<float> q = {0, 3, 1};
    for (int i = 0; i < 100; ++i) {
        CHECK(select_action(q, 0.0, rng) == 1);
    }
    CHECK(argmax(std::vector<float>{2, 5, 5, 1}) == 1);

    std::vector<double> counts(4, 0.0);
    for (int i = 0; i < 100000; ++i) {
        counts[static_cast<std::size_t>(select_action(std::vector<float>{1, 1, 2, 0}, 1.0, rng))] += 1;
    }
    CHECK(chi_square_p(counts, {0.25, 0.25, 0.25, 0.25}) > 0.01);

    std::fill(counts.begin(), counts.end(), 0.0);
    for (int i = 0; i < 100000; ++i) {
        counts[static_cast<std::size_t>(select_action(std::vector<float>{1, 1, 2, 0}, 0.5, rng))] += 1;
    }
    CHECK(chi_square_p(counts, {0.125, 0.125, 0.625, 0.125}) > 0.01);
}

TEST_CASE("subtask selection rules") {
    Rng rng(2);
    const std::vector<float> q = {0.1f, 0.9f, 0.3f, 0.5f, 0.2f};
    CHECK(select_subtask(q, mask_of("11111"), 0.0, 0.0, rng).goal == 1);
    CHECK(select_subtask(q, mask_of("00110"), 0.0, 0.0, rng).goal == 3);
    // all-zero mask behaves as all-ones
    CHECK(select_subtask(q, mask_of("00000"), 0.0, 0.0, rng).goal == 1);
    for (int i = 0; i < 1000; ++i) {
        CHECK(select_subtask(q, mask_of("00100"), 0.8, 0.0, rng).goal == 2);
    }
    CHECK_THROWS_AS(select_subtask(q, mask_of("111"), 0.0, 0.0, rng), ShapeError);

    // mixture law: 0.8 uniform within {0, 3}, 0.2 uniform over all five
    std::vector<double> counts(5, 0.0);
    const auto mask = mask_of("10010");
    for (int i = 0; i < 100000; ++i) {
        counts[static_cast<std::size_t>(select_subtask(q, mask, 0.8, 0.2, rng).goal)] += 1;
    }
    std::vector<double> law(5, 0.2 / 5);
    law[0] += 0.4;
    law[3] += 0.4;
    CHECK(chi_square_p(counts, law) > 0.01);
}

TEST_CASE("all-ones mask reduces epsilon-squared to epsilon-greedy") {
    const std::vector<float> q = {0.1f, 0.9f, 0.3f, 0.5f};
    const double ea = 0.3;
    const double em = 0.25;
    Rng a(3);
    Rng b(3);
    std::vector<double> counts(4, 0.0);
    for (int i = 0; i < 100000; ++i) {
        const int g = select_subtask(q, mask_of("1111"), ea, em, a).goal;
        counts[static_cast<std::size_t>(g)] += 1;
        // identical draw-for-draw against the plain rule
        CHECK(g == select_action(q, ea + em, b));
    }
    const double eps = ea + em;
    CHECK(chi_square_p(counts, {eps / 4, eps / 4 + 1 - eps, eps / 4, eps / 4}) > 0.01);
}

TEST_CASE("masked greedy invariants") {
    Rng rng(4);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<float> q(6);
        grid::AffordanceMask m(6);
        for (std::size_t i = 0; i < 6; ++i) {
            q[i] = static_cast<float>(rng.uniform());
            m.set(i, rng.bernoulli(0.5));
        }
        const int global = argmax(q);
        const int masked = masked_argmax(q, m);
        if (!m.any()) {
            CHECK(masked == global);
            continue;
        }
        CHECK(m[static_cast<std::size_t>(masked)]);
        CHECK(q[static_cast<std::size_t>(masked)] <= q[static_cast<std::size_t>(global)]);
        if (m[static_cast<std::size_t>(global)]) {
            CHECK(masked == global);
        }
    }
}

TEST_CASE("hindsight relabelling") {
    Rng rng(5);
    std::vector<OptionStep> steps;
    for (int i = 0; i < 4; ++i) {
        steps.push_back({random_obs(rng), i, random_obs(rng), i == 3 ? 7 : -1, false});
    }
    CHECK(her_relabel(steps, 7, 7, 0.0).empty());
    CHECK(her_relabel(steps, 2, -1, 0.0).empty());
    const auto original = goal_steps(steps, 2, 0.0);
    const auto relabeled = her_relabel(steps, 2, 7, 0.0);
    REQUIRE(relabeled.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(relabeled[i].reward == (i == 3 ? 1.0 : 0.0));
        CHECK(relabeled[i].terminal == (i == 3));
        CHECK(relabeled[i].obs == steps[i].obs);
        CHECK(original[i].reward == 0.0);
        CHECK_FALSE(original[i].terminal);
    }
    const auto penalised = her_relabel(steps, 2, 7, 0.01);
    CHECK(penalised[3].reward == doctest::Approx(0.99));
    CHECK(penalised[0].reward == doctest::Approx(-0.01));
}

TEST_CASE("dense first-attainment reward") {
    DenseReward d(4);
    CHECK(d.reward(-1, 0.01) == doctest::Approx(-0.01));
    CHECK(d.reward(2, 0.0) == 1.0);
    CHECK(d.reward(2, 0.0) == 0.0);
    double total = 0.0;
    for (const int m : {0, 1, 1, -1, 3, 0}) {
        total += d.reward(m, 0.0);
    }
    CHECK(total == 3.0);
    d.reset();
    CHECK(d.reward(2, 0.0) == 1.0);
}

TEST_CASE("controller TD loss") {
    const auto enc = tiny_encoder();
    const auto net = enc.net_config({}, {6}, 3, 4, true);
    approx::AdamConfig adam;
    Rng rng(6);

    SUBCASE("gamma zero reduces to regression on b_g") {
        QLearner learner(enc, net, adam, 1);
        std::vector<replay::Transition> ts;
        for (int i = 0; i < 8; ++i) {
            const double b = rng.bernoulli(0.5) ? 1.0 : 0.0;
            ts.push_back({random_obs(rng), static_cast<int>(rng.uniform_index(4)), b, random_obs(rng), 0.0,
                          static_cast<int>(rng.uniform_index(3)), 1});
        }
        std::vector<const replay::Transition*> batch;
        double expect = 0.0;
        for (const auto& t : ts) {
            batch.push_back(&t);
            const auto q = column(learner.online().predict(enc.encode(*t.obs)));
            const double d = q[static_cast<std::size_t>(t.goal * 4 + t.action)] - t.reward;
            expect += d * d / 8.0;
        }
        const auto r = learner.controller_update(batch, std::vector<double>(8, 1.0));
        CHECK(r.loss == doctest::Approx(expect).epsilon(1e-6));
    }

    SUBCASE("zero network, unit reward") {
        QLearner learner(enc, net, adam, 1);
        learner.online().params().setZero();
        learner.sync_target();
        replay::Transition t{random_obs(rng), 1, 1.0, random_obs(rng), 0.99, 2, 1};
        const replay::Transition* batch[] = {&t};
        const auto r = learner.controller_update(batch, std::vector<double>{1.0});
        CHECK(r.loss == doctest::Approx(1.0));
        CHECK(r.td_errors[0] == doctest::Approx(-1.0));
    }

    SUBCASE("random batch against scalar double-Q recomputation") {
        QLearner learner(enc, net, adam, 3);
        // make the target differ from the online network
        learner.target() = approx::Network<float>(net, 99);
        std::vector<replay::Transition> ts;
        std::vector<double> w;
        for (int i = 0; i < 10; ++i) {
            ts.push_back({random_obs(rng), static_cast<int>(rng.uniform_index(4)), rng.uniform() - 0.3, random_obs(rng),
                          rng.bernoulli(0.2) ? 0.0 : std::pow(0.99, 1 + static_cast<int>(rng.uniform_index(10))),
                          static_cast<int>(rng.uniform_index(3)), 1});
            w.push_back(0.2 + rng.uniform());
        }
        double expect = 0.0;
        std::vector<const replay::Transition*> batch;
        for (const auto& t : ts) {
            batch.push_back(&t);
            const auto q = column(learner.online().predict(enc.encode(*t.obs)));
            const auto qn = column(learner.online().predict(enc.encode(*t.next_obs)));
            const auto qt = column(learner.target().predict(enc.encode(*t.next_obs)));
            int best = 0;
            for (int a = 1; a < 4; ++a) {
                if (qn[static_cast<std::size_t>(t.goal * 4 + a)] > qn[static_cast<std::size_t>(t.goal * 4 + best)]) {
                    best = a;
                }
            }
            const double y = t.reward + t.discount * qt[static_cast<std::size_t>(t.goal * 4 + best)];
            const double d = q[static_cast<std::size_t>(t.goal * 4 + t.action)] - y;
            expect += w[batch.size() - 1] * d * d / 10.0;
        }
        const auto before = learner.online().params();
        const auto r = learner.controller_update(batch, w);
        CHECK(r.loss == doctest::Approx(expect).epsilon(1e-5));
        CHECK_FALSE(learner.online().params() == before);
        CHECK(learner.updates() == 1);
    }

    SUBCASE("zero learning rate leaves the loss constant") {
        approx::AdamConfig frozen = adam;
        frozen.lr = 0.0;
        QLearner learner(enc, net, frozen, 4);
        std::vector<replay::Transition> ts;
        std::vector<const replay::Transition*> batch;
        for (int i = 0; i < 6; ++i) {
            ts.push_back({random_obs(rng), 0, 0.5, random_obs(rng), 0.9, 1, 1});
        }
        for (const auto& t : ts) {
            batch.push_back(&t);
        }
        const double first = learner.controller_update(batch, std::vector<double>(6, 1.0)).loss;
        for (int i = 0; i < 5; ++i) {
            CHECK(learner.controller_update(batch, std::vector<double>(6, 1.0)).loss == first);
        }
    }
}

TEST_CASE("meta TD loss") {
    const auto enc = tiny_encoder();
    const auto net = enc.net_config({}, {5}, 1, 4, true);
    Rng rng(7);
    QLearner learner(enc, net, approx::AdamConfig{}, 5);
    learner.target() = approx::Network<float>(net, 50);

    replay::MetaTransition terminal{random_obs(rng), 2, 0.75, random_obs(rng), 12, true};
    replay::MetaTransition one{random_obs(rng), 1, -0.01, random_obs(rng), 1, false};
    const replay::MetaTransition* batch[] = {&terminal, &one};
    const auto y = learner.meta_targets(batch, 0.99, true);
    CHECK(y[0] == 0.75);
    const auto qt = column(learner.target().predict(enc.encode(*one.next_obs)));
    CHECK(y[1] == doctest::Approx(-0.01 + 0.99 * *std::max_element(qt.begin(), qt.end())).epsilon(1e-6));
    const auto flat = learner.meta_targets(batch, 0.99, false);
    CHECK(flat[1] == doctest::Approx(-0.01 + *std::max_element(qt.begin(), qt.end())).epsilon(1e-6));

    std::vector<replay::MetaTransition> ts;
    for (int i = 0; i < 9; ++i) {
        ts.push_back({random_obs(rng), static_cast<int>(rng.uniform_index(4)), rng.uniform(), random_obs(rng),
                      1 + static_cast<int>(rng.uniform_index(50)), rng.bernoulli(0.3)});
    }
    std::vector<const replay::MetaTransition*> b2;
    double expect = 0.0;
    for (const auto& t : ts) {
        b2.push_back(&t);
        const auto q = column(learner.online().predict(enc.encode(*t.obs)));
        const auto qn = column(learner.target().predict(enc.encode(*t.next_obs)));
        const double boot = t.terminal ? 0.0 : std::pow(0.99, t.length) * *std::max_element(qn.begin(), qn.end());
        const double d = q[static_cast<std::size_t>(t.goal)] - (t.reward_sum + boot);
        expect += d * d / 9.0;
    }
    CHECK(learner.meta_update(b2, std::vector<double>(9, 1.0), 0.99).loss == doctest::Approx(expect).epsilon(1e-5));
}

TEST_CASE("encoder layout") {
    const auto enc = ObservationEncoder::for_task(grid::TaskSpec::crafting("iron_ingot"));
    const auto task = grid::TaskSpec::crafting("iron_ingot");
    const auto world = grid::reset(task, 3);
    const auto obs = grid::observe(world, task.view_size);
    const auto x = enc.encode(obs);
    CHECK(x.rows() == 49 * grid::channel_count(task.kind) + static_cast<int>(obs.inventory.size()));
    CHECK(x.topRows(49 * grid::channel_count(task.kind)).sum() == doctest::Approx(49.0));
    CHECK_THROWS_AS(QLearner(enc, tiny_encoder().net_config({}, {}, 1, 2, false), approx::AdamConfig{}, 1), ShapeError);
}
