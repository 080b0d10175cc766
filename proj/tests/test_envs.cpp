#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <filesystem>
#include <vector>

#include "whittle/envs.hpp"
#include "whittle/model_io.hpp"

using namespace whittle;

namespace {

std::vector<MdpModel> benchmark_models() {
    return {make_circular(), make_unstructured(), make_restart(), make_random_walk(5, 0.9),
            make_random_walk(25, 0.95)};
}

}  // namespace

TEST_CASE("circular model matches the printed matrices") {
    MdpModel m = make_circular();
    REQUIRE(m.n_states == 4);
    CHECK(m.p0(0, 0) == 0.5);
    CHECK(m.p0(0, 1) == 0.0);
    CHECK(m.p0(0, 2) == 0.0);
    CHECK(m.p0(0, 3) == 0.5);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(m.p1(i, j) == m.p0(j, i));
    CHECK(m.reward(0, 0) == -1.0);
    CHECK(m.reward(0, 1) == -1.0);
    CHECK(m.reward(3, 0) == 1.0);
    CHECK(m.reward(3, 1) == 1.0);
}

TEST_CASE("unstructured model matches the printed matrices") {
    MdpModel m = make_unstructured();
    REQUIRE(m.n_states == 5);
    CHECK(m.p0(0, 0) == 0.1502);
    CHECK(m.p1(2, 4) == 0.6234);
    CHECK(m.reward(0, 0) == 0.4580);
    CHECK(m.reward(0, 1) == 0.9631);
}

TEST_CASE("restart model: active action resets to state 0") {
    MdpModel m = make_restart();
    REQUIRE(m.n_states == 5);
    for (int s = 0; s < 5; ++s) {
        CHECK(m.p1(s, 0) == 1.0);
        CHECK(m.reward(s, 1) == 0.0);
    }
    CHECK(m.reward(2, 0) == Catch::Approx(0.81).margin(1e-15));
    CHECK(m.reward(4, 1) == 0.0);
    CHECK(m.p0(1, 2) == 0.9);
    CHECK(m.p0(4, 4) == 0.9);
}

TEST_CASE("random walk rows and rewards") {
    MdpModel m = make_random_walk(5, 0.9);
    std::array<double, 5> row0{0.3, 0.7, 0.0, 0.0, 0.0};
    for (int j = 0; j < 5; ++j) CHECK(m.p0(0, j) == row0[j]);
    CHECK(m.p0(2, 1) == 0.1);
    CHECK(m.p0(2, 2) == 0.2);
    CHECK(m.p0(2, 3) == 0.7);
    CHECK(m.p0(4, 3) == 0.3);
    CHECK(m.p0(4, 4) == 0.7);
    for (int s = 0; s < 5; ++s)
        for (int t = 0; t < 5; ++t) CHECK(m.p0(s, t) == m.p1(s, t));
    CHECK(m.reward(3, 1) == Catch::Approx(0.729).margin(1e-15));
    CHECK(m.reward(3, 0) == 0.0);

    MdpModel m25 = make_random_walk(25, 0.95);
    CHECK(m25.reward(1, 1) == 0.95);

    CHECK(make_random_walk(2, 0.5).n_states == 2);
    CHECK_THROWS_AS(make_random_walk(1, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(make_random_walk(5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_random_walk(5, 1.0), std::invalid_argument);
}

TEST_CASE("every benchmark model is row-stochastic within 1e-12") {
    for (const MdpModel& m : benchmark_models()) {
        for (int a = 0; a < 2; ++a) {
            const Matrix& p = m.transitions(a);
            for (int s = 0; s < m.n_states; ++s) {
                double sum = 0.0;
                for (int t = 0; t < m.n_states; ++t) {
                    CHECK(p(s, t) >= 0.0);
                    sum += p(s, t);
                }
                CHECK(sum == Catch::Approx(1.0).margin(1e-12));
            }
        }
        CHECK_NOTHROW(validate(m));
    }
}

TEST_CASE("validate rejects broken models") {
    MdpModel m = make_circular();
    m.p0(0, 0) = 0.6;  // row no longer sums to 1
    CHECK_THROWS_AS(validate(m), std::invalid_argument);

    m = make_circular();
    m.p1(2, 1) = -0.5;
    m.p1(2, 2) = 1.5;
    CHECK_THROWS_AS(validate(m), std::invalid_argument);

    m = make_circular();
    m.rewards(1, 0) = std::nan("");
    CHECK_THROWS_AS(validate(m), std::invalid_argument);
}

TEST_CASE("step: restart model always restarts under the active action") {
    MdpModel m = make_restart();
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        int s = rng.uniform_int(5);
        Transition t = step(m, s, 1, rng);
        CHECK(t.next_state == 0);
        CHECK(t.reward == 0.0);
        CHECK(t.state == s);
    }
}

TEST_CASE("step: empirical next-state frequencies match the transition row") {
    const int draws = 100000;
    MdpModel m = make_unstructured();
    Rng rng(11);
    const int s = 0;
    for (int a = 0; a < 2; ++a) {
        std::vector<int> counts(5, 0);
        for (int i = 0; i < draws; ++i) ++counts[step(m, s, a, rng).next_state];
        for (int t = 0; t < 5; ++t)
            CHECK(static_cast<double>(counts[t]) / draws ==
                  Catch::Approx(m.transitions(a)(s, t)).margin(0.01));
    }
}

TEST_CASE("step never lands on a zero-probability state") {
    MdpModel m = make_circular();
    Rng rng(3);
    for (int i = 0; i < 100000; ++i) {
        Transition t = step(m, 0, 0, rng);
        bool ok = t.next_state == 0 || t.next_state == 3;
        CHECK(ok);
    }
}

TEST_CASE("step is bit-deterministic under a fixed seed") {
    MdpModel m = make_random_walk(25, 0.95);
    auto roll = [&m](std::uint64_t seed) {
        Rng rng(seed);
        std::vector<int> path;
        int s = rng.uniform_int(m.n_states);
        for (int i = 0; i < 1000; ++i) {
            Transition t = step(m, s, i % 2, rng);
            path.push_back(t.next_state);
            s = t.next_state;
        }
        return path;
    };
    CHECK(roll(42) == roll(42));
    CHECK(roll(42) != roll(43));
}

TEST_CASE("model files round-trip and are validated on load") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "whittle_test_models";
    fs::create_directories(dir);
    fs::path path = dir / "circular.json";

    MdpModel m = make_circular();
    save_model(m, path.string());
    MdpModel loaded = load_model(path.string());
    REQUIRE(loaded.n_states == m.n_states);
    CHECK(loaded.p0.data() == m.p0.data());
    CHECK(loaded.p1.data() == m.p1.data());
    CHECK(loaded.rewards.data() == m.rewards.data());

    CHECK_THROWS_AS(parse_model("{\"n_states\": 2}"), std::invalid_argument);
    CHECK_THROWS_AS(parse_model("not json"), std::invalid_argument);
    // p0 row sums to 2: rejected by validation on load
    CHECK_THROWS_AS(parse_model(R"({"n_states": 1, "p0": [2.0], "p1": [1.0], "rewards": [0.0, 0.0]})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(load_model((dir / "missing.json").string()), std::runtime_error);
}
