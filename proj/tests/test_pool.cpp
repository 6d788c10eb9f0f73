#include "test_support.hpp"

#include "wavefdrc/pool.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace wavefdrc;
using namespace wavefdrc::testing;

TEST_CASE("fresh pool entries are empty domains") {
    const DomainSpec s = small_domain(32, 4);
    TrainingPool pool(20, s, 0.1, Rng(1));
    CHECK(pool.size() == 20);
    for (std::size_t k = 0; k < pool.size(); ++k) {
        const auto& e = pool.entry(k);
        CHECK(e.state.step == 0);
        CHECK(e.state.p.max_abs() == 0.0);
        CHECK(e.age == 0);
        CHECK(e.sigma != nullptr);
        CHECK_NOTHROW(validate_sources(e.sources, s));
    }
    CHECK(pool.entry(0).sigma == pool.entry(19).sigma);
}

TEST_CASE("invalid construction") {
    const DomainSpec s = small_domain(32, 4);
    CHECK_THROWS_AS(TrainingPool(0, s, 0.1, Rng(1)), Error);
    CHECK_THROWS_AS(TrainingPool(5, s, 1.5, Rng(1)), Error);
    CHECK_THROWS_AS(TrainingPool(5, s, -0.1, Rng(1)), Error);
}

TEST_CASE("batches are distinct and in range") {
    const DomainSpec s = small_domain(16, 3);
    TrainingPool pool(30, s, 0.0, Rng(2));
    for (int trial = 0; trial < 200; ++trial) {
        const auto idx = pool.sample_batch(10);
        CHECK(idx.size() == 10);
        std::set<std::size_t> uniq(idx.begin(), idx.end());
        CHECK(uniq.size() == 10);
        for (auto k : idx) CHECK(k < 30);
    }
    CHECK(pool.sample_batch(30).size() == 30);
    CHECK_THROWS_AS(pool.sample_batch(31), Error);
    CHECK_THROWS_AS(pool.sample_batch(0), Error);
}

TEST_CASE("sampling is uniform over entries") {
    const DomainSpec s = small_domain(16, 3);
    TrainingPool pool(20, s, 0.0, Rng(3));
    std::vector<int> hits(20, 0);
    const int draws = 20000;
    for (int t = 0; t < draws; ++t)
        for (auto k : pool.sample_batch(5)) hits[k]++;
    const double expected = draws * 5.0 / 20.0;
    double chi2 = 0.0;
    for (int h : hits) chi2 += (h - expected) * (h - expected) / expected;
    // 19 degrees of freedom; 0.999 quantile is about 43.8
    CHECK(chi2 < 43.8);
}

TEST_CASE("write_back stores predictions and ages entries") {
    Rng rng(4);
    const DomainSpec s = small_domain(16, 3);
    TrainingPool pool(8, s, 0.0, Rng(5));
    const std::vector<std::size_t> idx{2, 5};
    std::vector<WaveState> states{random_state(s, rng), random_state(s, rng)};
    states[0].step = 1;
    states[1].step = 1;
    const auto copy = states;
    CHECK(pool.write_back(idx, states) == 0);
    CHECK(pool.entry(2).state == copy[0]);
    CHECK(pool.entry(5).state == copy[1]);
    CHECK(pool.entry(2).age == 1);
    CHECK(pool.entry(3).age == 0);
}

TEST_CASE("write_back validation") {
    const DomainSpec s = small_domain(16, 3);
    TrainingPool pool(8, s, 0.0, Rng(6));
    const WaveState z = WaveState::zeros(s.nx, s.ny);
    CHECK_THROWS_AS(pool.write_back(std::vector<std::size_t>{1, 1}, {z, z}), Error);
    CHECK_THROWS_AS(pool.write_back(std::vector<std::size_t>{9}, {z}), Error);
    CHECK_THROWS_AS(pool.write_back(std::vector<std::size_t>{1}, {z, z}), Error);
    CHECK_THROWS_AS(pool.write_back(std::vector<std::size_t>{1}, {WaveState::zeros(15, 16)}), Error);
}

TEST_CASE("reset frequency follows reset_prob") {
    const DomainSpec s = small_domain(24, 3);
    const double prob = 0.2;
    TrainingPool pool(50, s, prob, Rng(7));
    std::size_t resets = 0, writes = 0;
    for (int t = 0; t < 400; ++t) {
        const auto idx = pool.sample_batch(10);
        std::vector<WaveState> states;
        for (auto k : idx) {
            WaveState st = pool.entry(k).state;
            st.step++;
            st.p(12, 12) = 1.0;
            states.push_back(std::move(st));
        }
        resets += pool.write_back(idx, std::move(states));
        writes += idx.size();
    }
    const double mean = prob * writes;
    const double sd = std::sqrt(writes * prob * (1 - prob));
    CHECK(std::abs(static_cast<double>(resets) - mean) < 4.0 * sd);

    // reset entries are empty again, kept entries carry their history
    for (std::size_t k = 0; k < pool.size(); ++k) {
        const auto& e = pool.entry(k);
        if (e.age == 0) {
            CHECK(e.state.step == 0);
            CHECK(e.state.p.max_abs() == 0.0);
        } else {
            CHECK(e.state.step == e.age);
        }
        CHECK_NOTHROW(validate_sources(e.sources, s));
    }
}

TEST_CASE("reset_prob 1 always resets, 0 never does") {
    const DomainSpec s = small_domain(16, 3);
    TrainingPool always(4, s, 1.0, Rng(8)), never(4, s, 0.0, Rng(8));
    WaveState st = WaveState::zeros(s.nx, s.ny);
    st.step = 1;
    CHECK(always.write_back(std::vector<std::size_t>{0, 1, 2, 3}, {st, st, st, st}) == 4);
    CHECK(never.write_back(std::vector<std::size_t>{0, 1, 2, 3}, {st, st, st, st}) == 0);
}

TEST_CASE("same seed gives the same pool and batches") {
    const DomainSpec s = small_domain(32, 4);
    TrainingPool a(10, s, 0.3, Rng(9)), b(10, s, 0.3, Rng(9));
    for (std::size_t k = 0; k < 10; ++k) CHECK(a.entry(k).sources == b.entry(k).sources);
    CHECK(a.sample_batch(4) == b.sample_batch(4));
    CHECK(a.rng() == b.rng());
}

TEST_CASE("restore replaces entries and rng") {
    const DomainSpec s = small_domain(32, 4);
    TrainingPool a(6, s, 0.1, Rng(10)), b(6, s, 0.1, Rng(11));
    std::vector<PoolEntry> entries;
    for (std::size_t k = 0; k < a.size(); ++k) entries.push_back(a.entry(k));
    b.restore(entries, a.rng());
    for (std::size_t k = 0; k < 6; ++k) {
        CHECK(b.entry(k).sources == a.entry(k).sources);
        CHECK(b.entry(k).state == a.entry(k).state);
    }
    CHECK(a.sample_batch(3) == b.sample_batch(3));
    entries.pop_back();
    CHECK_THROWS_AS(b.restore(entries, Rng(1)), Error);
}
