#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "sblue/rng.hpp"
#include "sblue/selection.hpp"

using namespace sblue;

namespace {

Sensor high(std::string id, double x, double y, double noise = 0.1, double cost = 1.0) {
    Sensor s;
    s.id = std::move(id);
    s.loc = {x, y};
    s.network = NetworkClass::High;
    s.noise_std = noise;
    s.cost = cost;
    return s;
}

Sensor low(std::string id, double x, double y, double threshold, double noise = 0.1,
           double cost = 1.0) {
    Sensor s;
    s.id = std::move(id);
    s.loc = {x, y};
    s.network = NetworkClass::Low;
    s.noise_std = noise;
    s.threshold = threshold;
    s.cost = cost;
    return s;
}

SelectionProblem base_problem(SensorArray arr, double qos) {
    SelectionProblem p;
    p.query = {1.5, 1.5};
    p.qos_var = qos;
    p.arr = std::move(arr);
    p.mean = MeanSpec::zero();
    p.kernel.signal_variance = 2.0;
    p.kernel.lengthscale = 1.0;
    return p;
}

// 4 high + 6 low sensors scattered over [0,3]^2
SelectionProblem random_instance(std::uint64_t seed) {
    auto eng = make_engine(seed, "test/selection-instance");
    std::vector<Sensor> sensors;
    for (int i = 0; i < 4; ++i) {
        sensors.push_back(high("H" + std::to_string(i), uniform01(eng) * 3.0,
                               uniform01(eng) * 3.0, 0.1, 5.0));
    }
    for (int i = 0; i < 6; ++i) {
        sensors.push_back(low("L" + std::to_string(i), uniform01(eng) * 3.0,
                              uniform01(eng) * 3.0, uniform01(eng) - 0.5, 0.2, 1.0));
    }
    SelectionProblem p = base_problem(SensorArray(std::move(sensors)), 1.0);
    const UtilityEvaluator ev(p);
    const double v_all = ev.predictive_var(ActivationMask::ones(p.arr.size()));
    p.qos_var = v_all + 0.3 * (ev.prior_var() - v_all);
    return p;
}

}  // namespace

TEST_CASE("cem configuration validation") {
    CemConfig cfg;
    CHECK_NOTHROW(validate(cfg));
    cfg.n_samples = 9;
    CHECK_THROWS_AS(validate(cfg), ValidationError);
    cfg = {};
    cfg.elite_fraction = 0.0;
    CHECK_THROWS_AS(validate(cfg), ValidationError);
    cfg = {};
    cfg.n_samples = 10;
    cfg.elite_fraction = 0.05;  // 0.5 elites
    CHECK_THROWS_AS(validate(cfg), ValidationError);
    cfg = {};
    cfg.smoothing = 0.0;
    CHECK_THROWS_AS(validate(cfg), ValidationError);
    cfg = {};
    cfg.smoothing = 1.0;
    CHECK_NOTHROW(validate(cfg));
    cfg = {};
    cfg.max_iters = 0;
    CHECK_THROWS_AS(validate(cfg), ValidationError);
    cfg = {};
    cfg.p_init = 1.0;
    CHECK_THROWS_AS(validate(cfg), ValidationError);
}

TEST_CASE("utility bookkeeping") {
    // realistic deployment: 5 expensive and 10 cheap sensors
    auto eng = make_engine(2, "test/utility-costs");
    std::vector<Sensor> sensors;
    for (int i = 0; i < 5; ++i) {
        sensors.push_back(high("H" + std::to_string(i), uniform01(eng) * 20.0,
                               40.0 + uniform01(eng) * 20.0, 0.001, 150.0));
    }
    for (int i = 0; i < 10; ++i) {
        sensors.push_back(low("L" + std::to_string(i), uniform01(eng) * 20.0,
                              40.0 + uniform01(eng) * 20.0, 0.0, 0.003, 30.0));
    }
    SelectionProblem p;
    p.query = {10.0, 50.0};
    p.qos_var = 4.2;
    p.arr = SensorArray(std::move(sensors));
    p.mean = MeanSpec::zero();
    p.kernel.signal_variance = 5.8;
    p.kernel.lengthscale = 8.0;

    const UtilityEvaluator ev(p);
    CHECK(ev.size() == 15);
    CHECK(ev.prior_var() == 5.8);
    CHECK(ev.cost(ActivationMask::ones(15)) == 1050.0);
    CHECK(ev.cost(ActivationMask::zeros(15)) == 0.0);
    // full activation easily beats a 4.2 variance budget here
    CHECK(ev.utility(ActivationMask::ones(15)) == -1050.0);
    // the empty mask keeps the whole prior variance, well above the budget
    CHECK(ev.utility(ActivationMask::zeros(15)) == -std::numeric_limits<double>::infinity());
    CHECK(utility(p, ActivationMask::ones(15)) == -1050.0);

    ActivationMask wrong = ActivationMask::zeros(14);
    CHECK_THROWS_AS(ev.utility(wrong), DimensionMismatch);
    ActivationMask junk = ActivationMask::zeros(15);
    junk.bits[3] = 2;
    CHECK_THROWS_AS(ev.predictive_var(junk), ValidationError);

    SelectionProblem bad = p;
    bad.qos_var = 0.0;
    CHECK_THROWS_AS(UtilityEvaluator{bad}, ValidationError);
}

TEST_CASE("masked variance equals the sub-array prediction") {
    const SensorArray arr({high("H1", 0, 0, 0.05), high("H2", 1, 0, 0.1),
                           low("L1", 0, 1, 0.2, 0.1), low("L2", 1.2, 0.8, 0.5, 0.2)});
    SelectionProblem p = base_problem(arr, 1.5);
    p.query = {0.5, 0.5};
    const UtilityEvaluator ev(p);

    const std::vector<std::vector<std::uint8_t>> masks{
        {1, 0, 1, 0}, {0, 1, 0, 1}, {1, 1, 1, 1}, {0, 0, 0, 0}};
    for (const auto& bits : masks) {
        std::vector<int> keep;
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i]) keep.push_back(static_cast<int>(i));
        }
        const MomentBundle bundle =
            moment_bundle(p.mean, p.kernel, arr.subset(keep), p.query, p.quad);
        const Prediction pred = sblue_predict(
            bundle, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(keep.size())), 0.0);
        CHECK(std::abs(ev.predictive_var({bits}) - pred.mse) <= 1e-10);
    }
}

TEST_CASE("a slack budget is solved by activating nothing") {
    SelectionProblem p = base_problem(
        SensorArray({high("H1", 1, 1, 0.1, 5.0), low("L1", 2, 2, 0.0, 0.2, 1.0)}),
        /*qos=*/10.0);  // looser than the prior variance itself
    CemConfig cfg;
    cfg.seed = 3;
    const CemResult res = cem_select(p, cfg);
    CHECK(res.state.best_mask == ActivationMask::zeros(2));
    CHECK(res.state.best_utility == 0.0);
    CHECK(res.state.iter == 1);
    REQUIRE(res.trace.size() == 1);
    CHECK(res.trace[0].best_utility == 0.0);

    const auto brute = brute_force_select(p);
    CHECK(brute.first == ActivationMask::zeros(2));
    CHECK(brute.second == 0.0);
}

TEST_CASE("an instance with one decisive sensor is pinned down exactly") {
    // only the sensor sitting on the query can reach the budget; everything
    // else is several lengthscales away and adds nothing but cost
    const SensorArray arr({high("H1", 1.5, 1.5, 0.01, 10.0), high("H2", 9.5, 1.5, 0.01, 1.0),
                           high("H3", 1.5, 9.5, 0.01, 1.0), low("L1", 9.5, 9.5, 0.0, 0.01, 1.0),
                           low("L2", -6.5, 1.5, 0.0, 0.01, 1.0)});
    SelectionProblem p = base_problem(arr, 0.01);

    const auto brute = brute_force_select(p);
    CHECK(brute.second == doctest::Approx(-10.0).epsilon(1e-12));
    const ActivationMask only_h1{{1, 0, 0, 0, 0}};
    CHECK(brute.first == only_h1);

    CemConfig cfg;
    cfg.seed = 11;
    const CemResult res = cem_select(p, cfg);
    CHECK(res.state.best_utility == doctest::Approx(-10.0).epsilon(1e-12));
    CHECK(res.state.best_mask == brute.first);
}

TEST_CASE("cross-entropy matches exhaustive search on most random instances") {
    int matched = 0;
    for (int inst = 0; inst < 20; ++inst) {
        const SelectionProblem p = random_instance(static_cast<std::uint64_t>(inst));
        const auto brute = brute_force_select(p);
        CemConfig cfg;
        cfg.seed = stream_id(400, "test/cem-seed", inst);
        const CemResult res = cem_select(p, cfg);
        CHECK(res.state.best_utility <= brute.second + 1e-12);
        if (std::abs(res.state.best_utility - brute.second) <= 1e-9) ++matched;
    }
    CHECK(matched >= 17);
}

TEST_CASE("full replacement with a huge batch is effectively exhaustive") {
    const SelectionProblem p = random_instance(777);
    SelectionProblem small = p;
    // keep 3 high and 5 low for a 2^8 search space
    small.arr = p.arr.subset({0, 1, 2, 4, 5, 6, 7, 8});
    const UtilityEvaluator ev(small);
    const double v_all = ev.predictive_var(ActivationMask::ones(8));
    small.qos_var = v_all + 0.3 * (ev.prior_var() - v_all);

    const auto brute = brute_force_select(small);
    REQUIRE(std::isfinite(brute.second));

    int found = 0;
    for (int s = 0; s < 100; ++s) {
        CemConfig cfg;
        cfg.n_samples = 2048;
        cfg.smoothing = 1.0;
        cfg.max_iters = 4;
        cfg.seed = stream_id(500, "test/cem-coverage", s);
        const CemResult res = cem_select(small, cfg);
        if (std::abs(res.state.best_utility - brute.second) <= 1e-9) ++found;
    }
    CHECK(found >= 99);
}

TEST_CASE("scaling all costs rescales the optimum without moving it") {
    const SelectionProblem p = random_instance(31);
    const auto before = brute_force_select(p);
    REQUIRE(std::isfinite(before.second));

    SelectionProblem scaled = p;
    std::vector<Sensor> sensors = p.arr.sensors();
    for (Sensor& s : sensors) s.cost *= 3.0;
    scaled.arr = SensorArray(std::move(sensors));
    const auto after = brute_force_select(scaled);
    CHECK(after.first == before.first);
    CHECK(after.second == doctest::Approx(3.0 * before.second).epsilon(1e-12));
}

TEST_CASE("shrinking the sensor pool never improves the optimum") {
    const SelectionProblem p = random_instance(57);
    const auto full = brute_force_select(p);
    for (int drop = 0; drop < 10; drop += 3) {
        std::vector<int> keep;
        for (int i = 0; i < 10; ++i) {
            if (i != drop) keep.push_back(i);
        }
        SelectionProblem smaller = p;
        smaller.arr = p.arr.subset(keep);
        const auto sub = brute_force_select(smaller);
        CHECK(sub.second <= full.second + 1e-12);
    }
}

TEST_CASE("search trace is well formed") {
    const SelectionProblem p = random_instance(91);
    CemConfig cfg;
    cfg.seed = 13;
    const CemResult res = cem_select(p, cfg);
    REQUIRE(!res.trace.empty());
    CHECK(res.trace.size() <= static_cast<std::size_t>(cfg.max_iters));
    double prev_best = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < res.trace.size(); ++t) {
        const CemIterRecord& rec = res.trace[t];
        CHECK(rec.iter == static_cast<int>(t) + 1);
        CHECK(rec.p_min >= 0.0);
        CHECK(rec.p_min <= rec.p_mean);
        CHECK(rec.p_mean <= rec.p_max);
        CHECK(rec.p_max <= 1.0);
        CHECK(rec.best_utility >= prev_best);
        if (std::isfinite(rec.beta)) {
            CHECK(rec.beta <= rec.best_utility + 1e-12);
        }
        prev_best = rec.best_utility;
    }
    CHECK(res.state.best_utility == res.trace.back().best_utility);
    CHECK(res.state.iter == res.trace.back().iter);
    // identical configuration reruns identically
    const CemResult again = cem_select(p, cfg);
    CHECK(again.state.best_mask == res.state.best_mask);
    CHECK(again.state.best_utility == res.state.best_utility);
}

TEST_CASE("when only full activation is feasible the solver falls back to it") {
    // a ring of interchangeable sensors with the budget wedged between the
    // 12-sensor and 11-sensor variance levels
    std::vector<Sensor> sensors;
    for (int i = 0; i < 12; ++i) {
        const double ang = 2.0 * M_PI * i / 12.0;
        sensors.push_back(high("R" + std::to_string(i), 1.5 + 1.8 * std::cos(ang),
                               1.5 + 1.8 * std::sin(ang), 0.3, 1.0));
    }
    SelectionProblem p = base_problem(SensorArray(std::move(sensors)), 1.0);
    const UtilityEvaluator ev(p);
    const double v12 = ev.predictive_var(ActivationMask::ones(12));
    ActivationMask eleven = ActivationMask::ones(12);
    eleven.bits[0] = 0;
    const double v11 = ev.predictive_var(eleven);
    REQUIRE(v12 < v11);
    p.qos_var = 0.5 * (v12 + v11);

    CemConfig cfg;
    cfg.seed = 2;
    const CemResult res = cem_select(p, cfg);
    CHECK(res.state.best_mask == ActivationMask::ones(12));
    CHECK(res.state.best_utility == -12.0);
}

TEST_CASE("infeasible problems are reported, never silently absorbed") {
    SelectionProblem p = base_problem(
        SensorArray({high("H1", 1.5, 1.5, 1.0, 1.0), high("H2", 1.4, 1.6, 1.0, 1.0)}),
        /*qos=*/1e-6);
    CHECK(!feasibility_check(p));
    CemConfig cfg;
    cfg.seed = 3;
    CHECK_THROWS_AS(cem_select(p, cfg), Infeasible);
    const auto brute = brute_force_select(p);
    CHECK(brute.first == ActivationMask::zeros(2));
    CHECK(brute.second == -std::numeric_limits<double>::infinity());
}

TEST_CASE("exhaustive search refuses oversized pools") {
    std::vector<Sensor> sensors;
    for (int i = 0; i < 23; ++i) {
        sensors.push_back(high("S" + std::to_string(100 + i), 0.1 * i, 0.0, 0.1, 1.0));
    }
    SelectionProblem p = base_problem(SensorArray(std::move(sensors)), 1.0);
    CHECK_THROWS_AS(brute_force_select(p), TooLarge);
}
