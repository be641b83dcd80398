#include <doctest.h>

#include <fstream>

#include "wpcn/config_io.hpp"
#include "wpcn/monte_carlo.hpp"
#include "wpcn/system_model.hpp"

using wpcn::SystemConfig;

TEST_CASE("default config validates") {
    CHECK(wpcn::validate(SystemConfig{}).empty());
    CHECK_NOTHROW(wpcn::validated(SystemConfig{}));
}

TEST_CASE("validate reports every violated invariant by name") {
    SystemConfig cfg;
    cfg.antennas = 4;  // boundary of M > K
    auto errs = wpcn::validate(cfg);
    REQUIRE(errs.size() == 1);
    CHECK(errs[0] == "M > K violated");

    cfg = SystemConfig{};
    cfg.wd_count = 2;
    cfg.distances_m = {10.0, 4.0};
    errs = wpcn::validate(cfg);
    REQUIRE(errs.size() == 1);
    CHECK(errs[0] == "distances not sorted");

    cfg = SystemConfig{};
    cfg.bandwidth_hz = -1.0;
    cfg.frame_s = 0.0;
    errs = wpcn::validate(cfg);
    CHECK(errs.size() >= 3);  // B, T, and the P_b <= B*s_max budget implied by B < 0
}

TEST_CASE("power budget boundary P_b = B*s_max is accepted") {
    SystemConfig cfg;  // defaults sit exactly on the boundary (10 W both)
    CHECK(cfg.power_budget_w == doctest::Approx(cfg.bandwidth_hz * cfg.psd_max_w_per_hz));
    CHECK(wpcn::validate(cfg).empty());
    cfg.power_budget_w *= 1.001;
    CHECK(!wpcn::validate(cfg).empty());
}

TEST_CASE("path_loss reproduces the reference geometry") {
    const SystemConfig cfg;  // c0 = 1e-3, d0 = 1, delta = 3, d = [4,6,8,10]
    const Eigen::VectorXd b = wpcn::path_loss(cfg);
    CHECK(b[0] == doctest::Approx(1.5625e-5).epsilon(1e-12));
    CHECK(b[1] == doctest::Approx(4.62962962962963e-6).epsilon(1e-12));
    CHECK(b[2] == doctest::Approx(1.953125e-6).epsilon(1e-12));
    CHECK(b[3] == doctest::Approx(1.0e-6).epsilon(1e-12));
}

TEST_CASE("path_loss at the reference distance gives c0") {
    SystemConfig cfg;
    cfg.wd_count = 1;
    cfg.distances_m = {cfg.ref_distance_m};
    CHECK(wpcn::path_loss(cfg)[0] == doctest::Approx(cfg.ref_attenuation).epsilon(1e-14));
}

TEST_CASE("path_loss properties: monotone and scale covariant") {
    wpcn::mc::Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        SystemConfig cfg;
        cfg.wd_count = 2 + static_cast<int>(rng.uniform() * 5);
        cfg.antennas = cfg.wd_count + 2;
        cfg.pathloss_exponent = 1.5 + 3.0 * rng.uniform();
        cfg.distances_m.clear();
        double d = 1.0 + 5.0 * rng.uniform();
        for (int k = 0; k < cfg.wd_count; ++k) {
            cfg.distances_m.push_back(d);
            d += 5.0 * rng.uniform();
        }
        const Eigen::VectorXd b = wpcn::path_loss(cfg);
        for (int k = 1; k < cfg.wd_count; ++k) CHECK(b[k] <= b[k - 1]);

        const double lambda = 0.5 + 2.0 * rng.uniform();
        SystemConfig scaled = cfg;
        for (auto& dist : scaled.distances_m) dist *= lambda;
        const Eigen::VectorXd b2 = wpcn::path_loss(scaled);
        for (int k = 0; k < cfg.wd_count; ++k) {
            CHECK(b2[k] == doctest::Approx(b[k] * std::pow(lambda, -cfg.pathloss_exponent))
                               .epsilon(1e-10));
        }
    }
}

TEST_CASE("doubling delta at d = 2 d0 scales b by 2^-delta") {
    SystemConfig cfg;
    cfg.wd_count = 1;
    cfg.distances_m = {2.0 * cfg.ref_distance_m};
    const double b1 = wpcn::path_loss(cfg)[0];
    cfg.pathloss_exponent *= 2.0;
    const double b2 = wpcn::path_loss(cfg)[0];
    CHECK(b2 / b1 == doctest::Approx(std::pow(2.0, -cfg.pathloss_exponent / 2.0)).epsilon(1e-12));
}

TEST_CASE("config round-trips through JSON and rejects unknown keys") {
    const SystemConfig cfg;
    const auto j = wpcn::config_to_json(cfg);
    const SystemConfig back = wpcn::config_from_json(j);
    CHECK(back.antennas == cfg.antennas);
    CHECK(back.noise_variance_w == cfg.noise_variance_w);
    CHECK(back.distances_m == cfg.distances_m);

    auto bad = j;
    bad["antenas"] = 12;
    CHECK_THROWS_AS(wpcn::config_from_json(bad), wpcn::ConfigError);
}

TEST_CASE("load_config: missing file and malformed JSON") {
    CHECK_THROWS_AS(wpcn::load_config("/nonexistent/nope.json"), wpcn::ConfigError);
    const std::string path = "bad_config_test.json";
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(wpcn::load_config(path), wpcn::ConfigError);
    std::remove(path.c_str());
}
