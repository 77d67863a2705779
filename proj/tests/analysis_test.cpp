#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "pqtqkd/analysis.hpp"
#include "pqtqkd/io.hpp"

using namespace pqtqkd;

namespace {

// Frozen on first computation by the exhaustive oracle; guards regressions.
constexpr double kGoldenInterceptQber = 0.121243522559874;

const std::vector<ChannelParam> kDefaultParams = {ChannelParam(0.5),
                                                  ChannelParam(0.9)};

ProtocolConfig default_config(std::uint64_t rounds) {
    return ProtocolConfig{.channel_params = kDefaultParams,
                          .num_rounds = rounds};
}

}  // namespace

TEST_CASE("oracle completeness and closed-form agreement") {
    RandomStream rng(3);
    for (int point = 0; point < 10; ++point) {
        const double n1 = 0.05 + 0.9 * rng.next_double();
        double n2 = 0.05 + 0.9 * rng.next_double();
        if (std::abs(n1 - n2) < 1e-3) n2 = n2 < 0.5 ? n2 + 0.1 : n2 - 0.1;
        const std::vector<ChannelParam> params = {ChannelParam(n1),
                                                  ChannelParam(n2)};
        const auto oracle =
            exhaustive_oracle(params, AttackModel::Kind::Passive);
        CHECK(std::abs(oracle.total_mass() - 1.0) < 1e-12);

        // Eqs. for the GBM outcome distribution at every (n, m) pair.
        const Amplitude h{1.0 / std::sqrt(2.0), 0.0};
        for (std::size_t ni = 0; ni < 2; ++ni)
            for (std::size_t mi = 0; mi < 2; ++mi) {
                const auto expected =
                    gbm_probabilities(h, h, params[ni], params[mi]);
                const auto got = oracle.outcome_distribution(ni, mi);
                for (int k = 0; k < 4; ++k)
                    CHECK(std::abs(got[k] - expected[k]) < 1e-12);
            }

        // Success probability and final-rate accounting.
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(std::abs(oracle.success_given_match(j) - p_suc(params[j])) <
                  1e-12);
        CHECK(std::abs(oracle.p_sifted() - p_final_rate(params)) < 1e-12);
        CHECK(std::abs(oracle.p_basis_match() - 0.5) < 1e-12);
        CHECK(oracle.qber() < 1e-12);

        // P_wrong marginal via the intercept attack.
        const auto intercept = exhaustive_oracle(
            params, AttackModel::Kind::InterceptReteleport, params);
        CHECK(std::abs(intercept.total_mass() - 1.0) < 1e-12);
        const auto wrong01 = intercept.eve_wrong_given(0, 1);
        REQUIRE(wrong01.has_value());
        CHECK(std::abs(*wrong01 - p_wrong(params[0], params[1])) < 1e-12);
        const auto wrong10 = intercept.eve_wrong_given(1, 0);
        REQUIRE(wrong10.has_value());
        CHECK(std::abs(*wrong10 - p_wrong(params[1], params[0])) < 1e-12);
    }
}

TEST_CASE("oracle golden value for the default intercept point") {
    const auto oracle = exhaustive_oracle(
        kDefaultParams, AttackModel::Kind::InterceptReteleport, kDefaultParams);
    CHECK(std::abs(oracle.qber() - kGoldenInterceptQber) < 1e-12);
    CHECK(oracle.qber() > 0.0);
}

TEST_CASE("monte_carlo tracks analytic expectations") {
    const auto stats =
        monte_carlo(default_config(1000), AttackModel::passive(), 100000);
    CHECK(stats.trials == 100000);

    const double expected = p_final_rate(kDefaultParams);
    const double sigma =
        std::sqrt(expected * (1 - expected) / static_cast<double>(stats.trials));
    CHECK(std::abs(stats.key_rate_pre_disclosure - expected) < 3.0 * sigma);
    CHECK(std::abs(stats.key_rate_post_disclosure - expected / 2.0) <
          3.0 * sigma);
    CHECK(stats.qber == 0.0);

    for (const auto& [name, z] : stats.z_scores) {
        INFO(name);
        CHECK(std::isfinite(z));
        CHECK(std::abs(z) < kSigmaPolicy);
    }
    CHECK_THROWS_AS(monte_carlo(default_config(10), AttackModel::passive(), 10),
                    std::invalid_argument);
}

TEST_CASE("monte_carlo z-scores stay within policy across seeds") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto config = default_config(1000);
        config.seed = seed * 7919;
        const auto stats = monte_carlo(config, AttackModel::passive(), 20000);
        for (const auto& [name, z] : stats.z_scores) {
            INFO("seed " << seed << " " << name);
            CHECK(std::abs(z) < kSigmaPolicy);
        }
    }
}

TEST_CASE("monte_carlo deviation shrinks with trial count") {
    const auto oracle =
        exhaustive_oracle(kDefaultParams, AttackModel::Kind::Passive);
    const double expected = oracle.p_sifted();
    std::size_t improved = 0, total = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto config = default_config(1000);
        config.seed = seed * 104729;
        const auto small = monte_carlo(config, AttackModel::passive(), 1000);
        const auto large = monte_carlo(config, AttackModel::passive(), 100000);
        ++total;
        improved += std::abs(large.key_rate_pre_disclosure - expected) <
                    std::abs(small.key_rate_pre_disclosure - expected);
    }
    CHECK(improved * 10 >= total * 9);
}

TEST_CASE("compare_report") {
    const auto oracle =
        exhaustive_oracle(kDefaultParams, AttackModel::Kind::Passive);
    auto stats = monte_carlo(default_config(1000), AttackModel::passive(), 50000);
    const auto report = compare_report(stats, oracle);
    CHECK(report.all_pass);
    for (const auto& row : report.rows) CHECK(std::isfinite(row.z));

    // Negative control: a corrupted count must flag a failure.
    auto corrupted = stats;
    corrupted.key_rate_pre_disclosure += 0.05;
    const auto bad = compare_report(corrupted, oracle);
    CHECK_FALSE(bad.all_pass);

    // Mismatched parameter points are rejected.
    const auto other = exhaustive_oracle(
        std::vector<ChannelParam>{ChannelParam(0.3), ChannelParam(0.6)},
        AttackModel::Kind::Passive);
    CHECK_THROWS_AS(compare_report(stats, other), std::invalid_argument);
}

TEST_CASE("scan surface") {
    const auto result = scan({});
    const std::size_t count = GridSpec{}.points_per_axis();
    CHECK(result.surface.size() == count * count);

    // Diagonal is exactly zero; argmax sits at the maximal-gap corner.
    for (const auto& pt : result.surface) {
        if (pt.n1 == pt.n2) CHECK(pt.objective == 0.0);
        CHECK(pt.objective >= 0.0);
    }
    CHECK(std::abs(result.argmax.n1 - result.argmax.n2) ==
          Catch::Approx(0.90).margin(1e-9));
    CHECK(result.argmax.objective ==
          Catch::Approx(p_wrong(ChannelParam(0.95), ChannelParam(0.05)) *
                        p_final_rate({ChannelParam(0.95), ChannelParam(0.05)}))
              .margin(1e-12));

    // Symmetry under swapping the two axes.
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < count; ++j)
            CHECK(result.surface[i * count + j].objective ==
                  result.surface[j * count + i].objective);

    CHECK_THROWS_AS(scan({0.5, 0.4, 0.05}), std::invalid_argument);
    CHECK_THROWS_AS(scan({0.05, 0.95, 2.0}), std::invalid_argument);
}

TEST_CASE("csv emitters are self-describing") {
    std::ostringstream scan_os;
    write_scan_csv(scan_os, scan({}));
    CHECK(scan_os.str().starts_with("n1,n2,p_wrong,rate,objective\n"));

    std::ostringstream stats_os;
    write_trial_stats_csv(
        stats_os, monte_carlo(default_config(1000), AttackModel::passive(), 1000));
    CHECK(stats_os.str().starts_with("statistic,value\n"));
}
