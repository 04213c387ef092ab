#include "qmed/errors.hpp"
#include "qmed/mediator.hpp"
#include "qmed/oracle.hpp"
#include "qmed/rng.hpp"

#include "doctest.h"

#include <cmath>
#include <vector>

using namespace qmed;

namespace {

MicrodataTable two_arm_table() {
    // arm 0: {1,2,3,4}, arm 1: {11,12,13,14}
    return MicrodataTable({0, 0, 0, 0, 0, 0, 0, 0}, {0, 1, 0, 1, 0, 1, 0, 1},
                          {1, 11, 2, 12, 3, 13, 4, 14}, {}, {});
}

} // namespace

TEST_CASE("sample backend serves per-arm type-1 quantiles") {
    const std::vector<double> levels{0.25, 0.5, 0.75};
    auto model = MediatorModel::sample_backend(two_arm_table(), {}, levels);
    CHECK(model.n_profiles() == 1);
    CHECK_FALSE(model.any_rearranged());
    // cumweight >= 0.25*4 = 1 -> first value
    CHECK(model.conditional_quantile(0.25, 0, 0) == 1.0);
    CHECK(model.conditional_quantile(0.5, 0, 0) == 2.0);
    CHECK(model.conditional_quantile(0.75, 1, 0) == 13.0);
    // interpolation between grid levels
    CHECK(model.conditional_quantile(0.375, 0, 0) == doctest::Approx(1.5));
    CHECK_THROWS_AS(model.conditional_quantile(0.1, 0, 0), ArgumentError);
    CHECK_THROWS_AS(model.conditional_quantile(0.9, 0, 0), ArgumentError);
    // q(u) is the horizontal curve difference
    CHECK(model.quantile_effect(0.5, 0) == 10.0);
    CHECK_THROWS_AS(model.coefficient_path(), ArgumentError);
}

TEST_CASE("rank transform inverts the curve with boundary clamping") {
    const std::vector<double> levels{0.25, 0.5, 0.75};
    auto model = MediatorModel::sample_backend(two_arm_table(), {}, levels);
    // curve at arm 0 over the levels: {1, 2, 3}
    bool clamped = false;
    CHECK(model.rank_transform(2.0, 0, 0, &clamped) == 0.5);
    CHECK_FALSE(clamped);
    CHECK(model.rank_transform(2.5, 0, 0) == doctest::Approx(0.625));
    model.rank_transform(0.5, 0, 0, &clamped);
    CHECK(clamped);
    CHECK(model.rank_transform(0.5, 0, 0) == 0.25);
    CHECK(model.rank_transform(99.0, 0, 0, &clamped) == 0.75);
    CHECK(clamped);
}

TEST_CASE("rank transform resolves tie runs to the last equal entry") {
    MicrodataTable t({0, 0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 1, 1, 1, 1},
                     {1, 2, 2, 3, 1, 2, 2, 3}, {}, {});
    const std::vector<double> levels{0.2, 0.4, 0.6, 0.8};
    auto model = MediatorModel::sample_backend(t, {}, levels);
    // arm-0 curve over levels: {1, 2, 2, 3}; m = 2 maps to the last tie
    CHECK(model.rank_transform(2.0, 0, 0) == 0.6);
    // between the run and the next value the interpolation is well defined
    CHECK(model.rank_transform(2.5, 0, 0) == doctest::Approx(0.7));
}

TEST_CASE("rank transforms of model draws are uniform within quadrature error") {
    auto oracle = OracleModel::basic(-5.0, 0.2, 0.3, -0.5);
    auto table = oracle.simulate(50000, 0.5, 99);
    std::vector<double> levels;
    for (int k = 1; k <= 99; ++k) levels.push_back(k / 100.0);
    auto model = MediatorModel::sample_backend(table, {}, levels);
    const std::size_t K = 10;
    std::vector<double> count0(K, 0.0);
    double n0 = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table.exposure(i) != 0) continue;
        const double u = model.rank_transform(table.mediator(i), 0, 0);
        std::size_t k = std::min(K - 1, static_cast<std::size_t>(u * K));
        count0[k] += 1.0;
        n0 += 1.0;
    }
    for (std::size_t k = 0; k < K; ++k) {
        // O(K^-1) binning plus sampling noise; 15% relative slack
        CHECK(count0[k] / n0 == doctest::Approx(0.1).epsilon(0.15));
    }
}

TEST_CASE("forced linear backend matches the sample backend on a binary design") {
    RngStream rng(42);
    std::vector<double> y, m;
    std::vector<std::uint8_t> x;
    for (int i = 0; i < 37; ++i) {
        y.push_back(0);
        x.push_back(0);
        m.push_back(std::floor(rng.next_normal() * 8.0) / 4.0);
    }
    for (int i = 0; i < 41; ++i) {
        y.push_back(0);
        x.push_back(1);
        m.push_back(1.0 + std::floor(rng.next_normal() * 8.0) / 4.0);
    }
    MicrodataTable t(y, x, m, {}, {});
    const std::vector<double> levels{0.2, 0.35, 0.5, 0.65, 0.8};
    auto sample = MediatorModel::sample_backend(t, {}, levels);
    DesignSpec design; // [1, x]
    auto linear = MediatorModel::linear_backend(t, {}, design, levels, true);
    for (double u : levels) {
        for (int arm : {0, 1}) {
            CHECK(linear.conditional_quantile(u, arm, 0) ==
                  sample.conditional_quantile(u, arm, 0));
        }
    }
}

TEST_CASE("linear backend with covariates evaluates per-profile curves") {
    RngStream rng(7);
    std::vector<double> y, m, w;
    std::vector<std::uint8_t> x;
    for (int i = 0; i < 600; ++i) {
        const double xi = rng.next_bernoulli(0.5) ? 1.0 : 0.0;
        const double zi = rng.next_bernoulli(0.5) ? 1.0 : 0.0;
        x.push_back(static_cast<std::uint8_t>(xi));
        w.push_back(zi);
        m.push_back(1.0 + 2.0 * xi - 1.5 * zi + rng.next_normal());
        y.push_back(0);
    }
    MicrodataTable t(y, x, m, w, {"z"});
    DesignSpec design;
    design.n_covariates = 1;
    const std::vector<double> levels{0.25, 0.5, 0.75};
    auto model = MediatorModel::linear_backend(t, {}, design, levels, true);
    REQUIRE(model.n_profiles() == 2);
    // profile order is lexicographic in z: profile 0 has z=0
    const double med_z0 = model.conditional_quantile(0.5, 0, 0);
    const double med_z1 = model.conditional_quantile(0.5, 0, 1);
    CHECK(med_z0 - med_z1 == doctest::Approx(1.5).epsilon(0.2));
    // without interactions q(u) is the same across profiles
    CHECK(model.quantile_effect(0.5, 0) == model.quantile_effect(0.5, 1));
    CHECK(model.quantile_effect(0.5, 0) == doctest::Approx(2.0).epsilon(0.15));

    DesignSpec with_ix;
    with_ix.n_covariates = 1;
    with_ix.exposure_interactions = {0};
    auto model_ix = MediatorModel::linear_backend(t, {}, with_ix, levels, true);
    // q differs by the interaction coefficient between profiles
    const auto& path = model_ix.coefficient_path();
    const auto c = path.coef_at(0.5);
    CHECK(model_ix.quantile_effect(0.5, 1) - model_ix.quantile_effect(0.5, 0) ==
          doctest::Approx(c[3]).epsilon(1e-12));
}

TEST_CASE("design row layout is [1, x, w, x*w_subset]") {
    DesignSpec d;
    d.n_covariates = 2;
    d.exposure_interactions = {1};
    REQUIRE(d.dimension() == 5);
    const double w[2] = {3.0, 4.0};
    double z[5];
    d.build_row(1.0, w, z);
    CHECK(z[0] == 1.0);
    CHECK(z[1] == 1.0);
    CHECK(z[2] == 3.0);
    CHECK(z[3] == 4.0);
    CHECK(z[4] == 4.0);
}
