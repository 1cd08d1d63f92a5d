#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>

#include "helpers.hpp"
#include "roska/roska.hpp"

using namespace roska;

namespace {
const std::vector<std::string> kPool = {"x", "y", "rot_dist", "speed"};
}

TEST(DslParse, SingleComponentDefaultsToExpTransform) {
    const auto p = dsl::parse("component c { temp = 0.1 expr = abs(x) weight = 1.0 }");
    ASSERT_EQ(p.components.size(), 1u);
    EXPECT_EQ(p.components[0].name, "c");
    EXPECT_DOUBLE_EQ(p.components[0].temperature, 0.1);
    EXPECT_DOUBLE_EQ(p.components[0].weight, 1.0);
    EXPECT_EQ(p.components[0].transform, dsl::Transform::exp_neg_over_temp);
}

TEST(DslParse, NonPositiveTemperatureRejected) {
    EXPECT_THROW(dsl::parse("component c { temp = -1 expr = x weight = 1 }"),
                 ValidationError);
    EXPECT_THROW(dsl::parse("component c { temp = 0 expr = x weight = 1 }"), ValidationError);
}

TEST(DslParse, FeedbackStyleProgramWeights) {
    const auto p = dsl::parse(
        "component orientation_diff_reward { temp = 0.1 expr = orientation_diff weight = 4.0 }"
        "component angvel_penalty_reward { temp = 0.1 expr = abs_angvel weight = -2.0 }"
        "component orientation_diff_decrease_reward { temp = 0.1 expr = orientation_diff "
        "weight = 2.0 }");
    ASSERT_EQ(p.components.size(), 3u);
    EXPECT_DOUBLE_EQ(p.components[0].weight, 4.0);
    EXPECT_DOUBLE_EQ(p.components[1].weight, -2.0);
    EXPECT_DOUBLE_EQ(p.components[2].weight, 2.0);
    for (const auto& c : p.components) EXPECT_DOUBLE_EQ(c.temperature, 0.1);
}

TEST(DslParse, SyntaxErrorCarriesPosition) {
    try {
        dsl::parse("component c {\n  temp = 0.1\n  expr = * weight = 1\n}");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_GT(e.column(), 0);
        EXPECT_NE(std::string(e.what()).find("expected"), std::string::npos);
    }
}

TEST(DslParse, DuplicateNamesAndUnknownFunctionRejected) {
    EXPECT_THROW(dsl::parse("component a { temp = 1 expr = x weight = 1 }"
                            "component a { temp = 1 expr = x weight = 1 }"),
                 ValidationError);
    EXPECT_THROW(dsl::parse("component a { temp = 1 expr = foo(x) weight = 1 }"),
                 ValidationError);
    EXPECT_THROW(dsl::parse("component a { temp = 1 expr = x weight = 1 transform = bogus }"),
                 ValidationError);
}

TEST(DslEval, ExpTransformAtZeroIsOne) {
    const auto p = dsl::parse("component c { temp = 0.1 expr = x weight = 1 }");
    const auto r = dsl::evaluate(p, {{"x", 0.0}});
    EXPECT_DOUBLE_EQ(r.components.at("c"), 1.0);
    EXPECT_DOUBLE_EQ(r.total, 1.0);
}

TEST(DslEval, WeightedTotal) {
    // Components valued 1 each via identity on a unit feature.
    const auto p = dsl::parse(
        "component a { temp = 1 expr = one weight = 4.0 transform = identity }"
        "component b { temp = 1 expr = one weight = -2.0 transform = identity }"
        "component c { temp = 1 expr = one weight = 2.0 transform = identity }");
    const auto r = dsl::evaluate(p, {{"one", 1.0}});
    EXPECT_DOUBLE_EQ(r.total, 4.0);
}

TEST(DslEval, DivisionGuard) {
    const auto p =
        dsl::parse("component c { temp = 1 expr = x / y weight = 1 transform = identity }");
    const auto r = dsl::evaluate(p, {{"x", 3.0}, {"y", 0.0}});
    EXPECT_DOUBLE_EQ(r.components.at("c"), 3.0 / 1e-8);
    EXPECT_TRUE(std::isfinite(r.total));
}

TEST(DslEval, MissingFeatureThrows) {
    const auto p = dsl::parse("component c { temp = 1 expr = q weight = 1 }");
    EXPECT_THROW(dsl::evaluate(p, {{"x", 1.0}}), MissingFeature);
}

TEST(DslEval, PurityBitIdentical) {
    const auto p = testing_support::random_program(99, kPool);
    std::map<std::string, double> feats;
    for (const auto& f : kPool) feats[f] = 1.2345;
    const auto a = dsl::evaluate(p, feats);
    const auto b = dsl::evaluate(p, feats);
    EXPECT_EQ(a.total, b.total);
    EXPECT_EQ(a.components, b.components);
}

TEST(DslEval, ExpTransformMonotonicallyDecreasing) {
    const auto p = dsl::parse("component c { temp = 0.7 expr = x weight = 1 }");
    double prev = std::numeric_limits<double>::infinity();
    for (double v = -3.0; v <= 3.0; v += 0.25) {
        const double cur = dsl::evaluate(p, {{"x", v}}).components.at("c");
        EXPECT_LT(cur, prev);
        prev = cur;
    }
}

TEST(DslRoundTrip, PropertyOverGeneratedPrograms) {
    for (std::uint64_t k = 0; k < 300; ++k) {
        const auto p = testing_support::random_program(k, kPool);
        const auto q = dsl::parse(dsl::print(p));
        EXPECT_TRUE(dsl::equal(p, q)) << dsl::print(p);
    }
}

TEST(DslRoundTrip, CanonicalFormOneBlockPerComponent) {
    const auto p = dsl::parse(
        "component a { temp = 1 expr = x weight = 1 } component b { temp = 2 expr = y "
        "weight = -1 transform = identity }");
    const std::string text = dsl::print(p);
    EXPECT_EQ(text.find("component a {"), 0u);
    EXPECT_NE(text.find("component b {"), std::string::npos);
    EXPECT_LT(text.find("component a {"), text.find("component b {"));
    // 17-significant-digit reals re-parse exactly
    const auto q = dsl::parse(text);
    EXPECT_TRUE(dsl::equal(p, q));
}

TEST(DslFiniteness, AdversarialFeatureMaps) {
    const std::vector<double> adversarial = {1e30, -1e30, 0.0, 1e-30, -1e-30, 1e9};
    for (std::uint64_t k = 0; k < 200; ++k) {
        const auto p = testing_support::random_program(k + 1000, kPool);
        RngStream rng(k);
        std::map<std::string, double> feats;
        for (const auto& f : kPool)
            feats[f] = adversarial[rng.uniform_int(adversarial.size())];
        const auto r = dsl::evaluate(p, feats);
        EXPECT_TRUE(std::isfinite(r.total));
        for (const auto& [name, v] : r.components) EXPECT_TRUE(std::isfinite(v));
    }
}

TEST(DslMutate, DeterministicForFixedKey) {
    const auto p = testing_support::random_program(5, kPool);
    const auto a = dsl::mutate(p, 77, kPool, 0.5);
    const auto b = dsl::mutate(p, 77, kPool, 0.5);
    EXPECT_TRUE(dsl::equal(a, b));
}

TEST(DslMutate, AlwaysValidAndDifferent) {
    for (std::uint64_t k = 0; k < 200; ++k) {
        const auto p = testing_support::random_program(k + 2000, kPool);
        const auto m = dsl::mutate(p, k, kPool, 0.5);
        EXPECT_FALSE(dsl::equal(p, m));
        EXPECT_NO_THROW(dsl::validate(m));
        EXPECT_GE(m.components.size(), 1u);
    }
}

TEST(DslMutate, SingleComponentNeverDropped) {
    const auto p = dsl::parse("component only { temp = 1 expr = x weight = 1 }");
    for (std::uint64_t k = 0; k < 100; ++k) {
        const auto m = dsl::mutate(p, k, kPool, 0.5);
        EXPECT_GE(m.components.size(), 1u);
    }
}

TEST(DslMutate, WeightPerturbationBounded) {
    const double strength = 0.5;
    const auto p = testing_support::random_program(3, kPool);
    int checked = 0;
    for (std::uint64_t k = 0; k < 400; ++k) {
        const auto m = dsl::mutate(p, k, kPool, strength);
        if (m.components.size() != p.components.size()) continue;
        // Identify pure weight perturbations: exactly one weight differs.
        int weight_changes = 0;
        std::size_t at = 0;
        bool other_change = false;
        for (std::size_t i = 0; i < p.components.size(); ++i) {
            const auto& a = p.components[i];
            const auto& b = m.components[i];
            if (a.name != b.name || a.transform != b.transform ||
                a.temperature != b.temperature || !dsl::equal(*a.expr, *b.expr)) {
                other_change = true;
                break;
            }
            if (a.weight != b.weight) {
                ++weight_changes;
                at = i;
            }
        }
        if (other_change || weight_changes != 1) continue;
        const double w = p.components[at].weight;
        const double bound = strength * std::max(1.0, std::abs(w)) + 1e-12;
        EXPECT_LE(std::abs(m.components[at].weight - w), bound);
        ++checked;
    }
    EXPECT_GT(checked, 20);
}

TEST(DslMutate, PreservesFeatureValidity) {
    const auto p = dsl::parse("component c { temp = 1 expr = x + y weight = 1 }");
    for (std::uint64_t k = 0; k < 100; ++k) {
        const auto m = dsl::mutate(p, k, kPool, 0.5);
        EXPECT_TRUE(dsl::valid_for_features(m, kPool));
    }
}
