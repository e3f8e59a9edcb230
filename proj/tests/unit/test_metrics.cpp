#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "quditnn/errors.hpp"
#include "quditnn/metrics.hpp"
#include "test_support.hpp"

using namespace quditnn;

namespace {

RankedFeatureList ranking_of(std::vector<std::size_t> order) {
    RankedFeatureList r;
    r.scores.assign(order.size(), 1.0);
    r.order = std::move(order);
    return r;
}

} // namespace

TEST(MacroF1, PerfectPredictions) {
    const std::vector<int> y{0, 1, 1, 0, 1};
    EXPECT_DOUBLE_EQ(macro_f1(y, y), 1.0);
}

TEST(MacroF1, AllMajorityOnEightyTwenty) {
    std::vector<int> truth(100, 0);
    std::fill(truth.begin() + 80, truth.end(), 1);
    const std::vector<int> pred(100, 0);
    // F1_0 = 2*80 / (2*80 + 20), F1_1 = 0
    EXPECT_NEAR(macro_f1(pred, truth), (1.6 / 1.8) / 2.0, 1e-15);
}

TEST(MacroF1, ComplementIsZero) {
    const std::vector<int> truth{0, 1, 1, 0, 0, 1};
    std::vector<int> pred(truth.size());
    std::transform(truth.begin(), truth.end(), pred.begin(), [](int y) { return 1 - y; });
    EXPECT_DOUBLE_EQ(macro_f1(pred, truth), 0.0);
}

TEST(MacroF1, ClassAbsentFromTruthIsNotAveraged) {
    const std::vector<int> truth{0, 0, 0, 0};
    const std::vector<int> pred{0, 0, 1, 0};
    // only class 0: tp 3, fn 1, fp 0
    EXPECT_NEAR(macro_f1(pred, truth), 6.0 / 7.0, 1e-15);
}

TEST(MacroF1, InvariantUnderLabelPermutation) {
    std::mt19937_64 rng(5);
    std::bernoulli_distribution coin(0.3);
    std::vector<int> truth(200), pred(200);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        truth[i] = coin(rng);
        pred[i] = coin(rng) ? 1 - truth[i] : truth[i];
    }
    std::vector<int> t2(truth.size()), p2(pred.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        t2[i] = 1 - truth[i];
        p2[i] = 1 - pred[i];
    }
    EXPECT_NEAR(macro_f1(pred, truth), macro_f1(p2, t2), 1e-15);
}

TEST(MacroF1, RejectsBadInput) {
    const std::vector<int> empty;
    EXPECT_THROW(macro_f1(empty, empty), StructuralError);
    const std::vector<int> a{0, 1}, b{0};
    EXPECT_THROW(macro_f1(a, b), StructuralError);
    const std::vector<int> c{0, 2};
    EXPECT_THROW(macro_f1(c, a), StructuralError);
}

TEST(EditDistance, IdenticalIsZero) {
    const auto r = ranking_of({3, 1, 0, 2});
    EXPECT_EQ(edit_distance(r, r), 0u);
}

TEST(EditDistance, ReversedTriple) {
    EXPECT_EQ(edit_distance(ranking_of({0, 1, 2}), ranking_of({2, 1, 0})), 2u);
}

TEST(EditDistance, AdjacentSwapByVariant) {
    const auto a = ranking_of({0, 1, 2, 3});
    const auto b = ranking_of({1, 0, 2, 3});
    EXPECT_EQ(edit_distance(a, b, EditVariant::Levenshtein), 2u);
    EXPECT_EQ(edit_distance(a, b, EditVariant::OptimalStringAlignment), 1u);
}

TEST(EditDistance, UnequalLengthSequences) {
    const std::vector<std::size_t> a{1, 2, 3}, b{1, 3};
    EXPECT_EQ(edit_distance(a, b), 1u);
    const std::vector<std::size_t> empty;
    EXPECT_EQ(edit_distance(a, empty), 3u);
    EXPECT_EQ(edit_distance(empty, b), 2u);
}

TEST(EditDistance, DifferentUniversesRejected) {
    EXPECT_THROW(edit_distance(ranking_of({0, 1, 2}), ranking_of({0, 1})), StructuralError);
}

TEST(EditDistance, MetricPropertiesOnRandomPermutations) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 10;
        std::vector<std::size_t> a(n), b(n), c(n);
        std::iota(a.begin(), a.end(), std::size_t{0});
        b = a;
        c = a;
        std::shuffle(a.begin(), a.end(), rng);
        std::shuffle(b.begin(), b.end(), rng);
        std::shuffle(c.begin(), c.end(), rng);
        const auto ab = edit_distance(a, b);
        const auto ba = edit_distance(b, a);
        EXPECT_EQ(ab, ba);
        EXPECT_EQ(ab == 0, a == b);
        EXPECT_LE(edit_distance(a, c), ab + edit_distance(b, c));
        EXPECT_LE(ab, n);
        if (n <= 7) {
            EXPECT_EQ(ab, quditnn::testing::edit_distance_recursive(a, b));
        }
    }
}

TEST(Wis, AllInformativeTopK) {
    RankedFeatureList r{{2, 0, 1, 3}, {0.5, 0.3, 0.2, 0.0}};
    const std::vector<std::size_t> informative{0, 2};
    EXPECT_DOUBLE_EQ(wis(r, informative), 1.0);
}

TEST(Wis, NoInformativeTopK) {
    RankedFeatureList r{{2, 0, 1, 3}, {0.5, 0.3, 0.2, 0.0}};
    const std::vector<std::size_t> informative{1, 3};
    EXPECT_DOUBLE_EQ(wis(r, informative), -1.0);
}

TEST(Wis, NormalizedWeightsArithmetic) {
    RankedFeatureList r{{0, 1, 2, 3, 4}, {0.4, 0.3, 0.2, 0.1, 0.0}};
    const std::vector<std::size_t> informative{0, 2};
    EXPECT_NEAR(wis(r, informative, 4), 0.2, 1e-15);
}

TEST(Wis, InvariantUnderPositiveRescaling) {
    RankedFeatureList r{{4, 1, 0, 3, 2}, {0.9, 0.5, 0.25, 0.2, 0.1}};
    RankedFeatureList s = r;
    for (auto &v : s.scores) {
        v *= 37.5;
    }
    const std::vector<std::size_t> informative{1, 2, 3};
    EXPECT_NEAR(wis(r, informative), wis(s, informative), 1e-15);
}

TEST(Wis, DecreasesWhenInformativeLosesScoreToNonInformative) {
    // informative f0 at rank 2 swaps scores with non-informative f1 at rank 1
    RankedFeatureList before{{0, 1, 2}, {0.6, 0.3, 0.1}};
    RankedFeatureList after{{1, 0, 2}, {0.6, 0.3, 0.1}};
    const std::vector<std::size_t> informative{0, 2};
    EXPECT_LT(wis(after, informative, 2), wis(before, informative, 2));
}

TEST(Wis, ZeroScoresFallBackToUniform) {
    RankedFeatureList r{{0, 1, 2, 3}, {0.0, 0.0, 0.0, 0.0}};
    const std::vector<std::size_t> informative{0, 1, 2};
    // top-3 all informative under uniform weights
    EXPECT_DOUBLE_EQ(wis(r, informative), 1.0);
    EXPECT_NEAR(wis(r, std::vector<std::size_t>{0}, 4), 1.0 / 4 - 3.0 / 4, 1e-15);
}

TEST(Wis, RejectsBadArguments) {
    RankedFeatureList r{{0, 1, 2}, {0.5, 0.3, 0.2}};
    EXPECT_THROW(wis(r, std::vector<std::size_t>{}), StructuralError);
    EXPECT_THROW(wis(r, std::vector<std::size_t>{0}, 4), StructuralError);
    EXPECT_THROW(wis(r, std::vector<std::size_t>{5}), StructuralError);
}

TEST(RandomWis, AllInformativeIsExactlyOne) {
    std::vector<std::size_t> all(23);
    std::iota(all.begin(), all.end(), std::size_t{0});
    EXPECT_EQ(random_wis_baseline(23, all, 16, 100, 1), 1.0);
}

TEST(RandomWis, HypergeometricExpectation) {
    std::vector<std::size_t> informative(16);
    std::iota(informative.begin(), informative.end(), std::size_t{0});
    // E[#informative in top 16] = 16*16/23, WIS = (2*that - 16) / 16
    const double expected = 2.0 * 16.0 / 23.0 - 1.0;
    EXPECT_NEAR(random_wis_baseline(23, informative, 16, 100000, 7), expected, 0.01);
}

TEST(RandomWis, SymmetricCaseIsNearZero) {
    const std::vector<std::size_t> informative{0, 2, 4, 6, 8};
    EXPECT_NEAR(random_wis_baseline(10, informative, 5, 100000, 3), 0.0, 0.01);
}

TEST(RandomWis, NeedsATrial) {
    EXPECT_THROW(random_wis_baseline(3, std::vector<std::size_t>{0}, 1, 0, 1), StructuralError);
}

TEST(RankingCsv, RoundTrip) {
    const std::vector<double> raw{0.25, 1.0 / 3.0, 0.0, 2.5e-7};
    const auto r = RankedFeatureList::from_scores(raw);
    const std::vector<std::string> names{"A", "B", "C", "D"};
    std::stringstream ss;
    write_ranking_csv(ss, r, names);
    EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "rank,feature_id,feature_name,score");
    const auto back = read_ranking_csv(ss);
    EXPECT_EQ(back.order, r.order);
    EXPECT_EQ(back.scores, r.scores);
}

TEST(RankingCsv, RejectsMissingHeader) {
    std::stringstream ss("1,0,A,0.5\n");
    EXPECT_THROW(read_ranking_csv(ss), ParseError);
}
