#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "quditnn/data.hpp"
#include "quditnn/errors.hpp"

using namespace quditnn;

namespace {

std::string taiwan_header() {
    std::string h = "ID";
    for (auto name : kTaiwanFeatureNames) {
        h += ',';
        h += name;
    }
    return h + ",default payment next month";
}

/// Synthetic rows in the Taiwan schema; feature c of row i is a seeded draw.
std::string taiwan_csv(std::size_t rows, std::uint64_t seed, double positive_rate = 0.221) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> v(-2, 500);
    std::bernoulli_distribution y(positive_rate);
    std::ostringstream out;
    out << taiwan_header() << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        out << (i + 1);
        for (std::size_t c = 0; c < kTaiwanFeatureNames.size(); ++c) {
            out << ',' << v(rng);
        }
        out << ',' << (y(rng) ? 1 : 0) << '\n';
    }
    return out.str();
}

Dataset load_text(const std::string &text) {
    std::istringstream in(text);
    return load_taiwan(in, "test.csv");
}

/// Two-feature dataset with the given columns and labels.
Dataset small_dataset(std::vector<double> a, std::vector<double> b, std::vector<int> labels) {
    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(a.size()), 2);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ds.features(static_cast<Eigen::Index>(i), 0) = a[i];
        ds.features(static_cast<Eigen::Index>(i), 1) = b[i];
    }
    ds.labels = std::move(labels);
    ds.feature_names = {"a", "b"};
    return ds;
}

Dataset random_dataset(std::size_t n, std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(3.0, 2.0);
    std::bernoulli_distribution y(0.25);
    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < ds.features.size(); ++i) {
        ds.features.data()[i] = g(rng);
    }
    for (std::size_t i = 0; i < n; ++i) {
        ds.labels.push_back(y(rng) ? 1 : 0);
        (void)i;
    }
    for (std::size_t c = 0; c < m; ++c) {
        ds.feature_names.push_back("f" + std::to_string(c));
    }
    return ds;
}

} // namespace

TEST(LoadTaiwan, TruncatedSampleAccepted) {
    const auto ds = load_text(taiwan_csv(100, 1));
    EXPECT_EQ(ds.rows(), 100u);
    EXPECT_EQ(ds.cols(), 23u);
    EXPECT_EQ(ds.feature_names.front(), "LIMIT_BAL");
    EXPECT_EQ(ds.feature_names.back(), "PAY_AMT6");
    EXPECT_NO_THROW(ds.validate());
}

TEST(LoadTaiwan, IdDroppedAndValuesInOrder) {
    std::string text = taiwan_header() + "\n7";
    for (int c = 1; c <= 23; ++c) {
        text += "," + std::to_string(c * 10);
    }
    text += ",1\n";
    const auto ds = load_text(text);
    ASSERT_EQ(ds.rows(), 1u);
    for (Eigen::Index c = 0; c < 23; ++c) {
        EXPECT_EQ(ds.features(0, c), 10.0 * static_cast<double>(c + 1));
    }
    EXPECT_EQ(ds.labels[0], 1);
}

TEST(LoadTaiwan, ShuffledRowsGiveSameMeans) {
    const std::string text = taiwan_csv(300, 2);
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    std::mt19937_64 rng(9);
    std::shuffle(lines.begin() + 1, lines.end(), rng);
    std::string shuffled;
    for (const auto &l : lines) {
        shuffled += l + "\n";
    }
    const auto a = load_text(text);
    const auto b = load_text(shuffled);
    EXPECT_LT((a.features.colwise().mean() - b.features.colwise().mean()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_EQ(a.positives(), b.positives());
}

TEST(LoadTaiwan, AcceptsBomCrlfQuotesAndLabelAliases) {
    std::string text = "\xEF\xBB\xBF" + taiwan_header() + "\r\n";
    text.replace(text.find("default payment next month"), 26, "\"default.payment.next.month\"");
    text += "1";
    for (int c = 0; c < 23; ++c) {
        text += ",\"5\"";
    }
    text += ",0\r\n";
    const auto ds = load_text(text);
    EXPECT_EQ(ds.rows(), 1u);
    EXPECT_EQ(ds.features(0, 22), 5.0);
}

TEST(LoadTaiwan, MissingColumnNamed) {
    std::string text = taiwan_header();
    text.erase(text.find(",PAY_AMT6"), 9);
    try {
        load_text(text + "\n");
        FAIL() << "expected SchemaError";
    } catch (const SchemaError &e) {
        EXPECT_NE(std::string(e.what()).find("PAY_AMT6"), std::string::npos) << e.what();
    }
}

TEST(LoadTaiwan, ExtraColumnNamed) {
    try {
        load_text(taiwan_header() + ",EXTRA\n");
        FAIL() << "expected SchemaError";
    } catch (const SchemaError &e) {
        EXPECT_NE(std::string(e.what()).find("EXTRA"), std::string::npos) << e.what();
    }
}

TEST(LoadTaiwan, WrongColumnNamed) {
    std::string text = taiwan_header();
    text.replace(text.find("AGE"), 3, "AGES");
    try {
        load_text(text + "\n");
        FAIL() << "expected SchemaError";
    } catch (const SchemaError &e) {
        EXPECT_NE(std::string(e.what()).find("AGES"), std::string::npos) << e.what();
    }
}

TEST(LoadTaiwan, NonNumericCellReportsRowAndColumn) {
    std::string text = taiwan_csv(3, 4);
    const auto second_row = text.find('\n', text.find('\n') + 1) + 1;
    const auto cell = text.find(',', second_row) + 1;
    text.replace(cell, text.find(',', cell) - cell, "abc");
    try {
        load_text(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
        EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
    }
}

TEST(LoadTaiwan, EmptyAndHeaderOnly) {
    EXPECT_THROW(load_text(""), SchemaError);
    EXPECT_THROW(load_text(taiwan_header() + "\n"), SchemaError);
}

TEST(ConvertUci, SkipsAliasRow) {
    std::string aliases = ",X1";
    for (int c = 2; c <= 23; ++c) {
        aliases += ",X" + std::to_string(c);
    }
    aliases += ",Y\n";
    const std::string body = taiwan_csv(20, 5);
    std::istringstream in(aliases + body);
    std::ostringstream out;
    EXPECT_EQ(convert_uci_export(in, out), 20u);
    const auto converted = load_text(out.str());
    const auto direct = load_text(body);
    EXPECT_EQ(converted.features, direct.features);
    EXPECT_EQ(converted.labels, direct.labels);
}

TEST(CanonicalCsv, RoundTripsBitExact) {
    auto ds = load_text(taiwan_csv(10, 6));
    ds.features(3, 4) = 0.1 + 0.2;
    std::ostringstream out;
    write_canonical_csv(out, ds);
    const auto back = load_text(out.str());
    EXPECT_EQ(back.features, ds.features);
    EXPECT_EQ(back.labels, ds.labels);
}

TEST(StratifiedSplit, PartitionAndStratification) {
    const auto raw = load_text(taiwan_csv(3000, 7));
    const auto ds = stratified_split(raw, kDefaultSplitRatios, 42);
    ASSERT_EQ(ds.split.size(), ds.rows());
    const std::size_t pos = ds.positives();
    const std::size_t neg = ds.rows() - pos;
    std::size_t total = 0;
    for (auto [s, r] : {std::pair{Split::Train, 0.70}, {Split::Validation, 0.15}, {Split::Test, 0.15}}) {
        const auto idx = ds.indices(s);
        total += idx.size();
        const auto labels = ds.labels_of(idx);
        const auto p = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
        EXPECT_LE(std::abs(static_cast<double>(p) - r * static_cast<double>(pos)), 1.0);
        EXPECT_LE(std::abs(static_cast<double>(idx.size() - p) - r * static_cast<double>(neg)), 1.0);
    }
    EXPECT_EQ(total, ds.rows());
}

TEST(StratifiedSplit, TaiwanScaleTestPositiveRate) {
    // 30000 rows with exactly 6626 positives
    Dataset ds = random_dataset(kTaiwanRows, 2, 8);
    std::fill(ds.labels.begin(), ds.labels.end(), 0);
    std::fill(ds.labels.begin(), ds.labels.begin() + static_cast<std::ptrdiff_t>(kTaiwanPositives), 1);
    const auto split = stratified_split(ds, kDefaultSplitRatios, 3);
    const auto test = split.labels_of(split.indices(Split::Test));
    const double rate = static_cast<double>(std::count(test.begin(), test.end(), 1)) / static_cast<double>(test.size());
    EXPECT_GE(rate, 0.215);
    EXPECT_LE(rate, 0.227);
}

TEST(StratifiedSplit, DeterministicAndSeedSensitive) {
    const auto raw = random_dataset(500, 2, 9);
    const auto a = stratified_split(raw, kDefaultSplitRatios, 1);
    const auto b = stratified_split(raw, kDefaultSplitRatios, 1);
    const auto c = stratified_split(raw, kDefaultSplitRatios, 2);
    EXPECT_EQ(a.split, b.split);
    EXPECT_NE(a.split, c.split);
}

TEST(StratifiedSplit, DegenerateRatiosAllTrain) {
    const auto ds = stratified_split(random_dataset(50, 2, 10), {1.0, 0.0, 0.0}, 0);
    EXPECT_EQ(ds.indices(Split::Train).size(), 50u);
}

TEST(StratifiedSplit, RejectsTinyClassAndBadRatios) {
    auto ds = small_dataset({1, 2, 3, 4}, {0, 1, 0, 1}, {0, 0, 0, 1});
    EXPECT_THROW(stratified_split(ds, kDefaultSplitRatios, 0), StructuralError);
    EXPECT_THROW(stratified_split(ds, {0.5, 0.2, 0.2}, 0), StructuralError);
    EXPECT_THROW(stratified_split(ds, {1.2, -0.2, 0.0}, 0), StructuralError);
}

TEST(Standardize, TwoPointDistributionMapsToPlusMinusOne) {
    auto ds = small_dataset({0, 2, 0, 2}, {1, 5, 3, 7}, {0, 1, 0, 1});
    ds.split.assign(4, Split::Train);
    const auto z = standardize(ds);
    EXPECT_DOUBLE_EQ(z.features(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(z.features(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(z.standardization->mean(0), 1.0);
    EXPECT_DOUBLE_EQ(z.standardization->stddev(0), 1.0);
}

TEST(Standardize, TrainMomentsAndIdempotence) {
    const auto z = standardize(stratified_split(random_dataset(600, 4, 11), kDefaultSplitRatios, 5));
    const auto train = z.indices(Split::Train);
    for (Eigen::Index c = 0; c < 4; ++c) {
        double mean = 0.0, var = 0.0;
        for (auto r : train) {
            mean += z.features(static_cast<Eigen::Index>(r), c);
        }
        mean /= static_cast<double>(train.size());
        for (auto r : train) {
            var += std::pow(z.features(static_cast<Eigen::Index>(r), c) - mean, 2);
        }
        var /= static_cast<double>(train.size());
        EXPECT_LT(std::abs(mean), 1e-10);
        EXPECT_LT(std::abs(std::sqrt(var) - 1.0), 1e-8);
    }
    const auto twice = standardize(z);
    EXPECT_LT((twice.features - z.features).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Standardize, TestRowsUseTrainStatistics) {
    auto ds = small_dataset({0, 2, 100, 104}, {1, 3, 50, 50}, {0, 1, 0, 1});
    ds.split = {Split::Train, Split::Train, Split::Test, Split::Test};
    const auto z = standardize(ds);
    EXPECT_DOUBLE_EQ(z.features(2, 0), 99.0);
    EXPECT_DOUBLE_EQ(z.features(3, 0), 103.0);
}

TEST(Standardize, NoLeakFromTestRows) {
    auto ds = stratified_split(random_dataset(400, 3, 12), kDefaultSplitRatios, 6);
    const auto before = standardize(ds);
    for (auto r : ds.indices(Split::Test)) {
        ds.features.row(static_cast<Eigen::Index>(r)).setConstant(1e6);
    }
    const auto after = standardize(ds);
    EXPECT_EQ(before.standardization->mean, after.standardization->mean);
    EXPECT_EQ(before.standardization->stddev, after.standardization->stddev);
}

TEST(Standardize, ConstantFeatureNamed) {
    auto ds = small_dataset({1, 2, 3, 4}, {7, 7, 7, 7}, {0, 1, 0, 1});
    ds.split.assign(4, Split::Train);
    try {
        standardize(ds);
        FAIL() << "expected StructuralError";
    } catch (const StructuralError &e) {
        EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos) << e.what();
    }
    ds.split.clear();
    EXPECT_THROW(standardize(ds), StructuralError);
}

TEST(Poison, EmptySpecLeavesDatasetUnchanged) {
    const auto z = standardize(stratified_split(random_dataset(100, 3, 13), kDefaultSplitRatios, 1));
    const auto p = poison(z, PoisonSpec{});
    EXPECT_EQ(p.features, z.features);
}

TEST(Poison, ColumnStatisticsAndLabelIndependence) {
    const std::size_t n = kTaiwanRows;
    const auto z = standardize(stratified_split(random_dataset(n, 4, 14), kDefaultSplitRatios, 2));
    PoisonSpec spec;
    spec.indices = {1, 3};
    spec.seed = 99;
    const auto p = poison(z, spec);
    for (Eigen::Index c : {1, 3}) {
        const auto col = p.features.col(c);
        EXPECT_LT(std::abs(col.mean()), 3.0 / std::sqrt(static_cast<double>(n)));
        const double ym = static_cast<double>(p.positives()) / static_cast<double>(n);
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = col(static_cast<Eigen::Index>(i)) - col.mean();
            const double dy = p.labels[i] - ym;
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
        EXPECT_LT(std::abs(sxy / std::sqrt(sxx * syy)), 0.05);
    }
    EXPECT_EQ(p.features.col(0), z.features.col(0));
    EXPECT_EQ(p.features.col(2), z.features.col(2));
}

TEST(Poison, DeterministicUnderSeed) {
    const auto z = standardize(stratified_split(random_dataset(200, 3, 15), kDefaultSplitRatios, 3));
    PoisonSpec spec;
    spec.indices = {0};
    spec.seed = 5;
    EXPECT_EQ(poison(z, spec).features, poison(z, spec).features);
    spec.seed = 6;
    EXPECT_NE(poison(z, spec).features, poison(z, PoisonSpec{{0}, PoisonMode::TrainAndTest, 5}).features);
}

TEST(Poison, TestOnlyTouchesTestRows) {
    const auto z = standardize(stratified_split(random_dataset(200, 3, 16), kDefaultSplitRatios, 4));
    PoisonSpec spec;
    spec.indices = {2};
    spec.mode = PoisonMode::TestOnly;
    const auto p = poison(z, spec);
    for (std::size_t r = 0; r < z.rows(); ++r) {
        const auto i = static_cast<Eigen::Index>(r);
        if (z.split[r] == Split::Test) {
            EXPECT_NE(p.features(i, 2), z.features(i, 2));
        } else {
            EXPECT_EQ(p.features(i, 2), z.features(i, 2));
        }
    }
}

TEST(Poison, Preconditions) {
    const auto raw = stratified_split(random_dataset(50, 3, 17), kDefaultSplitRatios, 5);
    EXPECT_THROW(poison(raw, PoisonSpec{{0}}), StructuralError);
    EXPECT_THROW(poison(standardize(raw), PoisonSpec{{3}}), StructuralError);
    EXPECT_THROW(parse_poison_mode("sometimes"), StructuralError);
    EXPECT_EQ(parse_poison_mode(to_string(PoisonMode::TestOnly)), PoisonMode::TestOnly);
}

TEST(DrawPoisonIndices, DistinctSortedAndSeeded) {
    std::mt19937_64 a(3), b(3);
    const auto x = draw_poison_indices(23, 7, a);
    const auto y = draw_poison_indices(23, 7, b);
    EXPECT_EQ(x, y);
    ASSERT_EQ(x.size(), 7u);
    EXPECT_TRUE(std::is_sorted(x.begin(), x.end()));
    EXPECT_EQ(std::adjacent_find(x.begin(), x.end()), x.end());
    EXPECT_LT(x.back(), 23u);
    std::mt19937_64 c(3);
    EXPECT_THROW(draw_poison_indices(5, 6, c), StructuralError);
}

TEST(Fingerprint, TracksRowsPositivesAndNames) {
    const auto ds = load_text(taiwan_csv(50, 18));
    const auto f = fingerprint(ds);
    EXPECT_EQ(f.rows, 50u);
    EXPECT_EQ(f.positives, ds.positives());
    EXPECT_EQ(f.feature_name_hash.size(), 16u);
    auto renamed = ds;
    renamed.feature_names[0] = "LIMIT";
    EXPECT_NE(fingerprint(renamed).feature_name_hash, f.feature_name_hash);
    EXPECT_EQ(fingerprint(ds), f);
}
