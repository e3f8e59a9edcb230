#include "quditnn/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "quditnn/errors.hpp"
#include "quditnn/record.hpp"

namespace quditnn {

double macro_f1(std::span<const int> predictions, std::span<const int> truth) {
    if (truth.empty()) {
        throw StructuralError("macro-F1 of an empty label set");
    }
    if (predictions.size() != truth.size()) {
        throw StructuralError("macro-F1: " + std::to_string(predictions.size()) + " predictions for " +
                              std::to_string(truth.size()) + " labels");
    }
    std::size_t tp[2] = {0, 0}, fp[2] = {0, 0}, fn[2] = {0, 0};
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int p = predictions[i];
        const int t = truth[i];
        if ((p != 0 && p != 1) || (t != 0 && t != 1)) {
            throw StructuralError("macro-F1 expects binary labels");
        }
        if (p == t) {
            ++tp[t];
        } else {
            ++fp[p];
            ++fn[t];
        }
    }
    double sum = 0.0;
    int classes = 0;
    for (int c = 0; c < 2; ++c) {
        const std::size_t support = tp[c] + fn[c];
        if (support == 0) {
            continue;
        }
        ++classes;
        const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
        sum += 2.0 * static_cast<double>(tp[c]) / denom;
    }
    return sum / classes;
}

std::size_t edit_distance(std::span<const std::size_t> a, std::span<const std::size_t> b, EditVariant variant) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    // full table: the transposition rule looks two rows back
    std::vector<std::size_t> table((n + 1) * (m + 1));
    auto at = [&](std::size_t i, std::size_t j) -> std::size_t & { return table[i * (m + 1) + j]; };
    for (std::size_t i = 0; i <= n; ++i) {
        at(i, 0) = i;
    }
    for (std::size_t j = 0; j <= m; ++j) {
        at(0, j) = j;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            std::size_t best = std::min({at(i - 1, j) + 1, at(i, j - 1) + 1, at(i - 1, j - 1) + cost});
            if (variant == EditVariant::OptimalStringAlignment && i > 1 && j > 1 && a[i - 1] == b[j - 2] &&
                a[i - 2] == b[j - 1]) {
                best = std::min(best, at(i - 2, j - 2) + 1);
            }
            at(i, j) = best;
        }
    }
    return at(n, m);
}

std::size_t edit_distance(const RankedFeatureList &a, const RankedFeatureList &b, EditVariant variant) {
    a.validate();
    b.validate();
    if (a.size() != b.size()) {
        throw StructuralError("rankings cover different feature universes (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + " features)");
    }
    return edit_distance(std::span<const std::size_t>(a.order), std::span<const std::size_t>(b.order), variant);
}

double wis(const RankedFeatureList &ranking, std::span<const std::size_t> informative, std::size_t k) {
    if (informative.empty()) {
        throw StructuralError("WIS needs a non-empty informative feature set");
    }
    const std::size_t n = ranking.size();
    if (k == 0) {
        k = informative.size();
    }
    if (k > n) {
        throw StructuralError("WIS top-k of " + std::to_string(k) + " exceeds " + std::to_string(n) + " features");
    }
    std::vector<bool> is_informative(n, false);
    for (auto f : informative) {
        if (f >= n) {
            throw StructuralError("informative feature " + std::to_string(f) + " is out of range");
        }
        is_informative[f] = true;
    }
    double mass = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        mass += ranking.scores[i];
    }
    double score = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double w = mass > 0.0 ? ranking.scores[i] / mass : 1.0 / static_cast<double>(k);
        score += is_informative[ranking.order[i]] ? w : -w;
    }
    return score;
}

double random_wis_baseline(std::size_t num_features, std::span<const std::size_t> informative, std::size_t k,
                           std::size_t trials, std::uint64_t seed) {
    if (trials < 1) {
        throw StructuralError("random WIS baseline needs at least one trial");
    }
    std::mt19937_64 rng(seed);
    RankedFeatureList r;
    r.order.resize(num_features);
    r.scores.assign(num_features, 1.0);
    double sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        std::iota(r.order.begin(), r.order.end(), std::size_t{0});
        std::shuffle(r.order.begin(), r.order.end(), rng);
        sum += wis(r, informative, k);
    }
    return sum / static_cast<double>(trials);
}

void write_ranking_csv(std::ostream &out, const RankedFeatureList &ranking,
                       std::span<const std::string> feature_names) {
    out << "rank,feature_id,feature_name,score\n";
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        const std::size_t f = ranking.order[i];
        const std::string name = f < feature_names.size() ? feature_names[f] : "f" + std::to_string(f);
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", ranking.scores[i]);
        out << (i + 1) << ',' << f << ',' << name << ',' << buf << '\n';
    }
}

RankedFeatureList read_ranking_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("rank,feature_id,feature_name,score", 0) != 0) {
        throw ParseError("ranking CSV must start with 'rank,feature_id,feature_name,score'");
    }
    RankedFeatureList r;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 4) {
            throw ParseError("ranking CSV line " + std::to_string(line_no) + " does not have 4 cells");
        }
        try {
            r.order.push_back(std::stoul(cells[1]));
        } catch (const std::logic_error &) {
            throw ParseError("ranking CSV line " + std::to_string(line_no) + ": bad feature id");
        }
        r.scores.push_back(parse_double(cells[3]));
    }
    r.validate();
    return r;
}

} // namespace quditnn
