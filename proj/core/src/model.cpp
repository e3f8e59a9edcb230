#include "quditnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "quditnn/errors.hpp"

namespace quditnn {

std::string_view to_string(Readout r) {
    switch (r) {
    case Readout::Parity:
        return "parity";
    case Readout::FirstTwo:
        return "first-two";
    }
    return "unknown";
}

std::string_view to_string(ImportanceMode m) {
    switch (m) {
    case ImportanceMode::SignedSum:
        return "signed-sum";
    case ImportanceMode::MeanAbs:
        return "mean-abs";
    }
    return "unknown";
}

std::string_view to_string(InputMap m) {
    return m == InputMap::Identity ? "identity" : "normal-cdf";
}

InputMap parse_input_map(std::string_view s) {
    if (s == "identity") {
        return InputMap::Identity;
    }
    if (s == "normal-cdf") {
        return InputMap::NormalCdf;
    }
    throw StructuralError("unknown input map '" + std::string(s) + "' (expected identity|normal-cdf)");
}

Readout parse_readout(std::string_view s) {
    if (s == "parity") {
        return Readout::Parity;
    }
    if (s == "first-two") {
        return Readout::FirstTwo;
    }
    throw StructuralError("unknown readout scheme '" + std::string(s) + "' (expected parity|first-two)");
}

ImportanceMode parse_importance_mode(std::string_view s) {
    if (s == "signed-sum" || s == "sum") {
        return ImportanceMode::SignedSum;
    }
    if (s == "mean-abs") {
        return ImportanceMode::MeanAbs;
    }
    throw StructuralError("unknown importance mode '" + std::string(s) + "' (expected signed-sum|mean-abs)");
}

ModelParams ModelParams::make(std::size_t dim, std::size_t layers, std::size_t num_features, Readout readout) {
    if (dim < 2) {
        throw StructuralError("qudit dimension must be >= 2, got " + std::to_string(dim));
    }
    if (layers < 1) {
        throw StructuralError("layer count must be >= 1");
    }
    const std::size_t n_gen = dim * dim - 1;
    if (n_gen < num_features) {
        throw StructuralError("d^2-1 = " + std::to_string(n_gen) + " generators cannot carry " +
                              std::to_string(num_features) + " features");
    }
    ModelParams p;
    p.dim = dim;
    p.layers = layers;
    p.readout = readout;
    p.slot_feature.resize(n_gen, kBiasSlot);
    for (std::size_t f = 0; f < num_features; ++f) {
        p.slot_feature[f] = static_cast<int>(f);
    }
    p.weights = RealMatrix::Zero(static_cast<Eigen::Index>(layers), static_cast<Eigen::Index>(n_gen));
    return p;
}

std::size_t ModelParams::num_features() const {
    std::size_t n = 0;
    for (int f : slot_feature) {
        if (f != kBiasSlot) {
            ++n;
        }
    }
    return n;
}

std::size_t ModelParams::slot_of_feature(std::size_t f) const {
    for (std::size_t s = 0; s < slot_feature.size(); ++s) {
        if (slot_feature[s] == static_cast<int>(f)) {
            return s;
        }
    }
    throw StructuralError("feature " + std::to_string(f) + " is not assigned to any generator");
}

void ModelParams::validate() const {
    if (dim < 2 || layers < 1) {
        throw StructuralError("model needs dim >= 2 and layers >= 1");
    }
    const std::size_t n_gen = num_generators();
    if (slot_feature.size() != n_gen) {
        throw StructuralError("assignment table has " + std::to_string(slot_feature.size()) + " slots, expected " +
                              std::to_string(n_gen));
    }
    if (static_cast<std::size_t>(weights.rows()) != layers || static_cast<std::size_t>(weights.cols()) != n_gen) {
        throw StructuralError("weight matrix must be " + std::to_string(layers) + "x" + std::to_string(n_gen));
    }
    const std::size_t nf = num_features();
    std::vector<bool> seen(nf, false);
    for (int f : slot_feature) {
        if (f == kBiasSlot) {
            continue;
        }
        if (f < 0 || static_cast<std::size_t>(f) >= nf || seen[static_cast<std::size_t>(f)]) {
            throw StructuralError("assignment table must map features 0..n-1 to distinct slots");
        }
        seen[static_cast<std::size_t>(f)] = true;
    }
    if (!weights.allFinite()) {
        throw StructuralError("model weights contain NaN or Inf");
    }
    if (!std::isfinite(decision_threshold)) {
        throw StructuralError("decision threshold must be finite");
    }
}

double remap(double z) { return 2.0 * std::atan(2.0 * z); }

double remap_derivative(double z) { return 4.0 / (1.0 + 4.0 * z * z); }

RealVector slot_inputs(std::span<const double> features, const ModelParams &params) {
    const std::size_t n_gen = params.slot_feature.size();
    RealVector in(static_cast<Eigen::Index>(n_gen));
    for (std::size_t s = 0; s < n_gen; ++s) {
        const int f = params.slot_feature[s];
        if (f == kBiasSlot) {
            in(static_cast<Eigen::Index>(s)) = 1.0;
        } else {
            if (static_cast<std::size_t>(f) >= features.size()) {
                throw StructuralError("sample has " + std::to_string(features.size()) + " features but slot " +
                                      std::to_string(s) + " reads feature " + std::to_string(f));
            }
            const double x = features[static_cast<std::size_t>(f)];
            in(static_cast<Eigen::Index>(s)) =
                params.input_map == InputMap::NormalCdf ? 0.5 * std::erfc(-x / std::sqrt(2.0)) : x;
        }
    }
    return in;
}

ComplexMatrix hamiltonian_from_coefficients(std::span<const double> coefficients, const GeneratorSet &gs) {
    if (coefficients.size() != gs.size()) {
        throw StructuralError("expected " + std::to_string(gs.size()) + " generator coefficients, got " +
                              std::to_string(coefficients.size()));
    }
    const auto d = static_cast<Eigen::Index>(gs.dim());
    ComplexMatrix h = ComplexMatrix::Zero(d, d);
    for (std::size_t s = 0; s < gs.size(); ++s) {
        const double c = coefficients[s];
        if (c == 0.0) {
            continue;
        }
        for (const auto &e : gs[s].entries) {
            h(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) += c * e.value;
        }
    }
    return h;
}

ComplexMatrix layer_hamiltonian(std::span<const double> inputs, std::span<const double> weights,
                                const GeneratorSet &gs) {
    if (inputs.size() != gs.size() || weights.size() != gs.size()) {
        throw StructuralError("layer needs " + std::to_string(gs.size()) + " inputs and weights, got " +
                              std::to_string(inputs.size()) + " and " + std::to_string(weights.size()));
    }
    std::vector<double> coeff(gs.size());
    for (std::size_t s = 0; s < gs.size(); ++s) {
        coeff[s] = remap(inputs[s] * weights[s]);
    }
    return hamiltonian_from_coefficients(coeff, gs);
}

namespace {

void check_model_and_generators(const ModelParams &params, const GeneratorSet &gs) {
    if (gs.dim() != params.dim || gs.size() != params.num_generators()) {
        throw StructuralError("generator set of dimension " + std::to_string(gs.dim()) +
                              " does not match model dimension " + std::to_string(params.dim));
    }
    if (static_cast<std::size_t>(params.weights.rows()) != params.layers ||
        static_cast<std::size_t>(params.weights.cols()) != gs.size()) {
        throw StructuralError("weight matrix shape does not match model architecture");
    }
}

} // namespace

QuditState forward_state(std::span<const double> features, const ModelParams &params, const GeneratorSet &gs) {
    check_model_and_generators(params, gs);
    const RealVector in = slot_inputs(features, params);
    const std::size_t n_gen = gs.size();
    std::vector<double> coeff(n_gen);
    ComplexVector psi = QuditState::basis(params.dim, 0).amplitudes();
    for (std::size_t l = 0; l < params.layers; ++l) {
        for (std::size_t s = 0; s < n_gen; ++s) {
            coeff[s] = remap(in(static_cast<Eigen::Index>(s)) *
                             params.weights(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(s)));
        }
        const EigenDecomposition eig = eigh(hamiltonian_from_coefficients(coeff, gs));
        ComplexVector rotated = eig.eigenvectors.adjoint() * psi;
        for (Eigen::Index a = 0; a < rotated.size(); ++a) {
            rotated(a) *= std::polar(1.0, -eig.eigenvalues(a));
        }
        psi = eig.eigenvectors * rotated;
    }
    return QuditState::from_amplitudes(std::move(psi));
}

RealVector forward(std::span<const double> features, const ModelParams &params, const GeneratorSet &gs) {
    return forward_state(features, params, gs).probabilities();
}

ClassDistribution readout(std::span<const double> probs, Readout scheme) {
    if (probs.size() < 2) {
        throw StructuralError("binary readout needs at least two basis states");
    }
    switch (scheme) {
    case Readout::Parity: {
        double q1 = 0.0;
        for (std::size_t k = 1; k < probs.size(); k += 2) {
            q1 += probs[k];
        }
        return {1.0 - q1, q1};
    }
    case Readout::FirstTwo: {
        const double mass = probs[0] + probs[1];
        if (!(mass >= kFirstTwoFloor)) {
            std::ostringstream msg;
            msg << "first-two readout: p0 + p1 = " << mass << " is below " << kFirstTwoFloor;
            throw DegenerateReadoutError(msg.str());
        }
        return {probs[0] / mass, probs[1] / mass};
    }
    }
    throw StructuralError("unknown readout scheme");
}

RealVector sample_shots(std::span<const double> probs, long long shots, std::mt19937_64 &rng) {
    if (shots < 1) {
        throw StructuralError("shot count must be >= 1, got " + std::to_string(shots));
    }
    const auto d = static_cast<Eigen::Index>(probs.size());
    RealVector freq = RealVector::Zero(d);
    long long remaining = shots;
    double remaining_mass = 1.0;
    for (Eigen::Index k = 0; k < d && remaining > 0; ++k) {
        const double pk = probs[static_cast<std::size_t>(k)];
        long long count = remaining;
        if (k < d - 1) {
            // conditional binomial given the outcomes already drawn
            const double cond = remaining_mass > 0.0 ? std::clamp(pk / remaining_mass, 0.0, 1.0) : 0.0;
            std::binomial_distribution<long long> draw(remaining, cond);
            count = draw(rng);
        }
        remaining -= count;
        remaining_mass -= pk;
        freq(k) = static_cast<double>(count) / static_cast<double>(shots);
    }
    return freq;
}

RealVector sample_shots(std::span<const double> probs, long long shots, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_shots(probs, shots, rng);
}

RankedFeatureList feature_importance(const ModelParams &params, ImportanceMode mode) {
    const std::size_t nf = params.num_features();
    std::vector<double> scores(nf, 0.0);
    for (std::size_t f = 0; f < nf; ++f) {
        const auto col = params.weights.col(static_cast<Eigen::Index>(params.slot_of_feature(f)));
        switch (mode) {
        case ImportanceMode::SignedSum:
            scores[f] = std::abs(col.sum());
            break;
        case ImportanceMode::MeanAbs:
            scores[f] = col.cwiseAbs().sum() / static_cast<double>(params.layers);
            break;
        }
    }
    return RankedFeatureList::from_scores(scores);
}

int predict(std::span<const double> features, const ModelParams &params, const GeneratorSet &gs) {
    const RealVector p = forward(features, params, gs);
    const auto q = readout(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), params.readout);
    return q.q1 >= params.decision_threshold ? 1 : 0;
}

Record to_record(const ModelParams &params) {
    params.validate();
    Record rec;
    rec.kind = "qnn";
    rec.set("dim", std::to_string(params.dim));
    rec.set("layers", std::to_string(params.layers));
    rec.set("readout", std::string(to_string(params.readout)));
    rec.set("input_map", std::string(to_string(params.input_map)));
    std::string table;
    for (std::size_t s = 0; s < params.slot_feature.size(); ++s) {
        if (s > 0) {
            table += ' ';
        }
        table += std::to_string(params.slot_feature[s]);
    }
    rec.set("assignment", table);
    rec.set("decision_threshold", format_hex(params.decision_threshold));
    rec.set_matrix("weights", params.weights);
    return rec;
}

ModelParams model_from_record(const Record &rec) {
    if (rec.kind != "qnn") {
        throw ParseError("expected a qnn record, got '" + rec.kind + "'");
    }
    ModelParams p;
    try {
        p.dim = std::stoul(rec.get("dim"));
        p.layers = std::stoul(rec.get("layers"));
    } catch (const std::logic_error &) {
        throw ParseError("qnn record has malformed dim/layers");
    }
    p.readout = parse_readout(rec.get("readout"));
    if (auto m = rec.find("input_map")) {
        p.input_map = parse_input_map(*m);
    }
    std::istringstream ss(rec.get("assignment"));
    int f = 0;
    while (ss >> f) {
        p.slot_feature.push_back(f);
    }
    if (auto t = rec.find("decision_threshold")) {
        p.decision_threshold = parse_double(*t);
    }
    p.weights = rec.matrix("weights");
    p.validate();
    return p;
}

} // namespace quditnn
