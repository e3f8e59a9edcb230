#include "quditnn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "quditnn/errors.hpp"
#include "quditnn/metrics.hpp"

namespace quditnn {

namespace {

constexpr std::uint64_t kMlpInitStream = 11;
constexpr std::uint64_t kMlpShuffleStream = 12;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// log(1 + e^z) without overflow
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// weighted cross-entropy of a logit
double logit_loss(double z, int y, const ClassWeights &w) {
    return y == 1 ? w.u1 * softplus(-z) : w.u0 * softplus(z);
}

RealMatrix gather_rows(const FeatureMatrix &features, std::span<const std::size_t> rows) {
    RealMatrix x(static_cast<Eigen::Index>(rows.size()), features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
    }
    return x;
}

std::vector<std::size_t> batch_rows(const BatchRef &batch) {
    std::vector<std::size_t> rows(batch.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = batch.row(i);
    }
    return rows;
}

void check_kind(const Record &rec, const std::string &kind) {
    if (rec.kind != kind) {
        throw ParseError("expected a '" + kind + "' record, got '" + rec.kind + "'");
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Logistic regression

void LogRegConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw StructuralError("logreg config: learning_rate must be positive");
    }
    if (!(l2 >= 0.0) || !std::isfinite(l2)) {
        throw StructuralError("logreg config: l2 must be finite and >= 0");
    }
    if (!(gradient_tolerance >= 0.0)) {
        throw StructuralError("logreg config: gradient_tolerance must be >= 0");
    }
}

LogRegConfig LogRegConfig::from_document(ConfigDocument &doc, const std::string &prefix) {
    LogRegConfig c;
    c.learning_rate = doc.take_double(prefix + "learning_rate").value_or(c.learning_rate);
    c.l2 = doc.take_double(prefix + "l2").value_or(c.l2);
    c.max_epochs = doc.take_uint(prefix + "max_epochs").value_or(c.max_epochs);
    c.gradient_tolerance = doc.take_double(prefix + "gradient_tolerance").value_or(c.gradient_tolerance);
    c.class_weighting = doc.take_bool(prefix + "class_weighting").value_or(c.class_weighting);
    c.seed = doc.take_uint(prefix + "seed").value_or(c.seed);
    c.validate();
    return c;
}

void LogRegConfig::write(std::ostream &out, const std::string &prefix) const {
    out << prefix << "learning_rate = " << fmt(learning_rate) << '\n'
        << prefix << "l2 = " << fmt(l2) << '\n'
        << prefix << "max_epochs = " << max_epochs << '\n'
        << prefix << "gradient_tolerance = " << fmt(gradient_tolerance) << '\n'
        << prefix << "class_weighting = " << (class_weighting ? "on" : "off") << '\n'
        << prefix << "seed = " << seed << '\n';
}

double LogRegModel::logit(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(coefficients.size())) {
        throw StructuralError("logreg expects " + std::to_string(coefficients.size()) + " features, got " +
                              std::to_string(x.size()));
    }
    return intercept + Eigen::Map<const RealVector>(x.data(), coefficients.size()).dot(coefficients);
}

double LogRegModel::probability(std::span<const double> x) const { return sigmoid(logit(x)); }

void LogRegModel::validate() const {
    if (coefficients.size() == 0) {
        throw StructuralError("logreg model has no coefficients");
    }
    if (!coefficients.allFinite() || !std::isfinite(intercept)) {
        throw StructuralError("logreg parameters contain NaN or Inf");
    }
}

LogRegGradient logreg_loss_gradient(const LogRegModel &model, const BatchRef &batch, const ClassWeights &weights,
                                    double l2) {
    const std::size_t n = batch.size();
    if (n == 0) {
        throw StructuralError("logreg loss over an empty batch");
    }
    LogRegGradient g;
    g.coefficients = RealVector::Zero(model.coefficients.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = batch.sample(i);
        const int y = batch.label(i);
        const double z = model.logit(x);
        sum += logit_loss(z, y, weights);
        const double dz = (y == 1 ? weights.u1 : weights.u0) * (sigmoid(z) - y);
        g.coefficients += dz * Eigen::Map<const RealVector>(x.data(), model.coefficients.size());
        g.intercept += dz;
    }
    const double inv = 1.0 / static_cast<double>(n);
    g.loss = sum * inv + l2 * model.coefficients.squaredNorm();
    g.coefficients = g.coefficients * inv + 2.0 * l2 * model.coefficients;
    g.intercept *= inv;
    return g;
}

LogRegFit train_logreg(const Dataset &ds, const LogRegConfig &config) {
    config.validate();
    ds.validate();
    const auto train = ds.split.empty() ? std::vector<std::size_t>{} : ds.indices(Split::Train);
    if (train.empty()) {
        throw StructuralError("logreg training needs a non-empty train split");
    }
    LogRegFit fit;
    fit.class_weights = config.class_weighting ? balanced_class_weights(ds.labels_of(train)) : ClassWeights{};
    fit.model.coefficients = RealVector::Zero(static_cast<Eigen::Index>(ds.cols()));
    const BatchRef batch{ds.features, ds.labels, train};
    for (std::size_t epoch = 0; epoch <= config.max_epochs; ++epoch) {
        const auto g = logreg_loss_gradient(fit.model, batch, fit.class_weights, config.l2);
        if (!std::isfinite(g.loss)) {
            throw NumericalError("logreg loss became non-finite at epoch " + std::to_string(epoch));
        }
        fit.gradient_norm = std::sqrt(g.coefficients.squaredNorm() + g.intercept * g.intercept);
        fit.epochs = epoch;
        if (fit.gradient_norm < config.gradient_tolerance) {
            fit.converged = true;
            break;
        }
        if (epoch == config.max_epochs) {
            break;
        }
        fit.model.coefficients -= config.learning_rate * g.coefficients;
        fit.model.intercept -= config.learning_rate * g.intercept;
    }
    return fit;
}

RankedFeatureList logreg_ranking(const LogRegModel &model) {
    const RealVector mag = model.coefficients.cwiseAbs();
    return RankedFeatureList::from_scores({mag.data(), static_cast<std::size_t>(mag.size())});
}

Record to_record(const LogRegModel &model) {
    model.validate();
    Record rec;
    rec.kind = "logreg";
    rec.set("intercept", format_hex(model.intercept));
    rec.set("decision_threshold", format_hex(model.decision_threshold));
    rec.set_matrix("coefficients", model.coefficients.transpose());
    return rec;
}

LogRegModel logreg_from_record(const Record &rec) {
    check_kind(rec, "logreg");
    LogRegModel m;
    m.intercept = parse_double(rec.get("intercept"));
    m.decision_threshold = parse_double(rec.get("decision_threshold"));
    const RealMatrix &c = rec.matrix("coefficients");
    if (c.rows() != 1) {
        throw ParseError("logreg coefficients must be a single row");
    }
    m.coefficients = c.row(0).transpose();
    m.validate();
    return m;
}

// ---------------------------------------------------------------------------
// Dense network

std::string_view to_string(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view s) {
    if (s == "relu") {
        return Activation::Relu;
    }
    if (s == "tanh") {
        return Activation::Tanh;
    }
    throw StructuralError("unknown activation '" + std::string(s) + "' (expected relu|tanh)");
}

void MlpConfig::validate() const {
    if (hidden.empty()) {
        throw StructuralError("mlp config: at least one hidden layer is required");
    }
    for (auto h : hidden) {
        if (h == 0) {
            throw StructuralError("mlp config: hidden layer widths must be >= 1");
        }
    }
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw StructuralError("mlp config: learning_rate must be finite and >= 0");
    }
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
        throw StructuralError("mlp config: adam betas must lie in (0, 1) and epsilon be positive");
    }
    if (batch_size < 1 || patience < 1) {
        throw StructuralError("mlp config: batch_size and patience must be >= 1");
    }
    if (!(min_delta >= 0.0)) {
        throw StructuralError("mlp config: min_delta must be >= 0");
    }
}

MlpConfig MlpConfig::from_document(ConfigDocument &doc, const std::string &prefix) {
    MlpConfig c;
    if (auto h = doc.take_string(prefix + "hidden")) {
        c.hidden.clear();
        if (!h->empty()) {
            for (auto v : parse_uint_list(*h)) {
                c.hidden.push_back(static_cast<std::size_t>(v));
            }
        }
    }
    if (auto a = doc.take_string(prefix + "activation")) {
        c.activation = parse_activation(*a);
    }
    c.learning_rate = doc.take_double(prefix + "learning_rate").value_or(c.learning_rate);
    c.beta1 = doc.take_double(prefix + "beta1").value_or(c.beta1);
    c.beta2 = doc.take_double(prefix + "beta2").value_or(c.beta2);
    c.epsilon = doc.take_double(prefix + "epsilon").value_or(c.epsilon);
    c.batch_size = doc.take_uint(prefix + "batch_size").value_or(c.batch_size);
    c.max_epochs = doc.take_uint(prefix + "max_epochs").value_or(c.max_epochs);
    c.patience = doc.take_uint(prefix + "patience").value_or(c.patience);
    c.min_delta = doc.take_double(prefix + "min_delta").value_or(c.min_delta);
    c.class_weighting = doc.take_bool(prefix + "class_weighting").value_or(c.class_weighting);
    c.zero_init = doc.take_bool(prefix + "zero_init").value_or(c.zero_init);
    c.seed = doc.take_uint(prefix + "seed").value_or(c.seed);
    c.validate();
    return c;
}

void MlpConfig::write(std::ostream &out, const std::string &prefix) const {
    out << prefix << "hidden = ";
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        out << (i ? "," : "") << hidden[i];
    }
    out << '\n'
        << prefix << "activation = " << to_string(activation) << '\n'
        << prefix << "learning_rate = " << fmt(learning_rate) << '\n'
        << prefix << "beta1 = " << fmt(beta1) << '\n'
        << prefix << "beta2 = " << fmt(beta2) << '\n'
        << prefix << "epsilon = " << fmt(epsilon) << '\n'
        << prefix << "batch_size = " << batch_size << '\n'
        << prefix << "max_epochs = " << max_epochs << '\n'
        << prefix << "patience = " << patience << '\n'
        << prefix << "min_delta = " << fmt(min_delta) << '\n'
        << prefix << "class_weighting = " << (class_weighting ? "on" : "off") << '\n'
        << prefix << "zero_init = " << (zero_init ? "on" : "off") << '\n'
        << prefix << "seed = " << seed << '\n';
}

MlpModel MlpModel::make(std::size_t inputs, std::span<const std::size_t> hidden, Activation activation) {
    if (hidden.empty()) {
        throw StructuralError("mlp needs at least one hidden layer");
    }
    if (inputs == 0) {
        throw StructuralError("mlp needs at least one input");
    }
    MlpModel m;
    m.activation = activation;
    m.sizes.push_back(inputs);
    for (auto h : hidden) {
        if (h == 0) {
            throw StructuralError("mlp hidden layer widths must be >= 1");
        }
        m.sizes.push_back(h);
    }
    m.sizes.push_back(1);
    std::size_t n = 0;
    for (std::size_t k = 0; k + 1 < m.sizes.size(); ++k) {
        n += (m.sizes[k] + 1) * m.sizes[k + 1];
    }
    m.params.assign(n, 0.0);
    return m;
}

std::size_t MlpModel::offset(std::size_t layer) const {
    std::size_t off = 0;
    for (std::size_t k = 0; k < layer; ++k) {
        off += (sizes[k] + 1) * sizes[k + 1];
    }
    return off;
}

void MlpModel::validate() const {
    if (sizes.size() < 3 || sizes.back() != 1) {
        throw StructuralError("mlp must have at least one hidden layer and a single output");
    }
    if (std::find(sizes.begin(), sizes.end(), std::size_t{0}) != sizes.end()) {
        throw StructuralError("mlp layer widths must be >= 1");
    }
    if (params.size() != offset(layers())) {
        throw StructuralError("mlp parameter vector has " + std::to_string(params.size()) + " entries, expected " +
                              std::to_string(offset(layers())));
    }
    for (double p : params) {
        if (!std::isfinite(p)) {
            throw StructuralError("mlp parameters contain NaN or Inf");
        }
    }
}

namespace {

using ConstMatrixMap = Eigen::Map<const RealMatrix>;
using ConstVectorMap = Eigen::Map<const RealVector>;

struct MlpForward {
    std::vector<RealMatrix> pre;  // Z_k, batch x width
    std::vector<RealMatrix> post; // A_k, A_0 = input
};

MlpForward mlp_forward(const MlpModel &m, RealMatrix x) {
    MlpForward f;
    f.post.push_back(std::move(x));
    for (std::size_t k = 0; k < m.layers(); ++k) {
        const auto in = static_cast<Eigen::Index>(m.sizes[k]);
        const auto out = static_cast<Eigen::Index>(m.sizes[k + 1]);
        const std::size_t off = m.offset(k);
        const ConstMatrixMap w(m.params.data() + off, out, in);
        const ConstVectorMap b(m.params.data() + off + static_cast<std::size_t>(out * in), out);
        RealMatrix z = f.post.back() * w.transpose();
        z.rowwise() += b.transpose();
        RealMatrix a = z;
        if (k + 1 < m.layers()) {
            if (m.activation == Activation::Relu) {
                a = a.cwiseMax(0.0);
            } else {
                a = a.array().tanh().matrix();
            }
        }
        f.pre.push_back(std::move(z));
        f.post.push_back(std::move(a));
    }
    return f;
}

double mlp_batch_loss(const MlpModel &m, const Dataset &ds, std::span<const std::size_t> rows,
                      const ClassWeights &w, std::vector<int> *pred) {
    const MlpForward f = mlp_forward(m, gather_rows(ds.features, rows));
    const RealMatrix &z = f.pre.back();
    double sum = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double zi = z(static_cast<Eigen::Index>(i), 0);
        const int y = ds.labels[rows[i]];
        sum += logit_loss(zi, y, w);
        if (pred) {
            (*pred)[i] = sigmoid(zi) >= m.decision_threshold ? 1 : 0;
        }
    }
    return sum / static_cast<double>(rows.size());
}

} // namespace

double MlpModel::probability(std::span<const double> x) const {
    if (x.size() != sizes.front()) {
        throw StructuralError("mlp expects " + std::to_string(sizes.front()) + " features, got " +
                              std::to_string(x.size()));
    }
    RealMatrix row = ConstVectorMap(x.data(), static_cast<Eigen::Index>(x.size())).transpose();
    return sigmoid(mlp_forward(*this, std::move(row)).pre.back()(0, 0));
}

double mlp_loss_gradient(const MlpModel &model, const BatchRef &batch, const ClassWeights &weights,
                         std::vector<double> &gradient) {
    const std::size_t n = batch.size();
    if (n == 0) {
        throw StructuralError("mlp loss over an empty batch");
    }
    const auto rows = batch_rows(batch);
    const MlpForward f = mlp_forward(model, gather_rows(batch.features, rows));
    gradient.assign(model.params.size(), 0.0);

    const double inv = 1.0 / static_cast<double>(n);
    RealMatrix delta(static_cast<Eigen::Index>(n), 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double z = f.pre.back()(r, 0);
        const int y = batch.label(i);
        sum += logit_loss(z, y, weights);
        delta(r, 0) = (y == 1 ? weights.u1 : weights.u0) * (sigmoid(z) - y) * inv;
    }
    for (std::size_t k = model.layers(); k-- > 0;) {
        const auto in = static_cast<Eigen::Index>(model.sizes[k]);
        const auto out = static_cast<Eigen::Index>(model.sizes[k + 1]);
        const std::size_t off = model.offset(k);
        Eigen::Map<RealMatrix> gw(gradient.data() + off, out, in);
        Eigen::Map<RealVector> gb(gradient.data() + off + static_cast<std::size_t>(out * in), out);
        gw = delta.transpose() * f.post[k];
        gb = delta.colwise().sum().transpose();
        if (k == 0) {
            break;
        }
        const ConstMatrixMap w(model.params.data() + off, out, in);
        RealMatrix back = delta * w;
        if (model.activation == Activation::Relu) {
            back = back.cwiseProduct((f.pre[k - 1].array() > 0.0).cast<double>().matrix());
        } else {
            back = back.cwiseProduct((1.0 - f.post[k].array().square()).matrix());
        }
        delta = std::move(back);
    }
    return sum * inv;
}

MlpFit train_mlp(const Dataset &ds, const MlpConfig &config, const EpochCallback &on_epoch) {
    config.validate();
    ds.validate();
    if (ds.split.empty()) {
        throw StructuralError("mlp training needs split tags");
    }
    const auto train = ds.indices(Split::Train);
    const auto val = ds.indices(Split::Validation);
    if (train.empty() || val.empty()) {
        throw StructuralError("mlp training needs non-empty train and validation splits");
    }
    MlpFit fit;
    MlpModel &m = fit.model;
    m = MlpModel::make(ds.cols(), config.hidden, config.activation);
    if (!config.zero_init) {
        // Glorot-uniform weights, zero biases
        std::mt19937_64 rng(derive_seed(config.seed, kMlpInitStream));
        for (std::size_t k = 0; k < m.layers(); ++k) {
            const std::size_t in = m.sizes[k];
            const std::size_t out = m.sizes[k + 1];
            const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
            std::uniform_real_distribution<double> u(-limit, limit);
            const std::size_t off = m.offset(k);
            for (std::size_t i = 0; i < in * out; ++i) {
                m.params[off + i] = u(rng);
            }
        }
    }
    fit.class_weights = config.class_weighting ? balanced_class_weights(ds.labels_of(train)) : ClassWeights{};
    if (config.max_epochs == 0) {
        return fit;
    }

    const AdamConfig adam{config.learning_rate, config.beta1, config.beta2, config.epsilon};
    AdamState state(m.params.size());
    std::mt19937_64 shuffle_rng(derive_seed(config.seed, kMlpShuffleStream));
    EarlyStopping stopper(config.patience, config.min_delta);
    std::vector<double> best = m.params;
    std::vector<double> grad;
    std::vector<std::size_t> order = train;
    std::vector<int> pred(val.size());
    const auto val_truth = ds.labels_of(val);

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
            const std::size_t len = std::min(config.batch_size, order.size() - start);
            const BatchRef batch{ds.features, ds.labels, std::span<const std::size_t>(order).subspan(start, len)};
            const double loss = mlp_loss_gradient(m, batch, fit.class_weights, grad);
            if (!std::isfinite(loss)) {
                throw NumericalError("mlp epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index) +
                                     ": non-finite loss");
            }
            loss_sum += loss * static_cast<double>(len);
            adam_step(m.params, grad, state, adam);
        }
        const double val_loss = mlp_batch_loss(m, ds, val, fit.class_weights, &pred);
        if (!std::isfinite(val_loss)) {
            throw NumericalError("mlp epoch " + std::to_string(epoch) + ": validation loss is not finite");
        }
        const EpochRecord rec{epoch, loss_sum / static_cast<double>(order.size()), val_loss,
                              macro_f1(pred, val_truth)};
        fit.history.epochs.push_back(rec);
        fit.history.stopped_epoch = epoch;
        const bool stop = stopper.observe(epoch, val_loss);
        if (stopper.last_was_best()) {
            best = m.params;
        }
        if (stop || (on_epoch && !on_epoch(rec))) {
            break;
        }
    }
    m.params = std::move(best);
    fit.history.best_epoch = stopper.best_epoch();
    return fit;
}

Record to_record(const MlpModel &model) {
    model.validate();
    Record rec;
    rec.kind = "mlp";
    std::string sizes;
    for (std::size_t i = 0; i < model.sizes.size(); ++i) {
        sizes += (i ? " " : "") + std::to_string(model.sizes[i]);
    }
    rec.set("sizes", sizes);
    rec.set("activation", std::string(to_string(model.activation)));
    rec.set("decision_threshold", format_hex(model.decision_threshold));
    rec.set_matrix("params", Eigen::Map<const RealMatrix>(model.params.data(), 1,
                                                          static_cast<Eigen::Index>(model.params.size())));
    return rec;
}

MlpModel mlp_from_record(const Record &rec) {
    check_kind(rec, "mlp");
    MlpModel m;
    std::istringstream sizes(rec.get("sizes"));
    std::size_t s = 0;
    while (sizes >> s) {
        m.sizes.push_back(s);
    }
    if (!sizes.eof()) {
        throw ParseError("mlp record has malformed sizes");
    }
    try {
        m.activation = parse_activation(rec.get("activation"));
    } catch (const StructuralError &e) {
        throw ParseError(e.what());
    }
    m.decision_threshold = parse_double(rec.get("decision_threshold"));
    const RealMatrix &p = rec.matrix("params");
    if (p.rows() != 1) {
        throw ParseError("mlp params must be a single row");
    }
    m.params.assign(p.data(), p.data() + p.size());
    try {
        m.validate();
    } catch (const StructuralError &e) {
        throw ParseError(std::string("mlp record: ") + e.what());
    }
    return m;
}

} // namespace quditnn
