#include "quditnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "quditnn/errors.hpp"
#include "quditnn/gradients.hpp"
#include "quditnn/metrics.hpp"
#include "quditnn/parallel.hpp"

namespace quditnn {

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<ClassDistribution> class_distributions(const Dataset &ds, std::span<const std::size_t> rows,
                                                   const ModelParams &params, const GeneratorSet &gs,
                                                   unsigned threads) {
    std::vector<ClassDistribution> out(rows.size());
    const auto m = ds.cols();
    parallel_for(rows.size(), threads, [&](std::size_t i) {
        const auto r = static_cast<Eigen::Index>(rows[i]);
        const RealVector p = forward({ds.features.row(r).data(), m}, params, gs);
        out[i] = readout({p.data(), static_cast<std::size_t>(p.size())}, params.readout);
    });
    return out;
}

struct SplitEval {
    double loss = 0.0;
    double macro_f1 = 0.0;
};

SplitEval evaluate_split(const Dataset &ds, std::span<const std::size_t> rows, const ModelParams &params,
                         const GeneratorSet &gs, const LossConfig &lc, unsigned threads) {
    const auto q = class_distributions(ds, rows, params, gs, threads);
    double sum = 0.0;
    std::vector<int> pred(rows.size());
    std::vector<int> truth(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        truth[i] = ds.labels[rows[i]];
        sum += cross_entropy(q[i], truth[i], lc.class_weights);
        pred[i] = q[i].q1 >= params.decision_threshold ? 1 : 0;
    }
    return {sum / static_cast<double>(rows.size()) + ridge_penalty(params.weights, lc.ridge), macro_f1(pred, truth)};
}

double f1_from_counts(std::size_t tp1, std::size_t fp1, std::size_t fn1, std::size_t tn1) {
    // class 1 counts; class 0 has tp = tn1, fp = fn1, fn = fp1
    double sum = 0.0;
    int classes = 0;
    if (tp1 + fn1 > 0) {
        sum += 2.0 * static_cast<double>(tp1) / static_cast<double>(2 * tp1 + fp1 + fn1);
        ++classes;
    }
    if (tn1 + fp1 > 0) {
        sum += 2.0 * static_cast<double>(tn1) / static_cast<double>(2 * tn1 + fn1 + fp1);
        ++classes;
    }
    return classes == 0 ? 0.0 : sum / classes;
}

} // namespace

void TrainConfig::validate() const {
    auto fail = [](const std::string &what) { throw StructuralError("train config: " + what); };
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        fail("learning_rate must be positive");
    }
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
        fail("adam betas must lie in (0, 1)");
    }
    if (!(epsilon > 0.0)) {
        fail("epsilon must be positive");
    }
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
        fail("ridge must be finite and >= 0");
    }
    if (batch_size < 1) {
        fail("batch_size must be >= 1");
    }
    if (patience < 1) {
        fail("patience must be >= 1");
    }
    if (!(min_delta >= 0.0)) {
        fail("min_delta must be >= 0");
    }
    if (!(weight_init_scale > 0.0) || !std::isfinite(weight_init_scale)) {
        fail("weight_init_scale must be positive");
    }
    if (threads < 1) {
        fail("threads must be >= 1");
    }
}

TrainConfig TrainConfig::from_document(ConfigDocument &doc, const std::string &prefix) {
    TrainConfig c;
    auto k = [&](const char *name) { return prefix + name; };
    c.learning_rate = doc.take_double(k("learning_rate")).value_or(c.learning_rate);
    c.beta1 = doc.take_double(k("beta1")).value_or(c.beta1);
    c.beta2 = doc.take_double(k("beta2")).value_or(c.beta2);
    c.epsilon = doc.take_double(k("epsilon")).value_or(c.epsilon);
    c.ridge = doc.take_double(k("ridge")).value_or(c.ridge);
    c.batch_size = doc.take_uint(k("batch_size")).value_or(c.batch_size);
    c.max_epochs = doc.take_uint(k("max_epochs")).value_or(c.max_epochs);
    c.patience = doc.take_uint(k("patience")).value_or(c.patience);
    c.min_delta = doc.take_double(k("min_delta")).value_or(c.min_delta);
    c.class_weighting = doc.take_bool(k("class_weighting")).value_or(c.class_weighting);
    c.seed = doc.take_uint(k("seed")).value_or(c.seed);
    c.weight_init_scale = doc.take_double(k("weight_init_scale")).value_or(c.weight_init_scale);
    c.tune_threshold = doc.take_bool(k("tune_threshold")).value_or(c.tune_threshold);
    c.threads = static_cast<unsigned>(doc.take_uint(k("threads")).value_or(c.threads));
    c.validate();
    return c;
}

void TrainConfig::write(std::ostream &out, const std::string &prefix) const {
    out << prefix << "learning_rate = " << fmt(learning_rate) << '\n'
        << prefix << "beta1 = " << fmt(beta1) << '\n'
        << prefix << "beta2 = " << fmt(beta2) << '\n'
        << prefix << "epsilon = " << fmt(epsilon) << '\n'
        << prefix << "ridge = " << fmt(ridge) << '\n'
        << prefix << "batch_size = " << batch_size << '\n'
        << prefix << "max_epochs = " << max_epochs << '\n'
        << prefix << "patience = " << patience << '\n'
        << prefix << "min_delta = " << fmt(min_delta) << '\n'
        << prefix << "class_weighting = " << (class_weighting ? "on" : "off") << '\n'
        << prefix << "seed = " << seed << '\n'
        << prefix << "weight_init_scale = " << fmt(weight_init_scale) << '\n'
        << prefix << "tune_threshold = " << (tune_threshold ? "on" : "off") << '\n'
        << prefix << "threads = " << threads << '\n';
}

void TrainHistory::write_csv(std::ostream &out) const {
    out << "epoch,train_loss,val_loss,val_macro_f1\n";
    for (const auto &e : epochs) {
        out << e.epoch << ',' << fmt(e.train_loss) << ',' << fmt(e.val_loss) << ',' << fmt(e.val_macro_f1) << '\n';
    }
}

void adam_step(std::span<double> params, std::span<const double> gradient, AdamState &state,
               const AdamConfig &config) {
    const std::size_t n = params.size();
    if (gradient.size() != n || state.m.size() != n || state.v.size() != n) {
        throw StructuralError("adam_step: parameter, gradient and state sizes differ");
    }
    ++state.t;
    const double t = static_cast<double>(state.t);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t i = 0; i < n; ++i) {
        const double g = gradient[i];
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
}

bool EarlyStopping::observe(std::size_t epoch, double val_loss) {
    ++seen_;
    last_best_ = false;
    if (seen_ == 1 || val_loss < best_loss_) {
        best_loss_ = val_loss;
        best_epoch_ = epoch;
        last_best_ = true;
    }
    if (seen_ == 1 || val_loss < reference_ - min_delta_) {
        reference_ = val_loss;
        stale_ = 0;
        return false;
    }
    ++stale_;
    return stale_ >= patience_;
}

double tune_threshold(std::span<const double> q1, std::span<const int> labels) {
    if (q1.size() != labels.size() || q1.empty()) {
        throw StructuralError("tune_threshold needs one label per score");
    }
    std::vector<std::size_t> idx(q1.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return q1[a] < q1[b]; });
    const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t negatives = labels.size() - positives;

    auto score_at = [&](double t) {
        std::size_t tp = 0, fp = 0;
        for (std::size_t i = 0; i < q1.size(); ++i) {
            if (q1[i] >= t) {
                (labels[i] == 1 ? tp : fp) += 1;
            }
        }
        return f1_from_counts(tp, fp, positives - tp, negatives - fp);
    };
    double best_t = 0.5;
    double best = score_at(0.5);
    // sweep from "everything positive" upward; rows below the cut are predicted 0
    std::size_t tp = positives, fp = negatives;
    for (std::size_t k = 1; k < idx.size(); ++k) {
        const std::size_t below = idx[k - 1];
        (labels[below] == 1 ? tp : fp) -= 1;
        const double lo = q1[below];
        const double hi = q1[idx[k]];
        if (!(hi > lo)) {
            continue;
        }
        const double t = 0.5 * (lo + hi);
        const double s = f1_from_counts(tp, fp, positives - tp, negatives - fp);
        if (s > best || (s == best && std::abs(t - 0.5) < std::abs(best_t - 0.5))) {
            best = s;
            best_t = t;
        }
    }
    return best_t;
}

std::vector<double> predict_q1(const Dataset &ds, std::span<const std::size_t> rows, const ModelParams &params,
                               const GeneratorSet &gs, unsigned threads) {
    const auto q = class_distributions(ds, rows, params, gs, threads);
    std::vector<double> out(q.size());
    std::transform(q.begin(), q.end(), out.begin(), [](const ClassDistribution &c) { return c.q1; });
    return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

QnnTrainResult train_qnn(const Dataset &ds, const QnnArchitecture &arch, const TrainConfig &config,
                         const GeneratorSet &gs, const EpochCallback &on_epoch) {
    config.validate();
    ds.validate();
    const auto train = ds.indices(Split::Train);
    const auto val = ds.indices(Split::Validation);
    if (train.empty() || val.empty()) {
        throw StructuralError("training needs non-empty train and validation splits");
    }

    QnnTrainResult result;
    ModelParams &params = result.params;
    params = ModelParams::make(arch.dim, arch.layers, ds.cols(), arch.readout);
    if (arch.slot_feature) {
        params.slot_feature = *arch.slot_feature;
    }
    params.input_map = arch.input_map;
    params.validate();
    if (params.num_features() != ds.cols()) {
        throw StructuralError("assignment table carries " + std::to_string(params.num_features()) +
                              " features, dataset has " + std::to_string(ds.cols()));
    }
    if (gs.dim() != params.dim) {
        throw StructuralError("generator set dimension does not match the architecture");
    }

    std::mt19937_64 init_rng(derive_seed(config.seed, kInitStream));
    std::uniform_real_distribution<double> init(-config.weight_init_scale, config.weight_init_scale);
    for (Eigen::Index l = 0; l < params.weights.rows(); ++l) {
        for (Eigen::Index s = 0; s < params.weights.cols(); ++s) {
            params.weights(l, s) = init(init_rng);
        }
    }

    const auto train_labels = ds.labels_of(train);
    result.class_weights = config.class_weighting ? balanced_class_weights(train_labels) : ClassWeights{};
    const LossConfig lc{config.ridge, result.class_weights};
    if (config.max_epochs == 0) {
        return result;
    }

    const AdamConfig adam{config.learning_rate, config.beta1, config.beta2, config.epsilon};
    AdamState state(static_cast<std::size_t>(params.weights.size()));
    std::mt19937_64 shuffle_rng(derive_seed(config.seed, kShuffleStream));
    EarlyStopping stopper(config.patience, config.min_delta);
    RealMatrix best = params.weights;
    std::vector<std::size_t> order = train;
    TrainHistory &history = result.history;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
            const std::size_t len = std::min(config.batch_size, order.size() - start);
            const BatchRef batch{ds.features, ds.labels, std::span<const std::size_t>(order).subspan(start, len)};
            GradientRecord g;
            try {
                g = loss_gradient(batch, params, gs, lc, config.threads);
            } catch (const NumericalError &e) {
                throw NumericalError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index) +
                                     ": " + e.what());
            } catch (const PreconditionError &e) {
                // a NaN/Inf Hamiltonian surfaces here first
                throw NumericalError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index) +
                                     ": " + e.what());
            }
            loss_sum += g.loss * static_cast<double>(len);
            adam_step({params.weights.data(), static_cast<std::size_t>(params.weights.size())},
                      {g.gradient.data(), static_cast<std::size_t>(g.gradient.size())}, state, adam);
            if (!params.weights.allFinite()) {
                throw NumericalError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index) +
                                     ": weights became non-finite after the update");
            }
        }
        const SplitEval v = evaluate_split(ds, val, params, gs, lc, config.threads);
        if (!std::isfinite(v.loss)) {
            throw NumericalError("epoch " + std::to_string(epoch) + ": validation loss is not finite");
        }
        const EpochRecord rec{epoch, loss_sum / static_cast<double>(order.size()), v.loss, v.macro_f1};
        history.epochs.push_back(rec);
        history.stopped_epoch = epoch;
        const bool stop = stopper.observe(epoch, v.loss);
        if (stopper.last_was_best()) {
            best = params.weights;
        }
        if (stop || (on_epoch && !on_epoch(rec))) {
            break;
        }
    }
    params.weights = best;
    history.best_epoch = stopper.best_epoch();

    if (config.tune_threshold) {
        const auto q1 = predict_q1(ds, val, params, gs, config.threads);
        params.decision_threshold = tune_threshold(q1, ds.labels_of(val));
    }
    return result;
}

} // namespace quditnn
