#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "quditnn/errors.hpp"
#include "quditnn/generators.hpp"

namespace quditnn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSplitStream = 21;
constexpr std::uint64_t kPoisonIndexStream = 22;
constexpr std::uint64_t kPoisonNoiseStream = 23;
constexpr std::uint64_t kRandomWisStream = 24;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::uint64_t> &v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? "," : "") + std::to_string(v[i]);
    }
    return s;
}

std::map<std::string, std::string> parse_lines(const std::string &text) {
    std::istringstream in(text);
    auto doc = ConfigDocument::parse(in);
    return doc.values();
}

} // namespace

std::string_view to_string(ModelKind k) {
    switch (k) {
    case ModelKind::Qnn:
        return "qnn";
    case ModelKind::LogReg:
        return "logreg";
    case ModelKind::Mlp:
        return "mlp";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view s) {
    if (s == "qnn") {
        return ModelKind::Qnn;
    }
    if (s == "logreg" || s == "lr") {
        return ModelKind::LogReg;
    }
    if (s == "mlp" || s == "nn") {
        return ModelKind::Mlp;
    }
    throw StructuralError("unknown model '" + std::string(s) + "' (expected qnn|logreg|mlp)");
}

std::string_view to_string(EditVariant v) {
    return v == EditVariant::Levenshtein ? "levenshtein" : "optimal-string-alignment";
}

EditVariant parse_edit_variant(std::string_view s) {
    if (s == "levenshtein") {
        return EditVariant::Levenshtein;
    }
    if (s == "optimal-string-alignment" || s == "osa" || s == "damerau") {
        return EditVariant::OptimalStringAlignment;
    }
    throw StructuralError("unknown edit-distance variant '" + std::string(s) + "'");
}

ExperimentConfig ExperimentConfig::from_document(ConfigDocument &doc) {
    ExperimentConfig c;
    if (auto v = doc.take_string("model")) {
        c.model = parse_model_kind(*v);
    }
    c.dataset = doc.take_string("dataset").value_or(c.dataset);
    c.seeds = doc.take_uint_list("seeds").value_or(c.seeds);
    if (auto v = doc.take_string("split.ratios")) {
        std::istringstream in(*v);
        std::string cell;
        std::size_t i = 0;
        while (std::getline(in, cell, ',')) {
            if (i >= 3) {
                throw ParseError("split.ratios needs exactly three values");
            }
            c.split_ratios[i++] = parse_double(cell);
        }
        if (i != 3) {
            throw ParseError("split.ratios needs exactly three values");
        }
    }
    c.dim = doc.take_uint("qnn.dim").value_or(c.dim);
    c.layers = doc.take_uint("qnn.layers").value_or(c.layers);
    if (auto v = doc.take_string("qnn.readout")) {
        c.readout = parse_readout(*v);
    }
    if (auto v = doc.take_string("qnn.input_map")) {
        c.input_map = parse_input_map(*v);
    }
    if (auto v = doc.take_string("qnn.importance_mode")) {
        c.importance_mode = parse_importance_mode(*v);
    }
    c.train = TrainConfig::from_document(doc);
    c.logreg = LogRegConfig::from_document(doc);
    c.mlp = MlpConfig::from_document(doc);
    c.poison_count = doc.take_uint("poison.count").value_or(c.poison_count);
    if (auto v = doc.take_string("poison.mode")) {
        c.poison_mode = parse_poison_mode(*v);
    }
    c.wis_k = doc.take_uint("poison.wis_k").value_or(c.wis_k);
    c.random_wis_trials = doc.take_uint("poison.random_trials").value_or(c.random_wis_trials);
    if (auto v = doc.take_string("metrics.edit_variant")) {
        c.edit_variant = parse_edit_variant(*v);
    }
    c.output_dir = doc.take_string("output").value_or(c.output_dir);
    doc.reject_unused();
    return c;
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream raw;
    raw << "model = " << to_string(model) << '\n'
        << "dataset = " << dataset << '\n'
        << "seeds = " << join(seeds) << '\n'
        << "split.ratios = " << fmt(split_ratios[0]) << ',' << fmt(split_ratios[1]) << ','
        << fmt(split_ratios[2]) << '\n'
        << "qnn.dim = " << dim << '\n'
        << "qnn.layers = " << layers << '\n'
        << "qnn.readout = " << to_string(readout) << '\n'
        << "qnn.importance_mode = " << to_string(importance_mode) << '\n'
        << "qnn.input_map = " << to_string(input_map) << '\n'
        << "poison.count = " << poison_count << '\n'
        << "poison.mode = " << to_string(poison_mode) << '\n'
        << "poison.wis_k = " << wis_k << '\n'
        << "poison.random_trials = " << random_wis_trials << '\n'
        << "metrics.edit_variant = " << to_string(edit_variant) << '\n'
        << "output = " << output_dir << '\n';
    train.write(raw);
    logreg.write(raw);
    mlp.write(raw);
    std::string out;
    for (const auto &[k, v] : parse_lines(raw.str())) {
        out += k + " = " + v + "\n";
    }
    return out;
}

void ExperimentConfig::validate(std::size_t num_features) const {
    if (seeds.empty()) {
        throw StructuralError("experiment needs at least one seed");
    }
    if (model == ModelKind::Qnn) {
        if (dim < 2) {
            throw StructuralError("qudit dimension must be >= 2");
        }
        if (layers < 1) {
            throw StructuralError("layer count must be >= 1");
        }
        if (dim * dim - 1 < num_features) {
            throw StructuralError("d = " + std::to_string(dim) + " gives d^2-1 = " + std::to_string(dim * dim - 1) +
                                  " generators, fewer than the " + std::to_string(num_features) + " features");
        }
    }
    if (poison_count > num_features) {
        throw StructuralError("cannot poison " + std::to_string(poison_count) + " of " +
                              std::to_string(num_features) + " features");
    }
    train.validate();
    logreg.validate();
    mlp.validate();
}

std::string resolve_output_dir(const std::string &explicit_dir) {
    if (!explicit_dir.empty()) {
        return explicit_dir;
    }
    if (const char *env = std::getenv("QUDITNN_OUT_DIR"); env && *env) {
        return env;
    }
    return "runs";
}

Summary summarize(const std::vector<double> &values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) {
        return s;
    }
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    s.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) {
        sq += (v - s.mean) * (v - s.mean);
    }
    s.std = std::sqrt(sq / static_cast<double>(values.size()));
    return s;
}

std::vector<std::uint64_t> MetricsReport::failed_seeds() const {
    std::vector<std::uint64_t> out;
    for (const auto &s : seeds) {
        if (!s.ok) {
            out.push_back(s.seed);
        }
    }
    return out;
}

std::optional<Summary> MetricsReport::aggregate(std::string_view metric) const {
    std::vector<double> values;
    for (const auto &s : seeds) {
        if (!s.ok) {
            continue;
        }
        if (metric == "macro_f1") {
            values.push_back(s.macro_f1);
        } else if (metric == "edit_distance" && s.edit_distance) {
            values.push_back(*s.edit_distance);
        } else if (metric == "wis" && s.wis) {
            values.push_back(*s.wis);
        } else if (metric == "random_wis" && s.random_wis) {
            values.push_back(*s.random_wis);
        }
    }
    if (values.empty()) {
        return std::nullopt;
    }
    return summarize(values);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json summary_json(const Summary &s) { return json{{"mean", s.mean}, {"std", s.std}, {"count", s.count}}; }

Summary summary_from(const json &j) {
    return Summary{j.at("mean").get<double>(), j.at("std").get<double>(), j.at("count").get<std::size_t>()};
}

constexpr std::array<std::string_view, 4> kMetrics = {"macro_f1", "edit_distance", "wis", "random_wis"};

} // namespace

std::string to_json(const MetricsReport &r) {
    json j;
    j["command"] = r.command;
    j["model"] = r.model;
    json cfg = json::object();
    for (const auto &[k, v] : parse_lines(r.config_text)) {
        cfg[k] = v;
    }
    j["config"] = cfg;
    j["dataset"] = {{"path", r.dataset_path},
                    {"rows", r.fingerprint.rows},
                    {"positives", r.fingerprint.positives},
                    {"feature_name_hash", r.fingerprint.feature_name_hash}};
    json modes = json::object();
    if (!r.readout.empty()) {
        modes["readout"] = r.readout;
    }
    if (!r.importance_mode.empty()) {
        modes["importance_mode"] = r.importance_mode;
    }
    if (!r.input_map.empty()) {
        modes["input_map"] = r.input_map;
    }
    if (!r.poison_mode.empty()) {
        modes["poison_mode"] = r.poison_mode;
    }
    if (!r.edit_variant.empty()) {
        modes["edit_variant"] = r.edit_variant;
    }
    j["modes"] = modes;
    j["parameter_count"] = r.parameter_count;
    if (r.wis_k > 0) {
        j["wis_k"] = r.wis_k;
    }
    json rows = json::array();
    for (const auto &s : r.seeds) {
        json row{{"seed", s.seed}, {"status", s.ok ? "ok" : "failed"}};
        if (!s.ok) {
            row["error"] = s.error;
        } else {
            row["macro_f1"] = s.macro_f1;
            if (s.edit_distance) {
                row["edit_distance"] = *s.edit_distance;
            }
            if (s.wis) {
                row["wis"] = *s.wis;
            }
            if (s.random_wis) {
                row["random_wis"] = *s.random_wis;
            }
            if (!s.poisoned.empty()) {
                row["poisoned_features"] = s.poisoned;
            }
            if (s.stopped_epoch > 0) {
                row["best_epoch"] = s.best_epoch;
                row["stopped_epoch"] = s.stopped_epoch;
            }
        }
        rows.push_back(row);
    }
    j["seeds"] = rows;
    json agg = json::object();
    for (auto m : kMetrics) {
        if (auto s = r.aggregate(m)) {
            agg[std::string(m)] = summary_json(*s);
        }
    }
    j["aggregate"] = agg;
    j["failed_seeds"] = r.failed_seeds();
    if (!r.poison_mode.empty()) {
        j["notes"] = json::array({"WIS normalizes the top-K importance scores to unit sum; informative set = "
                                  "non-poisoned features"});
    }
    return j.dump(2) + "\n";
}

MetricsReport report_from_json(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        throw ParseError(std::string("report is not valid JSON: ") + e.what());
    }
    try {
        MetricsReport r;
        r.command = j.at("command").get<std::string>();
        r.model = j.at("model").get<std::string>();
        for (const auto &[k, v] : j.at("config").items()) {
            r.config_text += k + " = " + v.get<std::string>() + "\n";
        }
        const auto &d = j.at("dataset");
        r.dataset_path = d.at("path").get<std::string>();
        r.fingerprint = {d.at("rows").get<std::size_t>(), d.at("positives").get<std::size_t>(),
                         d.at("feature_name_hash").get<std::string>()};
        const auto &modes = j.at("modes");
        r.readout = modes.value("readout", "");
        r.importance_mode = modes.value("importance_mode", "");
        r.input_map = modes.value("input_map", "");
        r.poison_mode = modes.value("poison_mode", "");
        r.edit_variant = modes.value("edit_variant", "");
        r.parameter_count = j.at("parameter_count").get<std::size_t>();
        r.wis_k = j.value("wis_k", std::size_t{0});
        for (const auto &row : j.at("seeds")) {
            SeedResult s;
            s.seed = row.at("seed").get<std::uint64_t>();
            s.ok = row.at("status").get<std::string>() == "ok";
            if (!s.ok) {
                s.error = row.value("error", "");
            } else {
                s.macro_f1 = row.at("macro_f1").get<double>();
                if (row.contains("edit_distance")) {
                    s.edit_distance = row["edit_distance"].get<double>();
                }
                if (row.contains("wis")) {
                    s.wis = row["wis"].get<double>();
                }
                if (row.contains("random_wis")) {
                    s.random_wis = row["random_wis"].get<double>();
                }
                if (row.contains("poisoned_features")) {
                    s.poisoned = row["poisoned_features"].get<std::vector<std::size_t>>();
                }
                s.best_epoch = row.value("best_epoch", std::size_t{0});
                s.stopped_epoch = row.value("stopped_epoch", std::size_t{0});
            }
            r.seeds.push_back(std::move(s));
        }
        return r;
    } catch (const json::exception &e) {
        throw ParseError(std::string("report is missing fields: ") + e.what());
    }
}

void save_report(const std::string &path, const MetricsReport &report) {
    const fs::path p(path);
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write report '" + path + "'");
    }
    out << to_json(report);
}

MetricsReport load_report(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open report '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return report_from_json(ss.str());
}

// ---------------------------------------------------------------------------
// Runs

namespace {

struct TrainedModel {
    ModelKind kind = ModelKind::Qnn;
    ModelParams qnn;
    LogRegModel logreg;
    MlpModel mlp;
    TrainHistory history;

    std::size_t parameter_count() const {
        switch (kind) {
        case ModelKind::Qnn:
            return qnn.parameter_count();
        case ModelKind::LogReg:
            return logreg.parameter_count();
        case ModelKind::Mlp:
            return mlp.parameter_count();
        }
        return 0;
    }

    std::size_t num_features() const {
        switch (kind) {
        case ModelKind::Qnn:
            return qnn.num_features();
        case ModelKind::LogReg:
            return static_cast<std::size_t>(logreg.coefficients.size());
        case ModelKind::Mlp:
            return mlp.sizes.front();
        }
        return 0;
    }
};

class Runner {
  public:
    Runner(const ExperimentConfig &config, const Dataset &raw, const Logger &log)
        : c_(config), raw_(raw), log_(log) {
        raw_.validate();
        c_.validate(raw_.cols());
        c_.output_dir = resolve_output_dir(c_.output_dir);
        if (c_.model == ModelKind::Qnn) {
            gs_ = build_generators(c_.dim);
        }
    }

    MetricsReport report(const std::string &command, bool poisoning) const {
        MetricsReport r;
        r.command = command;
        r.model = std::string(to_string(c_.model));
        r.config_text = c_.to_text();
        r.dataset_path = c_.dataset;
        r.fingerprint = fingerprint(raw_);
        if (c_.model == ModelKind::Qnn) {
            r.readout = std::string(to_string(c_.readout));
            r.importance_mode = std::string(to_string(c_.importance_mode));
            r.input_map = std::string(to_string(c_.input_map));
            r.edit_variant = std::string(to_string(c_.edit_variant));
        }
        if (poisoning && c_.poison_count > 0) {
            r.poison_mode = std::string(to_string(c_.poison_mode));
            r.wis_k = wis_k();
        }
        return r;
    }

    template <class Fn> MetricsReport for_each_seed(MetricsReport r, Fn &&fn) {
        for (auto seed : c_.seeds) {
            SeedResult s;
            s.seed = seed;
            try {
                fn(seed, s);
                s.ok = true;
                say("seed " + std::to_string(seed) + ": macro-F1 " + fmt4(s.macro_f1) +
                    (s.edit_distance ? ", edit distance " + fmt4(*s.edit_distance) : "") +
                    (s.wis ? ", WIS " + fmt4(*s.wis) : ""));
            } catch (const std::exception &e) {
                s = SeedResult{};
                s.seed = seed;
                s.error = e.what();
                say("seed " + std::to_string(seed) + " failed: " + s.error);
            }
            r.seeds.push_back(std::move(s));
        }
        return r;
    }

    Dataset prepare(std::uint64_t seed) const {
        return standardize(stratified_split(raw_, c_.split_ratios, derive_seed(seed, kSplitStream)));
    }

    TrainedModel train(const Dataset &ds, std::uint64_t seed) const {
        TrainedModel m;
        m.kind = c_.model;
        const std::string tag = "seed " + std::to_string(seed);
        auto progress = [&](const EpochRecord &e) {
            say(tag + " epoch " + std::to_string(e.epoch) + ": train " + fmt4(e.train_loss) + ", val " +
                fmt4(e.val_loss) + ", val F1 " + fmt4(e.val_macro_f1));
            return true;
        };
        switch (c_.model) {
        case ModelKind::Qnn: {
            TrainConfig tc = c_.train;
            tc.seed = seed;
            QnnArchitecture arch{c_.dim, c_.layers, c_.readout, std::nullopt, c_.input_map};
            auto r = train_qnn(ds, arch, tc, gs_, progress);
            m.qnn = std::move(r.params);
            m.history = std::move(r.history);
            break;
        }
        case ModelKind::LogReg: {
            LogRegConfig lc = c_.logreg;
            lc.seed = seed;
            auto fit = train_logreg(ds, lc);
            m.logreg = std::move(fit.model);
            break;
        }
        case ModelKind::Mlp: {
            MlpConfig mc = c_.mlp;
            mc.seed = seed;
            auto fit = train_mlp(ds, mc, progress);
            m.mlp = std::move(fit.model);
            m.history = std::move(fit.history);
            break;
        }
        }
        return m;
    }

    std::optional<RankedFeatureList> ranking(const TrainedModel &m) const {
        switch (m.kind) {
        case ModelKind::Qnn:
            return feature_importance(m.qnn, c_.importance_mode);
        case ModelKind::LogReg:
            return logreg_ranking(m.logreg);
        case ModelKind::Mlp:
            return std::nullopt;
        }
        return std::nullopt;
    }

    double test_f1(const TrainedModel &m, const Dataset &ds) const {
        if (m.num_features() != ds.cols()) {
            throw StructuralError("model expects " + std::to_string(m.num_features()) + " features, dataset has " +
                                  std::to_string(ds.cols()));
        }
        const auto rows = ds.indices(Split::Test);
        if (rows.empty()) {
            throw StructuralError("test split is empty");
        }
        std::vector<int> pred(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const std::span<const double> x(ds.features.row(static_cast<Eigen::Index>(rows[i])).data(), ds.cols());
            switch (m.kind) {
            case ModelKind::Qnn:
                pred[i] = predict(x, m.qnn, gs_);
                break;
            case ModelKind::LogReg:
                pred[i] = m.logreg.predict(x);
                break;
            case ModelKind::Mlp:
                pred[i] = m.mlp.predict(x);
                break;
            }
        }
        return macro_f1(pred, ds.labels_of(rows));
    }

    // QNN rankings are compared with a logistic regression fitted to the same split.
    std::optional<double> edit_distance_to_logreg(const TrainedModel &m, const Dataset &ds) const {
        if (m.kind != ModelKind::Qnn) {
            return std::nullopt;
        }
        const auto lr = train_logreg(ds, c_.logreg);
        return static_cast<double>(edit_distance(*ranking(m), logreg_ranking(lr.model), c_.edit_variant));
    }

    fs::path dir(const std::string &sub = {}) const {
        fs::path p = fs::path(c_.output_dir) / std::string(to_string(c_.model));
        if (!sub.empty()) {
            p /= sub;
        }
        return p;
    }

    static fs::path seed_file(const fs::path &d, std::uint64_t seed, const std::string &suffix) {
        return d / ("seed_" + std::to_string(seed) + suffix);
    }

    void save(const TrainedModel &m, const Dataset &ds, const fs::path &d, std::uint64_t seed) const {
        fs::create_directories(d);
        Record rec;
        switch (m.kind) {
        case ModelKind::Qnn:
            rec = to_record(m.qnn);
            break;
        case ModelKind::LogReg:
            rec = to_record(m.logreg);
            break;
        case ModelKind::Mlp:
            rec = to_record(m.mlp);
            break;
        }
        save_record(seed_file(d, seed, ".model").string(), rec);
        if (m.kind != ModelKind::LogReg) {
            std::ofstream h(seed_file(d, seed, ".history.csv"));
            m.history.write_csv(h);
        }
        if (auto r = ranking(m)) {
            std::ofstream out(seed_file(d, seed, ".ranking.csv"));
            write_ranking_csv(out, *r, ds.feature_names);
        }
        if (m.kind == ModelKind::LogReg) {
            std::ofstream out(seed_file(d, seed, ".coefficients.csv"));
            out << "feature_id,feature_name,coefficient\n";
            for (std::size_t f = 0; f < ds.cols(); ++f) {
                out << f << ',' << ds.feature_names[f] << ',' << fmt(m.logreg.coefficients(static_cast<Eigen::Index>(f)))
                    << '\n';
            }
            out << "-1,intercept," << fmt(m.logreg.intercept) << '\n';
        }
    }

    TrainedModel load(const fs::path &d, std::uint64_t seed) const {
        const fs::path path = seed_file(d, seed, ".model");
        if (!fs::exists(path)) {
            throw Error("model file '" + path.string() + "' not found; run 'train' first");
        }
        const Record rec = load_record(path.string());
        TrainedModel m;
        m.kind = c_.model;
        switch (c_.model) {
        case ModelKind::Qnn:
            m.qnn = model_from_record(rec);
            if (m.qnn.dim != gs_.dim()) {
                throw StructuralError("model file has d = " + std::to_string(m.qnn.dim) + ", config has d = " +
                                      std::to_string(gs_.dim()));
            }
            break;
        case ModelKind::LogReg:
            m.logreg = logreg_from_record(rec);
            break;
        case ModelKind::Mlp:
            m.mlp = mlp_from_record(rec);
            break;
        }
        return m;
    }

    std::size_t wis_k() const { return c_.wis_k == 0 ? raw_.cols() - c_.poison_count : c_.wis_k; }

    const ExperimentConfig &config() const { return c_; }
    const Dataset &raw() const { return raw_; }

  private:
    static std::string fmt4(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", v);
        return buf;
    }
    void say(const std::string &line) const {
        if (log_) {
            log_(line);
        }
    }

    ExperimentConfig c_;
    const Dataset &raw_;
    Logger log_;
    GeneratorSet gs_;
};

Dataset load_config_dataset(const ExperimentConfig &c) {
    if (c.dataset.empty()) {
        throw StructuralError("no dataset given (config key 'dataset')");
    }
    return load_taiwan(c.dataset);
}

} // namespace

MetricsReport run_train(const ExperimentConfig &config, const Dataset &raw, const Logger &log) {
    Runner run(config, raw, log);
    MetricsReport report = run.report("train", false);
    report = run.for_each_seed(std::move(report), [&](std::uint64_t seed, SeedResult &s) {
        const Dataset ds = run.prepare(seed);
        const TrainedModel m = run.train(ds, seed);
        run.save(m, ds, run.dir(), seed);
        s.macro_f1 = run.test_f1(m, ds);
        s.edit_distance = run.edit_distance_to_logreg(m, ds);
        s.best_epoch = m.history.best_epoch;
        s.stopped_epoch = m.history.stopped_epoch;
    });
    report.parameter_count = 0;
    if (config.model == ModelKind::Qnn) {
        report.parameter_count = config.layers * (config.dim * config.dim - 1);
    } else if (config.model == ModelKind::LogReg) {
        report.parameter_count = raw.cols() + 1;
    } else {
        report.parameter_count = MlpModel::make(raw.cols(), config.mlp.hidden, config.mlp.activation).parameter_count();
    }
    return report;
}

MetricsReport run_evaluate(const ExperimentConfig &config, const Dataset &raw, const Logger &log) {
    Runner run(config, raw, log);
    MetricsReport report = run.report("evaluate", false);
    std::size_t params = 0;
    report = run.for_each_seed(std::move(report), [&](std::uint64_t seed, SeedResult &s) {
        const Dataset ds = run.prepare(seed);
        const TrainedModel m = run.load(run.dir(), seed);
        s.macro_f1 = run.test_f1(m, ds);
        s.edit_distance = run.edit_distance_to_logreg(m, ds);
        params = m.parameter_count();
    });
    report.parameter_count = params;
    return report;
}

MetricsReport run_poison_study(const ExperimentConfig &config, const Dataset &raw, const Logger &log) {
    Runner run(config, raw, log);
    const auto &c = run.config();
    MetricsReport report = run.report("poison-study", true);
    std::size_t params = 0;
    const fs::path out_dir = run.dir(c.poison_count > 0 ? "poison_" + std::string(to_string(c.poison_mode)) : "poison_none");
    report = run.for_each_seed(std::move(report), [&](std::uint64_t seed, SeedResult &s) {
        const Dataset clean = run.prepare(seed);
        if (c.poison_count == 0) {
            const TrainedModel m = run.train(clean, seed);
            run.save(m, clean, out_dir, seed);
            s.macro_f1 = run.test_f1(m, clean);
            params = m.parameter_count();
            return;
        }
        std::mt19937_64 index_rng(derive_seed(seed, kPoisonIndexStream));
        PoisonSpec spec;
        spec.indices = draw_poison_indices(clean.cols(), c.poison_count, index_rng);
        spec.mode = c.poison_mode;
        spec.seed = derive_seed(seed, kPoisonNoiseStream);
        const Dataset poisoned = poison(clean, spec);

        TrainedModel m;
        if (c.poison_mode == PoisonMode::TrainAndTest) {
            m = run.train(poisoned, seed);
        } else if (fs::exists(Runner::seed_file(run.dir(), seed, ".model"))) {
            m = run.load(run.dir(), seed);
        } else {
            m = run.train(clean, seed);
        }
        run.save(m, poisoned, out_dir, seed);
        params = m.parameter_count();
        s.macro_f1 = run.test_f1(m, poisoned);
        s.poisoned = spec.indices;
        s.best_epoch = m.history.best_epoch;
        s.stopped_epoch = m.history.stopped_epoch;

        std::vector<std::size_t> informative;
        for (std::size_t f = 0; f < clean.cols(); ++f) {
            if (!std::binary_search(spec.indices.begin(), spec.indices.end(), f)) {
                informative.push_back(f);
            }
        }
        const std::size_t k = run.wis_k();
        if (auto r = run.ranking(m)) {
            s.wis = wis(*r, informative, k);
        }
        s.random_wis = random_wis_baseline(clean.cols(), informative, k, c.random_wis_trials,
                                           derive_seed(seed, kRandomWisStream));
    });
    report.parameter_count = params;
    return report;
}

MetricsReport run_train(const ExperimentConfig &config, const Logger &log) {
    const Dataset raw = load_config_dataset(config);
    return run_train(config, raw, log);
}

MetricsReport run_evaluate(const ExperimentConfig &config, const Logger &log) {
    const Dataset raw = load_config_dataset(config);
    return run_evaluate(config, raw, log);
}

MetricsReport run_poison_study(const ExperimentConfig &config, const Logger &log) {
    const Dataset raw = load_config_dataset(config);
    return run_poison_study(config, raw, log);
}

// ---------------------------------------------------------------------------
// Comparison tables

namespace {

constexpr const char *kReferenceSource = "published reference, not reproduced";

ComparisonRow forest_reference(bool poisoning) {
    ComparisonRow row;
    row.model = "random-forest";
    row.source = kReferenceSource;
    row.seeds = 10;
    if (poisoning) {
        row.macro_f1 = Summary{0.614, 0.027, 10};
        row.wis = Summary{0.953, 0.026, 10};
        row.poison_mode = "unstated";
    } else {
        row.parameter_count = 3927;
        row.macro_f1 = Summary{0.647, 0.008, 10};
        row.edit_distance = Summary{21.10, 0.99, 10};
    }
    return row;
}

std::string fingerprint_text(const DatasetFingerprint &f) {
    return std::to_string(f.rows) + " rows, " + std::to_string(f.positives) + " positives, names " +
           f.feature_name_hash;
}

std::string cell(const std::optional<Summary> &s, int digits) {
    if (!s) {
        return "-";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f +/- %.*f", digits, s->mean, digits, s->std);
    return buf;
}

} // namespace

Comparison compare_reports(const std::vector<MetricsReport> &reports) {
    if (reports.empty()) {
        throw StructuralError("report needs at least one input report");
    }
    Comparison c;
    c.fingerprint = fingerprint_text(reports.front().fingerprint);
    bool any_poison = false;
    bool any_clean = false;
    for (const auto &r : reports) {
        if (!(r.fingerprint == reports.front().fingerprint)) {
            throw StructuralError("reports come from different datasets: [" + fingerprint_text(r.fingerprint) +
                                  "] vs [" + c.fingerprint + "]; refusing to compare");
        }
        ComparisonRow row;
        row.model = r.model;
        row.source = "reproduced";
        row.seeds = r.seeds.size() - r.failed_seeds().size();
        row.parameter_count = r.parameter_count;
        row.macro_f1 = r.aggregate("macro_f1");
        row.edit_distance = r.aggregate("edit_distance");
        row.wis = r.aggregate("wis");
        row.random_wis = r.aggregate("random_wis");
        row.poison_mode = r.poison_mode;
        (r.poison_mode.empty() ? any_clean : any_poison) = true;
        c.rows.push_back(std::move(row));
    }
    if (reports.size() > 1) {
        if (any_clean) {
            c.rows.push_back(forest_reference(false));
        }
        if (any_poison) {
            c.rows.push_back(forest_reference(true));
        }
    }
    return c;
}

std::string render_table(const Comparison &c) {
    const std::vector<std::string> header{"model",         "source", "seeds",      "params",
                                          "macro-F1",      "edit distance", "WIS", "random WIS",
                                          "poison mode"};
    std::vector<std::vector<std::string>> cells{header};
    for (const auto &r : c.rows) {
        cells.push_back({r.model, r.source, std::to_string(r.seeds),
                         r.parameter_count ? std::to_string(*r.parameter_count) : "-", cell(r.macro_f1, 4),
                         cell(r.edit_distance, 2), cell(r.wis, 3), cell(r.random_wis, 3),
                         r.poison_mode.empty() ? "-" : r.poison_mode});
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto &row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            width[i] = std::max(width[i], row[i].size());
        }
    }
    std::string out = "dataset: " + c.fingerprint + "\n";
    for (std::size_t r = 0; r < cells.size(); ++r) {
        std::string line;
        for (std::size_t i = 0; i < cells[r].size(); ++i) {
            std::string v = cells[r][i];
            v.resize(width[i], ' ');
            line += (i ? " | " : "") + v;
        }
        while (!line.empty() && line.back() == ' ') {
            line.pop_back();
        }
        out += line + "\n";
        if (r == 0) {
            std::string rule;
            for (std::size_t i = 0; i < width.size(); ++i) {
                rule += (i ? "-+-" : "") + std::string(width[i], '-');
            }
            out += rule + "\n";
        }
    }
    return out;
}

std::string comparison_csv(const Comparison &c) {
    std::string out = "model,source,seeds,params,macro_f1_mean,macro_f1_std,edit_distance_mean,edit_distance_std,"
                      "wis_mean,wis_std,random_wis_mean,random_wis_std,poison_mode\n";
    auto pair = [](const std::optional<Summary> &s) { return s ? fmt(s->mean) + "," + fmt(s->std) : std::string(","); };
    for (const auto &r : c.rows) {
        out += r.model + "," + r.source + "," + std::to_string(r.seeds) + "," +
               (r.parameter_count ? std::to_string(*r.parameter_count) : "") + "," + pair(r.macro_f1) + "," +
               pair(r.edit_distance) + "," + pair(r.wis) + "," + pair(r.random_wis) + "," + r.poison_mode + "\n";
    }
    return out;
}

std::string to_json(const Comparison &c) {
    json rows = json::array();
    for (const auto &r : c.rows) {
        json row{{"model", r.model}, {"source", r.source}, {"seeds", r.seeds}, {"poison_mode", r.poison_mode}};
        if (r.parameter_count) {
            row["parameter_count"] = *r.parameter_count;
        }
        const std::pair<const char *, const std::optional<Summary> *> metrics[] = {
            {"macro_f1", &r.macro_f1}, {"edit_distance", &r.edit_distance}, {"wis", &r.wis},
            {"random_wis", &r.random_wis}};
        for (const auto &[name, s] : metrics) {
            if (*s) {
                row[name] = summary_json(**s);
            }
        }
        rows.push_back(row);
    }
    return json{{"dataset", c.fingerprint}, {"rows", rows}}.dump(2) + "\n";
}

Comparison comparison_from_json(const std::string &text) {
    try {
        const json j = json::parse(text);
        Comparison c;
        c.fingerprint = j.at("dataset").get<std::string>();
        for (const auto &row : j.at("rows")) {
            ComparisonRow r;
            r.model = row.at("model").get<std::string>();
            r.source = row.at("source").get<std::string>();
            r.seeds = row.at("seeds").get<std::size_t>();
            r.poison_mode = row.value("poison_mode", "");
            if (row.contains("parameter_count")) {
                r.parameter_count = row["parameter_count"].get<std::size_t>();
            }
            if (row.contains("macro_f1")) {
                r.macro_f1 = summary_from(row["macro_f1"]);
            }
            if (row.contains("edit_distance")) {
                r.edit_distance = summary_from(row["edit_distance"]);
            }
            if (row.contains("wis")) {
                r.wis = summary_from(row["wis"]);
            }
            if (row.contains("random_wis")) {
                r.random_wis = summary_from(row["random_wis"]);
            }
            c.rows.push_back(std::move(r));
        }
        return c;
    } catch (const json::exception &e) {
        throw ParseError(std::string("comparison JSON is malformed: ") + e.what());
    }
}

} // namespace quditnn
