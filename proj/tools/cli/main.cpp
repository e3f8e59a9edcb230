// quditnn: train, evaluate and compare the qudit classifier and its baselines.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "experiment.hpp"
#include "quditnn/errors.hpp"
#include "quditnn/generators.hpp"

namespace fs = std::filesystem;
using namespace quditnn;

namespace {

constexpr int kExitSeedFailure = 1;
constexpr int kExitUsage = 2;

struct RunOptions {
    std::string config_path;
    std::map<std::string, std::string> overrides;
    std::vector<std::string> sets;
    bool quiet = false;
};

void add_run_options(CLI::App *cmd, RunOptions &o) {
    cmd->add_option("-c,--config", o.config_path, "Config file (key = value lines)");
    auto flag = [&](const char *name, const char *key, const char *help) {
        cmd->add_option_function<std::string>(
            name, [&o, key](const std::string &v) { o.overrides[key] = v; }, help);
    };
    flag("--dataset", "dataset", "Canonical Taiwan CSV");
    flag("--out", "output", "Output directory (default $QUDITNN_OUT_DIR, else runs)");
    flag("--seed-list", "seeds", "Seeds, e.g. 0,1,2 or 0..9");
    flag("--model", "model", "qnn | logreg | mlp");
    flag("--dim", "qnn.dim", "Qudit dimension");
    flag("--layers", "qnn.layers", "Number of layers");
    flag("--readout", "qnn.readout", "parity | first-two");
    flag("--importance-mode", "qnn.importance_mode", "signed-sum | mean-abs");
    flag("--input-map", "qnn.input_map", "identity | normal-cdf");
    flag("--poison-mode", "poison.mode", "train-and-test | test-only");
    flag("--poison-count", "poison.count", "Number of poisoned features");
    flag("--threads", "train.threads", "Worker threads for QNN gradients");
    cmd->add_option("--set", o.sets, "Extra config override key=value (repeatable)");
    cmd->add_flag("-q,--quiet", o.quiet, "Only print the summary");
}

ExperimentConfig resolve_config(const RunOptions &o) {
    ConfigDocument doc = o.config_path.empty() ? ConfigDocument{} : ConfigDocument::load(o.config_path);
    for (const auto &s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ParseError("--set expects key=value, got '" + s + "'");
        }
        auto trim = [](std::string t) {
            t.erase(0, t.find_first_not_of(" \t"));
            t.erase(t.find_last_not_of(" \t") + 1);
            return t;
        };
        doc.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    for (const auto &[k, v] : o.overrides) {
        doc.set(k, v);
    }
    auto config = ExperimentConfig::from_document(doc);
    config.output_dir = resolve_output_dir(config.output_dir);
    return config;
}

void print_summary(const MetricsReport &r, const std::string &path) {
    std::printf("%s %s: %zu/%zu seeds ok, %zu parameters\n", r.command.c_str(), r.model.c_str(),
                r.seeds.size() - r.failed_seeds().size(), r.seeds.size(), r.parameter_count);
    for (const char *m : {"macro_f1", "edit_distance", "wis", "random_wis"}) {
        if (auto s = r.aggregate(m)) {
            std::printf("  %-14s %.4f +/- %.4f (n=%zu)\n", m, s->mean, s->std, s->count);
        }
    }
    for (const auto &s : r.seeds) {
        if (!s.ok) {
            std::printf("  seed %llu failed: %s\n", static_cast<unsigned long long>(s.seed), s.error.c_str());
        }
    }
    std::printf("report: %s\n", path.c_str());
}

int run_command(const std::string &command, const RunOptions &o) {
    const ExperimentConfig config = resolve_config(o);
    Logger log;
    if (!o.quiet) {
        log = [](const std::string &line) { std::cerr << line << '\n'; };
    }
    MetricsReport report;
    std::string name = command + "_report.json";
    if (command == "train") {
        report = run_train(config, log);
    } else if (command == "evaluate") {
        report = run_evaluate(config, log);
    } else {
        report = run_poison_study(config, log);
        name = config.poison_count == 0 ? "poison_none_report.json"
                                        : "poison_" + std::string(to_string(config.poison_mode)) + "_report.json";
    }
    const std::string path = (fs::path(config.output_dir) / std::string(to_string(config.model)) / name).string();
    save_report(path, report);
    print_summary(report, path);
    return report.all_ok() ? 0 : kExitSeedFailure;
}

int report_command(const std::vector<std::string> &inputs, const std::string &csv_path,
                   const std::string &json_path) {
    std::vector<MetricsReport> reports;
    for (const auto &p : inputs) {
        reports.push_back(load_report(p));
    }
    const Comparison c = compare_reports(reports);
    std::cout << render_table(c);
    if (!csv_path.empty()) {
        std::ofstream(csv_path) << comparison_csv(c);
    }
    if (!json_path.empty()) {
        std::ofstream(json_path) << to_json(c);
    }
    return 0;
}

int convert_command(const std::string &in_path, const std::string &out_path) {
    std::ifstream in(in_path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + in_path + "'");
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + out_path + "'");
    }
    const std::size_t rows = convert_uci_export(in, out);
    out.close();
    const Dataset ds = load_taiwan(out_path);
    const auto fp = fingerprint(ds);
    std::printf("%zu rows, %zu positives, feature names %s\n", rows, fp.positives, fp.feature_name_hash.c_str());
    return 0;
}

int check_algebra_command(const std::vector<std::size_t> &dims) {
    int status = 0;
    for (auto d : dims) {
        const auto r = check_algebra(build_generators(d));
        const bool ok = r.count == d * d - 1 && r.max_abs_trace < 1e-12 && r.max_offdiag_overlap < 1e-12 &&
                        r.max_norm_deviation < 1e-12 && r.max_hermitian_defect < 1e-15;
        std::printf("d=%zu: %zu generators (%zu sym, %zu antisym, %zu diag), max|Tr G|=%.2e, "
                    "max|Tr GiGj|=%.2e, max|Tr G^2-2|=%.2e, hermitian defect %.2e: %s\n",
                    d, r.count, r.symmetric, r.antisymmetric, r.diagonal, r.max_abs_trace, r.max_offdiag_overlap,
                    r.max_norm_deviation, r.max_hermitian_defect, ok ? "ok" : "FAILED");
        status |= ok ? 0 : 1;
    }
    return status;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Single-qudit neural network for credit-default classification"};
    app.require_subcommand(1);

    RunOptions train_opts;
    RunOptions eval_opts;
    RunOptions poison_opts;
    auto *train = app.add_subcommand("train", "Train one model per seed and write a metrics report");
    add_run_options(train, train_opts);
    auto *evaluate = app.add_subcommand("evaluate", "Re-evaluate saved models on the test split");
    add_run_options(evaluate, eval_opts);
    auto *poison = app.add_subcommand("poison-study", "Poison features and score importance rankings (WIS)");
    add_run_options(poison, poison_opts);

    std::vector<std::string> report_inputs;
    std::string csv_path;
    std::string json_path;
    auto *report = app.add_subcommand("report", "Aggregate metrics reports into a comparison table");
    report->add_option("reports", report_inputs, "Metrics report JSON files")->required();
    report->add_option("--csv", csv_path, "Also write the table as CSV");
    report->add_option("--json", json_path, "Also write the table as JSON");

    std::string convert_in;
    std::string convert_out;
    auto *convert = app.add_subcommand("convert-dataset", "Convert the UCI CSV export to the canonical CSV");
    convert->add_option("input", convert_in, "UCI export (CSV)")->required();
    convert->add_option("output", convert_out, "Canonical CSV")->required();

    std::vector<std::size_t> dims{2, 3, 4, 5, 6, 8};
    auto *algebra = app.add_subcommand("check-algebra", "Verify trace and orthogonality of the su(d) generators");
    algebra->add_option("--dim", dims, "Dimensions to check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (*train) {
            return run_command("train", train_opts);
        }
        if (*evaluate) {
            return run_command("evaluate", eval_opts);
        }
        if (*poison) {
            return run_command("poison-study", poison_opts);
        }
        if (*report) {
            return report_command(report_inputs, csv_path, json_path);
        }
        if (*convert) {
            return convert_command(convert_in, convert_out);
        }
        if (*algebra) {
            return check_algebra_command(dims);
        }
    } catch (const ParseError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const StructuralError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSeedFailure;
    }
    return kExitUsage;
}
