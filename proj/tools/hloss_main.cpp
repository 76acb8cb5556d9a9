// hloss: command-line front end for hierarchical losses and metrics.
//
// Exit codes: 0 success, 1 verification or numerical failure, 2 input error.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hloss/errors.hpp"
#include "hloss/format.hpp"
#include "hloss/report_io.hpp"
#include "hloss/trainer.hpp"
#include "hloss/tree_io.hpp"
#include "hloss/verify.hpp"
#include "hloss/weighting.hpp"

namespace fs = std::filesystem;
using namespace hloss;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;

std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct Common {
    std::string tree;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 1;
    bool full_precision = false;
};

struct WeightsArgs {
    std::string scheme = "exponential";
    double q = 1.0;
    double alpha = 0.1;
    bool raw = false;
};

struct SynthArgs {
    int per_class = 10;
    int dim = 8;
    double spread = 1.0;
};

struct TrainArgs {
    std::string data;
    std::string loss = "hier";
    double q = 0.9;
    double alpha = 0.1;
    int epochs = 100;
    double lr = 0.1;
    int batch = 16;
    double eval_q = 1.0;
};

struct EvalArgs {
    std::string data;
    std::string model;
    std::string loss = "hier";
    double q = 0.9;
    double alpha = 0.1;
    double eval_q = 1.0;
};

struct VerifyArgs {
    std::string scale = "quick";
    bool include_naive = false;
    bool corrupt = false;
};

void warn_degenerate_q(double q) {
    if (q == 0.0) {
        std::cerr << "warning: q = 0 puts the whole budget on the top level; "
                     "every class below a superclass gets weight 0\n";
    }
}

void write_output(const fs::path& dir, const std::string& name, const RunManifest& manifest,
                  const std::string& body) {
    write_text_file(dir / name, manifest_line(manifest) + body);
    std::cerr << "wrote " << (dir / name).string() << '\n';
}

RunManifest base_manifest(const std::string& subcommand, const Common& c) {
    RunManifest m;
    m.subcommand = subcommand;
    if (!c.tree.empty()) m.inputs["tree"] = c.tree;
    m.seed = c.seed;
    return m;
}

int run_weights(const Common& c, const WeightsArgs& a) {
    const Hierarchy h = load_hierarchy(c.tree);
    RunManifest m = base_manifest("weights", c);
    m.hyperparameters["scheme"] = a.scheme;
    std::optional<WeightedHierarchy> wh;
    if (a.scheme == "exponential") {
        warn_degenerate_q(a.q);
        wh = exponential_weights(h, a.q);
        m.hyperparameters["q"] = shortest(a.q);
    } else if (a.scheme == "hxe") {
        if (!(a.alpha > 0.0) || !std::isfinite(a.alpha)) throw InputError("alpha must be > 0");
        wh = hxe_weights(h, a.alpha, !a.raw);
        m.hyperparameters["alpha"] = shortest(a.alpha);
        m.hyperparameters["normalized"] = a.raw ? "false" : "true";
    } else {
        throw InputError("unknown scheme '" + a.scheme + "' (expected exponential or hxe)");
    }

    const auto bad = validate_balanced(*wh, 1e-9);
    double worst = 0.0;
    for (NodeId k = 1; k <= h.leaf_count(); ++k) {
        worst = std::max(worst, std::abs(wh->cumulative(k) - wh->balance_constant()));
    }
    const std::string dump = format_weight_dump(*wh, c.full_precision);
    if (c.out_dir.empty()) {
        std::cout << manifest_line(m) << dump;
    } else {
        m.outputs["weights"] = "weights.tsv";
        write_output(c.out_dir, "weights.tsv", m, dump);
    }
    std::cerr << "balance: constant " << format_number(wh->balance_constant(), c.full_precision)
              << ", max leaf deviation " << worst << ", "
              << (bad.empty() ? "balanced" : "UNBALANCED") << '\n';
    return bad.empty() ? kExitOk : kExitFailure;
}

int run_synth(const Common& c, const SynthArgs& a) {
    const Hierarchy h = load_hierarchy(c.tree);
    const Dataset data = generate_synthetic(h, a.per_class, a.dim, a.spread, c.seed);
    RunManifest m = base_manifest("synth", c);
    m.hyperparameters = {{"per_class", std::to_string(a.per_class)},
                         {"dim", std::to_string(a.dim)},
                         {"spread", shortest(a.spread)}};
    m.outputs["data"] = "dataset.csv";
    write_output(c.out_dir, "dataset.csv", m, format_dataset_csv(data, true));
    return kExitOk;
}

TrainConfig make_config(const Common& c, const std::string& loss, double q, double alpha) {
    TrainConfig config;
    config.loss = parse_loss_kind(loss);
    config.q = q;
    config.alpha = alpha;
    config.seed = c.seed;
    config.threads = c.threads;
    if (config.loss == LossKind::Hierarchical) warn_degenerate_q(q);
    return config;
}

void echo_loss(RunManifest& m, const TrainConfig& config) {
    m.hyperparameters["loss"] = to_string(config.loss);
    if (config.loss == LossKind::Hierarchical) m.hyperparameters["q"] = shortest(config.q);
    if (config.loss == LossKind::Hxe) m.hyperparameters["alpha"] = shortest(config.alpha);
}

int run_train(const Common& c, const TrainArgs& a, const SynthArgs& s) {
    const Hierarchy h = load_hierarchy(c.tree);
    RunManifest m = base_manifest("train", c);
    Dataset data;
    if (a.data.empty()) {
        data = generate_synthetic(h, s.per_class, s.dim, s.spread, c.seed);
        m.inputs["data"] = "synthetic";
        m.hyperparameters["per_class"] = std::to_string(s.per_class);
        m.hyperparameters["dim"] = std::to_string(s.dim);
        m.hyperparameters["spread"] = shortest(s.spread);
    } else {
        data = parse_dataset_csv(read_text_file(a.data), h);
        m.inputs["data"] = a.data;
    }
    data.validate(h.leaf_count());
    auto [fit, held] = split_holdout(data, 0.2);
    if (held.size() == 0) {
        std::cerr << "note: too few samples per class for a holdout; evaluating on training data\n";
        held = fit;
    }

    TrainConfig config = make_config(c, a.loss, a.q, a.alpha);
    config.epochs = a.epochs;
    config.learning_rate = a.lr;
    config.batch_size = a.batch;
    echo_loss(m, config);
    m.hyperparameters["epochs"] = std::to_string(a.epochs);
    m.hyperparameters["lr"] = shortest(a.lr);
    m.hyperparameters["batch"] = std::to_string(a.batch);
    m.hyperparameters["eval_q"] = shortest(a.eval_q);

    const TrainResult result = train(fit, h, config);
    const WeightedHierarchy eval_weights = exponential_weights(h, a.eval_q);
    const ModelEvaluation evaluation = evaluate_model(result.model, held, eval_weights, c.threads);

    m.outputs = {{"checkpoint", "checkpoint.json"},
                 {"report", "report.json"},
                 {"curve", "curve.csv"}};
    write_output(c.out_dir, "checkpoint.json", m, format_checkpoint(result.model, config));
    write_output(c.out_dir, "report.json", m, format_report(evaluation.report, c.full_precision));
    write_output(c.out_dir, "curve.csv", m, format_curve_csv(evaluation.curve, c.full_precision));
    std::cerr << "final training loss " << format_number(result.epoch_losses.back(), c.full_precision)
              << ", held-out accuracy " << format_number(evaluation.report.accuracy, c.full_precision)
              << '\n';
    return kExitOk;
}

struct LoadedEval {
    Hierarchy tree;
    Dataset data;
    LinearModel model;
};

LoadedEval load_eval_inputs(const Common& c, const EvalArgs& a) {
    if (a.data.empty() || a.model.empty()) throw InputError("--data and --model are required");
    Hierarchy h = load_hierarchy(c.tree);
    Dataset data = parse_dataset_csv(read_text_file(a.data), h);
    LinearModel model = parse_checkpoint(read_text_file(a.model));
    if (model.classes() != h.leaf_count()) {
        throw InputError("checkpoint has " + std::to_string(model.classes()) +
                         " classes but the tree has " + std::to_string(h.leaf_count()));
    }
    if (model.dim() != data.dim()) {
        throw InputError("checkpoint expects " + std::to_string(model.dim()) +
                         " features but the dataset has " + std::to_string(data.dim()));
    }
    return {std::move(h), std::move(data), std::move(model)};
}

int run_evaluate(const Common& c, const EvalArgs& a) {
    const LoadedEval in = load_eval_inputs(c, a);
    RunManifest m = base_manifest("evaluate", c);
    m.inputs["data"] = a.data;
    m.inputs["model"] = a.model;
    const TrainConfig config = make_config(c, a.loss, a.q, a.alpha);
    echo_loss(m, config);
    m.hyperparameters["eval_q"] = shortest(a.eval_q);

    const WeightedHierarchy wh = exponential_weights(in.tree, a.eval_q);
    const Eigen::MatrixXd probs = in.model.predict_proba(in.data.features);
    const EvaluationReport report = evaluate(wh, probs, in.data.labels, c.threads);
    const Objective objective = make_objective(in.tree, config);

    m.outputs = {{"report", "report.json"}, {"losses", "losses.tsv"}};
    write_output(c.out_dir, "report.json", m, format_report(report, c.full_precision));
    write_output(c.out_dir, "losses.tsv", m,
                 format_loss_report(objective, in.model.logits(in.data.features), in.data.labels,
                                    c.full_precision, c.threads));
    return kExitOk;
}

int run_curve(const Common& c, const EvalArgs& a) {
    const LoadedEval in = load_eval_inputs(c, a);
    RunManifest m = base_manifest("curve", c);
    m.inputs["data"] = a.data;
    m.inputs["model"] = a.model;
    m.hyperparameters["eval_q"] = shortest(a.eval_q);
    const WeightedHierarchy wh = exponential_weights(in.tree, a.eval_q);
    const CoarseningCurve curve =
        coarsening_curve(wh, in.model.predict_proba(in.data.features), in.data.labels);
    m.outputs["curve"] = "curve.csv";
    write_output(c.out_dir, "curve.csv", m, format_curve_csv(curve, c.full_precision));
    return kExitOk;
}

int run_verify(const Common& c, const VerifyArgs& a) {
    verify::Options options;
    options.full_scale = a.scale == "full";
    options.include_naive = a.include_naive;
    options.corrupt_weights = a.corrupt;
    options.seed = c.seed;
    const auto results = verify::run_verification(options);
    std::string body;
    bool all = true;
    for (const auto& r : results) {
        body += verify::format_check(r) + '\n';
        all = all && r.passed;
    }
    body += all ? "all checks passed\n" : "verification FAILED\n";
    std::cout << body;
    if (!c.out_dir.empty()) {
        RunManifest m = base_manifest("verify", c);
        m.hyperparameters["scale"] = a.scale;
        m.hyperparameters["include_naive"] = a.include_naive ? "true" : "false";
        m.outputs["report"] = "verify.txt";
        write_output(c.out_dir, "verify.txt", m, body);
    }
    return all ? kExitOk : kExitFailure;
}

void add_common(CLI::App* sub, Common& c, bool needs_tree, bool needs_out_dir) {
    auto* tree = sub->add_option("--tree", c.tree, "Tree file (JSON nodes or child<TAB>parent edges)");
    if (needs_tree) tree->required()->check(CLI::ExistingFile);
    auto* out = sub->add_option("--out-dir", c.out_dir, "Directory for output files");
    if (needs_out_dir) out->default_val(".");
    sub->add_option("--seed", c.seed, "Seed for every random stream")->default_val(0);
    sub->add_option("--threads", c.threads, "Worker threads for batch loss and metrics")
        ->default_val(1)
        ->check(CLI::PositiveNumber);
    sub->add_flag("--full-precision", c.full_precision, "Print numbers at round-trip precision");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Balanced-weighted-tree hierarchical losses, metrics and oracles"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    Common wc, sc, tc, ec, cc, vc;
    WeightsArgs wargs;
    SynthArgs sargs;
    TrainArgs targs;
    EvalArgs eargs;
    VerifyArgs vargs;

    auto* weights = app.add_subcommand("weights", "Print node weights and check their balance");
    add_common(weights, wc, true, false);
    weights->add_option("--scheme", wargs.scheme, "exponential or hxe")
        ->check(CLI::IsMember({"exponential", "hxe"}));
    weights->add_option("--q", wargs.q, "Growth rate of the exponential scheme")->default_val(1.0);
    weights->add_option("--alpha", wargs.alpha, "HXE decay")->default_val(0.1);
    weights->add_flag("--raw", wargs.raw, "Keep HXE weights at their exp(-alpha) path sum");

    auto* synth = app.add_subcommand("synth", "Generate a hierarchy-shaped synthetic dataset");
    add_common(synth, sc, true, true);
    synth->add_option("--per-class", sargs.per_class)->default_val(10)->check(CLI::PositiveNumber);
    synth->add_option("--dim", sargs.dim)->default_val(8);
    synth->add_option("--spread", sargs.spread)->default_val(1.0);

    auto* train_cmd = app.add_subcommand("train", "Fit a linear softmax model and evaluate it");
    add_common(train_cmd, tc, true, true);
    train_cmd->add_option("--data", targs.data, "Dataset CSV (default: synthetic data)");
    train_cmd->add_option("--loss", targs.loss)->check(CLI::IsMember({"ce", "hier", "hxe"}));
    train_cmd->add_option("--q", targs.q)->default_val(0.9);
    train_cmd->add_option("--alpha", targs.alpha)->default_val(0.1);
    train_cmd->add_option("--epochs", targs.epochs)->default_val(100);
    train_cmd->add_option("--lr", targs.lr)->default_val(0.1);
    train_cmd->add_option("--batch", targs.batch)->default_val(16);
    train_cmd->add_option("--eval-q", targs.eval_q, "q of the weights used by the metrics")
        ->default_val(1.0);
    train_cmd->add_option("--per-class", sargs.per_class)->default_val(10);
    train_cmd->add_option("--dim", sargs.dim)->default_val(8);
    train_cmd->add_option("--spread", sargs.spread)->default_val(1.0);

    auto* eval_cmd = app.add_subcommand("evaluate", "Metrics and per-sample losses of a checkpoint");
    add_common(eval_cmd, ec, true, true);
    eval_cmd->add_option("--data", eargs.data)->required();
    eval_cmd->add_option("--model", eargs.model)->required();
    eval_cmd->add_option("--loss", eargs.loss)->check(CLI::IsMember({"ce", "hier", "hxe"}));
    eval_cmd->add_option("--q", eargs.q)->default_val(0.9);
    eval_cmd->add_option("--alpha", eargs.alpha)->default_val(0.1);
    eval_cmd->add_option("--eval-q", eargs.eval_q)->default_val(1.0);

    auto* curve_cmd = app.add_subcommand("curve", "Coarsening accuracy curve of a checkpoint");
    add_common(curve_cmd, cc, true, true);
    curve_cmd->add_option("--data", eargs.data)->required();
    curve_cmd->add_option("--model", eargs.model)->required();
    curve_cmd->add_option("--eval-q", eargs.eval_q)->default_val(1.0);

    auto* verify_cmd = app.add_subcommand("verify", "Run the oracle and property checks");
    add_common(verify_cmd, vc, false, false);
    verify_cmd->add_option("--scale", vargs.scale, "quick or full")
        ->check(CLI::IsMember({"quick", "full"}));
    verify_cmd->add_flag("--include-naive", vargs.include_naive,
                         "Also report the unit-weight minimizer on the three-class tree");
    verify_cmd->add_flag("--inject-weight-corruption", vargs.corrupt)->group("");
    verify_cmd->get_option("--seed")->default_val(20240601);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*weights) return run_weights(wc, wargs);
        if (*synth) return run_synth(sc, sargs);
        if (*train_cmd) return run_train(tc, targs, sargs);
        if (*eval_cmd) return run_evaluate(ec, eargs);
        if (*curve_cmd) return run_curve(cc, eargs);
        if (*verify_cmd) return run_verify(vc, vargs);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}
