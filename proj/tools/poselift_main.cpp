#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "poselift/checkpoint.hpp"
#include "poselift/eval_report.hpp"
#include "poselift/lifter.hpp"
#include "poselift/manifest.hpp"
#include "poselift/metrics.hpp"
#include "poselift/pose_data.hpp"
#include "poselift/trainer.hpp"
#include "poselift/verify.hpp"
#include "poselift/viz.hpp"

namespace {

using namespace poselift;

// Exit codes: 0 success, 1 verification failure, 2 usage/input error,
// 3 numeric divergence.
constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;

std::string join_invocation(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

std::vector<std::string> split_list(const std::string& csl) {
    std::vector<std::string> out;
    std::stringstream ss(csl);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string sanitize_label(const std::string& label) {
    std::string out;
    for (char c : label) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    return out.empty() ? "table" : out;
}

std::string weighted_csv_path(const std::string& path) {
    const std::string suffix = ".csv";
    if (path.size() > suffix.size() &&
        path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return path.substr(0, path.size() - suffix.size()) + ".weighted.csv";
    return path + ".weighted";
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

struct SynthArgs {
    int n = 0;
    std::uint64_t seed = 0;
    std::string out;
    double noise_std = 0.0;
    double focal = 1000.0, cx = 500.0, cy = 500.0, z0 = 5000.0;
};

int run_synth(const SynthArgs& a, const std::string& invocation) {
    RunManifest m;
    m.command = "synth";
    m.invocation = invocation;
    m.started_at = RunManifest::now_iso8601();
    CameraModel cam{a.focal, a.cx, a.cy, a.z0};
    auto data = synth_generate(a.n, a.seed, cam, a.noise_std);
    save_dataset(a.out, data);
    m.config = {{"n", std::to_string(a.n)},
                {"noise_std", fmt_g(a.noise_std)},
                {"focal", fmt_g(a.focal)},
                {"cx", fmt_g(a.cx)},
                {"cy", fmt_g(a.cy)},
                {"z0", fmt_g(a.z0)}};
    m.has_seed = true;
    m.seed = a.seed;
    m.outputs = {a.out};
    m.finished_at = RunManifest::now_iso8601();
    m.save(a.out + ".manifest.json");
    std::cout << "wrote " << data.size() << " samples to " << a.out << "\n";
    return kExitOk;
}

struct TrainArgs {
    std::string data;
    std::string variant = "original";
    int epochs = 150;
    int batch = 64;
    double lr = 1e-3;
    double dropout = 0.5;
    int linear_size = 1024;
    int blocks = 2;
    std::string loss; // empty: resolved from variant
    std::string weights_file;
    std::uint64_t seed = 0;
    std::string out; // output prefix
    std::string train_subjects = "S1,S2,S3,S4,S5";
    std::string test_subjects = "S6,S7";
    double decay_factor = 0.96;
    long decay_interval = 25000;
    int eval_every = 1;
    double clip_max_norm = 0.0;
    bool no_shuffle = false;
};

int run_train(const TrainArgs& a, const std::string& invocation) {
    RunManifest m;
    m.command = "train";
    m.invocation = invocation;
    m.started_at = RunManifest::now_iso8601();
    m.add_input(a.data);

    const Variant variant = variant_from_string(a.variant);
    LossKind loss = a.loss.empty() ? (variant == Variant::V3 ? LossKind::WMSE : LossKind::MSE)
                                   : loss_from_string(a.loss);
    if (!a.loss.empty()) {
        if (variant == Variant::V3 && loss != LossKind::WMSE)
            std::cerr << "warning: " << a.variant << " is defined by the wmse loss; running with "
                      << loss_name(loss) << " anyway\n";
        if (variant != Variant::V3 && loss == LossKind::WMSE)
            std::cerr << "warning: wmse with variant " << a.variant
                      << " is not a reported combination; running anyway\n";
    }

    const auto data = load_dataset(a.data);
    auto split = split_by_subject(data, split_list(a.train_subjects), split_list(a.test_subjects));
    if (split.train.empty())
        throw std::runtime_error("no training samples for subjects " + a.train_subjects);
    NormStats stats = compute_norm_stats(split.train, "subjects " + a.train_subjects);

    LifterConfig config = LifterConfig::for_variant(variant);
    config.linear_size = a.linear_size;
    config.num_blocks = a.blocks;
    config.dropout_rate = a.dropout;

    TrainConfig tc;
    tc.epochs = a.epochs;
    tc.batch_size = a.batch;
    tc.learning_rate = a.lr;
    tc.decay_factor = a.decay_factor;
    tc.decay_interval = a.decay_interval;
    tc.loss = loss;
    tc.seed = a.seed;
    tc.shuffle = !a.no_shuffle;
    tc.eval_every = a.eval_every;
    tc.clip_max_norm = a.clip_max_norm;
    tc.checkpoint_path = a.out + ".checkpoint.json";
    if (loss == LossKind::WMSE) {
        tc.weights = a.weights_file.empty()
                         ? JointWeights::defaults()
                         : JointWeights::from_json_file(a.weights_file, SkeletonSpec::canonical16());
        if (!a.weights_file.empty()) m.add_input(a.weights_file);
    }

    Lifter model(config, a.seed);
    TrainResult result = train(model, split.train, split.test, stats, tc);
    if (result.diverged) {
        // Keep the rolled-back state on disk alongside the log.
        CheckpointMeta meta;
        meta.epoch = result.completed_epochs;
        meta.seed = a.seed;
        meta.loss_kind = loss_name(loss);
        if (loss == LossKind::WMSE) meta.joint_weights = tc.weights.weights;
        meta.final_train_loss = result.final_train_loss;
        save_checkpoint(tc.checkpoint_path, model, stats, meta);
    }
    result.log.save_csv(a.out + ".trainlog.csv");

    m.config = {{"variant", a.variant},
                {"epochs", std::to_string(a.epochs)},
                {"batch", std::to_string(a.batch)},
                {"lr", fmt_g(a.lr)},
                {"dropout", fmt_g(a.dropout)},
                {"linear_size", std::to_string(a.linear_size)},
                {"blocks", std::to_string(a.blocks)},
                {"loss", loss_name(loss)},
                {"train_subjects", a.train_subjects},
                {"test_subjects", a.test_subjects},
                {"decay_factor", fmt_g(a.decay_factor)},
                {"decay_interval", std::to_string(a.decay_interval)},
                {"eval_every", std::to_string(a.eval_every)},
                {"clip_max_norm", fmt_g(a.clip_max_norm)},
                {"shuffle", a.no_shuffle ? "off" : "on"}};
    m.has_seed = true;
    m.seed = a.seed;
    m.outputs = {tc.checkpoint_path, a.out + ".trainlog.csv"};
    m.finished_at = RunManifest::now_iso8601();
    m.save(a.out + ".manifest.json");

    if (result.diverged) {
        std::cerr << "training diverged after epoch " << result.completed_epochs
                  << "; model rolled back to the last finite epoch\n";
        return kExitDiverged;
    }
    const auto& last = result.log.records.back();
    std::cout << "trained " << a.variant << " for " << result.completed_epochs << " epochs; final "
              << loss_name(loss) << " " << last.train_loss;
    if (!std::isnan(last.eval_mpjpe_mm))
        std::cout << "; test MPJPE " << last.eval_mpjpe_mm << " mm";
    std::cout << "\n";
    return kExitOk;
}

struct EvalArgs {
    std::string checkpoint;
    std::string data;
    std::string weights_file;
    std::string out;
    std::string label;
};

int run_eval(const EvalArgs& a, const std::string& invocation) {
    RunManifest m;
    m.command = "eval";
    m.invocation = invocation;
    m.started_at = RunManifest::now_iso8601();
    m.add_input(a.checkpoint);
    m.add_input(a.data);

    LoadedCheckpoint loaded = load_checkpoint(a.checkpoint);
    const auto data = load_dataset(a.data);
    const std::string label =
        a.label.empty() ? variant_name(loaded.model.config().variant_label) : a.label;

    EvalTable table = evaluate(loaded.model, data, loaded.stats, label);
    save_table_csv(a.out, {table});
    m.outputs = {a.out};
    std::cout << render_table_text({table});

    if (!a.weights_file.empty()) {
        m.add_input(a.weights_file);
        JointWeights w = JointWeights::from_json_file(a.weights_file, SkeletonSpec::canonical16());
        EvalTable wt = evaluate_weighted(loaded.model, data, loaded.stats, w, label + "-weighted");
        const std::string wpath = weighted_csv_path(a.out);
        save_table_csv(wpath, {wt});
        m.outputs.push_back(wpath);
        std::cout << render_table_text({wt});
    }

    m.config = {{"label", label}};
    m.finished_at = RunManifest::now_iso8601();
    m.save(a.out + ".manifest.json");
    return kExitOk;
}

struct CompareArgs {
    std::string baseline;
    std::vector<std::string> candidates;
    std::string out; // output prefix
};

int run_compare(const CompareArgs& a, const std::string& invocation) {
    RunManifest m;
    m.command = "compare";
    m.invocation = invocation;
    m.started_at = RunManifest::now_iso8601();
    m.add_input(a.baseline);
    for (const auto& c : a.candidates) m.add_input(c);

    EvalTable base = load_table_csv(a.baseline).front();
    std::vector<EvalTable> all = {base};
    std::ostringstream text;
    std::vector<Comparison> comparisons;
    for (const auto& path : a.candidates) {
        EvalTable cand = load_table_csv(path).front();
        comparisons.push_back(compare(base, cand));
        all.push_back(std::move(cand));
    }
    text << render_table_text(all) << "\n";
    for (const auto& c : comparisons) {
        text << c.candidate.label << " vs " << c.baseline.label << ":\n"
             << render_comparison_text(c) << "\n";
        const std::string csv_path =
            a.out + "." + sanitize_label(c.candidate.label) + "_vs_" +
            sanitize_label(c.baseline.label) + ".csv";
        save_comparison_csv(csv_path, c);
        m.outputs.push_back(csv_path);
    }
    write_text_file(a.out + ".txt", text.str());
    m.outputs.insert(m.outputs.begin(), a.out + ".txt");
    std::cout << text.str();

    m.config = {{"baseline", a.baseline}, {"candidates", std::to_string(a.candidates.size())}};
    m.finished_at = RunManifest::now_iso8601();
    m.save(a.out + ".manifest.json");
    return kExitOk;
}

struct RenderArgs {
    std::string checkpoint;
    std::string data;
    long index = 0;
    std::string out;
    double width = 400.0, height = 400.0;
    double azimuth = 70.0, elevation = 15.0;
};

int run_render(const RenderArgs& a, const std::string& invocation) {
    RunManifest m;
    m.command = "render";
    m.invocation = invocation;
    m.started_at = RunManifest::now_iso8601();
    m.add_input(a.checkpoint);
    m.add_input(a.data);

    LoadedCheckpoint loaded = load_checkpoint(a.checkpoint);
    const auto data = load_dataset(a.data);
    if (a.index < 0 || static_cast<std::size_t>(a.index) >= data.size())
        throw std::runtime_error("index " + std::to_string(a.index) + " out of range [0, " +
                                 std::to_string(data.size()) + ")");
    const PosePair& sample = data[static_cast<std::size_t>(a.index)];

    const std::vector<PosePair> one = {sample};
    const Tensor pred_mm = denormalize3d_batch(
        loaded.model.forward(to_input_matrix(one, loaded.stats), LayerMode::Eval), loaded.stats);
    std::vector<double> pred(pred_mm.data(), pred_mm.data() + pred_mm.size());

    RenderStyle style;
    style.canvas_width = a.width;
    style.canvas_height = a.height;
    style.azimuth_deg = a.azimuth;
    style.elevation_deg = a.elevation;
    write_text_file(a.out, render_triptych(sample.pose2d, sample.pose3d, pred, style));

    m.config = {{"index", std::to_string(a.index)},
                {"width", fmt_g(a.width)},
                {"height", fmt_g(a.height)},
                {"azimuth", fmt_g(a.azimuth)},
                {"elevation", fmt_g(a.elevation)}};
    m.outputs = {a.out};
    m.finished_at = RunManifest::now_iso8601();
    m.save(a.out + ".manifest.json");
    std::cout << "wrote " << a.out << "\n";
    return kExitOk;
}

int run_verify(bool full, bool corrupt_swish) {
    VerifyOptions opts;
    opts.full = full;
    opts.corrupt_swish = corrupt_swish;
    const auto results = run_verification(opts);
    int failed = 0;
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
        if (!r.passed) ++failed;
    }
    if (failed) {
        std::cout << failed << " of " << results.size() << " checks failed\n";
        return kExitVerifyFailed;
    }
    std::cout << "all " << results.size() << " checks passed\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D-to-3D human pose lifting: synthesize, train, evaluate, compare, render"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an INI/TOML file (CLI flags win)");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic pose dataset CSV");
    synth->add_option("--n", synth_args.n, "number of samples")
        ->required()
        ->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_args.seed, "PRNG seed");
    synth->add_option("--out", synth_args.out, "output CSV path")->required();
    synth->add_option("--noise-std", synth_args.noise_std, "additive 2D pixel noise (std dev)")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--focal", synth_args.focal, "camera focal length, pixels");
    synth->add_option("--cx", synth_args.cx, "principal point x");
    synth->add_option("--cy", synth_args.cy, "principal point y");
    synth->add_option("--z0", synth_args.z0, "subject distance offset, mm");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train a lifting network variant");
    train_cmd->add_option("--data", train_args.data, "dataset CSV")->required();
    train_cmd->add_option("--variant", train_args.variant, "original|v1|v2|v3")
        ->check(CLI::IsMember({"original", "v1", "v2", "v3"}));
    train_cmd->add_option("--epochs", train_args.epochs)->check(CLI::PositiveNumber);
    train_cmd->add_option("--batch", train_args.batch)->check(CLI::Range(2, 1 << 20));
    train_cmd->add_option("--lr", train_args.lr, "learning rate");
    train_cmd->add_option("--dropout", train_args.dropout, "dropout rate in [0,1)");
    train_cmd->add_option("--linear-size", train_args.linear_size)->check(CLI::PositiveNumber);
    train_cmd->add_option("--blocks", train_args.blocks, "residual block count")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--loss", train_args.loss, "mse|l1|wmse (default: wmse for v3, else mse)")
        ->check(CLI::IsMember({"mse", "l1", "wmse"}));
    train_cmd->add_option("--weights-file", train_args.weights_file,
                          "joint-weight JSON for wmse (default: shipped map)");
    train_cmd->add_option("--seed", train_args.seed, "PRNG seed");
    train_cmd->add_option("--out", train_args.out, "output prefix")->required();
    train_cmd->add_option("--train-subjects", train_args.train_subjects, "comma-separated ids");
    train_cmd->add_option("--test-subjects", train_args.test_subjects, "comma-separated ids");
    train_cmd->add_option("--decay-factor", train_args.decay_factor);
    train_cmd->add_option("--decay-interval", train_args.decay_interval, "steps per lr decay");
    train_cmd->add_option("--eval-every", train_args.eval_every, "epochs between evaluations")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--clip-max-norm", train_args.clip_max_norm,
                          "gradient clipping (0 = off)");
    train_cmd->add_flag("--no-shuffle", train_args.no_shuffle, "disable epoch shuffling");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "per-action MPJPE table for a checkpoint");
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint)->required();
    eval_cmd->add_option("--data", eval_args.data, "dataset CSV")->required();
    eval_cmd->add_option("--weights-file", eval_args.weights_file,
                         "also write a weighted-MPJPE table");
    eval_cmd->add_option("--out", eval_args.out, "output table CSV")->required();
    eval_cmd->add_option("--label", eval_args.label, "row label (default: checkpoint variant)");

    CompareArgs compare_args;
    auto* compare_cmd = app.add_subcommand("compare", "compare evaluation tables");
    compare_cmd->add_option("--baseline", compare_args.baseline, "baseline table CSV")->required();
    compare_cmd->add_option("--candidate", compare_args.candidates, "candidate table CSV(s)")
        ->required()
        ->expected(1, -1);
    compare_cmd->add_option("--out", compare_args.out, "output prefix")->required();

    RenderArgs render_args;
    auto* render_cmd = app.add_subcommand("render", "render a triptych SVG for one sample");
    render_cmd->add_option("--checkpoint", render_args.checkpoint)->required();
    render_cmd->add_option("--data", render_args.data, "dataset CSV")->required();
    render_cmd->add_option("--index", render_args.index, "sample index");
    render_cmd->add_option("--out", render_args.out, "output SVG path")->required();
    render_cmd->add_option("--width", render_args.width, "panel width, px");
    render_cmd->add_option("--height", render_args.height, "panel height, px");
    render_cmd->add_option("--azimuth", render_args.azimuth, "3D view azimuth, degrees");
    render_cmd->add_option("--elevation", render_args.elevation, "3D view elevation, degrees");

    bool verify_full = false, verify_corrupt = false;
    auto* verify_cmd = app.add_subcommand("verify", "run gradient checks and metric oracles");
    verify_cmd->add_flag("--full", verify_full, "whole-model checks for all four variants");
    verify_cmd->add_flag("--corrupt-swish", verify_corrupt)->group(""); // hidden test fixture

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    const std::string invocation = join_invocation(argc, argv);
    try {
        if (synth->parsed()) return run_synth(synth_args, invocation);
        if (train_cmd->parsed()) return run_train(train_args, invocation);
        if (eval_cmd->parsed()) return run_eval(eval_args, invocation);
        if (compare_cmd->parsed()) return run_compare(compare_args, invocation);
        if (render_cmd->parsed()) return run_render(render_args, invocation);
        if (verify_cmd->parsed()) return run_verify(verify_full, verify_corrupt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
