#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

// End-to-end coverage of the poselift binary: every subcommand, its artifacts,
// exit codes, and byte-level rerun determinism (timestamps and wall-clock
// columns excepted).

namespace {

std::string cli_path() { return POSELIFT_CLI_PATH; }

std::string data_path(const std::string& name) {
    return std::string(POSELIFT_DATA_DIR) + "/" + name;
}

std::string fresh_dir(const std::string& name) {
    namespace fs = std::filesystem;
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() / ("poselift_cli_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    const fs::path dir = root / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

// Runs the binary from inside `dir` so relative outputs (and therefore the
// recorded invocations) are identical across rerun-determinism checks.
Run run_cli(const std::string& args, const std::string& dir) {
    static int counter = 0;
    const std::string out_log = dir + "/cli_out_" + std::to_string(counter) + ".log";
    const std::string err_log = dir + "/cli_err_" + std::to_string(counter) + ".log";
    ++counter;
    const std::string cmd = "cd '" + dir + "' && '" + cli_path() + "' " + args + " >'" + out_log +
                            "' 2>'" + err_log + "'";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out_log);
    r.err = read_file(err_log);
    return r;
}

bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

// The trailing field of every trainlog row is wall-clock seconds.
std::string drop_last_field(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << "\n";
    return out.str();
}

std::string drop_timestamps(const std::string& manifest) {
    std::istringstream in(manifest);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (line.find("\"started_at\"") == std::string::npos &&
            line.find("\"finished_at\"") == std::string::npos)
            out << line << "\n";
    return out.str();
}

// Shared dataset plus a tiny trained checkpoint, built once via the CLI.
struct Fixture {
    std::string dir;
    std::string data;
    std::string checkpoint;
};

const Fixture& fx() {
    static const Fixture fixture = [] {
        Fixture f;
        f.dir = fresh_dir("fixture");
        f.data = f.dir + "/data.csv";
        const Run synth =
            run_cli("synth --n 40 --seed 5 --noise-std 1.0 --out '" + f.data + "'", f.dir);
        REQUIRE(synth.code == 0);
        const Run train = run_cli("train --data '" + f.data +
                                      "' --out ckpt --variant original --epochs 2 --batch 8 "
                                      "--linear-size 16 --blocks 1 --dropout 0.2 --seed 9",
                                  f.dir);
        REQUIRE(train.code == 0);
        f.checkpoint = f.dir + "/ckpt.checkpoint.json";
        return f;
    }();
    return fixture;
}

const std::string kTrainFlags =
    " --variant v2 --epochs 3 --batch 8 --linear-size 16 --blocks 1 --dropout 0.2 --seed 9";

} // namespace

TEST_CASE("synth writes the dataset and a manifest, deterministically") {
    const std::string d1 = fresh_dir("synth_run1");
    const std::string d2 = fresh_dir("synth_run2");
    const std::string args = "synth --n 100 --seed 42 --out a.csv";

    const Run r1 = run_cli(args, d1);
    CHECK(r1.code == 0);
    CHECK(r1.out == "wrote 100 samples to a.csv\n");
    CHECK(line_count(read_file(d1 + "/a.csv")) == 101); // header + 100 rows
    const std::string manifest = read_file(d1 + "/a.csv.manifest.json");
    CHECK(manifest.find("\"command\": \"synth\"") != std::string::npos);
    CHECK(manifest.find("\"seed\": 42") != std::string::npos);

    const Run r2 = run_cli(args, d2);
    CHECK(r2.code == 0);
    CHECK(read_file(d1 + "/a.csv") == read_file(d2 + "/a.csv"));
    CHECK(drop_timestamps(manifest) == drop_timestamps(read_file(d2 + "/a.csv.manifest.json")));
}

TEST_CASE("synth rejects bad arguments") {
    const std::string dir = fresh_dir("synth_bad");
    CHECK(run_cli("synth --n 0 --out a.csv", dir).code == 2);
    CHECK(run_cli("synth --n 5 --noise-std -1 --out a.csv", dir).code == 2);
    CHECK(run_cli("synth --n 5", dir).code == 2); // --out is required
}

TEST_CASE("train writes checkpoint, log, and manifest; reruns are byte-identical") {
    const std::string d1 = fresh_dir("train_run1");
    const std::string d2 = fresh_dir("train_run2");
    const std::string args = "train --data '" + fx().data + "' --out run" + kTrainFlags;

    const Run r1 = run_cli(args, d1);
    CHECK(r1.code == 0);
    CHECK(r1.out.find("trained v2 for 3 epochs") != std::string::npos);
    CHECK(r1.out.find("test MPJPE") != std::string::npos);
    REQUIRE(file_exists(d1 + "/run.checkpoint.json"));
    REQUIRE(file_exists(d1 + "/run.trainlog.csv"));
    REQUIRE(file_exists(d1 + "/run.manifest.json"));

    const Run r2 = run_cli(args, d2);
    CHECK(r2.code == 0);
    CHECK(read_file(d1 + "/run.checkpoint.json") == read_file(d2 + "/run.checkpoint.json"));
    CHECK(drop_last_field(read_file(d1 + "/run.trainlog.csv")) ==
          drop_last_field(read_file(d2 + "/run.trainlog.csv")));
    CHECK(drop_timestamps(read_file(d1 + "/run.manifest.json")) ==
          drop_timestamps(read_file(d2 + "/run.manifest.json")));
}

TEST_CASE("v3 trains with the weighted loss by default") {
    const std::string dir = fresh_dir("train_v3");
    const Run r = run_cli("train --data '" + fx().data +
                              "' --out v3run --variant v3 --epochs 1 --batch 8 "
                              "--linear-size 16 --blocks 1 --dropout 0.2 --seed 9",
                          dir);
    CHECK(r.code == 0);
    CHECK(r.err == "");
    CHECK(r.out.find("final wmse") != std::string::npos);
    const std::string ckpt = read_file(dir + "/v3run.checkpoint.json");
    CHECK(ckpt.find("\"loss_kind\": \"wmse\"") != std::string::npos);
    CHECK(ckpt.find("\"joint_weights\"") != std::string::npos);
}

TEST_CASE("off-label loss choices run with a warning") {
    const std::string dir = fresh_dir("train_warn");
    const std::string base = "train --data '" + fx().data +
                             "' --epochs 1 --batch 8 --linear-size 16 --blocks 1 "
                             "--dropout 0.2 --seed 9";

    const Run wmse = run_cli(base + " --variant original --loss wmse --out w1", dir);
    CHECK(wmse.code == 0);
    CHECK(wmse.err ==
          "warning: wmse with variant original is not a reported combination; running anyway\n");

    const Run mse = run_cli(base + " --variant v3 --loss mse --out w2", dir);
    CHECK(mse.code == 0);
    CHECK(mse.err == "warning: v3 is defined by the wmse loss; running with mse anyway\n");
}

TEST_CASE("a diverging run exits 3 and keeps the rolled-back checkpoint") {
    const std::string dir = fresh_dir("train_diverge");
    const Run r = run_cli("train --data '" + fx().data +
                              "' --out boom --variant original --epochs 3 --batch 8 "
                              "--linear-size 16 --blocks 1 --dropout 0.2 --seed 9 --lr 1e200",
                          dir);
    CHECK(r.code == 3);
    CHECK(r.err.find("training diverged after epoch 0; model rolled back to the last finite "
                     "epoch") != std::string::npos);
    const std::string ckpt = read_file(dir + "/boom.checkpoint.json");
    CHECK(ckpt.find("\"epoch\": 0") != std::string::npos);
    CHECK(file_exists(dir + "/boom.trainlog.csv"));
}

TEST_CASE("train requires a readable dataset") {
    const std::string dir = fresh_dir("train_nodata");
    const Run r = run_cli("train --data missing.csv --out x", dir);
    CHECK(r.code == 2);
    CHECK(r.err.rfind("error: ", 0) == 0);
    CHECK(r.err.find("missing.csv") != std::string::npos);
}

TEST_CASE("eval writes the table and an optional weighted companion") {
    const std::string dir = fresh_dir("eval_run");
    const Run r = run_cli("eval --checkpoint '" + fx().checkpoint + "' --data '" + fx().data +
                              "' --out table.csv --weights-file '" +
                              data_path("joint_weights_default.json") + "'",
                          dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("version") != std::string::npos);
    CHECK(r.out.find("original") != std::string::npos);
    CHECK(r.out.find("original-weighted") != std::string::npos);
    CHECK(file_exists(dir + "/table.csv"));
    CHECK(file_exists(dir + "/table.weighted.csv"));
    CHECK(file_exists(dir + "/table.csv.manifest.json"));
    CHECK(read_file(dir + "/table.csv").find("original,") != std::string::npos);
}

TEST_CASE("eval requires an existing checkpoint") {
    const std::string dir = fresh_dir("eval_bad");
    const Run r = run_cli("eval --checkpoint nothere.json --data '" + fx().data +
                              "' --out t.csv",
                          dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("cannot open nothere.json") != std::string::npos);
}

TEST_CASE("compare reproduces the published improvement summaries") {
    const std::string dir = fresh_dir("compare_run");
    const Run r = run_cli("compare --baseline '" + data_path("reference_tables/original.csv") +
                              "' --candidate '" + data_path("reference_tables/v1.csv") + "' '" +
                              data_path("reference_tables/v2.csv") + "' --out cmp",
                          dir);
    CHECK(r.code == 0);
    const std::string text = read_file(dir + "/cmp.txt");
    CHECK(r.out == text);
    CHECK(text.find("v1 vs original:") != std::string::npos);
    CHECK(text.find("v2 vs original:") != std::string::npos);
    CHECK(text.find("mean relative improvement (per-action): 6.6%") != std::string::npos);
    CHECK(text.find("mean relative improvement (per-action): 12.2%") != std::string::npos);
    CHECK(file_exists(dir + "/cmp.v1_vs_original.csv"));
    CHECK(file_exists(dir + "/cmp.v2_vs_original.csv"));
    CHECK(file_exists(dir + "/cmp.manifest.json"));
}

TEST_CASE("comparing a table against itself reports zero improvement") {
    const std::string dir = fresh_dir("compare_self");
    const std::string original = data_path("reference_tables/original.csv");
    const Run r =
        run_cli("compare --baseline '" + original + "' --candidate '" + original + "' --out self",
                dir);
    CHECK(r.code == 0);
    const std::string text = read_file(dir + "/self.txt");
    CHECK(text.find("mean relative improvement (per-action): 0.0%") != std::string::npos);
    CHECK(text.find("overall relative improvement (of averages): 0.0%") != std::string::npos);
}

TEST_CASE("compare rejects tables with different action sets") {
    const std::string dir = fresh_dir("compare_bad");
    write_file(dir + "/tiny.csv",
               "version,Directions,Discussion,Eating,Greeting,Phoning,Photo,Posing,Purchases,"
               "Sitting,SittingDown,Smoking,Waiting,WalkDog,Walking,Average\n"
               "tiny,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1\n");
    const Run r = run_cli("compare --baseline '" + data_path("reference_tables/original.csv") +
                              "' --candidate tiny.csv --out bad",
                          dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("compare: action sets differ (15 vs 14)") != std::string::npos);
}

TEST_CASE("render writes a deterministic triptych and records its inputs") {
    const std::string d1 = fresh_dir("render_run1");
    const std::string d2 = fresh_dir("render_run2");
    const std::string args = "render --checkpoint '" + fx().checkpoint + "' --data '" + fx().data +
                             "' --index 1 --out out.svg";

    const Run r1 = run_cli(args, d1);
    CHECK(r1.code == 0);
    const std::string svg = read_file(d1 + "/out.svg");
    CHECK(svg.rfind("<svg ", 0) == 0);
    CHECK(svg.find("Predicted 3D Pose") != std::string::npos);
    const std::string manifest = read_file(d1 + "/out.svg.manifest.json");
    CHECK(manifest.find(fx().checkpoint) != std::string::npos);
    CHECK(manifest.find("\"fnv1a64\"") != std::string::npos);

    const Run r2 = run_cli(args, d2);
    CHECK(r2.code == 0);
    CHECK(svg == read_file(d2 + "/out.svg"));
    CHECK(drop_timestamps(manifest) == drop_timestamps(read_file(d2 + "/out.svg.manifest.json")));
}

TEST_CASE("render rejects an out-of-range sample index") {
    const std::string dir = fresh_dir("render_bad");
    const Run r = run_cli("render --checkpoint '" + fx().checkpoint + "' --data '" + fx().data +
                              "' --index 999 --out out.svg",
                          dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("index 999 out of range [0, 40)") != std::string::npos);
}

TEST_CASE("verify passes clean and fails under fault injection") {
    const std::string dir = fresh_dir("verify_run");

    const Run clean = run_cli("verify", dir);
    CHECK(clean.code == 0);
    CHECK(clean.out.find("FAIL") == std::string::npos);
    CHECK(clean.out.find("PASS gradcheck swish (incl. beta)") != std::string::npos);
    CHECK(clean.out.find("checks passed") != std::string::npos);

    const Run corrupt = run_cli("verify --corrupt-swish", dir);
    CHECK(corrupt.code == 1);
    CHECK(corrupt.out.find("FAIL gradcheck swish (incl. beta)") != std::string::npos);
    CHECK(corrupt.out.find("checks failed") != std::string::npos);
}

TEST_CASE("help works and usage errors exit 2") {
    const std::string dir = fresh_dir("usage");
    const Run help = run_cli("--help", dir);
    CHECK(help.code == 0);
    CHECK(help.out.find("synth") != std::string::npos);
    CHECK(help.out.find("render") != std::string::npos);

    CHECK(run_cli("", dir).code == 2);             // a subcommand is required
    CHECK(run_cli("frobnicate", dir).code == 2);   // unknown subcommand
    CHECK(run_cli("synth --n 5 --out a.csv --bogus", dir).code == 2);
}

TEST_CASE("config files supply defaults but command-line flags win") {
    const std::string dir = fresh_dir("config");
    write_file(dir + "/cfg.ini",
               "[synth]\n"
               "n=7\n"
               "seed=11\n"
               "out=cfg_a.csv\n");

    const Run defaults = run_cli("--config cfg.ini synth", dir);
    CHECK(defaults.code == 0);
    CHECK(line_count(read_file(dir + "/cfg_a.csv")) == 8); // header + 7 rows

    const Run overridden = run_cli("--config cfg.ini synth --n 9 --out cfg_b.csv", dir);
    CHECK(overridden.code == 0);
    CHECK(line_count(read_file(dir + "/cfg_b.csv")) == 10);
}
