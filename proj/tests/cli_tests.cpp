#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "taskrec/num_format.hpp"

namespace {

namespace fs = std::filesystem;

std::string g_binary;

struct TempDir {
    fs::path path;
    TempDir() {
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path = fs::temp_directory_path() / ("taskrec_cli_" + std::to_string(stamp));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path file(const std::string& name) const { return path / name; }
};

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliResult run_cli(const TempDir& dir, const std::string& args) {
    const fs::path out_path = dir.file("__stdout");
    const fs::path err_path = dir.file("__stderr");
    const std::string command = g_binary + " " + args + " >" + out_path.string() + " 2>" +
                                err_path.string();
    const int status = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    return result;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

// a small observations/features fixture shared by several cases; every
// worker has enough entries that a holdout split keeps all ids in train
void write_fixture(const TempDir& dir) {
    write_file(dir.file("obs.csv"),
               "worker_id,task_id,count\n"
               "w0,t0,3\nw0,t1,1\nw0,t2,2\nw1,t0,1\nw1,t3,4\nw1,t4,1\n"
               "w2,t2,2\nw2,t3,1\nw2,t4,2\nw3,t1,5\n");
    write_file(dir.file("feat.csv"),
               "task_id,feature_id\n"
               "t0,f0\nt0,f1\nt1,f1\nt2,f2\nt3,f0\nt3,f2\nt4,f1\nt4,f2\n");
}

// larger fixture for eval flows: 4 workers x 6 entries each
void write_eval_fixture(const TempDir& dir) {
    std::string obs = "worker_id,task_id,count\n";
    for (int w = 0; w < 4; ++w)
        for (int t = 0; t < 6; ++t)
            obs += "w" + std::to_string(w) + ",t" + std::to_string((w + t) % 6) + "," +
                   std::to_string(1 + (w + t) % 3) + "\n";
    write_file(dir.file("obs.csv"), obs);
    std::string feat = "task_id,feature_id\n";
    for (int t = 0; t < 6; ++t) {
        feat += "t" + std::to_string(t) + ",f" + std::to_string(t % 3) + "\n";
        feat += "t" + std::to_string(t) + ",f" + std::to_string((t + 1) % 3) + "\n";
    }
    write_file(dir.file("feat.csv"), feat);
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("split writes deterministic partitions and validates the ratio") {
    TempDir dir;
    write_fixture(dir);
    const std::string base = "split --observations " + dir.file("obs.csv").string() +
                             " --seed 7 --train-out " + dir.file("train.csv").string() +
                             " --test-out " + dir.file("test.csv").string();
    const CliResult first = run_cli(dir, base + " --ratio 0.9");
    CHECK(first.exit_code == 0);
    // 10 entries, ratio 0.9: 9 train rows + header, 1 test row + header
    CHECK(count_lines(read_file(dir.file("train.csv"))) == 10);
    CHECK(count_lines(read_file(dir.file("test.csv"))) == 2);

    const std::string train_bytes = read_file(dir.file("train.csv"));
    const std::string test_bytes = read_file(dir.file("test.csv"));
    const CliResult second = run_cli(dir, base + " --ratio 0.9");
    CHECK(second.exit_code == 0);
    CHECK(read_file(dir.file("train.csv")) == train_bytes);
    CHECK(read_file(dir.file("test.csv")) == test_bytes);

    const CliResult bad = run_cli(dir, base + " --ratio 1.5");
    CHECK(bad.exit_code == 2);
    CHECK(bad.err.find("ratio") != std::string::npos);
}

TEST_CASE("train handles every model kind and validates input") {
    TempDir dir;
    write_fixture(dir);
    const std::string obs = " --observations " + dir.file("obs.csv").string();
    const std::string feat = " --features " + dir.file("feat.csv").string();

    SUBCASE("feat-nnls writes a model with the data's shape") {
        const CliResult r = run_cli(dir, "train --model feat-nnls" + obs + feat + " --out " +
                                             dir.file("m.model").string());
        CHECK(r.exit_code == 0);
        CHECK(r.out.find("model=feat-nnls") != std::string::npos);
        const std::string model = read_file(dir.file("m.model"));
        CHECK(model.find("kind=feat-nnls\n") == 0);
        CHECK(model.find("dims=4x3\n") != std::string::npos);
    }

    SUBCASE("als-neg trains without features") {
        const CliResult r = run_cli(dir, "train --model als-neg" + obs + " --iters 2 --out " +
                                             dir.file("m.model").string());
        CHECK(r.exit_code == 0);
    }

    SUBCASE("ifts without features is a validation error") {
        const CliResult r = run_cli(dir, "train --model ifts" + obs + " --out " +
                                             dir.file("m.model").string());
        CHECK(r.exit_code == 2);
    }

    SUBCASE("unknown model kind exits 2") {
        const CliResult r = run_cli(dir, "train --model nonsense" + obs + " --out " +
                                             dir.file("m.model").string());
        CHECK(r.exit_code == 2);
    }

    SUBCASE("ifts --iters 1 reports a single sweep") {
        const CliResult r = run_cli(dir, "train --model ifts" + obs + feat +
                                             " --iters 1 --factors 2 --out " +
                                             dir.file("m.model").string());
        CHECK(r.exit_code == 0);
        CHECK(r.out.find("sweeps=1") != std::string::npos);
        CHECK(r.out.find("final_objective=") != std::string::npos);
    }
}

TEST_CASE("eval writes reports, pr curves, and rejects mismatched data") {
    TempDir dir;
    write_eval_fixture(dir);
    const std::string obs = " --observations " + dir.file("obs.csv").string();
    const std::string feat = " --features " + dir.file("feat.csv").string();
    REQUIRE(run_cli(dir, "split" + obs + " --ratio 0.8 --seed 3 --train-out " +
                             dir.file("train.csv").string() + " --test-out " +
                             dir.file("test.csv").string())
                .exit_code == 0);
    REQUIRE(run_cli(dir, "train --model feat-nnls --observations " +
                             dir.file("train.csv").string() + feat + " --out " +
                             dir.file("m.model").string())
                .exit_code == 0);

    const std::string eval_base = "eval --model-file " + dir.file("m.model").string() +
                                  " --train " + dir.file("train.csv").string() + " --test " +
                                  dir.file("test.csv").string() + feat;

    SUBCASE("metric=pr emits a 100-line curve file") {
        const CliResult r =
            run_cli(dir, eval_base + " --metric pr --out " + dir.file("report.txt").string());
        CHECK(r.exit_code == 0);
        const std::string csv = read_file(dir.file("report.txt.pr.csv"));
        CHECK(count_lines(csv) == 101); // header + 100 points
        const std::string report = read_file(dir.file("report.txt"));
        CHECK(report.find("pr_point=100,") != std::string::npos);
        CHECK(report.find("mpr=") == std::string::npos);
    }

    SUBCASE("metric=mpr writes the mpr and ratio metadata") {
        const CliResult r =
            run_cli(dir, eval_base + " --metric mpr --out " + dir.file("report.txt").string());
        CHECK(r.exit_code == 0);
        const std::string report = read_file(dir.file("report.txt"));
        CHECK(report.find("model=feat-nnls") != std::string::npos);
        CHECK(report.find("mpr=") != std::string::npos);
        // 24 entries split 19/5: the report carries the realized ratio
        CHECK(report.find("ratio=" + std::string(taskrec::format_double(19.0 / 24.0)) + "\n") !=
              std::string::npos);
    }

    SUBCASE("perfect-oracle fixture model reports mpr=0") {
        // 2 workers, 3 tasks; train: w0-t0, w1-t1; test: w0-t2, w1-t0
        write_file(dir.file("toy_train.csv"), "worker_id,task_id,count\nw0,t0,1\nw1,t1,1\n");
        write_file(dir.file("toy_test.csv"), "worker_id,task_id,count\nw0,t2,1\nw1,t0,1\n");
        // 1-factor latent model: u = (1,1), v = (3,1,2) ranks each test task first
        write_file(dir.file("oracle.model"),
                   "kind=ifts\nu_dims=2x1\nv_dims=3x1\nalpha=50\nlambda=0.01\n"
                   "iterations=1\nseed=1\n1\n1\n3\n1\n2\n");
        const CliResult r = run_cli(dir, "eval --model-file " + dir.file("oracle.model").string() +
                                             " --train " + dir.file("toy_train.csv").string() +
                                             " --test " + dir.file("toy_test.csv").string() +
                                             " --metric mpr --out " +
                                             dir.file("toy_report.txt").string());
        CHECK(r.exit_code == 0);
        CHECK(read_file(dir.file("toy_report.txt")).find("mpr=0\n") != std::string::npos);
    }

    SUBCASE("task-count mismatch between model and data exits 2") {
        // latent factors exist only for training-time tasks, so a test file
        // introducing a new task id cannot be scored
        REQUIRE(run_cli(dir, "train --model ifts --observations " +
                                 dir.file("train.csv").string() + feat +
                                 " --factors 2 --iters 2 --out " +
                                 dir.file("latent.model").string())
                    .exit_code == 0);
        write_file(dir.file("extra_test.csv"),
                   "worker_id,task_id,count\nw0,t0,1\nw1,textra,2\n");
        const CliResult r = run_cli(dir, "eval --model-file " +
                                             dir.file("latent.model").string() + " --train " +
                                             dir.file("train.csv").string() + " --test " +
                                             dir.file("extra_test.csv").string() +
                                             " --metric mpr --out " +
                                             dir.file("report.txt").string());
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("mismatch") != std::string::npos);
    }
}

TEST_CASE("recommend prints ranked candidates and validates the worker") {
    TempDir dir;
    write_fixture(dir);
    const std::string obs = " --observations " + dir.file("obs.csv").string();
    const std::string feat = " --features " + dir.file("feat.csv").string();
    REQUIRE(run_cli(dir, "train --model feat-nnls" + obs + feat + " --out " +
                             dir.file("m.model").string())
                .exit_code == 0);
    const std::string base = "recommend --model-file " + dir.file("m.model").string() + obs + feat;

    SUBCASE("top-k larger than the candidate count prints all candidates") {
        // w0 completed t0,t1,t2; candidates are t3,t4
        const CliResult r = run_cli(dir, base + " --worker w0 --top-k 10");
        CHECK(r.exit_code == 0);
        CHECK(count_lines(r.out) == 2);
        CHECK(r.out.find("1,t") == 0);
    }

    SUBCASE("repeated invocations are byte-identical") {
        const CliResult a = run_cli(dir, base + " --worker w1 --top-k 3");
        const CliResult b = run_cli(dir, base + " --worker w1 --top-k 3");
        CHECK(a.exit_code == 0);
        CHECK(a.out == b.out);
        CHECK(count_lines(a.out) == 2); // w1 completed 3 of 5 tasks
    }

    SUBCASE("unknown worker exits 2") {
        const CliResult r = run_cli(dir, base + " --worker nobody");
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("unknown worker") != std::string::npos);
    }

    SUBCASE("worker with every task in training prints nothing and exits 0") {
        write_file(dir.file("full.csv"),
                   "worker_id,task_id,count\nw0,t0,1\nw0,t1,1\n");
        write_file(dir.file("full_feat.csv"), "task_id,feature_id\nt0,f0\nt1,f0\n");
        REQUIRE(run_cli(dir, "train --model feat-nnls --observations " +
                                 dir.file("full.csv").string() + " --features " +
                                 dir.file("full_feat.csv").string() + " --out " +
                                 dir.file("full.model").string())
                    .exit_code == 0);
        const CliResult r = run_cli(dir, "recommend --model-file " +
                                             dir.file("full.model").string() +
                                             " --observations " + dir.file("full.csv").string() +
                                             " --features " + dir.file("full_feat.csv").string() +
                                             " --worker w0");
        CHECK(r.exit_code == 0);
        CHECK(r.out.empty());
    }
}

TEST_CASE("synth writes three files and validates parameters") {
    TempDir dir;
    const std::string outs = " --out-obs " + dir.file("obs.csv").string() + " --out-feat " +
                             dir.file("feat.csv").string() + " --out-truth " +
                             dir.file("truth.csv").string();
    const CliResult r = run_cli(dir, "synth --workers 20 --tasks 15 --features 8 "
                                     "--features-per-task 2 --active-features 3 --seed 5" +
                                         outs);
    CHECK(r.exit_code == 0);
    CHECK(read_file(dir.file("obs.csv")).find("worker_id,task_id,count\n") == 0);
    CHECK(read_file(dir.file("feat.csv")).find("task_id,feature_id\n") == 0);
    CHECK(read_file(dir.file("truth.csv")).find("worker_id,feature_id,weight\n") == 0);

    SUBCASE("seeded reruns are byte-identical") {
        const std::string obs_bytes = read_file(dir.file("obs.csv"));
        const CliResult again = run_cli(dir, "synth --workers 20 --tasks 15 --features 8 "
                                             "--features-per-task 2 --active-features 3 --seed 5" +
                                                 outs);
        CHECK(again.exit_code == 0);
        CHECK(read_file(dir.file("obs.csv")) == obs_bytes);
    }

    SUBCASE("invalid parameters exit 2") {
        const CliResult bad =
            run_cli(dir, "synth --features 4 --features-per-task 9" + outs);
        CHECK(bad.exit_code == 2);
    }
}

TEST_CASE("every subcommand lists its flags with defaults in --help") {
    TempDir dir;
    const CliResult train_help = run_cli(dir, "train --help");
    CHECK(train_help.exit_code == 0);
    for (const std::string flag : {"--model", "--observations", "--features", "--out", "--alpha",
                                   "--lambda", "--factors", "--iters", "--beta-neg", "--seed",
                                   "--threads"})
        CHECK(train_help.out.find(flag) != std::string::npos);
    CHECK(train_help.out.find("50") != std::string::npos);   // alpha default
    CHECK(train_help.out.find("0.01") != std::string::npos); // lambda default

    const CliResult split_help = run_cli(dir, "split --help");
    CHECK(split_help.out.find("--ratio") != std::string::npos);
    CHECK(split_help.out.find("0.9") != std::string::npos);

    const CliResult rec_help = run_cli(dir, "recommend --help");
    CHECK(rec_help.out.find("--top-k") != std::string::npos);
    CHECK(rec_help.out.find("10") != std::string::npos);

    const CliResult eval_help = run_cli(dir, "eval --help");
    CHECK(eval_help.out.find("--metric") != std::string::npos);

    const CliResult synth_help = run_cli(dir, "synth --help");
    CHECK(synth_help.out.find("--intensity") != std::string::npos);
}

} // TEST_SUITE

int main(int argc, char** argv) {
    doctest::Context context;
    if (argc > 1 && argv[argc - 1][0] != '-') {
        g_binary = argv[argc - 1];
        --argc;
    }
    if (g_binary.empty()) {
        const char* env = std::getenv("TASKREC_BIN");
        if (env != nullptr) g_binary = env;
    }
    if (g_binary.empty()) {
        std::fprintf(stderr, "cli_tests: pass the taskrec binary path as the last argument\n");
        return 1;
    }
    context.applyCommandLine(argc, argv);
    return context.run();
}
