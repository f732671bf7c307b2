#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "qapswarm/cli.hpp"

using namespace qapswarm;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "qapswarm");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t line_count(const std::filesystem::path& p) {
    const auto text = slurp(p);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::filesystem::path write_instance(const std::filesystem::path& dir, const std::string& name, std::size_t n,
                                     std::uint32_t seed) {
    const auto path = dir / (name + ".dat");
    write_text(path, format_instance(oracle::random_instance(n, seed)));
    return path;
}

}  // namespace

TEST(Cli, SolveWritesOutputs) {
    const auto dir = oracle::temp_dir("cli_solve");
    const auto inst = write_instance(dir, "toy6", 6, 1);
    const auto out = dir / "out";
    const auto r = run_cli({"solve", inst.string(), "--swarms", "3", "--swarm-size", "4", "--max-iters", "10",
                            "--out", out.string(), "--known-best", "100", "--swarm-stats"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("instance=toy6"), std::string::npos);
    EXPECT_NE(r.out.find("gap="), std::string::npos);
    EXPECT_NE(r.out.find("buffers: "), std::string::npos);
    EXPECT_EQ(line_count(out / "stats.csv"), 12u);
    EXPECT_EQ(line_count(out / "pmf.csv"), 1u + 11u * 60u);
    EXPECT_EQ(line_count(out / "swarms.csv"), 12u);
    const auto sln = parse_reference_solution(slurp(out / "solution.txt"));
    const auto instance = load_instance(inst.string());
    EXPECT_EQ(evaluate_cost(instance, sln.permutation), sln.cost);
}

TEST(Cli, SolveErrorsMapToExitCodes) {
    const auto dir = oracle::temp_dir("cli_errors");
    const auto inst = write_instance(dir, "toy5", 5, 2);
    EXPECT_EQ(run_cli({"solve", (dir / "missing.dat").string()}).code, 3);
    EXPECT_EQ(run_cli({"solve", inst.string(), "--c1", "2"}).code, 2);
    EXPECT_EQ(run_cli({"solve", inst.string(), "--sx", "nope"}).code, 2);
    EXPECT_EQ(run_cli({"solve", inst.string(), "--bogus"}).code, 2);
    EXPECT_EQ(run_cli({"solve", inst.string(), "--depth", "5"}).code, 2);
    EXPECT_EQ(run_cli({"solve", inst.string(), "--migration", "0.5"}).code, 2);
    const auto capped = run_cli({"solve", inst.string(), "--mem-cap", "1KiB", "--out", (dir / "o").string()});
    EXPECT_EQ(capped.code, 2);
    EXPECT_NE(capped.err.find("mem-cap"), std::string::npos);
    EXPECT_FALSE(std::filesystem::exists(dir / "o" / "stats.csv"));
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, ValidateMatchMismatchAndBadFile) {
    const auto dir = oracle::temp_dir("cli_validate");
    write_text(dir / "two.dat", "2 0 1 1 0 0 3 3 0\n");
    write_text(dir / "good.sln", "2 6\n1 2\n");
    write_text(dir / "wrong.sln", "2 7\n1 2\n");
    write_text(dir / "dup.sln", "2 6\n1 1\n");
    write_text(dir / "big.sln", "3 6\n1 2 3\n");
    const auto dat = (dir / "two.dat").string();
    auto r = run_cli({"validate", dat, (dir / "good.sln").string()});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "match: 6\n");
    r = run_cli({"validate", dat, (dir / "wrong.sln").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.out, "mismatch: declared 7, recomputed 6\n");
    EXPECT_EQ(run_cli({"validate", dat, (dir / "dup.sln").string()}).code, 3);
    EXPECT_EQ(run_cli({"validate", dat, (dir / "big.sln").string()}).code, 3);
}

TEST(Cli, SweepAppendsOneRowPerRun) {
    const auto dir = oracle::temp_dir("cli_sweep");
    const auto a = write_instance(dir, "alpha", 5, 3);
    const auto b = write_instance(dir, "beta", 6, 4);
    write_text(dir / "runs.txt", "# two runs\n" + a.string() + " --swarms 2 --swarm-size 3 --max-iters 5\n\n" +
                                     b.string() + " --swarms 3 --swarm-size 2 --max-iters 5 --sv raw --known-best 50\n");
    const auto out = dir / "sweep";
    auto r = run_cli({"sweep", (dir / "runs.txt").string(), "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto csv = out / "sweep_results.csv";
    EXPECT_EQ(line_count(csv), 3u);
    const auto text = slurp(csv);
    EXPECT_EQ(text.rfind("instance,swarms,swarm_size,total_particles,c1,c2,c3,velocity_kernel,migration_factor,"
                         "reached_goal,reference_value,gap,iteration,status\n",
                         0),
              0u);
    EXPECT_NE(text.find("alpha,2,3,6,0.5,0.5,0.5,Norm,0,"), std::string::npos);
    EXPECT_NE(text.find("beta,3,2,6,0.5,0.5,0.5,Raw,0,"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(out / "run_2" / "stats.csv"));
    // a second sweep appends without repeating the header
    r = run_cli({"sweep", (dir / "runs.txt").string(), "--out", out.string()});
    EXPECT_EQ(line_count(csv), 5u);
}

TEST(Cli, SweepRecordsFailuresAndContinues) {
    const auto dir = oracle::temp_dir("cli_sweep_bad");
    const auto good = write_instance(dir, "good", 5, 5);
    write_text(dir / "runs.txt", (dir / "absent.dat").string() + "\n" + good.string() + " --swarms 2 --swarm-size 2 --max-iters 3\n");
    const auto out = dir / "sweep";
    const auto r = run_cli({"sweep", (dir / "runs.txt").string(), "--out", out.string()});
    EXPECT_EQ(r.code, 0);
    const auto text = slurp(out / "sweep_results.csv");
    EXPECT_EQ(line_count(out / "sweep_results.csv"), 3u);
    EXPECT_NE(text.find(",,,,,,,,,,,,,error: "), std::string::npos);
    EXPECT_NE(text.find(",ok\n"), std::string::npos);

    write_text(dir / "all_bad.txt", (dir / "absent.dat").string() + "\n");
    EXPECT_EQ(run_cli({"sweep", (dir / "all_bad.txt").string(), "--out", (dir / "s2").string()}).code, 3);
    EXPECT_EQ(run_cli({"sweep", (dir / "nolist.txt").string()}).code, 3);
}

TEST(Cli, RepeatsUseConsecutiveSeeds) {
    const auto dir = oracle::temp_dir("cli_repeats");
    const auto inst = write_instance(dir, "rep", 6, 6);
    const auto r = run_cli({"solve", inst.string(), "--swarms", "2", "--swarm-size", "3", "--max-iters", "4",
                            "--repeats", "3", "--seed", "10", "--out", (dir / "o").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (int s : {10, 11, 12}) {
        EXPECT_TRUE(std::filesystem::exists(dir / "o" / ("seed_" + std::to_string(s)) / "solution.txt"));
        EXPECT_NE(r.out.find("seed=" + std::to_string(s)), std::string::npos);
    }
}

TEST(Cli, NoTimingOutputsAreByteIdenticalAcrossWorkerCounts) {
    const auto dir = oracle::temp_dir("cli_bytes");
    const auto inst = write_instance(dir, "bytes", 8, 7);
    std::vector<std::string> files;
    for (const char* workers : {"1", "2", "8"}) {
        const auto out = dir / (std::string("w") + workers);
        const auto r = run_cli({"solve", inst.string(), "--swarms", "4", "--swarm-size", "5", "--max-iters", "15",
                                "--migration", "0.25", "--workers", workers, "--no-timing", "--out", out.string()});
        ASSERT_EQ(r.code, 0) << r.err;
        files.push_back(slurp(out / "stats.csv") + slurp(out / "pmf.csv") + slurp(out / "solution.txt"));
    }
    EXPECT_EQ(files[0], files[1]);
    EXPECT_EQ(files[0], files[2]);
}

TEST(Cli, FingerprintIgnoresSeedAndWorkers) {
    SolverConfig a, b;
    b.seed = 99;
    b.workers = 7;
    EXPECT_EQ(cli::config_fingerprint(a), cli::config_fingerprint(b));
    b.swarms = 3;
    EXPECT_NE(cli::config_fingerprint(a), cli::config_fingerprint(b));
}

TEST(Cli, ValidateChr12aReferenceSolution) {
    const std::filesystem::path dir(QAPSWARM_DEFAULT_DATA_DIR);
    if (!std::filesystem::exists(dir / "chr12a.dat") || !std::filesystem::exists(dir / "chr12a.sln")) {
        GTEST_SKIP() << "chr12a.dat/.sln not found in " << dir;
    }
    const auto r = run_cli({"validate", (dir / "chr12a.dat").string(), (dir / "chr12a.sln").string()});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "match: 9552\n");
}
