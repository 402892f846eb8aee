#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int code;
    std::string out;
};

CliResult run(const std::string& args) {
    const std::string cmd = std::string(AEW_CLI) + " " + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t k = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, k);
    const int status = ::pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("aew_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir_);
        std::mt19937_64 rng(1);
        std::normal_distribution<double> z;
        std::ofstream f(dir_ / "d.csv");
        f << "y,x1,x2,x3,x4,x5,x6\n";
        f.precision(17);
        for (int i = 0; i < 40; ++i) {
            double x[6];
            for (double& v : x) v = z(rng);
            f << x[0] - x[3] + 0.3 * z(rng);
            for (const double v : x) f << ',' << v;
            f << '\n';
        }
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string data() const { return (dir_ / "d.csv").string(); }
    fs::path dir_;
};

TEST_F(Cli, FitPrintsCoefficients) {
    const CliResult r = run("fit --data " + data() + " --sigma 0.3 --t0 100 --t 500 --seed 3");
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "index,beta_mean,beta_thresholded,beta_map");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 6);
    EXPECT_EQ(run("fit --data " + data() + " --sigma 0.3 --t0 100 --t 500 --seed 3").out, r.out);
}

TEST_F(Cli, FitWritesTrace) {
    const std::string trace = (dir_ / "trace.csv").string();
    ASSERT_EQ(run("fit --data " + data() + " --sigma 0.3 --t0 10 --t 20 --normalize --trace " + trace).code, 0);
    std::ifstream in(trace);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "step,size,log_weight,accepted");
}

TEST_F(Cli, DiagnoseFormats) {
    const CliResult csv = run("diagnose --data " + data() + " --s 1,2 --sigma 0.3");
    ASSERT_EQ(csv.code, 0);
    EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')), "s,nu_s,kappa_s,mode,samples,identifiable_2s,rho");
    const CliResult jsonl = run("diagnose --data " + data() + " --s 2 --mode mc --samples 50 --format jsonl");
    ASSERT_EQ(jsonl.code, 0);
    EXPECT_NE(jsonl.out.find("\"mode\":\"mc\""), std::string::npos);
}

TEST_F(Cli, LassoOptions) {
    EXPECT_EQ(run("lasso --data " + data() + " --lambda-l 0.1").code, 0);
    EXPECT_EQ(run("lasso --data " + data() + " --a 2 --sigma 0.3").code, 0);
    EXPECT_EQ(run("lasso --data " + data() + " --a 2 --lambda-l 0.1").code, 2);
}

TEST_F(Cli, Experiment) {
    std::ofstream(dir_ / "spec.txt") << "n=30\np=10\ns_star=2\nreps=2\ntune_reps=1\nburn_in=50\nsteps=100\n";
    const CliResult r = run("experiment --spec " + (dir_ / "spec.txt").string() + " --out " + (dir_ / "out").string());
    ASSERT_EQ(r.code, 0);
    for (const char* f : {"summary.csv", "reps.csv", "spec.txt", "boxplot_linf.svg", "boxplot_l2.svg", "boxplot_fp.svg"}) {
        EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
    }
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("fit").code, 2);
    EXPECT_EQ(run("fit --data /nonexistent.csv").code, 2);
    EXPECT_EQ(run("diagnose --data " + data() + " --mode fancy").code, 2);
    std::ofstream(dir_ / "bad.txt") << "colour=blue\n";
    EXPECT_EQ(run("experiment --spec " + (dir_ / "bad.txt").string()).code, 2);
    std::ofstream(dir_ / "nan.csv") << "y,x1\n1,nan\n2,3\n";
    EXPECT_EQ(run("lasso --data " + (dir_ / "nan.csv").string() + " --lambda-l 0.1").code, 3);
    EXPECT_EQ(run("lasso --data " + data() + " --lambda-l 0.0001").code, 0);
}

}  // namespace
