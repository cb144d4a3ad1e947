#include "precml/bench/cli.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace precml;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
    std::vector<const char*> argv{"precml_cli"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Drops the last CSV column (wall_seconds).
std::string without_wall(const std::string& csv) {
    std::string out;
    for (const auto& l : lines(csv)) out += l.substr(0, l.rfind(',')) + '\n';
    return out;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "precml_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST(Cli, Catalog) {
    const CliRun r = cli({"catalog"});
    ASSERT_EQ(r.code, 0);
    const auto l = lines(r.out);
    EXPECT_EQ(l[0], "name,dim,lo,hi,max_arity,formula");
    EXPECT_EQ(l.size(), builtin_catalog().size() + 1);
    const CliRun j = cli({"catalog", "--format", "json"});
    const auto arr = nlohmann::json::parse(j.out);
    EXPECT_EQ(arr.size(), builtin_catalog().size());
    EXPECT_EQ(arr[0]["name"], "cos2x");
}

TEST(Cli, SweepSchemaAndDeterminism) {
    const CliRun a = cli({"sweep", "--method", "simplex", "--target", "xy", "--sizes", "128,256,512", "--seed", "0"});
    ASSERT_EQ(a.code, 0) << a.err;
    const auto l = lines(a.out);
    ASSERT_EQ(l.size(), 4u);
    EXPECT_EQ(l[0], "method,target,n_train,n_params,seed,train_rmse_rel,test_rmse_rel,wall_seconds");
    for (std::size_t i = 1; i < 4; ++i) {
        const auto f = split_csv_line(l[i]);
        ASSERT_EQ(f.size(), 8u);
        EXPECT_EQ(f[0], "simplex");
        EXPECT_EQ(f[1], "xy");
        EXPECT_EQ(f[4], "0");
    }
    // Global flags work before the subcommand too.
    const CliRun b = cli({"--seed", "0", "sweep", "--method", "simplex", "--target", "xy", "--sizes", "128,256,512"});
    EXPECT_EQ(without_wall(a.out), without_wall(b.out));
}

TEST(Cli, PowerlawPipeline) {
    const fs::path csv = scratch("sweep.csv");
    const CliRun s = cli({"sweep", "--method", "spline-3", "--target", "cos2x", "--sizes", "16,32,64,128,256", "--out", csv.string()});
    ASSERT_EQ(s.code, 0) << s.err;
    EXPECT_TRUE(s.out.empty());
    const CliRun p = cli({"powerlaw", "--in", csv.string(), "--floor", "1e-13"});
    ASSERT_EQ(p.code, 0) << p.err;
    const auto l = lines(p.out);
    ASSERT_EQ(l.size(), 2u);
    EXPECT_EQ(l[0], "alpha,log_intercept,r_squared,floor_cutoff,points_used");
    const auto f = split_csv_line(l[1]);
    EXPECT_NEAR(parse_double(f[0]), 4.0, 0.5);
    EXPECT_GT(parse_double(f[2]), 0.9);
    const CliRun pj = cli({"powerlaw", "--in", csv.string(), "--format", "json"});
    EXPECT_TRUE(nlohmann::json::parse(pj.out).contains("alpha"));
}

TEST(Cli, FitThenSpectrum) {
    const fs::path model = scratch("model.json");
    const CliRun f = cli({"fit", "--method", "tanh-mlp", "--target", "cos2x", "--size", "40", "--width", "5", "--optimizer", "bfgs",
                       "--bfgs-iters", "200", "--test-size", "2000", "--out", model.string()});
    ASSERT_EQ(f.code, 0) << f.err;
    const auto l = lines(f.out);
    ASSERT_EQ(l.size(), 2u);
    EXPECT_EQ(split_csv_line(l[1])[0], "tanh-mlp");
    const auto j = nlohmann::json::parse(slurp(model));
    EXPECT_EQ(j["method"], "tanh-mlp");
    const Mlp net = mlp_from_json(j["model"]);
    EXPECT_EQ(net.param_count(), j["n_params"].get<long>());

    const CliRun s = cli({"spectrum", "--model", model.string(), "--target", "cos2x", "--size", "40"});
    ASSERT_EQ(s.code, 0) << s.err;
    const auto sl = lines(s.out);
    EXPECT_EQ(sl[0], "index,eigenvalue,grad_projection_abs");
    EXPECT_EQ(static_cast<Eigen::Index>(sl.size()) - 1, net.param_count());
}

TEST(Cli, FitReportsGadgetReference) {
    const CliRun f = cli({"fit", "--method", "tanh-mlp", "--target", "xy", "--size", "100", "--width", "4", "--depth", "2",
                       "--steps", "100", "--test-size", "1000", "--format", "json"});
    ASSERT_EQ(f.code, 0) << f.err;
    const auto j = nlohmann::json::parse(f.out);
    ASSERT_FALSE(j["reference_loss"].is_null());
    EXPECT_LE(j["reference_loss"].get<double>(), 1e-6);
    EXPECT_EQ(j["train_rmse_rel"].get<double>(), j["optimization_error_est"].get<double>() + j["reference_loss"].get<double>());
}

TEST(Cli, BoostHistoryPhases) {
    const fs::path model = scratch("boost.json");
    const CliRun b = cli({"boost", "--target", "poly1d", "--widths", "20,20", "--optimizer", "bfgs", "--bfgs-iters", "500",
                       "--out", model.string()});
    ASSERT_EQ(b.code, 0) << b.err;
    const auto l = lines(b.out);
    EXPECT_EQ(l[0], "step,mse,rmse_rel,phase");
    std::set<std::string> phases;
    for (std::size_t i = 1; i < l.size(); ++i) phases.insert(split_csv_line(l[i])[3]);
    EXPECT_EQ(phases, (std::set<std::string>{"stage1", "stage2"}));
    const auto j = nlohmann::json::parse(slurp(model));
    EXPECT_EQ(mlp_from_json(j["model"]).layer_dims(), (std::vector<int>{1, 40, 40, 1}));
}

TEST(Cli, InvalidFlagsGiveUsage) {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"sweep", "--method", "simplex", "--target", "xy"},
             {"sweep", "--method", "simplex", "--target", "xy", "--sizes", "1,2", "--bogus"},
             {"catalog", "--format", "xml"},
             {},
         }) {
        const CliRun r = cli(args);
        EXPECT_NE(r.code, 0);
        EXPECT_NE(r.err.find("Usage"), std::string::npos) << r.err;
    }
    const CliRun bad = cli({"sweep", "--method", "nope", "--target", "xy", "--sizes", "8"});
    EXPECT_NE(bad.code, 0);
    EXPECT_NE(bad.err.find("unknown method"), std::string::npos);
}

TEST(Cli, BinaryExitCodes) {
    const std::string bin = PRECML_CLI_PATH;
    EXPECT_EQ(std::system((bin + " catalog > /dev/null").c_str()), 0);
    EXPECT_NE(std::system((bin + " --no-such-flag > /dev/null 2>&1").c_str()), 0);
}
