#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace comet;

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        if (!line.empty() && line.back() == ',') {
            cells.emplace_back();
        }
        rows.push_back(cells);
    }
    return rows;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / ("comet_test_" + name);
    std::filesystem::remove_all(d);
    return d;
}

struct SmallRun {
    CompositeProblem p = comet::testing::synthetic_problem(60, 3, 5, 1e-3, 1e-3);
    Vector xs = reference_solution(p);
    SolverConfig cfg;

    SmallRun() {
        Rng rng(5);
        cfg.x0 = rng.uniform_vector(60, 0.0, 1.0);
        cfg.L0 = p.L_hat;
        cfg.mu = p.mu_hat;
        cfg.gamma0 = p.mu_hat;
        cfg.ref_solution = xs;
        cfg.max_iters = 400;
    }
};

} // namespace

TEST(Csv, OneIterationHasTwoLines) {
    SmallRun run;
    run.cfg.max_iters = 1;
    const auto res = comet_solve(run.p, run.cfg);
    std::ostringstream out;
    write_csv(out, res);
    const auto rows = read_csv(out.str());
    // Header plus the initial point and the single iteration.
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), kCsvHeader);
    for (const auto& r : rows) {
        EXPECT_EQ(r.size(), 10u);
    }
    EXPECT_EQ(rows[2][0], "1");
    EXPECT_TRUE(rows[2][9].empty());
}

TEST(Csv, GapColumnRoundTripsBitExactly) {
    SmallRun run;
    run.cfg.method = Method::fista;
    const auto res = fista_solve(run.p, run.cfg);
    std::ostringstream out;
    write_csv(out, res);
    const auto rows = read_csv(out.str());
    ASSERT_EQ(rows.size(), res.records.size() + 1);
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        EXPECT_EQ(std::stod(rows[i + 1][2]), *res.records[i].gap);
        EXPECT_EQ(std::stod(rows[i + 1][3]), *res.records[i].dist);
        EXPECT_TRUE(rows[i + 1][5].empty());  // no lambda for FISTA
        EXPECT_TRUE(rows[i + 1][6].empty());
    }
}

TEST(Csv, EmitErrors) {
    SolveResult empty;
    EXPECT_THROW(emit_csv(empty, "/tmp/never.csv"), InvalidInput);
    SmallRun run;
    run.cfg.max_iters = 2;
    const auto res = comet_solve(run.p, run.cfg);
    try {
        emit_csv(res, "/nonexistent-dir/x.csv");
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.csv"), std::string::npos);
    }
}

TEST(Verify, VariantThreePassesAllChecks) {
    SmallRun run;
    const auto res = comet_solve(run.p, run.cfg);
    const auto rep = verify_bounds(res, BoundsContext::from(run.p, run.cfg, run.xs));
    ASSERT_EQ(rep.checks.size(), 4u);
    for (const auto& c : rep.checks) {
        EXPECT_EQ(c.status, CheckStatus::pass) << c.name;
    }
}

TEST(Verify, CorruptedLambdaIsFlagged) {
    SmallRun run;
    auto res = comet_solve(run.p, run.cfg);
    ASSERT_GT(res.records.size(), 20u);
    for (std::size_t i = 17; i < res.records.size(); ++i) {
        res.records[i].lambda = 1e-30;
    }
    const auto rep = verify_bounds(res, BoundsContext::from(run.p, run.cfg, run.xs));
    const auto* thm = rep.find("gap_bound");
    ASSERT_NE(thm, nullptr);
    EXPECT_EQ(thm->status, CheckStatus::fail);
    EXPECT_EQ(thm->first_violation, 17u);
    std::ostringstream text;
    write_report(text, rep);
    EXPECT_NE(text.str().find("first violation at k=17"), std::string::npos);
}

TEST(Verify, OtherMethodsAreNotApplicable) {
    SmallRun run;
    for (Method m : {Method::fista, Method::amgs}) {
        run.cfg.method = m;
        const auto res = solve(run.p, run.cfg);
        const auto rep = verify_bounds(res, BoundsContext::from(run.p, run.cfg, run.xs));
        for (const auto& c : rep.checks) {
            EXPECT_EQ(c.status, CheckStatus::not_applicable);
        }
    }
}

TEST(Experiment, ConfigValidation) {
    ExperimentConfig cfg;
    EXPECT_THROW(run_experiment(cfg), InvalidInput);
    cfg.solvers.push_back({"comet1", {}, {}, {}, {}});
    cfg.lambda = -1.0;
    EXPECT_THROW(run_experiment(cfg), InvalidInput);
    cfg.lambda = 0.0;
    cfg.solvers.push_back({"newton", {}, {}, {}, {}});
    EXPECT_THROW(run_experiment(cfg), InvalidInput);
    cfg.solvers.pop_back();
    cfg.problem = "libsvm";
    EXPECT_THROW(run_experiment(cfg), InvalidInput);
}

TEST(Experiment, WritesTracesAndSummary) {
    const auto dir = scratch_dir("experiment");
    ExperimentConfig cfg;
    cfg.m = 80;
    cfg.max_iters = 3000;
    cfg.out_dir = dir.string();
    cfg.verify = true;
    for (const char* s : {"comet1", "comet2", "comet3", "fista", "amgs", "comet1"}) {
        cfg.solvers.push_back({s, {}, {}, {}, {}});
    }
    const auto summary = run_experiment(cfg);
    EXPECT_TRUE(summary.ok);
    for (const char* f : {"comet-v1.csv", "comet-v1-2.csv", "comet-v2.csv", "comet-v3.csv", "fista.csv", "amgs.csv",
                          "summary.csv", "metadata.txt", "comet-v3.bounds.txt"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    }
    // Summary counts agree with the CSV dist column.
    for (const auto& o : summary.solvers) {
        const auto rows = read_csv(slurp(dir / (o.label + ".csv")));
        std::optional<std::size_t> first;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (std::stod(rows[i][3]) <= cfg.target_dist) {
                first = std::stoul(rows[i][0]);
                break;
            }
        }
        EXPECT_EQ(first, o.iters_to_target) << o.label;
        EXPECT_EQ(o.result.records.front().objective, summary.solvers.front().result.records.front().objective);
    }
    const std::string meta = slurp(dir / "metadata.txt");
    EXPECT_NE(meta.find("reference = closed form"), std::string::npos);
    EXPECT_NE(meta.find("data.kappa_hessian"), std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST(Experiment, Gamma0SubstitutionRecorded) {
    ExperimentConfig cfg;
    cfg.m = 40;
    cfg.mu = 0.0;
    cfg.max_iters = 50;
    cfg.solvers.push_back({"comet1", {}, {}, {}, {}});
    cfg.solvers.push_back({"comet3", {}, {}, {}, {}});
    const auto s = run_experiment(cfg);
    EXPECT_TRUE(s.meta.count("comet-v1.gamma0_substitution"));
    EXPECT_EQ(s.solvers[0].status, "max-iters");
    // Variant 3 cannot run without mu; the error stays in its own cell.
    EXPECT_EQ(s.solvers[1].status, "error");
    EXPECT_TRUE(s.meta.count("comet-v3.error"));
    EXPECT_FALSE(s.ok);
}

TEST(Experiment, LibsvmFixture) {
    ExperimentConfig cfg;
    cfg.problem = "libsvm";
    cfg.data_path = std::string(COMET_TEST_DATA_DIR) + "/fixture_20x10.svm";
    cfg.loss = Loss::logistic;
    cfg.lambda = 1e-2;
    cfg.tau = 1e-3;
    cfg.max_iters = 20000;
    cfg.tol = 1e-11;
    cfg.reference_tol = 1e-11;
    cfg.solvers.push_back({"comet1", {}, {}, {}, {}});
    cfg.solvers.push_back({"fista", {}, {}, {}, {}});
    const auto s = run_experiment(cfg);
    EXPECT_TRUE(s.ok) << s.meta.at("reference");
    EXPECT_EQ(s.meta.at("reference"), "COMET + FISTA cross-check");
}
