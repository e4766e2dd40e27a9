// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "test_support.hpp"

using namespace reage::testing;
using nlohmann::json;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    std::filesystem::path dir;

    void SetUp() override {
        dir = scratch_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
        setenv("REAGE_FIXTURE_ROOT", REAGE_SOURCE_DIR, 1);
    }

    CliResult run(const std::string& args) const {
        const auto out = dir / "stdout.txt";
        const auto err = dir / "stderr.txt";
        const std::string cmd = std::string("\"") + REAGE_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                                err.string() + "\"";
        const int status = std::system(cmd.c_str());
        CliResult r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

    std::string oracle_flags(const std::string& seed = "2026", const std::string& steps = "50",
                             const std::string& src = "Photo of a 20 years old person") const {
        return "--denoiser oracle:fixtures/mixture_2d.json --seed " + seed + " --steps " + steps +
               " --src-prompt '" + src + "' --tgt-prompt 'Photo of a 60 years old person' --trajectory '" +
               (dir / "traj").string() + "' --out '" + (dir / "edit").string() + "'";
    }

    std::string toy_flags() const {
        return "--config '" + std::string(REAGE_SOURCE_DIR) + "/configs/toy_aac.conf' --trajectory '" +
               (dir / "traj").string() + "' --out '" + (dir / "edit").string() + "'";
    }

    std::vector<json> trace() const {
        std::vector<json> lines;
        std::ifstream in(dir / "edit.trace.jsonl");
        std::string line;
        while (std::getline(in, line)) {
            lines.push_back(json::parse(line));
        }
        return lines;
    }
};

}  // namespace

TEST_F(Cli, InvertThenAngularEditOnOracle) {
    const auto inv = run("invert " + oracle_flags());
    ASSERT_EQ(inv.code, 0) << inv.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "traj.bin"));
    EXPECT_EQ(std::filesystem::file_size(dir / "traj.bin"), 51u * 2u * 4u);
    const auto manifest = json::parse(slurp(dir / "traj.manifest.json"));
    EXPECT_EQ(manifest["command"], "invert");
    EXPECT_EQ(manifest["config"]["seed"], "2026");

    const auto ed = run("edit " + oracle_flags());
    ASSERT_EQ(ed.code, 0) << ed.err;
    const auto report = json::parse(slurp(dir / "edit.report.json"));
    EXPECT_EQ(report["mode"], "angular");
    EXPECT_EQ(report["steps"], 50);
    EXPECT_TRUE(report["wall_time"].is_null());
    EXPECT_TRUE(report["recon_error_vs_source"].is_number());
    EXPECT_EQ(report["config_hash"], manifest["config_hash"]);
    EXPECT_EQ(trace().size(), 50u);
    EXPECT_TRUE(std::filesystem::exists(dir / "edit.bin"));

    const auto timed = run("edit --record-timing " + oracle_flags());
    ASSERT_EQ(timed.code, 0) << timed.err;
    EXPECT_TRUE(json::parse(slurp(dir / "edit.report.json"))["wall_time"].is_number());
}

TEST_F(Cli, AacTraceLogsRegimePartition) {
    ASSERT_EQ(run("invert " + toy_flags()).code, 0);
    const auto ed = run("edit " + toy_flags());
    ASSERT_EQ(ed.code, 0) << ed.err;
    std::map<std::string, int> counts;
    const auto lines = trace();
    for (const auto& r : lines) {
        ++counts[r["regime"].get<std::string>()];
        if (r["regime"] == "Adaptive") {
            EXPECT_TRUE(r["eta"].is_number());
            EXPECT_TRUE(r["w"].is_number());
        } else {
            EXPECT_TRUE(r["eta"].is_null());
        }
    }
    ASSERT_EQ(lines.size(), 50u);
    EXPECT_EQ(lines.front()["t"], 50);
    EXPECT_EQ(counts["CrossReplace"], 15);
    EXPECT_EQ(counts["Adaptive"], 21);
    EXPECT_EQ(counts["SelfReplace"], 14);
}

TEST_F(Cli, RepeatedRunsAreBitwiseIdentical) {
    const std::vector<std::string> files{"traj.bin", "traj.json", "traj.manifest.json", "edit.bin",
                                         "edit.json", "edit.trace.jsonl", "edit.report.json"};
    std::map<std::string, std::string> first;
    for (int pass = 0; pass < 2; ++pass) {
        ASSERT_EQ(run("invert " + toy_flags()).code, 0);
        ASSERT_EQ(run("edit " + toy_flags()).code, 0);
        for (const auto& f : files) {
            const auto bytes = slurp(dir / f);
            ASSERT_FALSE(bytes.empty()) << f;
            if (pass == 0) {
                first[f] = bytes;
                std::filesystem::remove(dir / f);
            } else {
                EXPECT_EQ(bytes, first[f]) << f;
            }
        }
    }
}

TEST_F(Cli, ExitCodesByErrorKind) {
    const auto bad_tau = run("invert " + oracle_flags() + " --tau1 10 --tau2 20");
    EXPECT_EQ(bad_tau.code, 2);
    EXPECT_NE(bad_tau.err.find("tau2 (20) and tau1 (10)"), std::string::npos) << bad_tau.err;

    const auto no_seed = run("invert --denoiser toy:1 --src-prompt x --trajectory '" + (dir / "t").string() + "'");
    EXPECT_EQ(no_seed.code, 2);
    EXPECT_NE(no_seed.err.find("seed"), std::string::npos);

    const auto missing = run("edit " + oracle_flags());
    EXPECT_EQ(missing.code, 3);
    EXPECT_NE(missing.err.find((dir / "traj.json").string()), std::string::npos) << missing.err;

    const auto no_mixture = run("invert --denoiser oracle:fixtures/none.json --seed 1 --src-prompt x --trajectory '" +
                                (dir / "t").string() + "'");
    EXPECT_EQ(no_mixture.code, 3);

    const auto unknown_prompt = run("invert " + oracle_flags("2026", "50", "Photo of a cat"));
    EXPECT_EQ(unknown_prompt.code, 2);
    EXPECT_NE(unknown_prompt.err.find("mixture has no condition 'Photo of a cat'"), std::string::npos);

    ASSERT_EQ(run("invert " + oracle_flags()).code, 0);
    const auto other_seed = run("edit " + oracle_flags("2027"));
    EXPECT_EQ(other_seed.code, 2);
    EXPECT_NE(other_seed.err.find("inverted under config hash"), std::string::npos);

    const auto aac_on_oracle = run("edit " + oracle_flags() + " --mode aac");
    EXPECT_EQ(aac_on_oracle.code, 2);
    EXPECT_NE(aac_on_oracle.err.find("attention"), std::string::npos);

    EXPECT_EQ(run("edit " + oracle_flags("2026", "abc")).code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, EvalReportsMetrics) {
    const auto r = run("eval --config '" + std::string(REAGE_SOURCE_DIR) + "/configs/eval.conf' --out '" +
                       (dir / "eval.json").string() + "'");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = json::parse(slurp(dir / "eval.json"));
    std::map<std::string, std::vector<json>> by_metric;
    for (const auto& e : report["results"]) {
        by_metric[e["metric"]].push_back(e);
        EXPECT_EQ(e["config_hash"], report["config_hash"]);
    }
    ASSERT_EQ(by_metric["id_sim_cyc"].size(), 1u);
    EXPECT_EQ(by_metric["id_sim_cyc"][0]["value"].get<double>(), 1.0);
    ASSERT_EQ(by_metric["fnmr_at_fmr"].size(), 2u);
    EXPECT_EQ(by_metric["fnmr_at_fmr"][0]["value"].get<double>(), 0.0);
    EXPECT_NEAR(by_metric["mae"][0]["value"].get<double>(), (2.5 + 1.0 + 6.2 + 5.1) / 4.0, 1e-12);
    EXPECT_GT(by_metric["id_sim_ref"][0]["value"].get<double>(), 0.9);
}

TEST_F(Cli, EvalFixturePipelineAndErrors) {
    const auto r = run("eval --seed 0 --eval-fixture fixtures/eval_edits.json --metrics id_sim_cyc");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = json::parse(r.out);
    EXPECT_NEAR(report["results"][0]["value"].get<double>(), (0.8 + 1.0) / 2.0, 1e-12);

    const auto unknown = run("eval --seed 0 --eval-fixture fixtures/eval_edits.json --metrics kid");
    EXPECT_EQ(unknown.code, 2);
    EXPECT_NE(unknown.err.find("supported metrics: id_sim_cyc, id_sim_ref, fnmr_at_fmr, mae"), std::string::npos);

    const auto missing = run("eval --seed 0 --eval-fixture fixtures/eval_edits.json --metrics id_sim_ref");
    EXPECT_EQ(missing.code, 2);
}

TEST_F(Cli, VerifyOracleSmallRun) {
    const auto r = run("verify-oracle --mixtures 2 --points 10 --samples 20000 --seed 5");
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("verify-oracle: PASS"), std::string::npos);
}
