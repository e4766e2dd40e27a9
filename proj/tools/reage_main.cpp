// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "reage/config.hpp"
#include "reage/errors.hpp"
#include "reage/oracle_check.hpp"
#include "reage/pipeline.hpp"
#include "reage/trajectory_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

int exit_code_for(reage::ErrorKind kind) {
    switch (kind) {
    case reage::ErrorKind::io:
        return kExitIo;
    case reage::ErrorKind::numeric_divergence:
        return kExitNumeric;
    default:
        return kExitValidation;
    }
}

// RunConfig keys exposed as --flags; the flag is the key with '_' replaced by '-'
struct RunFlags {
    std::string config_file;
    std::map<std::string, std::string> values;
    bool record_timing = false;

    void attach(CLI::App& cmd) {
        cmd.add_option("--config", config_file, "flat key = value config file; flags override it");
        for (const auto& key : reage::config_keys()) {
            if (key == "record_timing") {
                continue;
            }
            std::string flag = "--" + key;
            for (char& ch : flag) {
                if (ch == '_') {
                    ch = '-';
                }
            }
            cmd.add_option_function<std::string>(
                flag, [this, key](const std::string& v) { values[key] = v; }, "config key " + key);
        }
        cmd.add_flag("--record-timing", record_timing, "store wall_time in edit reports");
    }

    reage::RunConfig resolve() const {
        reage::ConfigValues merged;
        if (!config_file.empty()) {
            merged = reage::parse_config_text(reage::read_text_file(config_file));
        }
        for (const auto& [k, v] : values) {
            merged[k] = v;
        }
        if (record_timing) {
            merged["record_timing"] = "true";
        }
        return reage::config_from_values(merged);
    }
};

int cmd_invert(const RunFlags& flags) {
    const auto result = reage::run_invert(flags.resolve());
    std::cout << "trajectory " << reage::payload_path(result.trajectory_prefix).string() << "\n"
              << "manifest " << result.manifest_path.string() << "\n"
              << "config_hash " << result.config_hash << "\n";
    return kExitOk;
}

int cmd_edit(const RunFlags& flags) {
    const auto result = reage::run_edit(flags.resolve());
    std::cout << "latent " << reage::payload_path(result.latent_prefix).string() << "\n"
              << "trace " << result.trace_path.string() << "\n"
              << "report " << result.report_path.string() << "\n"
              << "recon_error_vs_source " << result.report["recon_error_vs_source"].dump() << "\n";
    return kExitOk;
}

int cmd_eval(const RunFlags& flags) {
    const auto config = flags.resolve();
    const auto report = reage::run_eval(config);
    if (config.out.empty()) {
        std::cout << report.dump(2) << "\n";
    } else {
        for (const auto& r : report["results"]) {
            std::cout << r["metric"].get<std::string>() << " " << r["value"].dump() << "\n";
        }
    }
    return kExitOk;
}

int cmd_verify_oracle(const reage::OracleCheckConfig& config) {
    const auto report = reage::verify_oracle(config);
    for (std::size_t m = 0; m < report.mixtures.size(); ++m) {
        const auto& s = report.mixtures[m];
        std::printf("mixture %zu: %s  comparisons=%zu beyond_%.0f_se=%zu max_|z|=%.3f\n", m,
                    s.pass ? "PASS" : "FAIL", s.comparisons, config.z_limit, s.outside, s.max_abs_z);
    }
    std::printf("verify-oracle: %s (%zu mixtures x %zu points, %zu samples, %.2f s)\n", report.pass ? "PASS" : "FAIL",
                config.mixtures, config.points, config.samples, report.seconds);
    return report.pass ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reage: inversion-based face re-aging machinery on desk-scale latents"};
    app.require_subcommand(1);

    RunFlags invert_flags;
    auto* invert = app.add_subcommand("invert", "invert a source latent into a trajectory");
    invert_flags.attach(*invert);

    RunFlags edit_flags;
    auto* edit = app.add_subcommand("edit", "edit a stored trajectory (angular or aac mode)");
    edit_flags.attach(*edit);

    RunFlags eval_flags;
    auto* eval = app.add_subcommand("eval", "evaluate identity and biometric metrics over fixtures");
    eval_flags.attach(*eval);

    reage::OracleCheckConfig oracle;
    auto* verify = app.add_subcommand("verify-oracle", "check the analytic denoiser against Monte-Carlo estimates");
    verify->add_option("--mixtures", oracle.mixtures, "random mixtures")->check(CLI::PositiveNumber);
    verify->add_option("--points", oracle.points, "(z_t, t) points per mixture")->check(CLI::PositiveNumber);
    verify->add_option("--samples", oracle.samples, "Monte-Carlo samples per point")->check(CLI::PositiveNumber);
    verify->add_option("--dim", oracle.dim, "data dimension")->check(CLI::PositiveNumber);
    verify->add_option("--steps", oracle.steps, "schedule length")->check(CLI::Range(1, 1000));
    verify->add_option("--seed", oracle.seed, "seed for mixtures, points and sampling");
    verify->add_option("--workers", oracle.workers, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (invert->parsed()) {
            return cmd_invert(invert_flags);
        }
        if (edit->parsed()) {
            return cmd_edit(edit_flags);
        }
        if (eval->parsed()) {
            return cmd_eval(eval_flags);
        }
        return cmd_verify_oracle(oracle);
    } catch (const reage::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}
