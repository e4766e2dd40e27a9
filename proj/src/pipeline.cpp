// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include "reage/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "reage/aac.hpp"
#include "reage/angular.hpp"
#include "reage/errors.hpp"
#include "reage/eval.hpp"
#include "reage/gaussian_mixture.hpp"
#include "reage/prompt.hpp"
#include "reage/toy_denoiser.hpp"
#include "reage/trajectory_io.hpp"

namespace reage {

namespace {

using json = nlohmann::json;

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const char* suffix) {
    return std::filesystem::path(prefix.string() + suffix);
}

std::string require_path(const std::string& value, const char* key) {
    if (value.empty()) {
        throw ValidationError(std::string("config field ") + key + " is required for this command");
    }
    return value;
}

PromptEmbedding prompt_or_throw(const std::string& text, const char* key) {
    if (text.empty()) {
        throw ValidationError(std::string("config field ") + key + " is required for this command");
    }
    return embed_prompt(text);
}

template <class F>
void parallel_for(std::size_t n, std::size_t workers, F&& body) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

json metric_entry(const std::string& metric, double value, std::size_t n, const std::string& hash) {
    return json{{"metric", metric}, {"value", value}, {"n", n}, {"config_hash", hash}};
}

}  // namespace

std::filesystem::path resolve_fixture_path(const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative()) {
        if (const char* root = std::getenv(kFixtureRootEnv); root != nullptr && *root != '\0') {
            return std::filesystem::path(root) / p;
        }
    }
    return p;
}

std::unique_ptr<Denoiser> make_denoiser(const RunConfig& config, const NoiseSchedule& sched) {
    const std::string& spec = config.denoiser;
    if (spec.rfind("oracle:", 0) == 0) {
        auto gmm = GaussianMixtureModel::from_json_file(resolve_fixture_path(spec.substr(7)));
        return std::make_unique<GaussianMixtureDenoiser>(std::move(gmm), sched);
    }
    if (spec.rfind("toy:", 0) == 0) {
        const std::string seed_text = spec.substr(4);
        ConfigValues probe{{"seed", seed_text}};
        const auto seed = config_from_values(probe).seed.value();
        const std::size_t channels = config.latent_shape.size() == 2 ? config.latent_shape[1] : 1;
        return std::make_unique<ToyAttentionDenoiser>(seed, channels);
    }
    throw ValidationError("config field denoiser must be 'oracle:<mixture.json>' or 'toy:<seed>', got '" + spec +
                          "'");
}

Latent source_latent(const RunConfig& config, const Denoiser& denoiser) {
    if (!config.input.empty()) {
        return read_latent(resolve_fixture_path(config.input));
    }
    std::mt19937_64 rng(config.seed.value());
    if (const auto* oracle = dynamic_cast<const GaussianMixtureDenoiser*>(&denoiser)) {
        const auto& gmm = oracle->model();
        return gmm.sample(prompt_or_throw(config.src_prompt, "src_prompt"), rng, {gmm.dim()});
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> values(shape_size(config.latent_shape));
    for (double& v : values) {
        v = normal(rng);
    }
    return Latent(std::move(values), config.latent_shape);
}

InvertResult run_invert(const RunConfig& config) {
    validate(config);
    const std::filesystem::path prefix = require_path(config.trajectory, "trajectory");
    const NoiseSchedule sched = default_schedule(config.steps);
    const auto denoiser = make_denoiser(config, sched);
    const PromptEmbedding c_src = prompt_or_throw(config.src_prompt, "src_prompt");
    const Latent z0 = source_latent(config, *denoiser);

    const LatentTrajectory traj = invert_trajectory(z0, c_src, *denoiser, sched);
    const std::string inv_hash = inversion_hash(config);
    write_trajectory(prefix, traj, inv_hash);

    json manifest;
    manifest["format"] = "reage-manifest";
    manifest["command"] = "invert";
    manifest["config_hash"] = config_hash(config);
    manifest["inversion_hash"] = inv_hash;
    manifest["denoiser"] = denoiser->describe();
    manifest["trajectory"] = prefix.string();
    manifest["config"] = config_to_values(config);
    const auto manifest_path = with_suffix(prefix, ".manifest.json");
    write_text_file(manifest_path, manifest.dump(2) + "\n");
    return {prefix, manifest_path, manifest["config_hash"]};
}

EditResult run_edit(const RunConfig& config) {
    validate(config);
    const std::filesystem::path traj_prefix = require_path(config.trajectory, "trajectory");
    const std::filesystem::path out_prefix = require_path(config.out, "out");
    const auto started = std::chrono::steady_clock::now();

    StoredTrajectory stored = read_trajectory(traj_prefix);
    const std::string expected = inversion_hash(config);
    if (stored.config_hash != expected) {
        throw ValidationError("trajectory " + traj_prefix.string() + " was inverted under config hash " +
                              stored.config_hash + ", this config has " + expected +
                              " (steps, seed, denoiser, src_prompt, latent_shape or input differ)");
    }
    const LatentTrajectory& traj = stored.trajectory;
    const NoiseSchedule sched = default_schedule(config.steps);
    const auto denoiser = make_denoiser(config, sched);
    const PromptEmbedding c_src = prompt_or_throw(config.src_prompt, "src_prompt");
    const PromptEmbedding c_tgt = prompt_or_throw(config.tgt_prompt, "tgt_prompt");

    std::ostringstream trace;
    Latent z0_tgt;
    if (config.mode == EditMode::angular) {
        z0_tgt = angular_edit(traj, c_src, c_tgt, *denoiser, sched, angular_config(config),
                              [&](const AngularStepRecord& r) {
                                  json rec{{"t", r.t},
                                           {"theta_src", r.theta_src},
                                           {"theta_tgt", r.theta_tgt},
                                           {"beta", r.beta},
                                           {"src_deviation", r.src_deviation},
                                           {"offset_src_norm", r.offset_src_norm},
                                           {"offset_tgt_norm", r.offset_tgt_norm}};
                                  trace << rec.dump() << '\n';
                              });
    } else {
        z0_tgt = aac_edit(traj, c_src, c_tgt, *denoiser, sched, aac_config(config), [&](const AacStepRecord& r) {
            json rec{{"t", r.t},
                     {"regime", to_string(r.regime)},
                     {"eta", r.eta ? json(*r.eta) : json(nullptr)},
                     {"w", r.w ? json(*r.w) : json(nullptr)},
                     {"kind", to_string(r.injected_kind)},
                     {"layers_injected", r.layers_injected}};
            trace << rec.dump() << '\n';
        });
    }

    EditResult result;
    result.latent_prefix = out_prefix;
    result.trace_path = with_suffix(out_prefix, ".trace.jsonl");
    result.report_path = with_suffix(out_prefix, ".report.json");
    write_latent(out_prefix, z0_tgt);
    write_text_file(result.trace_path, trace.str());

    json report;
    report["mode"] = to_string(config.mode);
    report["z0_tgt_path"] = payload_path(out_prefix).string();
    report["recon_error_vs_source"] = relative_l2_error(z0_tgt, traj.at(0));
    report["steps"] = config.steps;
    report["config_hash"] = config_hash(config);
    report["trajectory"] = traj_prefix.string();
    if (config.record_timing) {
        report["wall_time"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    } else {
        report["wall_time"] = nullptr;
    }
    write_text_file(result.report_path, report.dump(2) + "\n");
    result.report = std::move(report);
    return result;
}

const std::vector<std::string>& supported_metrics() {
    static const std::vector<std::string> metrics = {"id_sim_cyc", "id_sim_ref", "fnmr_at_fmr", "mae"};
    return metrics;
}

json run_eval(const RunConfig& config) {
    validate(config);
    const auto& supported = supported_metrics();
    std::vector<std::string> metrics = config.metrics.empty() ? supported : config.metrics;
    for (const auto& m : metrics) {
        if (std::find(supported.begin(), supported.end(), m) == supported.end()) {
            std::string list;
            for (const auto& s : supported) {
                list += (list.empty() ? "" : ", ") + s;
            }
            throw ValidationError("unknown metric '" + m + "'; supported metrics: " + list);
        }
    }
    const auto fixture_path = resolve_fixture_path(require_path(config.eval_fixture, "eval_fixture"));
    const std::string fixture_text = read_text_file(fixture_path);
    json fx;
    try {
        fx = json::parse(fixture_text);
    } catch (const json::exception& e) {
        throw ValidationError("eval fixture " + fixture_path.string() + ": " + e.what());
    }
    const std::string hash = config_hash(config);

    json results = json::array();
    try {
        const bool needs_embeddings =
            std::find(metrics.begin(), metrics.end(), "id_sim_cyc") != metrics.end() ||
            std::find(metrics.begin(), metrics.end(), "id_sim_ref") != metrics.end();
        const FixtureEmbedder embedder(needs_embeddings ? fx.at("embeddings").get<std::map<std::string, std::vector<double>>>()
                                                        : std::map<std::string, std::vector<double>>{});
        for (const auto& metric : metrics) {
            if (metric == "id_sim_cyc") {
                std::vector<CycleCase> cases;
                for (const auto& c : fx.at("cycles")) {
                    cases.push_back({c.at("input").get<std::string>(), c.at("src_age").get<int>(),
                                     c.at("tgt_age").get<int>()});
                }
                const std::string kind = fx.value("pipeline", std::string("passthrough"));
                std::unique_ptr<EditPipeline> pipeline;
                std::set<std::string> missing;
                if (kind == "passthrough") {
                    pipeline = std::make_unique<PassthroughPipeline>();
                    for (const auto& c : cases) {
                        if (!embedder.contains(c.input_id)) {
                            missing.insert("embedding '" + c.input_id + "'");
                        }
                    }
                } else if (kind == "fixture") {
                    std::map<FixturePipeline::Key, std::string> table;
                    for (const auto& e : fx.at("edits")) {
                        table[{e.at("input").get<std::string>(), e.at("src_age").get<int>(), e.at("tgt_age").get<int>()}] =
                            e.at("output").get<std::string>();
                    }
                    auto fp = std::make_unique<FixturePipeline>(std::move(table));
                    for (const auto& c : cases) {
                        if (!embedder.contains(c.input_id)) {
                            missing.insert("embedding '" + c.input_id + "'");
                        }
                        const auto fwd = fp->find(c.input_id, c.src_age, c.tgt_age);
                        if (!fwd) {
                            missing.insert("edit '" + c.input_id + "' " + std::to_string(c.src_age) + "->" +
                                           std::to_string(c.tgt_age));
                            continue;
                        }
                        const auto back = fp->find(*fwd, c.tgt_age, c.src_age);
                        if (!back) {
                            missing.insert("edit '" + *fwd + "' " + std::to_string(c.tgt_age) + "->" +
                                           std::to_string(c.src_age));
                        } else if (!embedder.contains(*back)) {
                            missing.insert("embedding '" + *back + "'");
                        }
                    }
                    pipeline = std::move(fp);
                } else {
                    throw ValidationError("eval fixture pipeline must be 'passthrough' or 'fixture', got '" + kind +
                                          "'");
                }
                if (!missing.empty()) {
                    std::string list;
                    for (const auto& m : missing) {
                        list += "\n  " + m;
                    }
                    throw ValidationError("eval fixture " + fixture_path.string() + " is missing " +
                                          std::to_string(missing.size()) + " id(s):" + list);
                }
                if (cases.empty()) {
                    throw ValidationError("eval fixture has no cycles");
                }
                std::vector<double> sims(cases.size());
                parallel_for(cases.size(), config.workers, [&](std::size_t i) {
                    sims[i] = cyclic_identity_similarity(*pipeline, cases[i].input_id, cases[i].src_age,
                                                         cases[i].tgt_age, embedder);
                });
                double total = 0.0;
                for (double s : sims) {
                    total += s;
                }
                auto entry = metric_entry(metric, total / static_cast<double>(sims.size()), sims.size(), hash);
                entry["pipeline"] = kind;
                results.push_back(entry);
            } else if (metric == "id_sim_ref") {
                std::set<std::string> missing;
                const auto& refs = fx.at("references");
                for (const auto& r : refs) {
                    for (const char* key : {"re_aged", "reference"}) {
                        const auto id = r.at(key).get<std::string>();
                        if (!embedder.contains(id)) {
                            missing.insert("embedding '" + id + "'");
                        }
                    }
                }
                if (!missing.empty()) {
                    std::string list;
                    for (const auto& m : missing) {
                        list += "\n  " + m;
                    }
                    throw ValidationError("eval fixture " + fixture_path.string() + " is missing " +
                                          std::to_string(missing.size()) + " id(s):" + list);
                }
                if (refs.empty()) {
                    throw ValidationError("eval fixture has no reference pairs");
                }
                double total = 0.0;
                for (const auto& r : refs) {
                    total += reference_identity_similarity(r.at("re_aged").get<std::string>(),
                                                           r.at("reference").get<std::string>(), embedder);
                }
                results.push_back(metric_entry(metric, total / static_cast<double>(refs.size()), refs.size(), hash));
            } else if (metric == "fnmr_at_fmr") {
                ScoreSet scores{fx.at("scores").at("genuine").get<std::vector<double>>(),
                                fx.at("scores").at("impostor").get<std::vector<double>>()};
                for (double target : config.fmr_targets) {
                    const auto r = fnmr_at_fmr(scores, target);
                    auto entry = metric_entry(metric, r.fnmr, scores.genuine.size() + scores.impostor.size(), hash);
                    entry["fmr_target"] = target;
                    // JSON has no infinities; an unbounded threshold is reported as a string
                    entry["threshold"] = std::isfinite(r.threshold) ? json(r.threshold)
                                                                     : json(r.threshold > 0 ? "+inf" : "-inf");
                    results.push_back(entry);
                }
            } else if (metric == "mae") {
                const auto predicted = fx.at("ages").at("predicted").get<std::vector<double>>();
                const double target = fx.at("ages").at("target").get<double>();
                auto entry = metric_entry(metric, mean_absolute_error(predicted, target), predicted.size(), hash);
                entry["target_age"] = target;
                results.push_back(entry);
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError("eval fixture " + fixture_path.string() + ": " + e.what());
    }

    json report;
    report["config_hash"] = hash;
    report["fixture"] = {{"path", config.eval_fixture}, {"fnv1a", fnv1a_hex(fixture_text)}};
    report["results"] = results;
    if (!config.out.empty()) {
        write_text_file(config.out, report.dump(2) + "\n");
    }
    return report;
}

}  // namespace reage
