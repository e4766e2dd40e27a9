// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "oracles.hpp"
#include "reage/aac.hpp"
#include "reage/angular.hpp"
#include "reage/errors.hpp"
#include "reage/eval.hpp"
#include "reage/gaussian_mixture.hpp"
#include "reage/oracle_check.hpp"
#include "reage/prompt.hpp"
#include "reage/toy_denoiser.hpp"
#include "test_support.hpp"

using namespace reage;
using namespace reage::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

Latent random_latent(std::mt19937_64& rng, Shape shape) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(shape_size(shape));
    for (double& x : v) {
        x = n(rng);
    }
    return Latent(std::move(v), std::move(shape));
}

Outcome oracle_validity() {
    OracleCheckConfig cfg;  // 3 mixtures x 100 points, 10^5 samples each, 2-D
    cfg.workers = std::max(1u, std::thread::hardware_concurrency());
    const auto report = verify_oracle(cfg);
    std::size_t comparisons = 0;
    std::size_t outside = 0;
    double max_z = 0.0;
    for (const auto& m : report.mixtures) {
        comparisons += m.comparisons;
        outside += m.outside;
        max_z = std::max(max_z, m.max_abs_z);
    }
    const bool pass = report.pass && report.mixtures.size() >= 3 && report.seconds < 30.0;
    return {pass, fmt("%zu mixtures, %zu comparisons, %zu beyond 3 SE, max |z| %.2f, %.1f s", report.mixtures.size(),
                      comparisons, outside, max_z, report.seconds)};
}

// invert-then-replay over many samples of the fixture mixture; stacked relative L2
double ddim_reconstruction_error(const GaussianMixtureModel& gmm, std::size_t T, std::size_t samples,
                                 std::uint64_t seed) {
    const auto sched = default_schedule(T);
    const GaussianMixtureDenoiser den(gmm, sched);
    const auto c = PromptEmbedding::null(1, 1);
    std::mt19937_64 rng(seed);
    double err2 = 0.0;
    double ref2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const auto z0 = gmm.sample(c, rng, {gmm.dim()});
        const auto traj = invert_trajectory(z0, c, den, sched);
        const auto back = replay(traj, c, den, sched, 1.0);
        const double e = l2_norm(back - z0);
        const double r = l2_norm(z0);
        err2 += e * e;
        ref2 += r * r;
    }
    return std::sqrt(err2 / ref2);
}

Outcome ddim_fidelity() {
    const auto gmm = GaussianMixtureModel::from_json_file(source_path("fixtures/mixture_2d.json"));
    const auto start = Clock::now();
    const double e20 = ddim_reconstruction_error(gmm, 20, 256, 2026);
    const double e200 = ddim_reconstruction_error(gmm, 200, 256, 2026);
    const double secs = seconds_since(start);
    const bool pass = e200 < 1e-2 && e200 < e20 && secs < 10.0;
    return {pass, fmt("error(T=200) = %.4e (bound 1e-2), error(T=20) = %.4e, %.2f s", e200, e20, secs)};
}

Outcome algebraic_round_trip() {
    std::mt19937_64 rng(3);
    const auto sched = default_schedule(1000);
    std::uniform_int_distribution<std::size_t> step(1, 1000);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto z = random_latent(rng, {16, 2});
        const auto eps = random_latent(rng, {16, 2});
        const std::size_t t = step(rng);
        const auto back = ddim_inversion_step(ddim_forward_step(z, t, eps, sched), t - 1, eps, sched);
        worst = std::max(worst, relative_l2_error(back, z));
    }
    return {worst <= 1e-6, fmt("1000 triples, worst relative error %.3e (bound 1e-6)", worst)};
}

Outcome angular_identity() {
    const auto sched = default_schedule(50);
    const auto c_src = embed_prompt("Photo of a 20 years old woman");
    const auto c_tgt = embed_prompt("Photo of a 60 years old woman");
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(seed);
        const ToyAttentionDenoiser den(seed, 2);
        const auto z0 = random_latent(rng, {16, 2});
        const auto traj = invert_trajectory(z0, c_src, den, sched);
        AngularConfig cfg;
        cfg.xi = 0.0;
        worst = std::max(worst, l2_norm(angular_edit(traj, c_src, c_src, den, sched, cfg) - z0));
    }
    std::size_t completed = 0;
    std::string failure;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed + 1000);
        const ToyAttentionDenoiser den(seed, 2);
        try {
            const auto traj = invert_trajectory(random_latent(rng, {16, 2}), c_src, den, sched);
            const auto out = angular_edit(traj, c_src, c_tgt, den, sched, AngularConfig{});
            require_finite(out, 0, "edited latent");
            ++completed;
        } catch (const NumericDivergenceError& e) {
            failure = e.what();
        }
    }
    const bool pass = worst <= 1e-6 && completed == 100;
    return {pass, fmt("identity edit max |z - z0| %.3e (bound 1e-6); xi=1.2 completed on %zu/100 seeds%s%s", worst,
                      completed, failure.empty() ? "" : "; ", failure.c_str())};
}

Outcome damping_contraction() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> theta(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> xi(0.0, 3.0);
    std::size_t violations = 0;
    std::size_t equalities = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto o = random_latent(rng, {8});
        // every tenth sample puts one factor at exactly zero so the equality case is exercised
        const double th = i % 20 == 0 ? 0.0 : theta(rng);
        const double x = i % 20 == 10 ? 0.0 : xi(rng);
        const double before = l2_norm(o);
        const double after = l2_norm(damp_offset(o, th, x));
        const bool inactive = x * th == 0.0;
        if (after > before || (inactive && after != before) || (!inactive && !(after < before))) {
            ++violations;
        }
        equalities += inactive ? 1 : 0;
    }
    return {violations == 0, fmt("10000 samples (%zu with xi*theta = 0), %zu violations", equalities, violations)};
}

Outcome aac_partition() {
    const auto sched = default_schedule(50);
    const ToyAttentionDenoiser den(9, 2);
    const auto c_src = embed_prompt("Photo of a 24 years old man");
    const auto c_tgt = embed_prompt("Photo of a 75 years old man");
    std::mt19937_64 rng(9);
    const auto traj = invert_trajectory(random_latent(rng, {16, 2}), c_src, den, sched);
    std::map<Regime, int> counts;
    aac_edit(traj, c_src, c_tgt, den, sched, AacConfig{}, [&](const AacStepRecord& r) { ++counts[r.regime]; });
    const int cross = counts[Regime::cross_replace];
    const int adaptive = counts[Regime::adaptive];
    const int self = counts[Regime::self_replace];
    return {cross == 15 && adaptive == 21 && self == 14,
            fmt("CrossReplace %d, Adaptive %d, SelfReplace %d (expected 15/21/14)", cross, adaptive, self)};
}

Outcome aac_map_invariants() {
    const auto sched = default_schedule(50);
    const ToyAttentionDenoiser den(21, 2);
    const auto c_src = embed_prompt("Photo of a 30 years old woman with olive skin, due to a balanced diet");
    const auto c_tgt = embed_prompt("Photo of a 70 years old woman with olive skin, due to smoking");
    std::mt19937_64 rng(21);
    const auto traj = invert_trajectory(random_latent(rng, {16, 2}), c_src, den, sched);
    double worst = 0.0;
    std::size_t maps = 0;
    aac_edit(traj, c_src, c_tgt, den, sched, AacConfig{}, [&](const AacStepRecord& r) {
        for (const auto& m : r.injected->maps()) {
            worst = std::max(worst, max_row_deviation(m));
            ++maps;
        }
    });

    // endpoints on the toy's own cross-attention geometry
    AttentionMaps one_hot;
    AttentionMaps uniform;
    AttentionMaps other;
    for (int layer = 1; layer <= 16; ++layer) {
        one_hot.add(filled_map(layer, AttentionKind::cross, 2, 16, 32,
                               [](auto h, auto q, auto k) { return k == (q + h) % 32 ? 1.0 : 0.0; }));
        uniform.add(filled_map(layer, AttentionKind::cross, 2, 16, 32, [](auto, auto, auto) { return 1.0 / 32.0; }));
        other.add(random_map(rng, layer, AttentionKind::cross, 2, 16, 32));
    }
    const double w_one_hot = 1.0 - row_entropy_normalized(one_hot);
    const double w_uniform = 1.0 - row_entropy_normalized(uniform);
    const bool endpoints = w_one_hot == 1.0 && w_uniform == 0.0 && blend_maps(one_hot, other, w_one_hot) == one_hot &&
                           blend_maps(uniform, other, w_uniform) == other;
    return {worst <= 1e-5 && maps > 0 && endpoints,
            fmt("%zu injected maps, worst row-sum deviation %.2e (bound 1e-5); one-hot w=%g, uniform w=%g, "
                "endpoint blends %s",
                maps, worst, w_one_hot, w_uniform, endpoints ? "verbatim" : "NOT verbatim")};
}

Outcome kl_entropy_identities() {
    std::mt19937_64 rng(8);
    double worst_self = 0.0;
    double min_kl = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1000; ++i) {
        const std::size_t cols = 2 + static_cast<std::size_t>(i % 31);
        AttentionMaps a;
        AttentionMaps b;
        a.add(random_map(rng, 1, AttentionKind::cross, 2, 4, cols));
        b.add(random_map(rng, 1, AttentionKind::cross, 2, 4, cols));
        worst_self = std::max(worst_self, std::abs(kl_divergence(a, a)));
        min_kl = std::min(min_kl, kl_divergence(a, b));
    }
    const double h_uniform =
        row_entropy_normalized(filled_map(1, AttentionKind::self, 2, 3, 7, [](auto, auto, auto) { return 1.0 / 7.0; }));
    const double h_one_hot = row_entropy_normalized(
        filled_map(1, AttentionKind::self, 2, 3, 7, [](auto, auto q, auto k) { return k == q ? 1.0 : 0.0; }));
    const bool pass = worst_self <= 1e-6 && min_kl >= 0.0 && h_uniform == 1.0 && h_one_hot == 0.0;
    return {pass, fmt("max |KL(m||m)| %.2e, min KL over 1000 pairs %.3e, H(uniform) %g, H(one-hot) %g", worst_self,
                      min_kl, h_uniform, h_one_hot)};
}

Outcome fnmr_oracle() {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> grid(-25, 25);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> target(0.0, 1.0);
    std::size_t mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        ScoreSet s;
        const std::size_t ng = 1 + rng() % 40;
        const std::size_t ni = 1 + rng() % 40;
        const bool coarse = i % 2 == 0;
        for (std::size_t k = 0; k < ng; ++k) {
            s.genuine.push_back(coarse ? grid(rng) / 25.0 : u(rng));
        }
        for (std::size_t k = 0; k < ni; ++k) {
            s.impostor.push_back(coarse ? grid(rng) / 25.0 : u(rng));
        }
        const double fmr = i % 4 == 0 ? 0.0 : target(rng);
        mismatches += fnmr_at_fmr(s, fmr).fnmr == brute_force_fnmr(s, fmr) ? 0 : 1;
    }
    const double hand = fnmr_at_fmr({{0.9, 0.7, 0.4}, {0.3, 0.2, 0.1}}, 0.0).fnmr;
    return {mismatches == 0 && hand == 0.0,
            fmt("1000 random score sets, %zu mismatches against exhaustive scan; hand example FNMR %g", mismatches,
                hand)};
}

Outcome cyclic_sanity() {
    const auto embedder = FixtureEmbedder::from_json_string(
        R"({"ffhq_00042": [0.12, -0.40, 0.33, 0.81], "ffhq_00107": [-0.7, 0.11, 0.02, 0.35]})");
    std::vector<CycleCase> cases = bracket_cycles("ffhq_00042", {"20-29", "50-69", "70+"});
    cases.push_back(*split_at_forty("ffhq_00107", 25));
    const double sim = mean_cyclic_identity_similarity(PassthroughPipeline{}, cases, embedder);

    const auto extractor = FixtureAttributeExtractor::from_json_file(source_path("fixtures/attributes.json"));
    const std::string prompt = build_refined_prompt(extractor.extract("ffhq_00042"));
    const std::string expected =
        "Photo of a 60 years old woman with fair skin with fine wrinkles, due to prolonged sun exposure";
    return {sim == 1.0 && prompt == expected,
            fmt("passthrough ID_sim_cyc %.17g over %zu cycles; prompt \"%s\" %s", sim, cases.size(), prompt.c_str(),
                prompt == expected ? "matches" : "DIFFERS")};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome end_to_end_determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "reage_acceptance_e2e";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    setenv("REAGE_FIXTURE_ROOT", REAGE_SOURCE_DIR, 1);

    struct Case {
        std::string name;
        std::string config;
    };
    const std::vector<Case> cases{{"oracle", "configs/oracle_angular.conf"}, {"toy", "configs/toy_aac.conf"}};
    const std::vector<std::string> suffixes{".bin", ".json", ".manifest.json"};
    const std::vector<std::string> edit_suffixes{".bin", ".json", ".trace.jsonl", ".report.json"};
    std::size_t compared = 0;
    std::vector<std::string> differing;
    for (const auto& c : cases) {
        std::map<std::string, std::string> first;
        for (int pass = 0; pass < 2; ++pass) {
            const std::string flags = "--config '" + source_path(c.config) + "' --trajectory '" +
                                      (dir / (c.name + "_traj")).string() + "' --out '" +
                                      (dir / (c.name + "_edit")).string() + "' >/dev/null";
            for (const char* cmd : {"invert", "edit"}) {
                const std::string line = std::string("\"") + REAGE_CLI + "\" " + cmd + " " + flags;
                if (std::system(line.c_str()) != 0) {
                    return {false, c.name + ": command failed: " + line};
                }
            }
            std::vector<std::filesystem::path> files;
            for (const auto& s : suffixes) {
                files.push_back(dir / (c.name + "_traj" + s));
            }
            for (const auto& s : edit_suffixes) {
                files.push_back(dir / (c.name + "_edit" + s));
            }
            for (const auto& f : files) {
                const auto bytes = slurp(f);
                if (pass == 0) {
                    first[f.string()] = bytes;
                    std::filesystem::remove(f);
                } else {
                    ++compared;
                    if (bytes.empty() || bytes != first[f.string()]) {
                        differing.push_back(f.filename().string());
                    }
                }
            }
        }
    }
    std::string detail = fmt("%zu files compared across two runs each of angular/oracle and aac/toy", compared);
    for (const auto& d : differing) {
        detail += "; differs: " + d;
    }
    return {differing.empty(), detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle validity", oracle_validity},
        {"DDIM fidelity", ddim_fidelity},
        {"algebraic round trip", algebraic_round_trip},
        {"angular identity edit", angular_identity},
        {"damping contraction", damping_contraction},
        {"AAC regime partition", aac_partition},
        {"AAC map invariants", aac_map_invariants},
        {"KL/entropy identities", kl_entropy_identities},
        {"FNMR oracle equivalence", fnmr_oracle},
        {"cyclic protocol sanity", cyclic_sanity},
        {"end-to-end determinism", end_to_end_determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("criterion %zu: %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
