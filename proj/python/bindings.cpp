// Copyright (C) 2026 The reage Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "reage/aac.hpp"
#include "reage/angular.hpp"
#include "reage/errors.hpp"
#include "reage/eval.hpp"
#include "reage/gaussian_mixture.hpp"
#include "reage/prompt.hpp"
#include "reage/schedule.hpp"
#include "reage/toy_denoiser.hpp"

namespace py = pybind11;
using namespace reage;

PYBIND11_MODULE(_reage, m) {
    m.doc() = "Python bindings for the reage core library";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<ShapeMismatchError>(m, "ShapeMismatchError", base.ptr());
    py::register_exception<StepOutOfRangeError>(m, "StepOutOfRangeError", base.ptr());
    py::register_exception<InvariantViolationError>(m, "InvariantViolationError", base.ptr());
    py::register_exception<UnsupportedError>(m, "UnsupportedError", base.ptr());
    py::register_exception<UnknownConditionError>(m, "UnknownConditionError", base.ptr());
    py::register_exception<NumericDivergenceError>(m, "NumericDivergenceError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    py::class_<Latent>(m, "Latent")
        .def(py::init<std::vector<double>, Shape>(), py::arg("values"), py::arg("shape"))
        .def(py::init<std::vector<double>>(), py::arg("values"))
        .def_property_readonly("values", [](const Latent& z) { return z.values(); })
        .def_property_readonly("shape", &Latent::shape)
        .def("__len__", &Latent::size)
        .def("__eq__", [](const Latent& a, const Latent& b) { return a == b; })
        .def("__repr__", [](const Latent& z) { return "Latent(shape=" + shape_to_string(z.shape()) + ")"; });
    m.def("relative_l2_error", &relative_l2_error);

    py::class_<NoiseSchedule>(m, "NoiseSchedule")
        .def_property_readonly("num_steps", &NoiseSchedule::num_steps)
        .def("alpha", &NoiseSchedule::alpha, py::arg("t"));
    m.def("default_schedule", &default_schedule, py::arg("num_steps"));
    m.def("make_schedule", &make_schedule, py::arg("num_steps"), py::arg("beta_start"), py::arg("beta_end"));

    py::class_<PromptEmbedding>(m, "PromptEmbedding")
        .def_property_readonly("label", &PromptEmbedding::label)
        .def_property_readonly("num_tokens", &PromptEmbedding::num_tokens)
        .def_property_readonly("dim", &PromptEmbedding::dim)
        .def_property_readonly("is_null", &PromptEmbedding::is_null)
        .def_static("null_like", &PromptEmbedding::null_like);
    m.def("embed_prompt", [](const std::string& text, std::size_t dim) { return embed_prompt(text, {dim}); },
          py::arg("text"), py::arg("dim") = 8);

    py::class_<Denoiser>(m, "Denoiser")
        .def("predict", [](const Denoiser& d, const Latent& z, std::size_t t,
                           const PromptEmbedding& c) { return d.predict(z, t, c); })
        .def_property_readonly("supports_attention", &Denoiser::supports_attention)
        .def("describe", &Denoiser::describe);
    py::class_<GaussianMixtureModel>(m, "GaussianMixtureModel")
        .def_static("from_json_file", &GaussianMixtureModel::from_json_file)
        .def_static("from_json_string", &GaussianMixtureModel::from_json_string)
        .def("to_json_string", &GaussianMixtureModel::to_json_string)
        .def_property_readonly("dim", &GaussianMixtureModel::dim);
    py::class_<GaussianMixtureDenoiser, Denoiser>(m, "GaussianMixtureDenoiser")
        .def(py::init<GaussianMixtureModel, NoiseSchedule>(), py::arg("gmm"), py::arg("schedule"));
    py::class_<ToyAttentionDenoiser, Denoiser>(m, "ToyAttentionDenoiser")
        .def(py::init([](std::uint64_t seed, std::size_t channels) { return ToyAttentionDenoiser(seed, channels); }),
             py::arg("seed"), py::arg("channels"));
    m.def("analytic_eps", &analytic_eps, py::arg("z_t"), py::arg("t"), py::arg("c"), py::arg("gmm"),
          py::arg("schedule"));

    py::class_<LatentTrajectory>(m, "LatentTrajectory")
        .def_readonly("states", &LatentTrajectory::states)
        .def_readonly("prompt_label", &LatentTrajectory::prompt_label)
        .def_property_readonly("steps", &LatentTrajectory::steps);
    m.def("invert_trajectory", &invert_trajectory, py::arg("z0"), py::arg("c_src"), py::arg("denoiser"),
          py::arg("schedule"));
    m.def("replay", &replay, py::arg("traj"), py::arg("c"), py::arg("denoiser"), py::arg("schedule"),
          py::arg("guidance_scale") = 7.5);
    m.def("angle_at_origin", &angle_at_origin);
    m.def("damp_offset", &damp_offset, py::arg("offset"), py::arg("theta"), py::arg("xi"));
    m.def("cosine_similarity", &cosine_similarity);

    m.def(
        "angular_edit",
        [](const LatentTrajectory& traj, const PromptEmbedding& c_src, const PromptEmbedding& c_tgt,
           const Denoiser& denoiser, const NoiseSchedule& sched, double xi, double guidance_scale) {
            AngularConfig config;
            config.xi = xi;
            config.guidance.scale = guidance_scale;
            config.steps = traj.steps();
            return angular_edit(traj, c_src, c_tgt, denoiser, sched, config);
        },
        py::arg("traj"), py::arg("c_src"), py::arg("c_tgt"), py::arg("denoiser"), py::arg("schedule"),
        py::arg("xi") = 1.2, py::arg("guidance_scale") = 7.5);

    m.def(
        "aac_edit",
        [](const LatentTrajectory& traj, const PromptEmbedding& c_src, const PromptEmbedding& c_tgt,
           const Denoiser& denoiser, const NoiseSchedule& sched, std::size_t tau1, std::size_t tau2, double eta_th,
           double guidance_scale) {
            AacConfig config;
            config.tau1 = tau1;
            config.tau2 = tau2;
            config.eta_th = eta_th;
            config.guidance.scale = guidance_scale;
            config.steps = traj.steps();
            std::vector<std::string> regimes;
            const auto z = aac_edit(traj, c_src, c_tgt, denoiser, sched, config,
                                    [&](const AacStepRecord& r) { regimes.emplace_back(to_string(r.regime)); });
            return std::make_pair(z, regimes);
        },
        py::arg("traj"), py::arg("c_src"), py::arg("c_tgt"), py::arg("denoiser"), py::arg("schedule"),
        py::arg("tau1") = 35, py::arg("tau2") = 15, py::arg("eta_th") = 0.05, py::arg("guidance_scale") = 7.5);
    m.def(
        "regime_for_step",
        [](std::size_t t, std::size_t tau1, std::size_t tau2, std::size_t steps) {
            AacConfig config;
            config.tau1 = tau1;
            config.tau2 = tau2;
            config.steps = steps;
            validate(config);
            return std::string(to_string(regime_for_step(t, config)));
        },
        py::arg("t"), py::arg("tau1") = 35, py::arg("tau2") = 15, py::arg("steps") = 50);

    py::class_<FaceAttributes>(m, "FaceAttributes")
        .def(py::init([](int age, std::string gender, std::string skin, std::string cause) {
                 return FaceAttributes{age, std::move(gender), std::move(skin), std::move(cause)};
             }),
             py::arg("age"), py::arg("gender"), py::arg("skin_tone_texture"), py::arg("cause_description"))
        .def_readwrite("age", &FaceAttributes::age)
        .def_readwrite("gender", &FaceAttributes::gender)
        .def_readwrite("skin_tone_texture", &FaceAttributes::skin_tone_texture)
        .def_readwrite("cause_description", &FaceAttributes::cause_description)
        .def("__eq__", [](const FaceAttributes& a, const FaceAttributes& b) { return a == b; });
    m.def("build_refined_prompt", &build_refined_prompt);
    m.def("parse_refined_prompt", &parse_refined_prompt);
    m.def("build_basic_prompt", &build_basic_prompt, py::arg("age"), py::arg("person"));
    m.def("central_age", &central_age);

    m.def("identity_similarity", &identity_similarity);
    py::class_<FnmrResult>(m, "FnmrResult")
        .def_readonly("fnmr", &FnmrResult::fnmr)
        .def_readonly("threshold", &FnmrResult::threshold);
    m.def(
        "fnmr_at_fmr",
        [](std::vector<double> genuine, std::vector<double> impostor, double fmr_target) {
            return fnmr_at_fmr(ScoreSet{std::move(genuine), std::move(impostor)}, fmr_target);
        },
        py::arg("genuine"), py::arg("impostor"), py::arg("fmr_target"));
    m.def("mean_absolute_error", &mean_absolute_error, py::arg("predicted_ages"), py::arg("target_age"));
}
