#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ara3c/agent.hpp"
#include "ara3c/dynamics.hpp"
#include "ara3c/errors.hpp"
#include "ara3c/eval.hpp"
#include "ara3c/io.hpp"
#include "ara3c/trainer.hpp"

namespace py = pybind11;
using namespace ara3c;

PYBIND11_MODULE(_ara3c, m) {
    m.doc() = "Adversarially robust A3C on the pendulum swing-up task";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DivergenceError>(m, "DivergenceError");
    py::register_exception<IoError>(m, "IoError");

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("uniform", py::overload_cast<>(&Rng::uniform))
        .def("uniform", py::overload_cast<double, double>(&Rng::uniform))
        .def("normal", py::overload_cast<>(&Rng::normal))
        .def("normal", py::overload_cast<double, double>(&Rng::normal))
        .def_static("derive", &Rng::derive, py::arg("seed"), py::arg("stream"));

    py::class_<PendulumParams>(m, "PendulumParams")
        .def(py::init<>())
        .def_readwrite("rod_mass", &PendulumParams::rod_mass)
        .def_readwrite("rod_length", &PendulumParams::rod_length)
        .def_readwrite("gravity", &PendulumParams::gravity)
        .def_readwrite("clog_mass", &PendulumParams::clog_mass)
        .def_readwrite("dt", &PendulumParams::dt)
        .def_readwrite("max_speed", &PendulumParams::max_speed)
        .def_readwrite("max_torque", &PendulumParams::max_torque)
        .def_readwrite("difficulty", &PendulumParams::difficulty)
        .def_readwrite("noise_std", &PendulumParams::noise_std)
        .def_readwrite("episode_len", &PendulumParams::episode_len)
        .def("validate", &PendulumParams::validate);

    py::class_<PendulumState>(m, "PendulumState")
        .def(py::init<>())
        .def(py::init([](double theta, double theta_dot) {
                 return PendulumState{theta, theta_dot};
             }),
             py::arg("theta"), py::arg("theta_dot"))
        .def_readwrite("theta", &PendulumState::theta)
        .def_readwrite("theta_dot", &PendulumState::theta_dot);

    py::class_<Observation>(m, "Observation")
        .def(py::init<>())
        .def(py::init([](double c, double s, double d) { return Observation{c, s, d}; }),
             py::arg("cos_theta"), py::arg("sin_theta"), py::arg("theta_dot"))
        .def_readonly("cos_theta", &Observation::cos_theta)
        .def_readonly("sin_theta", &Observation::sin_theta)
        .def_readonly("theta_dot", &Observation::theta_dot);

    py::class_<StepResult>(m, "StepResult")
        .def_readonly("next_state", &StepResult::next_state)
        .def_readonly("observation", &StepResult::observation)
        .def_readonly("reward", &StepResult::reward)
        .def_readonly("applied_protagonist_torque", &StepResult::applied_protagonist_torque)
        .def_readonly("applied_adversary_torque", &StepResult::applied_adversary_torque);

    py::class_<ImpulseSchedule>(m, "ImpulseSchedule")
        .def(py::init([](int start, int duration, double torque) {
                 return ImpulseSchedule{start, duration, torque};
             }),
             py::arg("start_step"), py::arg("duration_steps"), py::arg("torque"))
        .def_readwrite("start_step", &ImpulseSchedule::start_step)
        .def_readwrite("duration_steps", &ImpulseSchedule::duration_steps)
        .def_readwrite("torque", &ImpulseSchedule::torque);

    m.def("wrap_angle", &wrap_angle, py::arg("angle"));
    m.def("make_observation", &make_observation, py::arg("state"));
    m.def("reward", &reward, py::arg("theta"), py::arg("theta_dot"), py::arg("protagonist_action"));
    m.def("reward_lower_bound", &reward_lower_bound, py::arg("params"));
    m.def("reset", &reset, py::arg("params"), py::arg("rng"));
    m.def("step", &step, py::arg("state"), py::arg("params"), py::arg("protagonist_action"),
          py::arg("adversary_action"), py::arg("rng"), py::arg("external_torque") = 0.0);
    m.def("impulse_torque", &impulse_torque, py::arg("schedule"), py::arg("step_index"));

    py::class_<PendulumEnv>(m, "PendulumEnv")
        .def(py::init<const PendulumParams&>(), py::arg("params"))
        .def("reset", &PendulumEnv::reset, py::arg("rng"))
        .def("reset_to", &PendulumEnv::reset_to, py::arg("state"))
        .def("step", &PendulumEnv::step, py::arg("protagonist_action"), py::arg("adversary_action"),
             py::arg("rng"), py::arg("external_torque") = 0.0)
        .def_property_readonly("state", &PendulumEnv::state)
        .def_property_readonly("steps_taken", &PendulumEnv::steps_taken)
        .def_property_readonly("episode_over", &PendulumEnv::episode_over);

    py::class_<GaussianAction>(m, "GaussianAction")
        .def_readonly("mean", &GaussianAction::mean)
        .def_readonly("stddev", &GaussianAction::stddev)
        .def_readonly("sample", &GaussianAction::sample)
        .def_readonly("log_prob", &GaussianAction::log_prob);

    py::class_<ActorCriticParams>(m, "ActorCriticParams")
        .def_readonly("action_scale", &ActorCriticParams::action_scale)
        .def_property_readonly("actor_hidden", &ActorCriticParams::actor_hidden)
        .def_property_readonly("critic_hidden", &ActorCriticParams::critic_hidden);

    m.def("act", &act, py::arg("params"), py::arg("obs"), py::arg("rng"),
          py::arg("deterministic") = false);
    m.def("state_value", &state_value, py::arg("params"), py::arg("obs"));
    m.def("policy_moments", &policy_moments, py::arg("params"), py::arg("obs"));

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_property(
            "algo", [](const TrainConfig& c) { return algo_name(c.algo); },
            [](TrainConfig& c, const std::string& name) { c.algo = algo_from_name(name); })
        .def_readwrite("workers", &TrainConfig::workers)
        .def_readwrite("global_episodes", &TrainConfig::global_episodes)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("gamma", &TrainConfig::gamma)
        .def_readwrite("entropy_beta", &TrainConfig::entropy_beta)
        .def_readwrite("actor_lr", &TrainConfig::actor_lr)
        .def_readwrite("critic_lr", &TrainConfig::critic_lr)
        .def_readwrite("difficulty", &TrainConfig::difficulty)
        .def_readwrite("reward_shift", &TrainConfig::reward_shift)
        .def_readwrite("reward_scale", &TrainConfig::reward_scale)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("eval_every", &TrainConfig::eval_every)
        .def_readwrite("env", &TrainConfig::env)
        .def("validate", &TrainConfig::validate)
        .def("env_params", &TrainConfig::env_params);

    py::class_<CurvePoint>(m, "CurvePoint")
        .def_readonly("episode", &CurvePoint::episode)
        .def_readonly("worker", &CurvePoint::worker)
        .def_readonly("reward", &CurvePoint::reward)
        .def_readonly("wallclock_s", &CurvePoint::wallclock_s);

    py::class_<TrainedModel>(m, "TrainedModel")
        .def_readonly("config", &TrainedModel::config)
        .def_readonly("episode_count", &TrainedModel::episode_count)
        .def_readonly("protagonist", &TrainedModel::protagonist)
        .def_readonly("adversary", &TrainedModel::adversary);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("model", &TrainResult::model)
        .def_readonly("curve", &TrainResult::curve);

    m.def(
        "train",
        [](const TrainConfig& config, const TrainedModel* resume_from) {
            py::gil_scoped_release release;
            return train(config, resume_from);
        },
        py::arg("config"), py::arg("resume_from") = nullptr);

    m.def(
        "evaluate",
        [](const ActorCriticParams& policy, const PendulumParams& env, const std::string& attack,
           double magnitude, const ActorCriticParams* adversary, int n_episodes,
           std::uint64_t seed, bool deterministic, std::optional<PendulumState> fixed_start) {
            EvalOptions options;
            options.n_episodes = n_episodes;
            options.seed = seed;
            options.deterministic = deterministic;
            options.fixed_start = fixed_start;
            const Attack a{attack_from_name(attack), magnitude, adversary};
            py::gil_scoped_release release;
            return evaluate(policy, env, a, options);
        },
        py::arg("policy"), py::arg("env"), py::arg("attack") = "none", py::arg("magnitude") = 0.0,
        py::arg("adversary") = nullptr, py::arg("n_episodes") = 20, py::arg("seed") = 0,
        py::arg("deterministic") = true, py::arg("fixed_start") = std::nullopt);

    py::class_<SeedResult>(m, "SeedResult")
        .def_readonly("seed", &SeedResult::seed)
        .def_readonly("rewards", &SeedResult::rewards);

    py::class_<SweepPoint>(m, "SweepPoint")
        .def_readonly("value", &SweepPoint::value)
        .def_readonly("env", &SweepPoint::env)
        .def_readonly("per_seed", &SweepPoint::per_seed)
        .def_readonly("mean", &SweepPoint::mean)
        .def_readonly("stddev", &SweepPoint::stddev)
        .def_readonly("n_episodes", &SweepPoint::n_episodes);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("sweep_variable", &EvalReport::sweep_variable)
        .def_readonly("units", &EvalReport::units)
        .def_readonly("policy_id", &EvalReport::policy_id)
        .def_readonly("points", &EvalReport::points);

    m.def(
        "attack_sweep",
        [](const ActorCriticParams& policy, const PendulumParams& env, const std::string& attack,
           const ActorCriticParams* adversary, const std::vector<double>& magnitudes, int n_seeds,
           int episodes_per_seed, std::uint64_t base_seed, const std::string& policy_id) {
            SweepOptions options;
            options.n_seeds = n_seeds;
            options.episodes_per_seed = episodes_per_seed;
            options.base_seed = base_seed;
            const AttackKind kind = attack_from_name(attack);
            py::gil_scoped_release release;
            return attack_sweep(policy, env, kind, adversary, magnitudes, options, policy_id);
        },
        py::arg("policy"), py::arg("env"), py::arg("attack"), py::arg("adversary") = nullptr,
        py::arg("magnitudes") = std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0},
        py::arg("n_seeds") = 5, py::arg("episodes_per_seed") = 20, py::arg("base_seed") = 0,
        py::arg("policy_id") = "");

    m.def(
        "clog_sweep",
        [](const ActorCriticParams& policy, const PendulumParams& env,
           const std::vector<double>& clog_masses, int n_seeds, int episodes_per_seed,
           std::uint64_t base_seed, const std::string& policy_id) {
            SweepOptions options;
            options.n_seeds = n_seeds;
            options.episodes_per_seed = episodes_per_seed;
            options.base_seed = base_seed;
            py::gil_scoped_release release;
            return clog_sweep(policy, env, clog_masses, options, policy_id);
        },
        py::arg("policy"), py::arg("env"),
        py::arg("clog_masses") = std::vector<double>{0.0, 0.074, 0.148, 0.221, 0.295},
        py::arg("n_seeds") = 5, py::arg("episodes_per_seed") = 20, py::arg("base_seed") = 0,
        py::arg("policy_id") = "");

    py::class_<TraceRow>(m, "TraceRow")
        .def_readonly("t", &TraceRow::t)
        .def_readonly("theta", &TraceRow::theta)
        .def_readonly("theta_dot", &TraceRow::theta_dot)
        .def_readonly("a_mu", &TraceRow::a_mu)
        .def_readonly("a_nu", &TraceRow::a_nu)
        .def_readonly("r", &TraceRow::r);

    py::class_<TraceRecord>(m, "TraceRecord").def_readonly("rows", &TraceRecord::rows);

    m.def(
        "run_trace",
        [](const ActorCriticParams& policy, const PendulumParams& env, const std::string& attack,
           double magnitude, const ActorCriticParams* adversary,
           std::optional<ImpulseSchedule> impulse, int total_steps, std::uint64_t seed,
           bool deterministic) {
            TraceOptions options;
            options.total_steps = total_steps;
            options.seed = seed;
            options.deterministic = deterministic;
            const Attack a{attack_from_name(attack), magnitude, adversary};
            py::gil_scoped_release release;
            return run_trace(policy, env, a, impulse, options);
        },
        py::arg("policy"), py::arg("env"), py::arg("attack") = "none", py::arg("magnitude") = 0.0,
        py::arg("adversary") = nullptr, py::arg("impulse") = std::nullopt,
        py::arg("total_steps") = 1000, py::arg("seed") = 0, py::arg("deterministic") = true);

    m.def("recovery_time", &recovery_time, py::arg("trace"), py::arg("impulse_end"),
          py::arg("threshold") = -0.1, py::arg("sustain") = 50);

    py::class_<Checkpoint>(m, "Checkpoint")
        .def_readonly("format_version", &Checkpoint::format_version)
        .def_readonly("created", &Checkpoint::created)
        .def_readonly("seed", &Checkpoint::seed)
        .def_readonly("model", &Checkpoint::model);

    m.def(
        "save_checkpoint",
        [](const TrainedModel& model, const std::filesystem::path& path) {
            save_checkpoint(make_checkpoint(model), path);
        },
        py::arg("model"), py::arg("path"));
    m.def("load_checkpoint", &load_checkpoint, py::arg("path"));
    m.def("config_to_json", &config_to_json, py::arg("config"));
    m.def("config_from_json", &config_from_json, py::arg("text"));
}
