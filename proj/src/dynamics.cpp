#include "ara3c/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "ara3c/errors.hpp"

namespace ara3c {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

}  // namespace

void PendulumParams::validate() const {
    if (!(rod_mass > 0.0)) throw ConfigError("rod_mass must be > 0");
    if (!(rod_length > 0.0)) throw ConfigError("rod_length must be > 0");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(max_speed > 0.0)) throw ConfigError("max_speed must be > 0");
    if (!(max_torque > 0.0)) throw ConfigError("max_torque must be > 0");
    if (!(difficulty >= 0.0 && difficulty <= 1.0)) throw ConfigError("difficulty must be in [0, 1]");
    if (!(clog_mass >= 0.0)) throw ConfigError("clog_mass must be >= 0");
    if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
    if (episode_len < 1) throw ConfigError("episode_len must be >= 1");
}

double wrap_angle(double x) {
    constexpr double two_pi = 2.0 * kPi;
    double w = std::fmod(x + kPi, two_pi);
    if (w < 0.0) w += two_pi;
    w -= kPi;
    if (w >= kPi) w -= two_pi;  // fmod edge: x + pi a hair below a multiple of 2pi
    return w;
}

Observation make_observation(const PendulumState& state) {
    return Observation{std::cos(state.theta), std::sin(state.theta), state.theta_dot};
}

double reward(double theta, double theta_dot, double protagonist_action) {
    return -(theta * theta + 0.1 * theta_dot * theta_dot +
             0.001 * protagonist_action * protagonist_action);
}

double reward_lower_bound(const PendulumParams& params) {
    return reward(-kPi, params.max_speed, params.max_torque);
}

std::pair<PendulumState, Observation> reset(const PendulumParams& params, Rng& rng) {
    params.validate();
    PendulumState state;
    state.theta = rng.uniform(-kPi, kPi);
    state.theta_dot = rng.uniform(-1.0, 1.0);
    return {state, make_observation(state)};
}

StepResult step(const PendulumState& state, const PendulumParams& params,
                double protagonist_action, double adversary_action, Rng& rng,
                double external_torque) {
    if (!std::isfinite(protagonist_action) || !std::isfinite(adversary_action) ||
        !std::isfinite(external_torque)) {
        throw DivergenceError("non-finite action fed to dynamics step");
    }

    const double tau_p = clamp(protagonist_action, -params.max_torque, params.max_torque);
    const double adv_limit = params.difficulty * params.max_torque;
    const double tau_a = clamp(adversary_action, -adv_limit, adv_limit);
    const double u = params.noise_std > 0.0 ? rng.normal(0.0, params.noise_std) : 0.0;
    const double tau = tau_p + tau_a + u + external_torque;

    const double m = params.rod_mass;
    const double l = params.rod_length;
    const double c = params.clog_mass;
    const double gravity_torque = (m * l / 2.0 + c * l) * params.gravity * std::sin(state.theta);
    const double inertia = m * l * l / 3.0 + c * l * l;
    const double alpha = (gravity_torque + tau) / inertia;

    PendulumState next;
    next.theta_dot = clamp(state.theta_dot + alpha * params.dt, -params.max_speed, params.max_speed);
    next.theta = wrap_angle(state.theta + next.theta_dot * params.dt);

    StepResult result;
    result.next_state = next;
    result.observation = make_observation(next);
    result.reward = reward(state.theta, state.theta_dot, tau_p);
    result.applied_protagonist_torque = tau_p;
    result.applied_adversary_torque = tau_a;
    return result;
}

double impulse_torque(const ImpulseSchedule& schedule, int step_index) {
    if (step_index >= schedule.start_step &&
        step_index < schedule.start_step + schedule.duration_steps) {
        return schedule.torque;
    }
    return 0.0;
}

PendulumEnv::PendulumEnv(const PendulumParams& params) : params_(params) {
    params_.validate();
}

Observation PendulumEnv::reset(Rng& rng) {
    auto [state, obs] = ara3c::reset(params_, rng);
    state_ = state;
    steps_taken_ = 0;
    started_ = true;
    return obs;
}

Observation PendulumEnv::reset_to(const PendulumState& state) {
    state_ = PendulumState{wrap_angle(state.theta),
                           std::min(std::max(state.theta_dot, -params_.max_speed), params_.max_speed)};
    steps_taken_ = 0;
    started_ = true;
    return make_observation(state_);
}

StepResult PendulumEnv::step(double protagonist_action, double adversary_action, Rng& rng,
                             double external_torque) {
    StepResult result =
        ara3c::step(state_, params_, protagonist_action, adversary_action, rng, external_torque);
    state_ = result.next_state;
    ++steps_taken_;
    return result;
}

}  // namespace ara3c
