#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ara3c/agent.hpp"
#include "ara3c/dynamics.hpp"

namespace ara3c {

enum class AttackKind { none, trained_adversary, contrarian, random };

std::string attack_name(AttackKind kind);
AttackKind attack_from_name(const std::string& name);

// Disturbance applied through the adversary channel during evaluation.
//  none:              zero torque
//  trained_adversary: `adversary` policy acting at its own scale
//  contrarian:        -magnitude * sign(protagonist torque)
//  random:            uniform in [-magnitude, magnitude]
// The environment clamp (difficulty * max_torque) applies in every case, so
// the caller controls the effective magnitude through env difficulty.
struct Attack {
    AttackKind kind = AttackKind::none;
    double magnitude = 0.0;
    const ActorCriticParams* adversary = nullptr;  // required for trained_adversary
};

struct EvalOptions {
    int n_episodes = 20;
    std::uint64_t seed = 0;
    bool deterministic = true;  // act with the distribution mean
    std::optional<PendulumState> fixed_start;
};

// Undiscounted reward of each of n_episodes full episodes. Never mutates the
// policy; identical inputs produce identical outputs.
std::vector<double> evaluate(const ActorCriticParams& policy, const PendulumParams& env_params,
                             const Attack& attack, const EvalOptions& options);

struct SeedResult {
    std::uint64_t seed = 0;
    std::vector<double> rewards;  // one entry per episode
};

struct SweepPoint {
    double value = 0.0;
    PendulumParams env;  // exact environment used at this point
    std::vector<SeedResult> per_seed;
    double mean = 0.0;
    double stddev = 0.0;
    int n_episodes = 0;  // total episodes across seeds
};

struct EvalReport {
    std::string sweep_variable;
    std::string units;
    std::string policy_id;
    AttackKind attack_kind = AttackKind::none;
    std::vector<SweepPoint> points;  // in input sweep order
};

struct SweepOptions {
    int n_seeds = 5;
    int episodes_per_seed = 20;
    std::uint64_t base_seed = 0;
    bool deterministic = true;
};

// Fig 2b: evaluation reward as a function of the adversary torque clamp.
// Each magnitude m re-runs evaluation with env difficulty = m / max_torque.
EvalReport attack_sweep(const ActorCriticParams& policy, const PendulumParams& env_params,
                        AttackKind kind, const ActorCriticParams* adversary,
                        const std::vector<double>& magnitudes, const SweepOptions& options,
                        const std::string& policy_id = "");

// Fig 5: clean evaluation across tip-mass values.
EvalReport clog_sweep(const ActorCriticParams& policy, const PendulumParams& env_params,
                      const std::vector<double>& clog_masses, const SweepOptions& options,
                      const std::string& policy_id = "");

struct TraceRow {
    int t = 0;
    double theta = 0.0;
    double theta_dot = 0.0;
    double a_mu = 0.0;
    double a_nu = 0.0;
    double r = 0.0;
};

struct TraceRecord {
    std::vector<TraceRow> rows;
};

struct TraceOptions {
    int total_steps = 1000;
    std::uint64_t seed = 0;
    bool deterministic = true;
};

// Single continuous run (no episode resets) with an optional impulse window
// added through the unclamped external channel. Fig 7 and Fig 8 both come
// from this.
TraceRecord run_trace(const ActorCriticParams& policy, const PendulumParams& env_params,
                      const Attack& attack, const std::optional<ImpulseSchedule>& impulse,
                      const TraceOptions& options);

// Steps from the end of the impulse until reward stays above `threshold` for
// `sustain` consecutive steps. Capped at the remaining trace length when the
// policy never recovers.
int recovery_time(const TraceRecord& trace, int impulse_end, double threshold = -0.1,
                  int sustain = 50);

}  // namespace ara3c
