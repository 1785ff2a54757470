#include "ara3c/eval.hpp"

#include <algorithm>
#include <cmath>

#include "ara3c/errors.hpp"

namespace ara3c {

namespace {

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Attack torque for one step. The attack stream is separate from the policy
// and environment stream so a zero-magnitude random attack is bit-identical
// to no attack at all.
double attack_torque(const Attack& attack, const Observation& obs, double protagonist_action,
                     Rng& attack_rng, bool deterministic) {
    switch (attack.kind) {
        case AttackKind::none: return 0.0;
        case AttackKind::trained_adversary:
            return act(*attack.adversary, obs, attack_rng, deterministic).sample;
        case AttackKind::contrarian: return -attack.magnitude * sign_of(protagonist_action);
        case AttackKind::random: return attack_rng.uniform(-attack.magnitude, attack.magnitude);
    }
    return 0.0;
}

void validate_attack(const Attack& attack) {
    if (attack.kind == AttackKind::trained_adversary && attack.adversary == nullptr) {
        throw ConfigError("trained_adversary attack requires an adversary policy");
    }
    if (attack.magnitude < 0.0) throw ConfigError("attack magnitude must be >= 0");
}

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    if (xs.empty()) return out;
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    double sq = 0.0;
    for (double x : xs) sq += (x - out.mean) * (x - out.mean);
    out.stddev = std::sqrt(sq / static_cast<double>(xs.size()));
    return out;
}

void finalize_point(SweepPoint& point) {
    std::vector<double> all;
    for (const SeedResult& sr : point.per_seed) {
        all.insert(all.end(), sr.rewards.begin(), sr.rewards.end());
    }
    const MeanStd ms = mean_std(all);
    point.mean = ms.mean;
    point.stddev = ms.stddev;
    point.n_episodes = static_cast<int>(all.size());
}

}  // namespace

std::string attack_name(AttackKind kind) {
    switch (kind) {
        case AttackKind::none: return "none";
        case AttackKind::trained_adversary: return "trained_adversary";
        case AttackKind::contrarian: return "contrarian";
        case AttackKind::random: return "random";
    }
    return "none";
}

AttackKind attack_from_name(const std::string& name) {
    if (name == "none") return AttackKind::none;
    if (name == "trained_adversary" || name == "trained") return AttackKind::trained_adversary;
    if (name == "contrarian") return AttackKind::contrarian;
    if (name == "random") return AttackKind::random;
    throw ConfigError("unknown attack kind: " + name);
}

std::vector<double> evaluate(const ActorCriticParams& policy, const PendulumParams& env_params,
                             const Attack& attack, const EvalOptions& options) {
    env_params.validate();
    validate_attack(attack);
    if (options.n_episodes < 1) throw ConfigError("n_episodes must be >= 1");

    std::vector<double> rewards;
    rewards.reserve(static_cast<size_t>(options.n_episodes));
    for (int episode = 0; episode < options.n_episodes; ++episode) {
        Rng rng(Rng::derive(options.seed, static_cast<std::uint64_t>(episode)));
        Rng attack_rng(
            Rng::derive(Rng::derive(options.seed, 0xA77ACull), static_cast<std::uint64_t>(episode)));
        PendulumEnv env(env_params);
        Observation obs =
            options.fixed_start ? env.reset_to(*options.fixed_start) : env.reset(rng);
        double total = 0.0;
        while (!env.episode_over()) {
            const GaussianAction mu = act(policy, obs, rng, options.deterministic);
            const double a_nu =
                attack_torque(attack, obs, mu.sample, attack_rng, options.deterministic);
            const StepResult sr = env.step(mu.sample, a_nu, rng);
            total += sr.reward;
            obs = sr.observation;
        }
        rewards.push_back(total);
    }
    return rewards;
}

EvalReport attack_sweep(const ActorCriticParams& policy, const PendulumParams& env_params,
                        AttackKind kind, const ActorCriticParams* adversary,
                        const std::vector<double>& magnitudes, const SweepOptions& options,
                        const std::string& policy_id) {
    if (magnitudes.empty()) throw ConfigError("attack_sweep needs at least one magnitude");
    for (double m : magnitudes) {
        if (m < 0.0) throw ConfigError("attack magnitudes must be >= 0");
        if (m > env_params.max_torque) {
            throw ConfigError("attack magnitude exceeds max_torque (clamp cannot represent it)");
        }
    }

    EvalReport report;
    report.sweep_variable = "attack_magnitude";
    report.units = "torque";
    report.policy_id = policy_id;
    report.attack_kind = kind;
    for (double m : magnitudes) {
        SweepPoint point;
        point.value = m;
        point.env = env_params;
        point.env.difficulty = m / env_params.max_torque;  // adversary clamp = m
        Attack attack{kind, m, adversary};
        for (int s = 0; s < options.n_seeds; ++s) {
            SeedResult sr;
            sr.seed = options.base_seed + static_cast<std::uint64_t>(s);
            EvalOptions eo;
            eo.n_episodes = options.episodes_per_seed;
            eo.seed = sr.seed;
            eo.deterministic = options.deterministic;
            sr.rewards = evaluate(policy, point.env, attack, eo);
            point.per_seed.push_back(std::move(sr));
        }
        finalize_point(point);
        report.points.push_back(std::move(point));
    }
    return report;
}

EvalReport clog_sweep(const ActorCriticParams& policy, const PendulumParams& env_params,
                      const std::vector<double>& clog_masses, const SweepOptions& options,
                      const std::string& policy_id) {
    if (clog_masses.empty()) throw ConfigError("clog_sweep needs at least one mass");
    if (std::none_of(clog_masses.begin(), clog_masses.end(), [](double m) { return m == 0.0; })) {
        throw ConfigError("clog_sweep masses must include 0 (the clean baseline)");
    }

    EvalReport report;
    report.sweep_variable = "clog_mass";
    report.units = "rod_mass_fraction";
    report.policy_id = policy_id;
    report.attack_kind = AttackKind::none;
    for (double mass : clog_masses) {
        if (mass < 0.0) throw ConfigError("clog masses must be >= 0");
        SweepPoint point;
        point.value = mass;
        point.env = env_params;
        point.env.clog_mass = mass;
        for (int s = 0; s < options.n_seeds; ++s) {
            SeedResult sr;
            sr.seed = options.base_seed + static_cast<std::uint64_t>(s);
            EvalOptions eo;
            eo.n_episodes = options.episodes_per_seed;
            eo.seed = sr.seed;
            eo.deterministic = options.deterministic;
            sr.rewards = evaluate(policy, point.env, Attack{}, eo);
            point.per_seed.push_back(std::move(sr));
        }
        finalize_point(point);
        report.points.push_back(std::move(point));
    }
    return report;
}

TraceRecord run_trace(const ActorCriticParams& policy, const PendulumParams& env_params,
                      const Attack& attack, const std::optional<ImpulseSchedule>& impulse,
                      const TraceOptions& options) {
    env_params.validate();
    validate_attack(attack);
    if (options.total_steps < 1) throw ConfigError("total_steps must be >= 1");
    if (impulse) {
        if (impulse->duration_steps < 1) throw ConfigError("impulse duration must be >= 1");
        if (impulse->start_step < 0 || impulse->start_step >= options.total_steps) {
            throw ConfigError("impulse start must lie within [0, total_steps)");
        }
    }

    Rng rng(Rng::derive(options.seed, 0));
    Rng attack_rng(Rng::derive(Rng::derive(options.seed, 0xA77ACull), 0));
    PendulumEnv env(env_params);
    Observation obs = env.reset(rng);

    TraceRecord trace;
    trace.rows.reserve(static_cast<size_t>(options.total_steps));
    for (int t = 0; t < options.total_steps; ++t) {
        const PendulumState pre = env.state();
        const GaussianAction mu = act(policy, obs, rng, options.deterministic);
        const double a_nu = attack_torque(attack, obs, mu.sample, attack_rng, options.deterministic);
        const double external = impulse ? impulse_torque(*impulse, t) : 0.0;
        const StepResult sr = env.step(mu.sample, a_nu, rng, external);
        trace.rows.push_back(TraceRow{t, pre.theta, pre.theta_dot, sr.applied_protagonist_torque,
                                      sr.applied_adversary_torque, sr.reward});
        obs = sr.observation;
    }
    return trace;
}

int recovery_time(const TraceRecord& trace, int impulse_end, double threshold, int sustain) {
    const int n = static_cast<int>(trace.rows.size());
    if (impulse_end >= n) return 0;
    if (impulse_end < 0) impulse_end = 0;
    int run = 0;
    for (int t = impulse_end; t < n; ++t) {
        run = trace.rows[static_cast<size_t>(t)].r > threshold ? run + 1 : 0;
        if (run >= sustain) return t - sustain + 1 - impulse_end;
    }
    return n - impulse_end;  // never recovered within the trace
}

}  // namespace ara3c
