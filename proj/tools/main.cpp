#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ara3c/errors.hpp"
#include "ara3c/io.hpp"

namespace fs = std::filesystem;
using namespace ara3c;

#ifndef ARA3C_SOURCE_REVISION
#define ARA3C_SOURCE_REVISION "unknown"
#endif

namespace {

// Exit codes: 0 success, 2 config error, 3 numeric divergence, 4 I/O error.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string join_args(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += ' ';
        out += argv[i];
    }
    return out;
}

RunManifest start_manifest(const std::string& command_line, const std::string& config_json) {
    RunManifest m;
    m.created = timestamp_utc();
    m.command_line = command_line;
    m.source_revision = ARA3C_SOURCE_REVISION;
    m.config_json = config_json;
    m.run_id = fnv1a_hex(command_line + "|" + m.created);
    return m;
}

void finish_manifest(RunManifest& manifest, const fs::path& out_dir) {
    write_manifest(manifest, out_dir / "manifest.json");
}

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

// CLI runs expect the standard network sizes; anything else is a foreign
// checkpoint and gets rejected with the offending dimension named.
void require_standard_shapes(const TrainedModel& model) {
    const auto check = [](const char* what, int got, int expected) {
        if (got != expected) {
            throw ConfigError(std::string("checkpoint shape mismatch: ") + what + " " +
                              std::to_string(got) + " != " + std::to_string(expected));
        }
    };
    check("actor hidden", model.protagonist.actor_hidden(), 200);
    check("critic hidden", model.protagonist.critic_hidden(), 100);
    check("actor hidden", model.adversary.actor_hidden(), 200);
    check("critic hidden", model.adversary.critic_hidden(), 100);
}

Checkpoint load_model_checkpoint(const std::string& path) {
    Checkpoint checkpoint = load_checkpoint(path);
    require_standard_shapes(checkpoint.model);
    return checkpoint;
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

int env_threads_override() {
    const char* raw = std::getenv("AR_A3C_THREADS");
    if (!raw) return 0;
    char* end = nullptr;
    const long v = std::strtol(raw, &end, 10);
    if (end == raw || *end != '\0' || v < 1) {
        throw ConfigError("AR_A3C_THREADS must be a positive integer, got '" + std::string(raw) + "'");
    }
    return static_cast<int>(v);
}

struct TrainCli {
    std::string config_path;
    std::string out = "out";
    std::string resume_path;
    std::string algo;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<int> episodes;
    std::optional<int> batch_size;
    std::optional<double> difficulty;
    std::optional<int> eval_every;
};

int cmd_train(const TrainCli& cli, const std::string& command_line) {
    std::optional<Checkpoint> resume;
    TrainConfig config;
    if (!cli.resume_path.empty()) {
        resume = load_model_checkpoint(cli.resume_path);
        config = resume->model.config;
    }
    if (!cli.config_path.empty()) config = load_config(cli.config_path);
    if (!cli.algo.empty()) config.algo = algo_from_name(cli.algo);
    if (cli.seed) config.seed = *cli.seed;
    if (cli.workers) config.workers = *cli.workers;
    if (cli.episodes) config.global_episodes = *cli.episodes;
    if (cli.batch_size) config.batch_size = *cli.batch_size;
    if (cli.difficulty) config.difficulty = *cli.difficulty;
    if (cli.eval_every) config.eval_every = *cli.eval_every;
    if (const int threads = env_threads_override()) config.workers = threads;
    config.validate();

    const fs::path out_dir = ensure_out_dir(cli.out);
    RunManifest manifest = start_manifest(command_line, config_to_json(config));

    const TrainResult result = train(config, resume ? &resume->model : nullptr);

    save_checkpoint(make_checkpoint(result.model), out_dir / "checkpoint.json");
    write_curve_csv(result.curve, out_dir / "curve.csv");
    manifest.output_files = {"checkpoint.json", "curve.csv"};
    finish_manifest(manifest, out_dir);

    const auto& curve = result.curve;
    const size_t tail = std::min<size_t>(50, curve.size());
    double tail_mean = 0.0;
    for (size_t i = curve.size() - tail; i < curve.size(); ++i) tail_mean += curve[i].reward;
    if (tail) tail_mean /= static_cast<double>(tail);
    std::printf("trained %s to episode %d (last-%zu mean reward %s)\n",
                algo_name(config.algo).c_str(), result.model.episode_count, tail,
                format_double(tail_mean).c_str());
    std::printf("outputs: %s\n", out_dir.string().c_str());
    return kExitOk;
}

struct EvalCli {
    std::string checkpoint;
    std::string adversary_path;
    std::string out;
    std::string attack = "none";
    int episodes = 20;
    std::uint64_t seed = 0;
    double magnitude = 0.0;
    double clog = 0.0;
    bool sampled = false;
};

int cmd_eval(const EvalCli& cli, const std::string& command_line) {
    const Checkpoint checkpoint = load_model_checkpoint(cli.checkpoint);
    const AttackKind kind = attack_from_name(cli.attack);

    std::optional<Checkpoint> adversary_checkpoint;
    const ActorCriticParams* adversary = nullptr;
    if (kind == AttackKind::trained_adversary) {
        if (!cli.adversary_path.empty()) {
            adversary_checkpoint = load_model_checkpoint(cli.adversary_path);
            adversary = &adversary_checkpoint->model.adversary;
        } else {
            adversary = &checkpoint.model.adversary;
        }
    }

    PendulumParams env = checkpoint.model.config.env_params();
    env.clog_mass = cli.clog;
    if (kind == AttackKind::none) {
        env.difficulty = 0.0;
    } else {
        if (cli.magnitude > env.max_torque) throw ConfigError("magnitude exceeds max_torque");
        env.difficulty = cli.magnitude / env.max_torque;
    }

    EvalOptions options;
    options.n_episodes = cli.episodes;
    options.seed = cli.seed;
    options.deterministic = !cli.sampled;
    const std::vector<double> rewards =
        evaluate(checkpoint.model.protagonist, env, Attack{kind, cli.magnitude, adversary}, options);

    double mean = mean_of(rewards);
    double sq = 0.0;
    for (double r : rewards) sq += (r - mean) * (r - mean);
    const double stddev = rewards.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(rewards.size()));
    for (size_t i = 0; i < rewards.size(); ++i) {
        std::printf("episode %zu reward %s\n", i + 1, format_double(rewards[i]).c_str());
    }
    std::printf("mean %s std %s episodes %d attack %s magnitude %s\n", format_double(mean).c_str(),
                format_double(stddev).c_str(), cli.episodes, attack_name(kind).c_str(),
                format_double(cli.magnitude).c_str());

    if (!cli.out.empty()) {
        const fs::path out_dir = ensure_out_dir(cli.out);
        RunManifest manifest =
            start_manifest(command_line, config_to_json(checkpoint.model.config));
        EvalReport report;
        report.sweep_variable = "attack_magnitude";
        report.units = "torque";
        report.policy_id = cli.checkpoint;
        report.attack_kind = kind;
        SweepPoint point;
        point.value = cli.magnitude;
        point.env = env;
        point.per_seed.push_back(SeedResult{cli.seed, rewards});
        point.mean = mean;
        point.stddev = stddev;
        point.n_episodes = static_cast<int>(rewards.size());
        report.points.push_back(std::move(point));
        write_sweep_csv(report, out_dir / "eval.csv");
        manifest.output_files = {"eval.csv"};
        finish_manifest(manifest, out_dir);
    }
    return kExitOk;
}

struct SweepCli {
    std::vector<std::string> checkpoints;
    std::string adversary_path;
    std::string out = "out";
    std::string attack = "trained";
    std::vector<double> magnitudes{0.0, 0.5, 1.0, 1.5, 2.0};
    std::vector<double> clogs{0.0, 0.074, 0.148, 0.221, 0.295};
    int seeds = 5;
    int episodes = 20;
    std::uint64_t seed = 0;
};

int cmd_attack_sweep(const SweepCli& cli, const std::string& command_line) {
    const fs::path out_dir = ensure_out_dir(cli.out);
    const AttackKind kind = attack_from_name(cli.attack);
    RunManifest manifest = start_manifest(command_line, "{}");

    std::optional<Checkpoint> adversary_checkpoint;
    if (!cli.adversary_path.empty()) adversary_checkpoint = load_model_checkpoint(cli.adversary_path);

    SweepOptions options;
    options.n_seeds = cli.seeds;
    options.episodes_per_seed = cli.episodes;
    options.base_seed = cli.seed;

    for (const std::string& path : cli.checkpoints) {
        const Checkpoint checkpoint = load_model_checkpoint(path);
        const ActorCriticParams* adversary = nullptr;
        if (kind == AttackKind::trained_adversary) {
            adversary = adversary_checkpoint ? &adversary_checkpoint->model.adversary
                                             : &checkpoint.model.adversary;
        }
        PendulumParams env = checkpoint.model.config.env_params();
        const EvalReport report = attack_sweep(checkpoint.model.protagonist, env, kind, adversary,
                                               cli.magnitudes, options, path);
        const std::string name = "attack_sweep_" + fs::path(path).stem().string() + ".csv";
        write_sweep_csv(report, out_dir / name);
        manifest.output_files.push_back(name);
        for (const SweepPoint& point : report.points) {
            std::printf("%s magnitude %s mean %s std %s\n", path.c_str(),
                        format_double(point.value).c_str(), format_double(point.mean).c_str(),
                        format_double(point.stddev).c_str());
        }
    }
    finish_manifest(manifest, out_dir);
    return kExitOk;
}

int cmd_clog_sweep(const SweepCli& cli, const std::string& command_line) {
    const fs::path out_dir = ensure_out_dir(cli.out);
    RunManifest manifest = start_manifest(command_line, "{}");

    SweepOptions options;
    options.n_seeds = cli.seeds;
    options.episodes_per_seed = cli.episodes;
    options.base_seed = cli.seed;

    for (const std::string& path : cli.checkpoints) {
        const Checkpoint checkpoint = load_model_checkpoint(path);
        PendulumParams env = checkpoint.model.config.env_params();
        env.difficulty = 0.0;  // clean evaluation, adversary off
        const EvalReport report =
            clog_sweep(checkpoint.model.protagonist, env, cli.clogs, options, path);
        const std::string name = "clog_sweep_" + fs::path(path).stem().string() + ".csv";
        write_sweep_csv(report, out_dir / name);
        manifest.output_files.push_back(name);
        for (const SweepPoint& point : report.points) {
            std::printf("%s clog %s mean %s std %s\n", path.c_str(),
                        format_double(point.value).c_str(), format_double(point.mean).c_str(),
                        format_double(point.stddev).c_str());
        }
    }
    finish_manifest(manifest, out_dir);
    return kExitOk;
}

struct ImpulseCli {
    std::string checkpoint;
    std::string out = "out";
    int at = 300;
    int duration = 5;
    double torque = 10.0;
    int steps = 1000;
    std::uint64_t seed = 0;
};

int cmd_impulse(const ImpulseCli& cli, const std::string& command_line) {
    const Checkpoint checkpoint = load_model_checkpoint(cli.checkpoint);
    const fs::path out_dir = ensure_out_dir(cli.out);
    RunManifest manifest = start_manifest(command_line, config_to_json(checkpoint.model.config));

    PendulumParams env = checkpoint.model.config.env_params();
    env.difficulty = 0.0;
    ImpulseSchedule schedule{cli.at, cli.duration, cli.torque};
    TraceOptions options;
    options.total_steps = cli.steps;
    options.seed = cli.seed;
    const TraceRecord trace =
        run_trace(checkpoint.model.protagonist, env, Attack{}, schedule, options);

    write_trace_csv(trace, out_dir / "impulse_trace.csv");
    manifest.output_files = {"impulse_trace.csv"};
    finish_manifest(manifest, out_dir);

    const int recovery = recovery_time(trace, cli.at + cli.duration);
    std::printf("impulse at %d for %d steps, torque %s: recovery_time %d steps\n", cli.at,
                cli.duration, format_double(cli.torque).c_str(), recovery);
    return kExitOk;
}

struct TraceCli {
    std::string checkpoint;
    std::string adversary_path;
    std::string out = "out";
    std::string attack = "trained";
    std::optional<double> magnitude;
    int steps = 1000;
    std::uint64_t seed = 0;
};

int cmd_trace(const TraceCli& cli, const std::string& command_line) {
    const Checkpoint checkpoint = load_model_checkpoint(cli.checkpoint);
    const fs::path out_dir = ensure_out_dir(cli.out);
    RunManifest manifest = start_manifest(command_line, config_to_json(checkpoint.model.config));
    const AttackKind kind = attack_from_name(cli.attack);

    std::optional<Checkpoint> adversary_checkpoint;
    const ActorCriticParams* adversary = nullptr;
    if (kind == AttackKind::trained_adversary) {
        if (!cli.adversary_path.empty()) {
            adversary_checkpoint = load_model_checkpoint(cli.adversary_path);
            adversary = &adversary_checkpoint->model.adversary;
        } else {
            adversary = &checkpoint.model.adversary;
        }
    }

    PendulumParams env = checkpoint.model.config.env_params();
    // Default magnitude: the clamp the policy was trained against.
    const double magnitude =
        cli.magnitude ? *cli.magnitude : checkpoint.model.config.difficulty * env.max_torque;
    if (kind == AttackKind::none) {
        env.difficulty = 0.0;
    } else {
        if (magnitude > env.max_torque) throw ConfigError("magnitude exceeds max_torque");
        env.difficulty = magnitude / env.max_torque;
    }

    TraceOptions options;
    options.total_steps = cli.steps;
    options.seed = cli.seed;
    const TraceRecord trace = run_trace(checkpoint.model.protagonist, env,
                                        Attack{kind, magnitude, adversary}, std::nullopt, options);

    write_trace_csv(trace, out_dir / "trace.csv");
    manifest.output_files = {"trace.csv"};
    finish_manifest(manifest, out_dir);
    std::printf("trace of %d steps written (attack %s, magnitude %s)\n", cli.steps,
                attack_name(kind).c_str(), format_double(magnitude).c_str());
    return kExitOk;
}

int cmd_show_checkpoint(const std::string& path) {
    const Checkpoint checkpoint = load_checkpoint(path);
    const TrainedModel& model = checkpoint.model;
    std::printf("checkpoint %s\n", path.c_str());
    std::printf("  format_version %d created %s seed %llu\n", checkpoint.format_version,
                checkpoint.created.c_str(), static_cast<unsigned long long>(checkpoint.seed));
    std::printf("  algo %s episodes %d difficulty %s\n", algo_name(model.config.algo).c_str(),
                model.episode_count, format_double(model.config.difficulty).c_str());
    std::printf("  protagonist actor 3->%d->2 critic 3->%d->1 action_scale %s\n",
                model.protagonist.actor_hidden(), model.protagonist.critic_hidden(),
                format_double(model.protagonist.action_scale).c_str());
    std::printf("  adversary   actor 3->%d->2 critic 3->%d->1 action_scale %s\n",
                model.adversary.actor_hidden(), model.adversary.critic_hidden(),
                format_double(model.adversary.action_scale).c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AR-A3C: adversarially trained A3C on pendulum swing-up"};
    app.require_subcommand(1);
    const std::string command_line = join_args(argc, argv);

    TrainCli train_cli;
    auto* train_cmd = app.add_subcommand("train", "train a policy (a3c or ar-a3c)");
    train_cmd->add_option("--config", train_cli.config_path, "JSON config file");
    train_cmd->add_option("--out", train_cli.out, "output directory");
    train_cmd->add_option("--resume", train_cli.resume_path, "checkpoint to resume from");
    train_cmd->add_option("--algo", train_cli.algo, "a3c or ar-a3c");
    train_cmd->add_option("--seed", train_cli.seed, "RNG seed");
    train_cmd->add_option("--workers", train_cli.workers, "worker threads");
    train_cmd->add_option("--episodes", train_cli.episodes, "episodes to run in this invocation");
    train_cmd->add_option("--batch-size", train_cli.batch_size, "rollout batch size");
    train_cmd->add_option("--difficulty", train_cli.difficulty, "adversary difficulty D in [0,1]");
    train_cmd->add_option("--eval-every", train_cli.eval_every, "progress eval interval (episodes)");

    EvalCli eval_cli;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    eval_cmd->add_option("--checkpoint", eval_cli.checkpoint, "checkpoint path")->required();
    eval_cmd->add_option("--adversary", eval_cli.adversary_path, "adversary checkpoint (trained attack)");
    eval_cmd->add_option("--out", eval_cli.out, "optional output directory for eval.csv");
    eval_cmd->add_option("--attack", eval_cli.attack, "none|trained|contrarian|random");
    eval_cmd->add_option("--magnitude", eval_cli.magnitude, "attack torque clamp");
    eval_cmd->add_option("--episodes", eval_cli.episodes, "evaluation episodes");
    eval_cmd->add_option("--seed", eval_cli.seed, "evaluation seed");
    eval_cmd->add_option("--clog", eval_cli.clog, "tip mass to attach");
    eval_cmd->add_flag("--sampled", eval_cli.sampled, "sample actions instead of using the mean");

    SweepCli attack_sweep_cli;
    auto* attack_cmd = app.add_subcommand("attack-sweep", "reward vs adversary magnitude");
    attack_cmd->add_option("--checkpoint", attack_sweep_cli.checkpoints, "checkpoint path(s)")
        ->required();
    attack_cmd->add_option("--adversary", attack_sweep_cli.adversary_path,
                           "adversary checkpoint (defaults to each checkpoint's own)");
    attack_cmd->add_option("--out", attack_sweep_cli.out, "output directory");
    attack_cmd->add_option("--attack", attack_sweep_cli.attack, "trained|contrarian|random");
    attack_cmd->add_option("--magnitudes", attack_sweep_cli.magnitudes, "sweep magnitudes")
        ->delimiter(',');
    attack_cmd->add_option("--seeds", attack_sweep_cli.seeds, "seeds per point");
    attack_cmd->add_option("--episodes", attack_sweep_cli.episodes, "episodes per seed");
    attack_cmd->add_option("--seed", attack_sweep_cli.seed, "base seed");

    SweepCli clog_sweep_cli;
    auto* clog_cmd = app.add_subcommand("clog-sweep", "reward vs attached tip mass");
    clog_cmd->add_option("--checkpoint", clog_sweep_cli.checkpoints, "checkpoint path(s)")
        ->required();
    clog_cmd->add_option("--out", clog_sweep_cli.out, "output directory");
    clog_cmd->add_option("--clogs", clog_sweep_cli.clogs, "tip masses (rod-mass fractions)")
        ->delimiter(',');
    clog_cmd->add_option("--seeds", clog_sweep_cli.seeds, "seeds per point");
    clog_cmd->add_option("--episodes", clog_sweep_cli.episodes, "episodes per seed");
    clog_cmd->add_option("--seed", clog_sweep_cli.seed, "base seed");

    ImpulseCli impulse_cli;
    auto* impulse_cmd = app.add_subcommand("impulse", "impulse recovery trace");
    impulse_cmd->add_option("--checkpoint", impulse_cli.checkpoint, "checkpoint path")->required();
    impulse_cmd->add_option("--out", impulse_cli.out, "output directory");
    impulse_cmd->add_option("--at", impulse_cli.at, "impulse start step");
    impulse_cmd->add_option("--duration", impulse_cli.duration, "impulse duration in steps");
    impulse_cmd->add_option("--torque", impulse_cli.torque, "impulse torque");
    impulse_cmd->add_option("--steps", impulse_cli.steps, "total trace steps");
    impulse_cmd->add_option("--seed", impulse_cli.seed, "trace seed");

    TraceCli trace_cli;
    auto* trace_cmd = app.add_subcommand("trace", "per-timestep trajectory export");
    trace_cmd->add_option("--checkpoint", trace_cli.checkpoint, "checkpoint path")->required();
    trace_cmd->add_option("--adversary", trace_cli.adversary_path, "adversary checkpoint");
    trace_cmd->add_option("--out", trace_cli.out, "output directory");
    trace_cmd->add_option("--attack", trace_cli.attack, "none|trained|contrarian|random");
    trace_cmd->add_option("--magnitude", trace_cli.magnitude, "attack torque clamp");
    trace_cmd->add_option("--steps", trace_cli.steps, "total trace steps");
    trace_cmd->add_option("--seed", trace_cli.seed, "trace seed");

    std::string show_path;
    auto* show_cmd = app.add_subcommand("show-checkpoint", "print checkpoint summary");
    show_cmd->add_option("path", show_path, "checkpoint path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*train_cmd) return cmd_train(train_cli, command_line);
        if (*eval_cmd) return cmd_eval(eval_cli, command_line);
        if (*attack_cmd) return cmd_attack_sweep(attack_sweep_cli, command_line);
        if (*clog_cmd) return cmd_clog_sweep(clog_sweep_cli, command_line);
        if (*impulse_cmd) return cmd_impulse(impulse_cli, command_line);
        if (*trace_cmd) return cmd_trace(trace_cli, command_line);
        if (*show_cmd) return cmd_show_checkpoint(show_path);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "numeric divergence: %s\n", e.what());
        return kExitDivergence;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }
    return kExitConfig;
}
