#include "ara3c/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ara3c/errors.hpp"
#include "json.hpp"

namespace ara3c {

namespace {

using json = nlohmann::ordered_json;

json mlp_to_json(const nn::MlpParams& params) {
    json layers = json::array();
    for (const nn::Layer& layer : params.layers) {
        json jl;
        jl["activation"] = nn::activation_name(layer.activation);
        jl["rows"] = layer.weights.rows;
        jl["cols"] = layer.weights.cols;
        jl["weights"] = layer.weights.data;  // row-major
        jl["bias"] = layer.bias;
        layers.push_back(std::move(jl));
    }
    return json{{"layers", std::move(layers)}};
}

std::vector<double> doubles_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + " must be an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& x : j) {
        if (!x.is_number()) throw ConfigError(where + " contains a non-numeric entry");
        const double v = x.get<double>();
        if (!std::isfinite(v)) throw ConfigError(where + " contains a non-finite entry");
        out.push_back(v);
    }
    return out;
}

nn::MlpParams mlp_from_json(const json& j, const std::string& where) {
    if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].empty()) {
        throw ConfigError(where + ": missing or empty layers");
    }
    nn::MlpParams params;
    int prev_out = -1;
    int index = 0;
    for (const auto& jl : j["layers"]) {
        const std::string layer_name = where + ".layers[" + std::to_string(index) + "]";
        nn::Layer layer;
        layer.activation = nn::activation_from_name(jl.at("activation").get<std::string>());
        const int rows = jl.at("rows").get<int>();
        const int cols = jl.at("cols").get<int>();
        if (rows < 1 || cols < 1) throw ConfigError(layer_name + ": non-positive dimensions");
        layer.weights = nn::Matrix(rows, cols);
        layer.weights.data = doubles_from_json(jl.at("weights"), layer_name + ".weights");
        layer.bias = doubles_from_json(jl.at("bias"), layer_name + ".bias");
        if (static_cast<int>(layer.weights.data.size()) != rows * cols) {
            throw ConfigError(layer_name + ": weights length " +
                              std::to_string(layer.weights.data.size()) + " != rows*cols " +
                              std::to_string(rows * cols));
        }
        if (static_cast<int>(layer.bias.size()) != rows) {
            throw ConfigError(layer_name + ": bias length " + std::to_string(layer.bias.size()) +
                              " != rows " + std::to_string(rows));
        }
        if (prev_out >= 0 && cols != prev_out) {
            throw ConfigError(layer_name + ": input size " + std::to_string(cols) +
                              " does not compose with previous output " + std::to_string(prev_out));
        }
        prev_out = rows;
        params.layers.push_back(std::move(layer));
        ++index;
    }
    return params;
}

json rmsprop_to_json(const nn::RmsPropState& state) {
    json cache_layers = json::array();
    for (size_t k = 0; k < state.cache.weights.size(); ++k) {
        json jl;
        jl["rows"] = state.cache.weights[k].rows;
        jl["cols"] = state.cache.weights[k].cols;
        jl["weights"] = state.cache.weights[k].data;
        jl["bias"] = state.cache.bias[k];
        cache_layers.push_back(std::move(jl));
    }
    json j;
    j["decay"] = state.decay;
    j["epsilon"] = state.epsilon;
    j["learning_rate"] = state.learning_rate;
    j["cache"] = json{{"layers", std::move(cache_layers)}};
    return j;
}

nn::RmsPropState rmsprop_from_json(const json& j, const nn::MlpParams& shape,
                                   const std::string& where) {
    nn::RmsPropState state;
    state.decay = j.at("decay").get<double>();
    state.epsilon = j.at("epsilon").get<double>();
    state.learning_rate = j.at("learning_rate").get<double>();
    state.cache = nn::zeros_like(shape);
    const json& layers = j.at("cache").at("layers");
    if (layers.size() != shape.layers.size()) {
        throw ConfigError(where + ": optimizer cache depth " + std::to_string(layers.size()) +
                          " != network depth " + std::to_string(shape.layers.size()));
    }
    for (size_t k = 0; k < layers.size(); ++k) {
        const std::string layer_name = where + ".cache.layers[" + std::to_string(k) + "]";
        const auto weights = doubles_from_json(layers[k].at("weights"), layer_name + ".weights");
        const auto bias = doubles_from_json(layers[k].at("bias"), layer_name + ".bias");
        if (weights.size() != state.cache.weights[k].data.size() ||
            bias.size() != state.cache.bias[k].size()) {
            throw ConfigError(layer_name + ": cache shape does not match the network");
        }
        for (double v : weights) {
            if (v < 0.0) throw ConfigError(layer_name + ": negative cache entry");
        }
        for (double v : bias) {
            if (v < 0.0) throw ConfigError(layer_name + ": negative cache entry");
        }
        state.cache.weights[k].data = weights;
        state.cache.bias[k] = bias;
    }
    return state;
}

json actor_critic_to_json(const ActorCriticParams& params) {
    json j;
    j["action_scale"] = params.action_scale;
    j["actor"] = mlp_to_json(params.actor);
    j["critic"] = mlp_to_json(params.critic);
    return j;
}

ActorCriticParams actor_critic_from_json(const json& j, const std::string& where) {
    ActorCriticParams params;
    params.action_scale = j.at("action_scale").get<double>();
    if (!(params.action_scale > 0.0)) throw ConfigError(where + ": action_scale must be > 0");
    params.actor = mlp_from_json(j.at("actor"), where + ".actor");
    params.critic = mlp_from_json(j.at("critic"), where + ".critic");
    if (params.actor.input_size() != 3 || params.actor.output_size() != 2) {
        throw ConfigError(where + ".actor must map 3 inputs to 2 outputs, got " +
                          std::to_string(params.actor.input_size()) + " -> " +
                          std::to_string(params.actor.output_size()));
    }
    if (params.critic.input_size() != 3 || params.critic.output_size() != 1) {
        throw ConfigError(where + ".critic must map 3 inputs to 1 output, got " +
                          std::to_string(params.critic.input_size()) + " -> " +
                          std::to_string(params.critic.output_size()));
    }
    return params;
}

json config_to_json_obj(const TrainConfig& config) {
    json j;
    j["algo"] = algo_name(config.algo);
    j["workers"] = config.workers;
    j["episodes"] = config.global_episodes;
    j["batch_size"] = config.batch_size;
    j["gamma"] = config.gamma;
    j["entropy_beta"] = config.entropy_beta;
    j["actor_lr"] = config.actor_lr;
    j["critic_lr"] = config.critic_lr;
    j["difficulty"] = config.difficulty;
    j["reward_shift"] = config.reward_shift;
    j["reward_scale"] = config.reward_scale;
    j["seed"] = config.seed;
    j["eval_every"] = config.eval_every;
    j["env_rod_mass"] = config.env.rod_mass;
    j["env_rod_length"] = config.env.rod_length;
    j["env_gravity"] = config.env.gravity;
    j["env_clog_mass"] = config.env.clog_mass;
    j["env_dt"] = config.env.dt;
    j["env_max_speed"] = config.env.max_speed;
    j["env_max_torque"] = config.env.max_torque;
    j["env_noise_std"] = config.env.noise_std;
    j["env_episode_len"] = config.env.episode_len;
    return j;
}

TrainConfig config_from_json_obj(const json& j) {
    TrainConfig config;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "algo") config.algo = algo_from_name(value.get<std::string>());
            else if (key == "workers") config.workers = value.get<int>();
            else if (key == "episodes") config.global_episodes = value.get<int>();
            else if (key == "batch_size") config.batch_size = value.get<int>();
            else if (key == "gamma") config.gamma = value.get<double>();
            else if (key == "entropy_beta") config.entropy_beta = value.get<double>();
            else if (key == "actor_lr") config.actor_lr = value.get<double>();
            else if (key == "critic_lr") config.critic_lr = value.get<double>();
            else if (key == "difficulty") config.difficulty = value.get<double>();
            else if (key == "reward_shift") config.reward_shift = value.get<double>();
            else if (key == "reward_scale") config.reward_scale = value.get<double>();
            else if (key == "seed") config.seed = value.get<std::uint64_t>();
            else if (key == "eval_every") config.eval_every = value.get<int>();
            else if (key == "env_rod_mass") config.env.rod_mass = value.get<double>();
            else if (key == "env_rod_length") config.env.rod_length = value.get<double>();
            else if (key == "env_gravity") config.env.gravity = value.get<double>();
            else if (key == "env_clog_mass") config.env.clog_mass = value.get<double>();
            else if (key == "env_dt") config.env.dt = value.get<double>();
            else if (key == "env_max_speed") config.env.max_speed = value.get<double>();
            else if (key == "env_max_torque") config.env.max_torque = value.get<double>();
            else if (key == "env_noise_std") config.env.noise_std = value.get<double>();
            else if (key == "env_episode_len") config.env.episode_len = value.get<int>();
            else throw ConfigError("unknown config key: " + key);
        } catch (const json::exception&) {
            throw ConfigError("config key '" + key + "' has the wrong type");
        }
    }
    config.env.difficulty = config.difficulty;
    config.validate();
    return config;
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann reports the byte offset in e.byte
        throw IoError(what + " parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failure on " + path.string());
    return ss.str();
}

void check_model_finite(const TrainedModel& model) {
    const bool ok = model.protagonist.actor.finite() && model.protagonist.critic.finite() &&
                    model.adversary.actor.finite() && model.adversary.critic.finite() &&
                    model.optimizer.protagonist_actor.cache.finite() &&
                    model.optimizer.protagonist_critic.cache.finite() &&
                    model.optimizer.adversary_actor.cache.finite() &&
                    model.optimizer.adversary_critic.cache.finite();
    if (!ok) throw DivergenceError("model contains non-finite values");
}

}  // namespace

Checkpoint make_checkpoint(const TrainedModel& model) {
    Checkpoint checkpoint;
    checkpoint.created = timestamp_utc();
    checkpoint.seed = model.config.seed;
    checkpoint.model = model;
    return checkpoint;
}

std::string checkpoint_to_json(const Checkpoint& checkpoint) {
    check_model_finite(checkpoint.model);
    json j;
    j["format_version"] = checkpoint.format_version;
    j["created"] = checkpoint.created;
    j["seed"] = checkpoint.seed;
    j["episode_count"] = checkpoint.model.episode_count;
    j["config"] = config_to_json_obj(checkpoint.model.config);
    j["protagonist"] = actor_critic_to_json(checkpoint.model.protagonist);
    j["adversary"] = actor_critic_to_json(checkpoint.model.adversary);
    json opt;
    opt["protagonist_actor"] = rmsprop_to_json(checkpoint.model.optimizer.protagonist_actor);
    opt["protagonist_critic"] = rmsprop_to_json(checkpoint.model.optimizer.protagonist_critic);
    opt["adversary_actor"] = rmsprop_to_json(checkpoint.model.optimizer.adversary_actor);
    opt["adversary_critic"] = rmsprop_to_json(checkpoint.model.optimizer.adversary_critic);
    j["optimizer"] = std::move(opt);
    return j.dump(2) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
    const json j = parse_json(text, "checkpoint");
    Checkpoint checkpoint;
    try {
        checkpoint.format_version = j.at("format_version").get<int>();
        if (checkpoint.format_version != kCheckpointFormatVersion) {
            throw ConfigError("checkpoint format_version " +
                              std::to_string(checkpoint.format_version) + " != supported " +
                              std::to_string(kCheckpointFormatVersion) + "; migration refused");
        }
        checkpoint.created = j.at("created").get<std::string>();
        checkpoint.seed = j.at("seed").get<std::uint64_t>();
        checkpoint.model.episode_count = j.at("episode_count").get<int>();
        checkpoint.model.config = config_from_json_obj(j.at("config"));
        checkpoint.model.protagonist = actor_critic_from_json(j.at("protagonist"), "protagonist");
        checkpoint.model.adversary = actor_critic_from_json(j.at("adversary"), "adversary");
        const json& opt = j.at("optimizer");
        checkpoint.model.optimizer.protagonist_actor = rmsprop_from_json(
            opt.at("protagonist_actor"), checkpoint.model.protagonist.actor, "protagonist_actor");
        checkpoint.model.optimizer.protagonist_critic = rmsprop_from_json(
            opt.at("protagonist_critic"), checkpoint.model.protagonist.critic, "protagonist_critic");
        checkpoint.model.optimizer.adversary_actor = rmsprop_from_json(
            opt.at("adversary_actor"), checkpoint.model.adversary.actor, "adversary_actor");
        checkpoint.model.optimizer.adversary_critic = rmsprop_from_json(
            opt.at("adversary_critic"), checkpoint.model.adversary.critic, "adversary_critic");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed checkpoint: ") + e.what());
    }
    return checkpoint;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    write_file_atomic(path, checkpoint_to_json(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return checkpoint_from_json(read_file(path));
}

TrainConfig load_config(const std::filesystem::path& path) {
    return config_from_json(read_file(path));
}

TrainConfig config_from_json(const std::string& text) {
    const json j = parse_json(text, "config");
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    return config_from_json_obj(j);
}

std::string config_to_json(const TrainConfig& config) {
    return config_to_json_obj(config).dump(2) + "\n";
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path) {
    std::string out = "episode,worker,reward,wallclock_s\n";
    for (const CurvePoint& p : curve) {
        out += std::to_string(p.episode);
        out += ',';
        out += std::to_string(p.worker);
        out += ',';
        out += format_double(p.reward);
        out += ',';
        out += format_double(p.wallclock_s);
        out += '\n';
    }
    write_file_atomic(path, out);
}

void write_sweep_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::string out = "sweep_value,seed,episode,reward\n";
    for (const SweepPoint& point : report.points) {
        for (const SeedResult& sr : point.per_seed) {
            for (size_t e = 0; e < sr.rewards.size(); ++e) {
                out += format_double(point.value);
                out += ',';
                out += std::to_string(sr.seed);
                out += ',';
                out += std::to_string(e + 1);
                out += ',';
                out += format_double(sr.rewards[e]);
                out += '\n';
            }
        }
    }
    write_file_atomic(path, out);
}

void write_trace_csv(const TraceRecord& trace, const std::filesystem::path& path) {
    std::string out = "t,theta,theta_dot,a_mu,a_nu,r\n";
    for (const TraceRow& row : trace.rows) {
        out += std::to_string(row.t);
        out += ',';
        out += format_double(row.theta);
        out += ',';
        out += format_double(row.theta_dot);
        out += ',';
        out += format_double(row.a_mu);
        out += ',';
        out += format_double(row.a_nu);
        out += ',';
        out += format_double(row.r);
        out += '\n';
    }
    write_file_atomic(path, out);
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    json j;
    j["run_id"] = manifest.run_id;
    j["command_line"] = manifest.command_line;
    j["source_revision"] = manifest.source_revision;
    j["created"] = manifest.created;
    j["config"] = parse_json(manifest.config_json, "manifest config");
    j["output_files"] = manifest.output_files;
    write_file_atomic(path, j.dump(2) + "\n");
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IoError("write failure on " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

}  // namespace ara3c
