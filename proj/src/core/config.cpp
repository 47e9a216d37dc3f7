#include "slicelab/core/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace slicelab {

using nlohmann::json;

namespace {

// Reads known keys from an object and rejects anything else.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw Error(where_ + ": expected a JSON object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception& e) {
            throw Error(where_ + "." + key + ": " + e.what());
        }
    }

    template <typename F>
    void with(const char* key, F&& f) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it != j_.end()) f(*it, where_ + "." + key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw Error(where_ + ": unknown key '" + it.key() + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

json sla_to_json(const SlaSpec& s) { return {{"lambda_ms", s.lambda_ms}, {"phi_sla", s.phi_sla}}; }

SlaSpec sla_from_json(const json& j, const std::string& where) {
    SlaSpec s;
    ObjectReader r(j, where);
    r.get("lambda_ms", s.lambda_ms);
    r.get("phi_sla", s.phi_sla);
    r.finish();
    return s;
}

json schedule_to_json(const SlaScheduleConfig& s) {
    json steps = json::array();
    for (const auto& st : s.steps)
        steps.push_back({{"epoch", st.epoch}, {"lambda_ms", st.lambda_ms}, {"phi_sla", st.phi_sla}});
    return {{"lambda_ms", s.lambda_ms},     {"phi_sla", s.phi_sla},
            {"randomize_lambda", s.randomize_lambda}, {"lambda_lo_ms", s.lambda_lo_ms},
            {"lambda_hi_ms", s.lambda_hi_ms}, {"steps", steps}};
}

SlaScheduleConfig schedule_from_json(const json& j, const std::string& where) {
    SlaScheduleConfig s;
    ObjectReader r(j, where);
    r.get("lambda_ms", s.lambda_ms);
    r.get("phi_sla", s.phi_sla);
    r.get("randomize_lambda", s.randomize_lambda);
    r.get("lambda_lo_ms", s.lambda_lo_ms);
    r.get("lambda_hi_ms", s.lambda_hi_ms);
    r.with("steps", [&](const json& arr, const std::string& w) {
        if (!arr.is_array()) throw Error(w + ": expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            SlaScheduleConfig::Step st;
            ObjectReader sr(arr[i], w + "[" + std::to_string(i) + "]");
            sr.get("epoch", st.epoch);
            sr.get("lambda_ms", st.lambda_ms);
            sr.get("phi_sla", st.phi_sla);
            sr.finish();
            s.steps.push_back(st);
        }
    });
    r.finish();
    return s;
}

json slice_to_json(const SliceConfig& s) {
    return {{"num_ues", s.num_ues},           {"bitrate_mbps", s.bitrate_mbps},
            {"packet_bytes", s.packet_bytes}, {"burst_packets", s.burst_packets},
            {"controlled", s.controlled},     {"sla", schedule_to_json(s.sla)}};
}

SliceConfig slice_from_json(const json& j, const std::string& where) {
    SliceConfig s;
    ObjectReader r(j, where);
    r.get("num_ues", s.num_ues);
    r.get("bitrate_mbps", s.bitrate_mbps);
    r.get("packet_bytes", s.packet_bytes);
    r.get("burst_packets", s.burst_packets);
    r.get("controlled", s.controlled);
    r.with("sla", [&](const json& v, const std::string& w) { s.sla = schedule_from_json(v, w); });
    r.finish();
    return s;
}

}  // namespace

void Config::validate() const {
    if (sim.slices.empty()) throw Error("config: at least one slice is required");
    if (sim.capacity < sim.num_slices())
        throw Error("config: capacity must leave at least one PRB per slice");
    if (sim.epoch_len_ms <= 0) throw Error("config: epoch_len_ms must be positive");
    if (sim.backhaul_ms < 0) throw Error("config: backhaul_ms must be non-negative");
    if (!(sim.eta_min > 0 && sim.eta_min <= sim.eta_max))
        throw Error("config: require 0 < eta_min <= eta_max");
    if (sim.eta_sigma < 0 || sim.eta_init_spread < 0)
        throw Error("config: eta_sigma and eta_init_spread must be non-negative");
    if (sim.bits_per_prb_scale <= 0) throw Error("config: bits_per_prb_scale must be positive");
    bool any_controlled = false;
    for (const auto& s : sim.slices) {
        if (s.num_ues < 0 || s.bitrate_mbps < 0 || s.packet_bytes <= 0 || s.burst_packets <= 0)
            throw Error("config: invalid slice traffic parameters");
        SlaSpec{s.sla.lambda_ms, s.sla.phi_sla}.validate();
        if (s.sla.randomize_lambda && !(0 < s.sla.lambda_lo_ms && s.sla.lambda_lo_ms < s.sla.lambda_hi_ms))
            throw Error("config: SLA randomization requires 0 < lambda_lo < lambda_hi");
        for (const auto& st : s.sla.steps) SlaSpec{st.lambda_ms, st.phi_sla}.validate();
        any_controlled = any_controlled || s.controlled;
    }
    if (!any_controlled) throw Error("config: at least one slice must be controlled");
    if (reward.k <= 0) throw Error("config: reward sigmoid slope k must be positive");
    if (training.episodes < 0 || training.episode_len <= 0 || training.eval_episodes < 0)
        throw Error("config: invalid training budget");
    for (const auto& sla : training.eval_grid) sla.validate();
    if (training.seeds.empty()) throw Error("config: at least one seed is required");
    if (!(ppo.clip > 0 && ppo.clip < 1)) throw Error("config: ppo.clip must lie in (0, 1)");
    if (!(ppo.gamma > 0 && ppo.gamma <= 1)) throw Error("config: ppo.gamma must lie in (0, 1]");
    if (!(ppo.gae_lambda >= 0 && ppo.gae_lambda <= 1))
        throw Error("config: ppo.gae_lambda must lie in [0, 1]");
    if (ppo.update_epochs <= 0 || ppo.minibatch <= 0 || ppo.episodes_per_update <= 0 || ppo.lr <= 0)
        throw Error("config: invalid PPO optimisation settings");
    if (!(dqn.gamma >= 0 && dqn.gamma <= 1) || dqn.batch <= 0 || dqn.buffer_capacity < dqn.batch ||
        dqn.target_sync <= 0 || dqn.train_every <= 0 || dqn.lr <= 0)
        throw Error("config: invalid DQN settings");
    if (qlearning.bins <= 0 || qlearning.bins > 255 || qlearning.alpha < 0 || qlearning.alpha > 1)
        throw Error("config: invalid Q-learning settings");
}

json to_json(const Config& c) {
    json slices = json::array();
    for (const auto& s : c.sim.slices) slices.push_back(slice_to_json(s));
    json grid = json::array();
    for (const auto& s : c.training.eval_grid) grid.push_back(sla_to_json(s));

    return {
        {"name", c.name},
        {"sim",
         {{"capacity", c.sim.capacity},
          {"epoch_len_ms", c.sim.epoch_len_ms},
          {"backhaul_ms", c.sim.backhaul_ms},
          {"bits_per_prb_scale", c.sim.bits_per_prb_scale},
          {"eta_min", c.sim.eta_min},
          {"eta_max", c.sim.eta_max},
          {"eta_init", c.sim.eta_init},
          {"eta_init_spread", c.sim.eta_init_spread},
          {"eta_sigma", c.sim.eta_sigma},
          {"slices", slices}}},
        {"reward", {{"k", c.reward.k}, {"indicator", to_string(c.reward.indicator)}}},
        {"training",
         {{"episodes", c.training.episodes},
          {"episode_len", c.training.episode_len},
          {"eval_every", c.training.eval_every},
          {"eval_episodes", c.training.eval_episodes},
          {"eval_grid", grid},
          {"seeds", c.training.seeds},
          {"offline_dataset", c.training.offline_dataset}}},
        {"ppo",
         {{"clip", c.ppo.clip},
          {"gamma", c.ppo.gamma},
          {"gae_lambda", c.ppo.gae_lambda},
          {"update_epochs", c.ppo.update_epochs},
          {"minibatch", c.ppo.minibatch},
          {"episodes_per_update", c.ppo.episodes_per_update},
          {"entropy_coef", c.ppo.entropy_coef},
          {"value_coef", c.ppo.value_coef},
          {"lr", c.ppo.lr},
          {"max_grad_norm", c.ppo.max_grad_norm},
          {"hidden", c.ppo.hidden},
          {"normalize_obs", c.ppo.normalize_obs}}},
        {"dqn",
         {{"gamma", c.dqn.gamma},
          {"lr", c.dqn.lr},
          {"batch", c.dqn.batch},
          {"buffer_capacity", c.dqn.buffer_capacity},
          {"target_sync", c.dqn.target_sync},
          {"train_every", c.dqn.train_every},
          {"warmup_steps", c.dqn.warmup_steps},
          {"eps_start", c.dqn.eps_start},
          {"eps_end", c.dqn.eps_end},
          {"eps_decay_fraction", c.dqn.eps_decay_fraction},
          {"huber_delta", c.dqn.huber_delta},
          {"hidden", c.dqn.hidden},
          {"normalize_obs", c.dqn.normalize_obs}}},
        {"qlearning",
         {{"alpha", c.qlearning.alpha},
          {"gamma", c.qlearning.gamma},
          {"bins", c.qlearning.bins},
          {"bin_fit_episodes", c.qlearning.bin_fit_episodes},
          {"eps_start", c.qlearning.eps_start},
          {"eps_end", c.qlearning.eps_end},
          {"eps_decay_fraction", c.qlearning.eps_decay_fraction}}},
    };
}

Config config_from_json(const json& j) {
    Config c;
    ObjectReader root(j, "config");
    root.get("name", c.name);
    root.with("sim", [&](const json& v, const std::string& w) {
        ObjectReader r(v, w);
        r.get("capacity", c.sim.capacity);
        r.get("epoch_len_ms", c.sim.epoch_len_ms);
        r.get("backhaul_ms", c.sim.backhaul_ms);
        r.get("bits_per_prb_scale", c.sim.bits_per_prb_scale);
        r.get("eta_min", c.sim.eta_min);
        r.get("eta_max", c.sim.eta_max);
        r.get("eta_init", c.sim.eta_init);
        r.get("eta_init_spread", c.sim.eta_init_spread);
        r.get("eta_sigma", c.sim.eta_sigma);
        r.with("slices", [&](const json& arr, const std::string& sw) {
            if (!arr.is_array()) throw Error(sw + ": expected an array");
            c.sim.slices.clear();
            for (std::size_t i = 0; i < arr.size(); ++i)
                c.sim.slices.push_back(slice_from_json(arr[i], sw + "[" + std::to_string(i) + "]"));
        });
        r.finish();
    });
    root.with("reward", [&](const json& v, const std::string& w) {
        ObjectReader r(v, w);
        r.get("k", c.reward.k);
        std::string ind = to_string(c.reward.indicator);
        r.get("indicator", ind);
        c.reward.indicator = parse_reward_indicator(ind);
        r.finish();
    });
    root.with("training", [&](const json& v, const std::string& w) {
        ObjectReader r(v, w);
        r.get("episodes", c.training.episodes);
        r.get("episode_len", c.training.episode_len);
        r.get("eval_every", c.training.eval_every);
        r.get("eval_episodes", c.training.eval_episodes);
        r.with("eval_grid", [&](const json& arr, const std::string& gw) {
            if (!arr.is_array()) throw Error(gw + ": expected an array");
            c.training.eval_grid.clear();
            for (std::size_t i = 0; i < arr.size(); ++i)
                c.training.eval_grid.push_back(sla_from_json(arr[i], gw + "[" + std::to_string(i) + "]"));
        });
        r.get("seeds", c.training.seeds);
        r.get("offline_dataset", c.training.offline_dataset);
        r.finish();
    });
    root.with("ppo", [&](const json& v, const std::string& w) {
        ObjectReader r(v, w);
        r.get("clip", c.ppo.clip);
        r.get("gamma", c.ppo.gamma);
        r.get("gae_lambda", c.ppo.gae_lambda);
        r.get("update_epochs", c.ppo.update_epochs);
        r.get("minibatch", c.ppo.minibatch);
        r.get("episodes_per_update", c.ppo.episodes_per_update);
        r.get("entropy_coef", c.ppo.entropy_coef);
        r.get("value_coef", c.ppo.value_coef);
        r.get("lr", c.ppo.lr);
        r.get("max_grad_norm", c.ppo.max_grad_norm);
        r.get("hidden", c.ppo.hidden);
        r.get("normalize_obs", c.ppo.normalize_obs);
        r.finish();
    });
    root.with("dqn", [&](const json& v, const std::string& w) {
        ObjectReader r(v, w);
        r.get("gamma", c.dqn.gamma);
        r.get("lr", c.dqn.lr);
        r.get("batch", c.dqn.batch);
        r.get("buffer_capacity", c.dqn.buffer_capacity);
        r.get("target_sync", c.dqn.target_sync);
        r.get("train_every", c.dqn.train_every);
        r.get("warmup_steps", c.dqn.warmup_steps);
        r.get("eps_start", c.dqn.eps_start);
        r.get("eps_end", c.dqn.eps_end);
        r.get("eps_decay_fraction", c.dqn.eps_decay_fraction);
        r.get("huber_delta", c.dqn.huber_delta);
        r.get("hidden", c.dqn.hidden);
        r.get("normalize_obs", c.dqn.normalize_obs);
        r.finish();
    });
    root.with("qlearning", [&](const json& v, const std::string& w) {
        ObjectReader r(v, w);
        r.get("alpha", c.qlearning.alpha);
        r.get("gamma", c.qlearning.gamma);
        r.get("bins", c.qlearning.bins);
        r.get("bin_fit_episodes", c.qlearning.bin_fit_episodes);
        r.get("eps_start", c.qlearning.eps_start);
        r.get("eps_end", c.qlearning.eps_end);
        r.get("eps_decay_fraction", c.qlearning.eps_decay_fraction);
        r.finish();
    });
    root.finish();
    c.validate();
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void save_config(const Config& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write config file " + path.string());
    out << to_json(c).dump(2) << '\n';
}

}  // namespace slicelab
