#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicelab/core/types.hpp"

namespace slicelab {

/// How a slice's SLA evolves. The base SLA is either fixed or, when
/// `randomize_lambda` is set, drawn per episode with lambda ~ U[lo, hi].
/// `steps` override the SLA from a given epoch onwards.
struct SlaScheduleConfig {
    struct Step {
        std::uint32_t epoch = 0;
        double lambda_ms = 110.0;
        double phi_sla = 0.99;
        friend bool operator==(const Step&, const Step&) = default;
    };

    double lambda_ms = 110.0;
    double phi_sla = 0.99;
    bool randomize_lambda = false;
    double lambda_lo_ms = 10.0;
    double lambda_hi_ms = 110.0;
    std::vector<Step> steps;

    friend bool operator==(const SlaScheduleConfig&, const SlaScheduleConfig&) = default;
};

struct SliceConfig {
    int num_ues = 2;
    double bitrate_mbps = 1.5;
    int packet_bytes = 1500;
    /// Packets emitted back-to-back per arrival instant. 1 is plain CBR;
    /// larger values keep the mean bitrate but space arrivals further apart.
    int burst_packets = 1;
    bool controlled = true;
    SlaScheduleConfig sla;

    friend bool operator==(const SliceConfig&, const SliceConfig&) = default;
};

struct SimConfig {
    int capacity = 50;
    int epoch_len_ms = 250;
    double backhaul_ms = 5.0;
    double bits_per_prb_scale = 200.0;
    double eta_min = 0.5;
    double eta_max = 6.0;
    double eta_init = 3.0;
    double eta_init_spread = 0.0;
    double eta_sigma = 0.05;
    std::vector<SliceConfig> slices = {SliceConfig{}};

    int num_slices() const { return static_cast<int>(slices.size()); }

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct RewardConfig {
    double k = 20.0;
    RewardIndicator indicator = RewardIndicator::corrected;

    friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

struct PpoConfig {
    double clip = 0.2;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    int update_epochs = 10;
    int minibatch = 64;
    int episodes_per_update = 4;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    double lr = 3e-4;
    double max_grad_norm = 0.5;
    std::vector<int> hidden = {64, 64};
    bool normalize_obs = true;

    friend bool operator==(const PpoConfig&, const PpoConfig&) = default;
};

struct DqnConfig {
    double gamma = 0.99;
    double lr = 5e-4;
    int batch = 64;
    int buffer_capacity = 50000;
    int target_sync = 500;
    int train_every = 4;
    int warmup_steps = 1000;
    double eps_start = 1.0;
    double eps_end = 0.05;
    /// Fraction of the training budget over which epsilon decays linearly.
    double eps_decay_fraction = 0.5;
    double huber_delta = 1.0;
    std::vector<int> hidden = {64, 64};
    bool normalize_obs = true;

    friend bool operator==(const DqnConfig&, const DqnConfig&) = default;
};

struct QLearningConfig {
    double alpha = 0.1;
    double gamma = 0.99;
    int bins = 8;
    int bin_fit_episodes = 5;
    double eps_start = 1.0;
    double eps_end = 0.05;
    double eps_decay_fraction = 0.5;

    friend bool operator==(const QLearningConfig&, const QLearningConfig&) = default;
};

struct TrainingConfig {
    int episodes = 300;
    int episode_len = 100;
    int eval_every = 25;
    int eval_episodes = 5;
    /// SLA points for evaluation; empty means each slice's nominal SLA.
    std::vector<SlaSpec> eval_grid;
    std::vector<std::uint64_t> seeds = {1};
    /// Optional dataset; when set, training samples transitions from it.
    std::string offline_dataset;

    friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

struct Config {
    std::string name = "custom";
    SimConfig sim;
    RewardConfig reward;
    TrainingConfig training;
    PpoConfig ppo;
    DqnConfig dqn;
    QLearningConfig qlearning;

    /// Throws Error on any out-of-domain value.
    void validate() const;

    friend bool operator==(const Config&, const Config&) = default;
};

nlohmann::json to_json(const Config& c);
/// Unknown keys are rejected; missing keys keep their defaults.
Config config_from_json(const nlohmann::json& j);

Config load_config(const std::filesystem::path& path);
void save_config(const Config& c, const std::filesystem::path& path);

}  // namespace slicelab
