#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "madegan/classifier.hpp"
#include "madegan/train.hpp"

namespace madegan {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key=value run configuration ('#' comments, blank lines ignored).
// Unknown keys are rejected so typos fail loudly. Every run writes the fully
// resolved config next to its outputs for bit-exact reruns.
struct RunConfig {
    // architecture
    std::size_t channel_base = 32;
    std::size_t latent_dim = 50;
    std::size_t memory_slots = 2000;
    double leaky_slope = 0.2;
    // level-1 training
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    double lambda_rec = 1.0;
    double lambda_sparsity = 2e-4;
    double lambda_fm = 1.0;
    double lambda_adv = 1.0;
    bool memory_enabled = true;
    bool adversarial_enabled = true;
    double level1_train_fraction = 0.9;
    // level-2 training
    std::size_t l2_branches = 4;
    bool l2_multi_branch = true;
    std::size_t l2_epochs = 30;
    std::size_t l2_batch_size = 32;
    double l2_test_fraction = 0.1;
    // preprocessing
    double sample_rate = 360.0;
    double highpass_cutoff_hz = 0.5;
    std::size_t highpass_taps = 301;
    bool notch_enabled = false;
    double notch_hz = 60.0;
    // shared
    std::uint64_t seed = 0;

    void set(const std::string& key, const std::string& value);  // throws ConfigError

    TrainConfig to_train_config() const;
    SecondLevelConfig to_second_level_config() const;
};

RunConfig parse_run_config(std::istream& is);
RunConfig load_run_config(const std::string& path);
void write_run_config(std::ostream& os, const RunConfig& cfg);
void write_run_config_file(const std::string& path, const RunConfig& cfg);

}  // namespace madegan
