#include "madegan/config.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace madegan {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for '" + key + "': " + v);
    }
    if (pos != v.size()) throw ConfigError("config: bad numeric value for '" + key + "': " + v);
    return out;
}

std::size_t parse_size(const std::string& key, const std::string& v) {
    double d = parse_double(key, v);
    if (d < 0 || d != static_cast<double>(static_cast<std::size_t>(d)))
        throw ConfigError("config: expected nonnegative integer for '" + key + "': " + v);
    return static_cast<std::size_t>(d);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ConfigError("config: expected true/false for '" + key + "': " + v);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "channel_base") channel_base = parse_size(key, value);
    else if (key == "latent_dim") latent_dim = parse_size(key, value);
    else if (key == "memory_slots") memory_slots = parse_size(key, value);
    else if (key == "leaky_slope") leaky_slope = parse_double(key, value);
    else if (key == "lr") lr = parse_double(key, value);
    else if (key == "beta1") beta1 = parse_double(key, value);
    else if (key == "beta2") beta2 = parse_double(key, value);
    else if (key == "epochs") epochs = parse_size(key, value);
    else if (key == "batch_size") batch_size = parse_size(key, value);
    else if (key == "lambda_rec") lambda_rec = parse_double(key, value);
    else if (key == "lambda_sparsity") lambda_sparsity = parse_double(key, value);
    else if (key == "lambda_fm") lambda_fm = parse_double(key, value);
    else if (key == "lambda_adv") lambda_adv = parse_double(key, value);
    else if (key == "memory_enabled") memory_enabled = parse_bool(key, value);
    else if (key == "adversarial_enabled") adversarial_enabled = parse_bool(key, value);
    else if (key == "level1_train_fraction") level1_train_fraction = parse_double(key, value);
    else if (key == "l2_branches") l2_branches = parse_size(key, value);
    else if (key == "l2_multi_branch") l2_multi_branch = parse_bool(key, value);
    else if (key == "l2_epochs") l2_epochs = parse_size(key, value);
    else if (key == "l2_batch_size") l2_batch_size = parse_size(key, value);
    else if (key == "l2_test_fraction") l2_test_fraction = parse_double(key, value);
    else if (key == "sample_rate") sample_rate = parse_double(key, value);
    else if (key == "highpass_cutoff_hz") highpass_cutoff_hz = parse_double(key, value);
    else if (key == "highpass_taps") highpass_taps = parse_size(key, value);
    else if (key == "notch_enabled") notch_enabled = parse_bool(key, value);
    else if (key == "notch_hz") notch_hz = parse_double(key, value);
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_size(key, value));
    else throw ConfigError("config: unknown key '" + key + "'");
}

TrainConfig RunConfig::to_train_config() const {
    TrainConfig t;
    t.arch.channel_base = channel_base;
    t.arch.latent_dim = latent_dim;
    t.arch.memory_slots = memory_slots;
    t.arch.leaky_slope = leaky_slope;
    t.lr = lr;
    t.beta1 = beta1;
    t.beta2 = beta2;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.lambda_rec = lambda_rec;
    t.lambda_sparsity = lambda_sparsity;
    t.lambda_fm = lambda_fm;
    t.lambda_adv = lambda_adv;
    t.memory_enabled = memory_enabled;
    t.adversarial_enabled = adversarial_enabled;
    t.seed = seed;
    return t;
}

SecondLevelConfig RunConfig::to_second_level_config() const {
    SecondLevelConfig c;
    c.n_branches = l2_branches;
    c.multi_branch = l2_multi_branch;
    c.lr = lr;
    c.beta1 = beta1;
    c.beta2 = beta2;
    c.epochs = l2_epochs;
    c.batch_size = l2_batch_size;
    c.test_fraction = l2_test_fraction;
    c.seed = seed;
    return c;
}

RunConfig parse_run_config(std::istream& is) {
    RunConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        try {
            cfg.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    return parse_run_config(is);
}

void write_run_config(std::ostream& os, const RunConfig& cfg) {
    os << std::setprecision(17);
    os << "channel_base = " << cfg.channel_base << "\n";
    os << "latent_dim = " << cfg.latent_dim << "\n";
    os << "memory_slots = " << cfg.memory_slots << "\n";
    os << "leaky_slope = " << cfg.leaky_slope << "\n";
    os << "lr = " << cfg.lr << "\n";
    os << "beta1 = " << cfg.beta1 << "\n";
    os << "beta2 = " << cfg.beta2 << "\n";
    os << "epochs = " << cfg.epochs << "\n";
    os << "batch_size = " << cfg.batch_size << "\n";
    os << "lambda_rec = " << cfg.lambda_rec << "\n";
    os << "lambda_sparsity = " << cfg.lambda_sparsity << "\n";
    os << "lambda_fm = " << cfg.lambda_fm << "\n";
    os << "lambda_adv = " << cfg.lambda_adv << "\n";
    os << "memory_enabled = " << (cfg.memory_enabled ? "true" : "false") << "\n";
    os << "adversarial_enabled = " << (cfg.adversarial_enabled ? "true" : "false") << "\n";
    os << "level1_train_fraction = " << cfg.level1_train_fraction << "\n";
    os << "l2_branches = " << cfg.l2_branches << "\n";
    os << "l2_multi_branch = " << (cfg.l2_multi_branch ? "true" : "false") << "\n";
    os << "l2_epochs = " << cfg.l2_epochs << "\n";
    os << "l2_batch_size = " << cfg.l2_batch_size << "\n";
    os << "l2_test_fraction = " << cfg.l2_test_fraction << "\n";
    os << "sample_rate = " << cfg.sample_rate << "\n";
    os << "highpass_cutoff_hz = " << cfg.highpass_cutoff_hz << "\n";
    os << "highpass_taps = " << cfg.highpass_taps << "\n";
    os << "notch_enabled = " << (cfg.notch_enabled ? "true" : "false") << "\n";
    os << "notch_hz = " << cfg.notch_hz << "\n";
    os << "seed = " << cfg.seed << "\n";
}

void write_run_config_file(const std::string& path, const RunConfig& cfg) {
    std::ofstream os(path);
    if (!os) throw ConfigError("config: cannot write " + path);
    write_run_config(os, cfg);
}

}  // namespace madegan
