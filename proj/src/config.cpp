#include "gaal/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "gaal/errors.hpp"

namespace gaal {

std::string_view oracle_kind_name(OracleKind kind) {
    switch (kind) {
        case OracleKind::GroundTruth: return "ground_truth";
        case OracleKind::NearestNeighbor: return "nearest_neighbor";
        case OracleKind::Human: return "human";
    }
    return "?";
}

OracleKind parse_oracle_kind(std::string_view name) {
    for (auto k : {OracleKind::GroundTruth, OracleKind::NearestNeighbor, OracleKind::Human})
        if (name == oracle_kind_name(k)) return k;
    throw ConfigError("unknown oracle '" + std::string(name) + "' (expected ground_truth, nearest_neighbor or human)",
                      "oracle");
}

bool DatasetSpec::operator==(const DatasetSpec& o) const {
    return kind == o.kind && pool_size == o.pool_size && test_size == o.test_size && mean_pos == o.mean_pos &&
           mean_neg == o.mean_neg && sigma == o.sigma && seed == o.seed &&
           shift.translation == o.shift.translation && shift.noise_sigma == o.shift.noise_sigma &&
           shift.rotation_angle == o.shift.rotation_angle && train_images == o.train_images &&
           train_labels == o.train_labels && test_images == o.test_images && test_labels == o.test_labels &&
           class_a == o.class_a && class_b == o.class_b && pool_limit == o.pool_limit && test_limit == o.test_limit &&
           train_csv == o.train_csv && test_csv == o.test_csv;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& text, const std::string& key) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        throw ConfigError("'" + key + "' expects a number, got '" + text + "'", key);
    return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& key) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError("'" + key + "' expects a non-negative integer, got '" + text + "'", key);
    return v;
}

int parse_int(const std::string& text, const std::string& key) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError("'" + key + "' expects an integer, got '" + text + "'", key);
    return v;
}

bool parse_bool(const std::string& text, const std::string& key) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + text + "'", key);
}

std::vector<double> parse_doubles(const std::string& text, const std::string& key) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(parse_double(item, key));
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text, const std::string& key) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(text)) out.push_back(parse_u64(item, key));
    return out;
}

// Accepts "0,1,2" and ranges such as "0-9".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(text)) {
        const auto dash = item.find('-');
        if (dash == std::string::npos || dash == 0) {
            out.push_back(parse_u64(item, "seeds"));
            continue;
        }
        const auto lo = parse_u64(trim(item.substr(0, dash)), "seeds");
        const auto hi = parse_u64(trim(item.substr(dash + 1)), "seeds");
        if (hi < lo) throw ConfigError("seed range '" + item + "' is reversed", "seeds");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
    }
    return out;
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& values, Fmt fmt) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += fmt(values[i]);
    }
    return out;
}

struct Field {
    const char* key;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

std::string str_size(std::size_t v) { return std::to_string(v); }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"strategy", [](auto& c, auto& v) { c.strategy = parse_strategy(v); },
         [](auto& c) { return std::string(strategy_name(c.strategy)); }},
        {"compare_strategies",
         [](auto& c, auto& v) {
             c.compare_strategies.clear();
             for (const auto& s : split_list(v)) c.compare_strategies.push_back(parse_strategy(s));
         },
         [](auto& c) { return join(c.compare_strategies, [](StrategyKind k) { return std::string(strategy_name(k)); }); }},
        {"init_size", [](auto& c, auto& v) { c.init_size = parse_u64(v, "init_size"); },
         [](auto& c) { return str_size(c.init_size); }},
        {"batch_size", [](auto& c, auto& v) { c.batch_size = parse_u64(v, "batch_size"); },
         [](auto& c) { return str_size(c.batch_size); }},
        {"budget", [](auto& c, auto& v) { c.budget = parse_u64(v, "budget"); },
         [](auto& c) { return str_size(c.budget); }},
        {"oracle", [](auto& c, auto& v) { c.oracle = parse_oracle_kind(v); },
         [](auto& c) { return std::string(oracle_kind_name(c.oracle)); }},
        {"oracle_skip_radius",
         [](auto& c, auto& v) {
             if (v == "auto")
                 c.skip_radius.reset();
             else
                 c.skip_radius = parse_double(v, "oracle_skip_radius");
         },
         [](auto& c) { return c.skip_radius ? format_double(*c.skip_radius) : std::string("auto"); }},
        {"seeds", [](auto& c, auto& v) { c.seeds = parse_seeds(v); },
         [](auto& c) { return join(c.seeds, [](std::uint64_t s) { return std::to_string(s); }); }},
        {"dump_queries", [](auto& c, auto& v) { c.dump_queries = parse_bool(v, "dump_queries"); },
         [](auto& c) { return std::string(c.dump_queries ? "true" : "false"); }},

        {"dataset", [](auto& c, auto& v) { c.dataset.kind = v; }, [](auto& c) { return c.dataset.kind; }},
        {"pool_size", [](auto& c, auto& v) { c.dataset.pool_size = parse_u64(v, "pool_size"); },
         [](auto& c) { return str_size(c.dataset.pool_size); }},
        {"test_size", [](auto& c, auto& v) { c.dataset.test_size = parse_u64(v, "test_size"); },
         [](auto& c) { return str_size(c.dataset.test_size); }},
        {"mean_pos", [](auto& c, auto& v) { c.dataset.mean_pos = parse_doubles(v, "mean_pos"); },
         [](auto& c) { return join(c.dataset.mean_pos, format_double); }},
        {"mean_neg", [](auto& c, auto& v) { c.dataset.mean_neg = parse_doubles(v, "mean_neg"); },
         [](auto& c) { return join(c.dataset.mean_neg, format_double); }},
        {"sigma", [](auto& c, auto& v) { c.dataset.sigma = parse_double(v, "sigma"); },
         [](auto& c) { return format_double(c.dataset.sigma); }},
        {"dataset_seed", [](auto& c, auto& v) { c.dataset.seed = parse_u64(v, "dataset_seed"); },
         [](auto& c) { return std::to_string(c.dataset.seed); }},
        {"shift_translation", [](auto& c, auto& v) { c.dataset.shift.translation = parse_doubles(v, "shift_translation"); },
         [](auto& c) { return join(c.dataset.shift.translation, format_double); }},
        {"shift_noise", [](auto& c, auto& v) { c.dataset.shift.noise_sigma = parse_double(v, "shift_noise"); },
         [](auto& c) { return format_double(c.dataset.shift.noise_sigma); }},
        {"shift_rotation", [](auto& c, auto& v) { c.dataset.shift.rotation_angle = parse_double(v, "shift_rotation"); },
         [](auto& c) { return format_double(c.dataset.shift.rotation_angle); }},
        {"train_images", [](auto& c, auto& v) { c.dataset.train_images = v; }, [](auto& c) { return c.dataset.train_images; }},
        {"train_labels", [](auto& c, auto& v) { c.dataset.train_labels = v; }, [](auto& c) { return c.dataset.train_labels; }},
        {"test_images", [](auto& c, auto& v) { c.dataset.test_images = v; }, [](auto& c) { return c.dataset.test_images; }},
        {"test_labels", [](auto& c, auto& v) { c.dataset.test_labels = v; }, [](auto& c) { return c.dataset.test_labels; }},
        {"class_a", [](auto& c, auto& v) { c.dataset.class_a = parse_int(v, "class_a"); },
         [](auto& c) { return std::to_string(c.dataset.class_a); }},
        {"class_b", [](auto& c, auto& v) { c.dataset.class_b = parse_int(v, "class_b"); },
         [](auto& c) { return std::to_string(c.dataset.class_b); }},
        {"pool_limit", [](auto& c, auto& v) { c.dataset.pool_limit = parse_u64(v, "pool_limit"); },
         [](auto& c) { return str_size(c.dataset.pool_limit); }},
        {"test_limit", [](auto& c, auto& v) { c.dataset.test_limit = parse_u64(v, "test_limit"); },
         [](auto& c) { return str_size(c.dataset.test_limit); }},
        {"train_csv", [](auto& c, auto& v) { c.dataset.train_csv = v; }, [](auto& c) { return c.dataset.train_csv; }},
        {"test_csv", [](auto& c, auto& v) { c.dataset.test_csv = v; }, [](auto& c) { return c.dataset.test_csv; }},

        {"gan_epochs", [](auto& c, auto& v) { c.gan.epochs = parse_u64(v, "gan_epochs"); },
         [](auto& c) { return str_size(c.gan.epochs); }},
        {"gan_batch_size", [](auto& c, auto& v) { c.gan.batch_size = parse_u64(v, "gan_batch_size"); },
         [](auto& c) { return str_size(c.gan.batch_size); }},
        {"gan_d_steps", [](auto& c, auto& v) { c.gan.d_steps = parse_u64(v, "gan_d_steps"); },
         [](auto& c) { return str_size(c.gan.d_steps); }},
        {"latent_dim", [](auto& c, auto& v) { c.gan.latent_dim = parse_u64(v, "latent_dim"); },
         [](auto& c) { return str_size(c.gan.latent_dim); }},
        {"gan_generator_hidden", [](auto& c, auto& v) { c.gan.generator_hidden = parse_sizes(v, "gan_generator_hidden"); },
         [](auto& c) { return join(c.gan.generator_hidden, str_size); }},
        {"gan_discriminator_hidden",
         [](auto& c, auto& v) { c.gan.discriminator_hidden = parse_sizes(v, "gan_discriminator_hidden"); },
         [](auto& c) { return join(c.gan.discriminator_hidden, str_size); }},
        {"gan_learning_rate", [](auto& c, auto& v) { c.gan.optimizer.learning_rate = parse_double(v, "gan_learning_rate"); },
         [](auto& c) { return format_double(c.gan.optimizer.learning_rate); }},
        {"gan_beta1", [](auto& c, auto& v) { c.gan.optimizer.beta1 = parse_double(v, "gan_beta1"); },
         [](auto& c) { return format_double(c.gan.optimizer.beta1); }},
        {"gan_beta2", [](auto& c, auto& v) { c.gan.optimizer.beta2 = parse_double(v, "gan_beta2"); },
         [](auto& c) { return format_double(c.gan.optimizer.beta2); }},
        {"gan_seed", [](auto& c, auto& v) { c.gan.seed = parse_u64(v, "gan_seed"); },
         [](auto& c) { return std::to_string(c.gan.seed); }},
        {"gan_checkpoint", [](auto& c, auto& v) { c.gan_checkpoint = v; }, [](auto& c) { return c.gan_checkpoint; }},

        {"svm_lambda", [](auto& c, auto& v) { c.svm.lambda = parse_double(v, "svm_lambda"); },
         [](auto& c) { return format_double(c.svm.lambda); }},
        {"svm_solver",
         [](auto& c, auto& v) {
             if (v == "dual")
                 c.svm.solver = SvmSolver::Dual;
             else if (v == "pegasos")
                 c.svm.solver = SvmSolver::Pegasos;
             else
                 throw ConfigError("svm_solver must be dual or pegasos, got '" + v + "'", "svm_solver");
         },
         [](auto& c) { return std::string(c.svm.solver == SvmSolver::Dual ? "dual" : "pegasos"); }},
        {"svm_tolerance", [](auto& c, auto& v) { c.svm.tolerance = parse_double(v, "svm_tolerance"); },
         [](auto& c) { return format_double(c.svm.tolerance); }},
        {"svm_epochs", [](auto& c, auto& v) { c.svm.epochs = parse_u64(v, "svm_epochs"); },
         [](auto& c) { return str_size(c.svm.epochs); }},

        {"synth_steps", [](auto& c, auto& v) { c.synth.steps = parse_u64(v, "synth_steps"); },
         [](auto& c) { return str_size(c.synth.steps); }},
        {"synth_restarts", [](auto& c, auto& v) { c.synth.restarts = parse_u64(v, "synth_restarts"); },
         [](auto& c) { return str_size(c.synth.restarts); }},
        {"synth_learning_rate", [](auto& c, auto& v) { c.synth.learning_rate = parse_double(v, "synth_learning_rate"); },
         [](auto& c) { return format_double(c.synth.learning_rate); }},
        {"synth_momentum", [](auto& c, auto& v) { c.synth.momentum = parse_double(v, "synth_momentum"); },
         [](auto& c) { return format_double(c.synth.momentum); }},
        {"diversity_weight", [](auto& c, auto& v) { c.synth.diversity_weight = parse_double(v, "diversity_weight"); },
         [](auto& c) { return format_double(c.synth.diversity_weight); }},
        {"diversity_sigma", [](auto& c, auto& v) { c.synth.diversity_sigma = parse_double(v, "diversity_sigma"); },
         [](auto& c) { return format_double(c.synth.diversity_sigma); }},
    };
    return table;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (init_size == 0) throw ConfigError("init_size must be at least 1", "init_size");
    if (batch_size == 0) throw ConfigError("batch_size must be at least 1", "batch_size");
    if (budget < init_size)
        throw ConfigError("budget (" + std::to_string(budget) + ") must be at least init_size (" +
                              std::to_string(init_size) + ")",
                          "budget");
    if (seeds.empty()) throw ConfigError("at least one seed is required", "seeds");
    if (compare_strategies.empty()) throw ConfigError("compare_strategies is empty", "compare_strategies");
    if (skip_radius && !(*skip_radius > 0.0)) throw ConfigError("oracle_skip_radius must be positive", "oracle_skip_radius");
    if (dataset.kind != "two_gaussians" && dataset.kind != "idx" && dataset.kind != "csv")
        throw ConfigError("dataset must be two_gaussians, idx or csv, got '" + dataset.kind + "'", "dataset");
    if (dataset.kind == "two_gaussians") {
        if (dataset.pool_size == 0 || dataset.pool_size % 2) throw ConfigError("pool_size must be even and positive", "pool_size");
        if (dataset.test_size == 0 || dataset.test_size % 2) throw ConfigError("test_size must be even and positive", "test_size");
        if (!(dataset.sigma > 0.0)) throw ConfigError("sigma must be positive", "sigma");
        if (dataset.mean_pos.size() != dataset.mean_neg.size() || dataset.mean_pos.empty())
            throw ConfigError("mean_pos and mean_neg must share a dimension", "mean_neg");
    }
    if (dataset.kind == "idx") {
        if (dataset.train_images.empty()) throw ConfigError("idx dataset needs train_images", "train_images");
        if (dataset.train_labels.empty()) throw ConfigError("idx dataset needs train_labels", "train_labels");
        if (dataset.test_images.empty()) throw ConfigError("idx dataset needs test_images", "test_images");
        if (dataset.test_labels.empty()) throw ConfigError("idx dataset needs test_labels", "test_labels");
        if (dataset.class_a == dataset.class_b) throw ConfigError("class_a and class_b must differ", "class_b");
        if (oracle == OracleKind::GroundTruth)
            throw ConfigError("ground_truth oracle needs a labeling function; use nearest_neighbor or human for idx data",
                              "oracle");
    }
    if (dataset.kind == "csv") {
        if (dataset.train_csv.empty()) throw ConfigError("csv dataset needs train_csv", "train_csv");
        if (dataset.test_csv.empty()) throw ConfigError("csv dataset needs test_csv", "test_csv");
        if (oracle == OracleKind::GroundTruth)
            throw ConfigError("ground_truth oracle needs a labeling function; use nearest_neighbor or human for csv data",
                              "oracle");
    }
    gan.validate();
    svm.validate();
    synth.validate();
    if (synth.restarts != 0 && synth.restarts < batch_size)
        throw ConfigError("synth_restarts must be 0 (auto) or at least batch_size", "synth_restarts");
}

ExperimentConfig config_from_pairs(const std::map<std::string, std::string>& pairs) {
    auto version = pairs.find("config_version");
    if (version == pairs.end()) throw ConfigError("missing config_version (expected 1)", "config_version");
    if (trim(version->second) != std::to_string(kConfigVersion))
        throw ConfigError("unsupported config_version '" + version->second + "'", "config_version");

    ExperimentConfig cfg;
    for (const auto& [key, raw] : pairs) {
        if (key == "config_version") continue;
        const Field* field = nullptr;
        for (const auto& f : fields())
            if (key == f.key) field = &f;
        if (!field) throw ConfigError("unknown config key '" + key + "'", key);
        field->set(cfg, trim(raw));
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config(const std::string& text) {
    std::map<std::string, std::string> pairs;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + " is not key=value: '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        if (pairs.contains(key)) throw ConfigError("duplicate config key '" + key + "'", key);
        pairs[key] = trim(line.substr(eq + 1));
    }
    return config_from_pairs(pairs);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string render_config(const ExperimentConfig& config) {
    std::string out = "config_version=" + std::to_string(kConfigVersion) + "\n";
    for (const auto& f : fields()) out += std::string(f.key) + "=" + f.get(config) + "\n";
    return out;
}

}  // namespace gaal
