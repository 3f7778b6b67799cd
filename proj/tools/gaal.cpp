// Command-line front end: run, compare, train-gan, serve.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gaal/gantrain.hpp"
#include "gaal/harness.hpp"
#include "gaal/labsrv.hpp"

namespace fs = std::filesystem;
using namespace gaal;

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

std::string run_stem(StrategyKind s, std::uint64_t seed) {
    return std::string(strategy_name(s)) + "_" + std::to_string(seed);
}

void report_experiment(const Experiment& exp) {
    std::cerr << "pool " << exp.pool.size() << " x " << exp.pool.feature_dim << ", test " << exp.test.size() << "\n";
    if (exp.gan_trainings > 0 && !exp.gan_history.empty()) {
        const auto& last = exp.gan_history.back();
        std::cerr << "gan trained: " << exp.gan_history.size() << " epochs, final d_loss " << last.d_loss
                  << " g_loss " << last.g_loss << "\n";
    }
    for (const auto& w : exp.warnings) std::cerr << "warning: " << w << "\n";
}

void write_runs(const fs::path& out, const ExperimentConfig& config, const ReplicatedResult& rep) {
    for (const auto& run : rep.runs) {
        const std::string stem = run_stem(config.strategy, run.curve.seed);
        auto csv = open_out(out / ("curve_" + stem + ".csv"));
        write_curve_csv(csv, run.curve);
        if (config.dump_queries) {
            std::vector<QueryRecord> synthesized;
            for (const auto& q : run.queries)
                if (!q.pool_index) synthesized.push_back(q);
            if (!synthesized.empty()) dump_query_batch(out / ("queries_" + stem), synthesized);
        }
        std::cerr << strategy_name(config.strategy) << " seed " << run.curve.seed << ": labeled " << run.labeled
                  << ", skipped " << run.skipped << ", remaining " << run.remaining;
        if (!run.curve.points.empty()) std::cerr << ", final accuracy " << run.curve.points.back().accuracy;
        std::cerr << "\n";
    }
    auto summary = open_out(out / ("summary_" + std::string(strategy_name(config.strategy)) + ".csv"));
    write_summary_csv(summary, rep.summary);
    if (rep.summary.misaligned) std::cerr << "warning: curves had different labeled counts; summary keeps the shared ones\n";
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, const fs::path& out) {
    ExperimentConfig config = load_config(config_path);
    if (seed) config.seeds = {*seed};
    config.validate();
    fs::create_directories(out);
    const bool synth = is_synthesis(config.strategy) || config.strategy == StrategyKind::Mixed;
    const Experiment exp = prepare_experiment(config, synth);
    report_experiment(exp);
    write_runs(out, config, run_replicated(config, exp));
    return 0;
}

int cmd_compare(const std::string& config_path, const fs::path& out) {
    const ExperimentConfig config = load_config(config_path);
    fs::create_directories(out);
    const Experiment exp = prepare_experiment(config, needs_generator(config));
    report_experiment(exp);
    const auto configs = expand_comparison(config);
    const Comparison cmp = compare_strategies(configs, exp);
    for (std::size_t i = 0; i < configs.size(); ++i) {
        for (const auto& curve : cmp.curves[i]) {
            auto csv = open_out(out / ("curve_" + run_stem(curve.strategy, curve.seed) + ".csv"));
            write_curve_csv(csv, curve);
        }
        auto summary = open_out(out / ("summary_" + std::string(strategy_name(configs[i].strategy)) + ".csv"));
        write_summary_csv(summary, cmp.summaries[i]);
    }
    auto csv = open_out(out / "comparison.csv");
    write_comparison_csv(csv, cmp);
    auto svg = open_out(out / "comparison.svg");
    svg << render_comparison_svg(cmp);
    std::cerr << "supervised baseline: " << cmp.supervised_accuracy << " with " << cmp.supervised_labeled
              << " labels\n";
    for (const auto& s : cmp.summaries)
        if (!s.points.empty())
            std::cerr << strategy_name(s.strategy) << " @" << s.points.back().labeled_count << ": "
                      << s.points.back().mean_accuracy << " +- " << s.points.back().std_err << "\n";
    return 0;
}

int cmd_train_gan(const std::string& config_path, const fs::path& out) {
    const ExperimentConfig config = load_config(config_path);
    fs::create_directories(out);
    const Dataset pool = load_pool(config.dataset);
    const GanResult gan = train_gan(pool.as_matrix(), config.gan);
    save_network(out / "generator.gaalnet", gan.generator.net());
    save_network(out / "discriminator.gaalnet", gan.discriminator.net());
    auto loss = open_out(out / "gan_loss.csv");
    write_loss_history_csv(loss, gan.history);
    std::cerr << "wrote " << (out / "generator.gaalnet").string() << "\n";
    return 0;
}

LabelingServer* active_server = nullptr;

void on_signal(int) {
    if (active_server) active_server->stop();
}

int cmd_serve(int port, const std::string& config_path, const std::string& state_dir) {
    LabelingService service(ServiceOptions{state_dir, true});
    for (const auto& id : service.restore()) std::cerr << "restored session " << id << "\n";
    if (!config_path.empty()) {
        const std::string id = service.create_session(load_config(config_path));
        std::cout << "session " << id << std::endl;
    }
    LabelingServer server(service);
    const std::string host = LabelingServer::default_bind_address();
    const int bound = server.bind(host, port);
    std::cerr << "listening on http://" << host << ":" << bound << "\n";
    active_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.serve();
    active_server = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generative adversarial active learning experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;

    auto* run = app.add_subcommand("run", "Run one strategy and write learning curves");
    run->add_option("--config", config_path, "Config file")->required();
    run->add_option("--seed", seed, "Run only this seed");
    run->add_option("--out", out_dir, "Output directory");

    auto* compare = app.add_subcommand("compare", "Compare strategies against the supervised baseline");
    compare->add_option("--config", config_path, "Config file")->required();
    compare->add_option("--out", out_dir, "Output directory");

    auto* train = app.add_subcommand("train-gan", "Train the generator and write checkpoints");
    train->add_option("--config", config_path, "Config file")->required();
    train->add_option("--out", out_dir, "Output directory");

    int port = 8080;
    std::string state_dir;
    auto* serve = app.add_subcommand("serve", "Serve human labeling sessions over HTTP");
    serve->add_option("--port", port, "TCP port (0 picks a free one)");
    serve->add_option("--config", config_path, "Create a session from this config at startup");
    serve->add_option("--state-dir", state_dir, "Directory for session event logs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, seed, out_dir);
        if (*compare) return cmd_compare(config_path, out_dir);
        if (*train) return cmd_train_gan(config_path, out_dir);
        if (*serve) return cmd_serve(port, config_path, state_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error";
        if (!e.field().empty()) std::cerr << " (" << e.field() << ")";
        std::cerr << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
