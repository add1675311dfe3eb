#include <CLI11.hpp>

#include "experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"XY-model equilibrium propagation trainer"};
    app.require_subcommand(1);

    std::string config_path;
    std::string ckpt_path;
    std::vector<std::string> ckpt_paths;

    auto* train = app.add_subcommand("train", "Train a network from a config file");
    train->add_option("config", config_path, "experiment config (JSON)")->required();

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval->add_option("checkpoint", ckpt_path, "checkpoint JSON")->required();
    eval->add_option("config", config_path, "experiment config (JSON)")->required();

    auto* probe = app.add_subcommand("probe", "Input-flip response probe on checkpoints");
    probe->add_option("checkpoint", ckpt_path, "checkpoint JSON")->required();
    probe->add_option("config", config_path, "experiment config (JSON)")->required();
    probe->add_option("--also", ckpt_paths, "additional checkpoints to probe");

    CLI11_PARSE(app, argc, argv);

    if (train->parsed()) return xyep::cli::cmd_train(config_path);
    if (eval->parsed()) return xyep::cli::cmd_eval(ckpt_path, config_path);
    ckpt_paths.insert(ckpt_paths.begin(), ckpt_path);
    return xyep::cli::cmd_probe(ckpt_paths, config_path);
}
