#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hetegcn/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"hetegcn: heterogeneous graph convolution for text "
                 "classification"};
    app.require_subcommand(1);

    hetegcn::CliOptions o;
    std::string command;

    auto add_common = [&o](CLI::App* c) {
        c->add_option("--config", o.config_path, "run config JSON")
            ->required();
        c->add_option("--out", o.out_override,
                      "override the config's output directory");
    };

    CLI::App* prepare = app.add_subcommand(
        "prepare", "build and export graph artifacts");
    add_common(prepare);
    prepare->add_option("--mode", o.mode_override,
                        "override graphs.mode (transductive|inductive)");

    CLI::App* train =
        app.add_subcommand("train", "train a model and write a checkpoint");
    add_common(train);
    train->add_option("--mode", o.mode_override,
                      "override graphs.mode (transductive|inductive)");
    train->add_option("--seeds", o.seeds,
                      "train N runs with consecutive seeds and aggregate");

    CLI::App* eval = app.add_subcommand(
        "eval", "report micro/macro F1 of a trained checkpoint");
    add_common(eval);
    eval->add_option("--mode", o.mode_override,
                     "override graphs.mode (transductive|inductive)");
    eval->add_option("--split", o.split, "split to score (train|val|test)");

    CLI::App* predict =
        app.add_subcommand("predict", "write a predictions TSV");
    add_common(predict);
    predict->add_option("--mode", o.mode_override,
                        "override graphs.mode (transductive|inductive)");
    predict->add_option("--split", o.split,
                        "split to predict (train|val|test)");
    predict->add_flag("--inductive", o.inductive,
                      "predict a fresh corpus via stored word embeddings");
    predict->add_option("corpus", o.test_corpus,
                        "fresh corpus TSV (required with --inductive)");

    CLI::App* sweep = app.add_subcommand(
        "sweep", "grid-search hyperparameters and keep the best run");
    add_common(sweep);
    sweep->add_option("--parallel", o.parallel, "concurrent training runs");
    sweep->add_flag("--resume", o.resume,
                    "skip configurations already in the sweep table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    for (CLI::App* sub : {prepare, train, eval, predict, sweep})
        if (sub->parsed()) command = sub->get_name();
    return hetegcn::run_command(command, o, std::cout, std::cerr);
}
