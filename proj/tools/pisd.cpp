// Command-line surface: generate-data, fit-codec, train, sample, evaluate,
// report. Exit codes: 0 ok, 2 config error, 3 io error, 4 numerical failure.
#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <map>
#include <string>

#include "pisd/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"physics-informed spectral diffusion pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    uint64_t seed = 0;
    app.add_option("--config", config_path, "path to the key = value config file")->required();
    app.add_option("--seed", seed, "top-level seed fixing all artifacts");
    app.add_option("--out", out_dir, "output directory for all artifacts");

    using Command = std::function<void(const pisd::Config&, uint64_t, const std::string&)>;
    const std::map<std::string, Command> commands = {
        {"generate-data", pisd::cmd_generate_data}, {"fit-codec", pisd::cmd_fit_codec},
        {"train", pisd::cmd_train},                 {"sample", pisd::cmd_sample},
        {"evaluate", pisd::cmd_evaluate},           {"report", pisd::cmd_report},
    };
    for (const auto& [name, fn] : commands) app.add_subcommand(name)->fallthrough();

    CLI11_PARSE(app, argc, argv);

    const std::string verb = app.get_subcommands().front()->get_name();
    try {
        pisd::Config cfg = pisd::Config::parse_file(config_path);
        commands.at(verb)(cfg, seed, out_dir);
    } catch (const pisd::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const pisd::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const pisd::NumericError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
