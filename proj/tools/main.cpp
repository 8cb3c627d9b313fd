#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "traplab/cli_run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"traplab: trapped interacting particles and paths, numerically"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::uint64_t seed_override = 0;
    int threads_override = 0;
    bool have_seed = false;

    auto add_common = [&](CLI::App* sub, bool with_out) {
        sub->add_option("--config", config_path, "run configuration file (.ini style or .json)")
            ->required();
        if (with_out) sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed-override", seed_override, "replace the config seed")
            ->each([&](const std::string&) { have_seed = true; });
        sub->add_option("--threads", threads_override, "worker thread cap");
    };

    for (const std::string& name : traplab::known_problems()) add_common(app.add_subcommand(name), true);
    add_common(app.add_subcommand("validate", "dry-run schema and precondition checks"), false);
    app.get_subcommand("validate")
        ->add_option("--problem", "problem to validate against (default: run.problem)");

    CLI11_PARSE(app, argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    try {
        if (name == "validate") {
            std::string problem;
            if (sub->count("--problem")) problem = sub->get_option("--problem")->as<std::string>();
            traplab::ConfigData cfg = traplab::parse_config_file(config_path);
            if (problem.empty()) problem = cfg.get("run", "problem", "");
            if (problem.empty()) {
                std::cerr << "validate: no problem given (use --problem or run.problem)\n";
                return 2;
            }
            auto diags = traplab::validate_config(cfg, problem);
            for (const auto& d : diags)
                std::cout << "[" << d.where << "] " << d.message << "\n";
            return diags.empty() ? 0 : 2;
        }
        traplab::RunOverrides ov;
        if (have_seed) ov.seed = seed_override;
        if (threads_override > 0) ov.threads = threads_override;
        traplab::run_subcommand(name, config_path, out_dir, ov);
        return 0;
    } catch (const traplab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
