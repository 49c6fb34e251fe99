#include "freight/cli.hpp"

#include "CLI11.hpp"

int main(int argc, char** argv) {
    CLI::App app{"freight routing and pricing schemes"};
    app.require_subcommand(1);

    freight::cli::RunConfig cfg;
    double lambda = -1, mu = -1;

    auto add_common = [&](CLI::App* sub, bool needs_instance) {
        if (needs_instance) {
            sub->add_option("--instance", cfg.instance_path, "instance file")->required();
            sub->add_option("--network", cfg.network_path, "network file (.txt or .tntp)")
                ->required();
        } else {
            sub->add_option("--network", cfg.network_path, "network file (.txt or .tntp)");
        }
        sub->add_option("--lambda", lambda, "override objective weight lambda");
        sub->add_option("--mu", mu, "override objective weight mu");
        sub->add_option("--seed", cfg.seed, "solver / generator seed");
        sub->add_option("--restarts", cfg.restarts, "multistart count");
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--tol-step", cfg.tol_step, "step tolerance");
        sub->add_option("--tol-constraint", cfg.tol_constraint, "constraint tolerance");
        sub->add_flag("--emit-tensors", cfg.emit_tensors, "write alpha.csv / pi.csv");
    };

    for (const char* name : {"validate", "ue", "so", "ops", "aops", "aops-ept", "cpurr",
                             "compare", "certify"})
        add_common(app.add_subcommand(name), true);
    auto* sweep = app.add_subcommand("sweep");
    add_common(sweep, true);
    sweep->add_option("--lambdas", cfg.sweep_lambdas, "lambda grid");
    add_common(app.add_subcommand("gen"), false);

    CLI11_PARSE(app, argc, argv);

    cfg.command = app.get_subcommands().front()->get_name();
    if (lambda >= 0) cfg.lambda = lambda;
    if (mu >= 0) cfg.mu = mu;
    return freight::cli::run(cfg);
}
