#include "freight/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace freight::cli {

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path.string());
    out << content;
}

Network load_network(const RunConfig& cfg) {
    if (cfg.network_path.empty()) throw InputError("a network file is required (--network)");
    std::string text = read_file(cfg.network_path);
    if (cfg.network_path.ends_with(".tntp")) return import_tntp(text);
    return parse_network(text);
}

ProblemInstance load(const RunConfig& cfg) {
    if (cfg.instance_path.empty()) throw InputError("an instance file is required (--instance)");
    Network net = load_network(cfg);
    ProblemInstance inst = load_instance(read_file(cfg.instance_path), net);
    if (cfg.lambda) inst.lambda = *cfg.lambda;
    if (cfg.mu) inst.mu = *cfg.mu;
    if (inst.lambda < 0 || inst.lambda > 1 || inst.mu < 0 || inst.mu > 1)
        throw InputError("lambda and mu must lie in [0,1]");
    inst.validate();
    return inst;
}

nlp::SolveOptions options_for(const RunConfig& cfg, bool cpurr = false) {
    nlp::SolveOptions o;
    o.step_tol = cfg.tol_step;
    o.constraint_tol = cpurr ? cfg.tol_cpurr : cfg.tol_constraint;
    o.multistart = cfg.restarts;
    o.seed = cfg.seed;
    return o;
}

std::string route_label(const ProblemInstance& inst, int j, int r) {
    std::string s;
    for (int li : inst.routes[j][r].links) {
        if (!s.empty()) s += '-';
        s += inst.network.links[li].id;
    }
    return s;
}

struct PropertyRow {
    const char* name;
    double residual;
    double tolerance;
    bool checked;
};

std::vector<PropertyRow> property_rows(const SchemeResult& r, double tol, double money_scale) {
    const VerificationReport& v = r.verification;
    bool priced = r.scheme == SchemeId::ops || r.scheme == SchemeId::aops ||
                  r.scheme == SchemeId::aops_ept;
    bool ept = r.scheme == SchemeId::aops_ept;
    return {
        {"pareto_exante", v.pareto_exante_resid, tol, priced},
        {"truthful_exante", v.truthful_exante_resid, tol, priced},
        {"budget", v.budget_resid, tol * money_scale,
         priced || r.scheme == SchemeId::cpurr},
        {"robust_pareto", v.robust_pareto_resid, tol, ept},
        {"truthful_expost", v.truthful_expost_resid, tol, ept},
        {"ue_comp", v.ue_comp_resid, tol,
         r.scheme == SchemeId::ue || r.scheme == SchemeId::cpurr},
    };
}

}  // namespace

bool verification_passes(const SchemeResult& result, double tol, double money_scale) {
    for (const PropertyRow& p : property_rows(result, tol, money_scale))
        if (p.checked && p.residual > p.tolerance) return false;
    return true;
}

void emit_report(const ProblemInstance& inst, const std::vector<SchemeResult>& results,
                 const RunConfig& cfg, double money_scale) {
    fs::create_directories(cfg.out_dir);
    if (money_scale <= 0) {
        money_scale = 1.0;
        for (const SchemeResult& r : results)
            if (r.scheme == SchemeId::ue) money_scale = std::max(1.0, r.metrics.e_t_mon);
    }

    std::ostringstream summary;
    summary << metrics_csv_header() << ",status,pass\n";
    for (const SchemeResult& r : results) {
        double tol = r.scheme == SchemeId::cpurr ? cfg.tol_cpurr : cfg.tol_constraint;
        summary << metrics_csv_row(to_string(r.scheme), inst.lambda, inst.mu, r.metrics) << ','
                << nlp::to_string(r.solver.status) << ','
                << (verification_passes(r, tol, money_scale) ? "pass" : "fail") << '\n';
    }
    write_file(fs::path(cfg.out_dir) / "summary.csv", summary.str());

    std::ostringstream meta;
    meta << "seed " << cfg.seed << "\nrestarts " << cfg.restarts << "\ntol_step " << cfg.tol_step
         << "\ntol_constraint " << cfg.tol_constraint << "\ntol_cpurr " << cfg.tol_cpurr << "\n";
    for (const SchemeResult& r : results) {
        meta << to_string(r.scheme) << "_restart_objectives";
        for (double v : r.solver.restart_objectives) meta << ' ' << v;
        meta << '\n';
        if (!r.solver.relax_schedule.empty()) {
            meta << to_string(r.scheme) << "_relax_schedule";
            for (double t : r.solver.relax_schedule) meta << ' ' << t;
            meta << '\n';
        }
    }
    write_file(fs::path(cfg.out_dir) / "run.meta", meta.str());

    for (const SchemeResult& r : results) {
        double tol = r.scheme == SchemeId::cpurr ? cfg.tol_cpurr : cfg.tol_constraint;
        std::ostringstream rep;
        rep << metrics_csv_header() << '\n'
            << metrics_csv_row(to_string(r.scheme), inst.lambda, inst.mu, r.metrics) << "\n\n"
            << "property,residual,tolerance,pass\n";
        for (const PropertyRow& p : property_rows(r, tol, money_scale)) {
            if (!p.checked) continue;
            rep << p.name << ',' << std::scientific << std::setprecision(6) << p.residual << ','
                << p.tolerance << ',' << (p.residual <= p.tolerance ? "pass" : "fail") << '\n';
        }
        rep << "\nstatus " << nlp::to_string(r.solver.status) << "\niterations "
            << r.solver.iterations << "\nkkt_residual " << std::scientific
            << r.solver.kkt_residual << "\nmax_ineq_violation " << r.solver.max_ineq_violation
            << "\nmax_eq_violation " << r.solver.max_eq_violation << "\nmax_comp_violation "
            << r.solver.max_comp_violation << '\n';
        if (r.degenerate_class) rep << "degenerate_class 1\n";
        write_file(fs::path(cfg.out_dir) / (to_string(r.scheme) + "_report.txt"), rep.str());
    }

    if (cfg.emit_tensors) {
        for (const SchemeResult& r : results) {
            std::ostringstream acsv, pcsv;
            acsv << "scenario,od,class,route,alpha\n";
            pcsv << "scenario,od,class,route,pi\n";
            for (int c = 0; c < inst.n_scenarios(); ++c)
                for (int j = 0; j < inst.n_od(); ++j)
                    for (int w = 0; w < inst.n_classes(); ++w)
                        for (std::size_t rr = 0; rr < inst.routes[j].size(); ++rr) {
                            int ri = static_cast<int>(rr);
                            std::string key = std::to_string(c + 1) + ',' +
                                              std::to_string(j + 1) + ',' +
                                              std::to_string(w + 1) + ',' +
                                              route_label(inst, j, ri);
                            acsv << key << ',' << std::fixed << std::setprecision(5)
                                 << r.policy.at(c, j, w, ri) << '\n';
                            if (r.payments)
                                pcsv << key << ',' << std::fixed << std::setprecision(5)
                                     << r.payments->at(c, j, w, ri) << '\n';
                        }
            std::string prefix = results.size() > 1 ? to_string(r.scheme) + "_" : "";
            write_file(fs::path(cfg.out_dir) / (prefix + "alpha.csv"), acsv.str());
            if (r.payments) write_file(fs::path(cfg.out_dir) / (prefix + "pi.csv"), pcsv.str());
        }
    }
}

namespace {

int exit_for(const std::vector<SchemeResult>& results, const RunConfig& cfg,
             double money_scale = 0) {
    if (money_scale <= 0) {
        money_scale = 1.0;
        for (const SchemeResult& r : results)
            if (r.scheme == SchemeId::ue) money_scale = std::max(1.0, r.metrics.e_t_mon);
    }
    for (const SchemeResult& r : results)
        if (r.solver.status != nlp::SolveStatus::converged) return exit_not_converged;
    for (const SchemeResult& r : results) {
        double tol = r.scheme == SchemeId::cpurr ? cfg.tol_cpurr : cfg.tol_constraint;
        if (!verification_passes(r, tol, money_scale)) return exit_verification_failed;
    }
    return exit_ok;
}

int run_single(const ProblemInstance& inst, const RunConfig& cfg) {
    std::vector<SchemeResult> results;
    double money_scale = 0;
    if (cfg.command == "ue") {
        results.push_back(solve_ue(inst, options_for(cfg)));
    } else if (cfg.command == "so") {
        results.push_back(solve_so(inst, options_for(cfg)));
    } else if (cfg.command == "cpurr") {
        SchemeResult ue = solve_ue(inst, options_for(cfg));
        money_scale = std::max(1.0, ue.metrics.e_t_mon);
        results.push_back(solve_cpurr(inst, options_for(cfg, true), &ue.policy));
    } else {
        SchemeResult ue = solve_ue(inst, options_for(cfg));
        UeReference ref = ue_reference(inst, ue.policy);
        money_scale = std::max(1.0, ref.e_t_mon_ue);
        if (cfg.command == "aops") {
            results.push_back(solve_aops(inst, ref, options_for(cfg)));
        } else if (cfg.command == "aops-ept") {
            results.push_back(solve_aops_ept(inst, ref, options_for(cfg)));
        } else {  // ops, warm-started from AOPS per the containment argument
            SchemeResult aops = solve_aops(inst, ref, options_for(cfg));
            results.push_back(solve_ops(inst, ref, options_for(cfg), &aops.policy,
                                        &*aops.payments));
        }
    }
    emit_report(inst, results, cfg, money_scale);
    *cfg.out << metrics_csv_header() << '\n'
             << metrics_csv_row(to_string(results[0].scheme), inst.lambda, inst.mu,
                                results[0].metrics)
             << '\n';
    return exit_for(results, cfg, money_scale);
}

std::vector<SchemeResult> run_all(const ProblemInstance& inst, const RunConfig& cfg) {
    std::vector<SchemeResult> results;
    SchemeResult ue = solve_ue(inst, options_for(cfg));
    UeReference ref = ue_reference(inst, ue.policy);
    SchemeResult so = solve_so(inst, options_for(cfg), &ue.policy);
    SchemeResult aops = solve_aops(inst, ref, options_for(cfg));
    SchemeResult ops = solve_ops(inst, ref, options_for(cfg), &aops.policy, &*aops.payments);
    // the SO feasible set contains the OPS routings: re-polish if OPS won
    if (ops.metrics.objective < so.metrics.objective) {
        SchemeResult so2 = solve_so(inst, options_for(cfg), &ops.policy);
        if (so2.metrics.objective <= so.metrics.objective) so = std::move(so2);
    }
    SchemeResult cp = solve_cpurr(inst, options_for(cfg, true), &ue.policy);
    results.push_back(std::move(ue));
    results.push_back(std::move(so));
    results.push_back(std::move(ops));
    results.push_back(std::move(aops));
    results.push_back(std::move(cp));
    return results;
}

int run_compare(const ProblemInstance& inst, const RunConfig& cfg) {
    auto results = run_all(inst, cfg);
    emit_report(inst, results, cfg);
    *cfg.out << metrics_csv_header() << '\n';
    for (const SchemeResult& r : results)
        *cfg.out << metrics_csv_row(to_string(r.scheme), inst.lambda, inst.mu, r.metrics) << '\n';
    return exit_for(results, cfg);
}

int run_sweep(ProblemInstance inst, const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    std::ostringstream csv;
    csv << metrics_csv_header() << '\n';
    int worst = exit_ok;
    for (double lam : cfg.sweep_lambdas) {
        if (lam < 0 || lam > 1) throw InputError("sweep lambda out of [0,1]");
        inst.lambda = lam;
        SchemeResult ue = solve_ue(inst, options_for(cfg));
        UeReference ref = ue_reference(inst, ue.policy);
        SchemeResult so = solve_so(inst, options_for(cfg), &ue.policy);
        SchemeResult aops = solve_aops(inst, ref, options_for(cfg));
        SchemeResult ops = solve_ops(inst, ref, options_for(cfg), &aops.policy, &*aops.payments);
        SchemeResult cp = solve_cpurr(inst, options_for(cfg, true), &ue.policy);
        for (const SchemeResult* r : {&ue, &so, &ops, &aops, &cp}) {
            csv << metrics_csv_row(to_string(r->scheme), lam, inst.mu, r->metrics) << '\n';
            if (r->solver.status != nlp::SolveStatus::converged)
                worst = std::max(worst, exit_not_converged);
        }
    }
    write_file(fs::path(cfg.out_dir) / "sweep.csv", csv.str());
    *cfg.out << csv.str();
    return worst;
}

int run_certify(const ProblemInstance& inst, const RunConfig& cfg) {
    auto& os = *cfg.out;
    SchemeResult so = solve_so(inst, options_for(cfg));
    oracle::GridSpec grid;
    auto gb = oracle::grid_search_best(inst, oracle::GridObjective::so, grid);
    double bound = oracle::so_lipschitz_bound(inst) * grid.step;
    bool so_ok = so.metrics.objective <= gb.value + bound;
    os << "so: solver " << std::setprecision(10) << so.metrics.objective << " oracle " << gb.value
       << " gap " << so.metrics.objective - gb.value << " bound " << bound << " "
       << (so_ok ? "pass" : "fail") << '\n';

    SchemeResult ue = solve_ue(inst, options_for(cfg));
    auto br = oracle::best_response_ue(inst, 200000, 1.0);
    double regret_solver = marginal_regret(inst, ue.policy);
    bool ue_ok = br.converged && regret_solver <= 1e-5;
    os << "ue: solver regret " << regret_solver << " oracle regret " << br.regret << " "
       << (ue_ok ? "pass" : "fail") << '\n';
    return so_ok && ue_ok ? exit_ok : exit_verification_failed;
}

int run_gen(const RunConfig& cfg) {
    Network net = cfg.network_path.empty() ? sioux_falls_network() : load_network(cfg);
    ProblemInstance inst = gen_synthetic(net, cfg.seed, SyntheticSpec{});
    fs::create_directories(cfg.out_dir);
    write_file(fs::path(cfg.out_dir) / "network.txt", serialize_network(inst.network));
    write_file(fs::path(cfg.out_dir) / "instance.txt", serialize_instance(inst));
    *cfg.out << "wrote " << (fs::path(cfg.out_dir) / "network.txt").string() << " and "
             << (fs::path(cfg.out_dir) / "instance.txt").string() << '\n';
    return exit_ok;
}

}  // namespace

int run(const RunConfig& cfg) {
    try {
        if (cfg.command == "gen") return run_gen(cfg);
        ProblemInstance inst = load(cfg);
        if (cfg.command == "validate") {
            *cfg.out << "ok: " << inst.n_od() << " od pairs, " << inst.n_classes()
                     << " classes, " << inst.n_scenarios() << " scenarios\n";
            return exit_ok;
        }
        if (cfg.command == "compare") return run_compare(inst, cfg);
        if (cfg.command == "sweep") return run_sweep(std::move(inst), cfg);
        if (cfg.command == "certify") return run_certify(inst, cfg);
        if (cfg.command == "ue" || cfg.command == "so" || cfg.command == "ops" ||
            cfg.command == "aops" || cfg.command == "aops-ept" || cfg.command == "cpurr")
            return run_single(inst, cfg);
        throw InputError("unknown command: " + cfg.command);
    } catch (const InputError& e) {
        *cfg.err << "error: " << e.what() << '\n';
        return exit_input_error;
    }
}

}  // namespace freight::cli
