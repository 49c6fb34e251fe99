#pragma once

#include "freight/oracle.hpp"
#include "freight/schemes.hpp"

#include <iostream>
#include <string>
#include <vector>

namespace freight::cli {

struct RunConfig {
    std::string command;         // validate|ue|so|ops|aops|aops-ept|cpurr|compare|sweep|certify|gen
    std::string instance_path;
    std::string network_path;    // instance files carry no network reference
    std::string out_dir = ".";
    std::optional<double> lambda;
    std::optional<double> mu;
    std::uint64_t seed = 0;
    int restarts = 10;
    double tol_step = 1e-6;
    double tol_constraint = 1e-6;
    double tol_cpurr = 5e-5;
    std::vector<double> sweep_lambdas = {0.0, 0.25, 0.5, 0.75, 1.0};
    bool emit_tensors = false;
    std::ostream* out = &std::cout;
    std::ostream* err = &std::cerr;
};

// exit codes
inline constexpr int exit_ok = 0;
inline constexpr int exit_input_error = 1;
inline constexpr int exit_not_converged = 2;
inline constexpr int exit_verification_failed = 3;

int run(const RunConfig& config);

/// Writes summary.csv, optional alpha.csv/pi.csv, run.meta and one
/// <scheme>_report.txt per result into config.out_dir.
/// money_scale = max(1, E[T_mon,UE]); pass 0 to derive it from the UE row in
/// `results` (single-scheme runs must supply it, their UE solve is internal).
void emit_report(const ProblemInstance& inst, const std::vector<SchemeResult>& results,
                 const RunConfig& config, double money_scale = 0);

/// Residual thresholds for one result; money-denominated residuals are scaled
/// by max(1, E[T_mon,UE]).
bool verification_passes(const SchemeResult& result, double tol, double money_scale);

}  // namespace freight::cli
