#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heavytail/bounds.hpp"
#include "heavytail/targets.hpp"

namespace heavytail {

struct ExperimentConfig {
    std::vector<PotentialSpec> families;
    double q = 2.0;
    double q_prime = std::numeric_limits<double>::infinity();
    double eps = 1.0;
    std::vector<double> sigma2_list{4, 16, 64, 256, 1024};
    double h = 1e-2;
    std::size_t n_chains = 10000;
    std::uint64_t n_iters = 200000;  // cap per run; runs stop once the threshold is crossed
    std::uint64_t record_every = 1;
    std::uint64_t seed = 1;
    std::string output_dir = ".";

    // Gaussian, Sublinear alpha = 1/2 and GenCauchy nu = 2, all at d = 2.
    static ExperimentConfig phase_default();
};

// Throws DomainError naming the offending field.
void validate(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

struct PhaseRow {
    std::string family;
    double alpha = 0.0;  // growth exponent
    std::optional<double> nu;
    int d = 1;
    double h = 0.0;
    double sigma2 = 0.0;
    double delta0_bound = 0.0;
    std::optional<std::uint64_t> iters_measured;  // empty if not crossed within n_iters
    std::optional<double> iters_lower_bound;
    std::optional<double> iters_upper_bound;
    bool lower_bound_applies = true;  // delta0 at or above the threshold
};

// Initial divergence used for the sweep: KL for Gaussian tails, R_inf otherwise.
double phase_delta0(const PotentialSpec& spec, double sigma2);

// Iteration upper bound for LMC from N(0, sigma2 I) with unit constants, or
// empty when an ingredient is infinite or unavailable. Notes explain why.
std::optional<double> phase_upper_bound(const PotentialSpec& spec, const ExperimentConfig& cfg, double sigma2,
                                        std::vector<std::string>* notes = nullptr);

PhaseRow run_phase_point(const PotentialSpec& spec, const ExperimentConfig& cfg, double sigma2,
                         std::uint64_t seed);

void write_phase_header(std::ostream& os);
void write_phase_row(std::ostream& os, const PhaseRow& r);
// Log-log plot of measured iterations against delta0, one polyline per family.
void write_phase_svg(std::ostream& os, const std::vector<PhaseRow>& rows);

// Entry point of the command-line tool. Exit codes: 0 success, 1 failed
// check or runtime error, 2 invalid input.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace heavytail
