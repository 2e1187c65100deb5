#include "heavytail/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "heavytail/diagnostics.hpp"
#include "heavytail/errors.hpp"
#include "heavytail/fi_verify.hpp"
#include "heavytail/sampler.hpp"

namespace heavytail {

namespace {

using nlohmann::json;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg) {
    if (!ok) throw DomainError(msg);
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Exit codes.
constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kInvalid = 2;

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const DomainError& e) {
        err << "invalid input: " << e.what() << "\n";
        return kInvalid;
    } catch (const UnsupportedFamily& e) {
        err << "invalid input: " << e.what() << "\n";
        return kInvalid;
    } catch (const MomentUndefined& e) {
        err << "invalid input: " << e.what() << "\n";
        return kInvalid;
    } catch (const json::exception& e) {
        err << "invalid input: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailed;
    }
}

// Typed field access on a query object; messages name the field.
double get_num(const json& q, const std::string& key) {
    if (!q.contains(key)) throw DomainError("field '" + key + "': required");
    const auto& v = q[key];
    if (v.is_string()) {
        auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return kInf;
    }
    if (!v.is_number()) throw DomainError("field '" + key + "': must be a number");
    return v.get<double>();
}

double get_num(const json& q, const std::string& key, double def) { return q.contains(key) ? get_num(q, key) : def; }

std::optional<double> get_opt(const json& q, const std::string& key) {
    if (!q.contains(key)) return std::nullopt;
    return get_num(q, key);
}

int get_int(const json& q, const std::string& key, std::optional<int> def = std::nullopt) {
    if (!q.contains(key)) {
        if (def) return *def;
        throw DomainError("field '" + key + "': required");
    }
    if (!q[key].is_number_integer()) throw DomainError("field '" + key + "': must be an integer");
    return q[key].get<int>();
}

std::string get_str(const json& q, const std::string& key, std::optional<std::string> def = std::nullopt) {
    if (!q.contains(key)) {
        if (def) return *def;
        throw DomainError("field '" + key + "': required");
    }
    if (!q[key].is_string()) throw DomainError("field '" + key + "': must be a string");
    return q[key].get<std::string>();
}

PotentialSpec spec_of(const json& q) {
    json s = {{"family", get_str(q, "family")}, {"d", get_int(q, "d", 1)}};
    for (const char* k : {"nu", "alpha", "lambda"})
        if (q.contains(k)) s[k] = q[k];
    return spec_from_json(s);
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open '" + path + "'");
    return json::parse(in);
}

BoundReport scalar_report(double value, BoundKind kind, std::optional<Regime> regime, std::string citation) {
    BoundReport r;
    r.value = value;
    r.kind = kind;
    r.regime = regime;
    r.citation = std::move(citation);
    return r;
}

GrowthParams growth_from_query(const json& q) {
    const double a = get_num(q, "alpha");
    require(a >= 0.0 && a <= 2.0, "field 'alpha': must lie in [0, 2]");
    const int d = get_int(q, "d", 1);
    GrowthParams g{1.0, a};
    if (q.contains("b")) {
        g.b = get_num(q, "b");
    } else if (a == 0.0) {
        g.b = d + get_num(q, "nu");
    } else if (a < 2.0) {
        g.b = a;
    }
    return g;
}

BoundQuery bound_query(const json& q) {
    BoundQuery b;
    b.spec = spec_of(q);
    b.q = get_num(q, "q", 2.0);
    b.q_prime = get_num(q, "qprime", kInf);
    b.eps = get_num(q, "eps", 1.0);
    const std::pair<const char*, const char*> keys[] = {{"Rq0", kRq0},         {"R2qm1_0", kR2qm1_0},
                                                        {"Rqprime0", kRqprime0}, {"Rinf0", kRinf0},
                                                        {"KL0", kKL0},         {"R2hat0", kR2hat0}};
    for (auto [flag, key] : keys)
        if (q.contains(flag)) b.R_init[key] = get_num(q, flag);
    return b;
}

BoundReport dispatch_bound(const json& q) {
    const std::string thm = get_str(q, "thm");
    if (thm == "lower") {
        LowerBoundInput in{growth_from_query(q), get_int(q, "d", 1), get_opt(q, "h"), get_num(q, "delta0"),
                           get_opt(q, "delta0_min")};
        return lower_bound_complexity(in);
    }
    if (thm == "delta0") {
        auto spec = spec_of(q);
        const double qq = get_num(q, "q", 2.0);
        return delta0_threshold(growth_params(spec), spec.d, qq, log_normalizing_constant(spec),
                                surrogate_pi_moment(spec, qq));
    }
    if (thm == "beta-cauchy") {
        auto r = scalar_report(beta_wpi_cauchy(get_num(q, "nu"), get_int(q, "d", 1), get_num(q, "r")), BoundKind::beta,
                               Regime::alpha0, "wpi-cauchy");
        r.intermediates["r"] = get_num(q, "r");
        return r;
    }
    if (thm == "beta-sublinear")
        return beta_wpi_sublinear_report(get_num(q, "alpha"), get_int(q, "d", 1), get_num(q, "r"), get_opt(q, "gamma"));
    if (thm == "diffusion") {
        auto b = bound_query(q);
        return diffusion_time_bound(b, family_beta(b.spec));
    }
    if (thm == "lmc") {
        auto b = bound_query(q);
        const double m = q.contains("m") ? get_num(q, "m") : modified_target_m(b.spec);
        return lmc_iteration_bound(b, family_beta(b.spec), m, q.value("lift", false));
    }
    if (thm == "lmc-count")
        return lmc_iteration_count(get_num(q, "s", 1.0), get_num(q, "L"), get_int(q, "d", 1), get_num(q, "q", 2.0),
                                   get_num(q, "eps"), get_num(q, "T"), get_num(q, "m"), get_num(q, "R2hat0"));
    if (thm == "disc-step")
        return disc_step_size(get_num(q, "s", 1.0), get_num(q, "L"), get_int(q, "d", 1), get_num(q, "q", 2.0),
                              get_num(q, "eps"), get_num(q, "T"), get_num(q, "m"), get_num(q, "R2hat0"),
                              get_num(q, "N_guess"));
    if (thm == "step-size")
        return step_size_upper_bound(spec_of(q), get_num(q, "q", 2.0), get_num(q, "eps"), get_opt(q, "sigma2"));
    if (thm == "init") {
        const std::string kind = get_str(q, "kind", std::string("rinf"));
        InitKind k;
        if (kind == "rinf")
            k = InitKind::Rinf;
        else if (kind == "kl")
            k = InitKind::KL;
        else if (kind == "r2hat")
            k = InitKind::R2_hat;
        else
            throw DomainError("field 'kind': must be rinf, kl or r2hat");
        InitOptions opt;
        opt.T = get_opt(q, "T");
        opt.cauchy_corollary = q.value("corollary", false);
        return init_divergence_bound(spec_of(q), get_num(q, "sigma2"), k, opt);
    }
    if (thm == "init-holder") {
        auto spec = spec_of(q);
        const double m = q.contains("m") ? get_num(q, "m") : modified_target_m(spec);
        return init_holder_bound(spec, m, get_num(q, "T"));
    }
    throw DomainError("field 'thm': unknown theorem '" + thm + "'");
}

// Flags shared by commands that take a single target.
struct SpecFlags {
    std::string family;
    int d = 1;
    double nu = 2.0;
    double alpha = 0.5;
    CLI::Option* family_opt = nullptr;
    CLI::Option* d_opt = nullptr;
    CLI::Option* nu_opt = nullptr;
    CLI::Option* alpha_opt = nullptr;

    void add(CLI::App* app, const std::string& default_family) {
        family = default_family;
        family_opt = app->add_option("--family", family, "gaussian, sublinear or gen_cauchy");
        d_opt = app->add_option("--d", d, "dimension");
        nu_opt = app->add_option("--nu", nu, "gen_cauchy tail index");
        alpha_opt = app->add_option("--alpha", alpha, "sublinear exponent");
    }
    bool given() const { return family_opt->count() + d_opt->count() + nu_opt->count() + alpha_opt->count() > 0; }
    PotentialSpec spec() const {
        json j = {{"family", family}, {"d", d}, {"nu", nu}, {"alpha", alpha}};
        return spec_of(j);
    }
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DomainError("cannot create output directory '" + dir + "': " + ec.message());
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DomainError("cannot write '" + path + "'");
    return os;
}

}  // namespace

ExperimentConfig ExperimentConfig::phase_default() {
    ExperimentConfig c;
    c.families = {PotentialSpec::gaussian(2), PotentialSpec::sublinear(2, 0.5), PotentialSpec::gen_cauchy(2, 2)};
    return c;
}

void validate(const ExperimentConfig& c) {
    require(!c.families.empty(), "field 'families': at least one target required");
    for (const auto& s : c.families) validate(s);
    require(c.q > 1.0, "field 'q': must exceed 1");
    require(c.q_prime > c.q, "field 'q_prime': must exceed q");
    require(c.eps > 0.0, "field 'eps': must be positive");
    require(!c.sigma2_list.empty(), "field 'sigma2_list': must not be empty");
    for (std::size_t i = 0; i < c.sigma2_list.size(); ++i) {
        require(c.sigma2_list[i] > 0.0, "field 'sigma2_list': entries must be positive");
        if (i > 0) require(c.sigma2_list[i] > c.sigma2_list[i - 1], "field 'sigma2_list': must be strictly increasing");
    }
    require(c.h > 0.0, "field 'h': must be positive");
    require(c.n_chains >= 1, "field 'n_chains': must be >= 1");
    require(c.n_iters >= 1, "field 'n_iters': must be >= 1");
    require(c.record_every >= 1, "field 'record_every': must be >= 1");
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw DomainError("config must be a JSON object");
    ExperimentConfig c = ExperimentConfig::phase_default();
    if (j.contains("families")) {
        if (!j["families"].is_array()) throw DomainError("field 'families': must be an array");
        c.families.clear();
        for (const auto& s : j["families"]) c.families.push_back(spec_from_json(s));
    }
    if (j.contains("spec")) c.families = {spec_from_json(j["spec"])};
    c.q = get_num(j, "q", c.q);
    c.q_prime = get_num(j, "q_prime", c.q_prime);
    c.eps = get_num(j, "eps", c.eps);
    if (j.contains("sigma2_list")) {
        if (!j["sigma2_list"].is_array()) throw DomainError("field 'sigma2_list': must be an array");
        c.sigma2_list.clear();
        for (const auto& v : j["sigma2_list"]) {
            if (!v.is_number()) throw DomainError("field 'sigma2_list': entries must be numbers");
            c.sigma2_list.push_back(v.get<double>());
        }
    }
    c.h = get_num(j, "h", c.h);
    auto count = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        if (!j[key].is_number_integer() || j[key].get<long long>() < 0)
            throw DomainError(std::string("field '") + key + "': must be a non-negative integer");
        field = j[key].get<std::uint64_t>();
    };
    count("n_chains", c.n_chains);
    count("n_iters", c.n_iters);
    count("record_every", c.record_every);
    count("seed", c.seed);
    if (j.contains("output_dir")) c.output_dir = get_str(j, "output_dir");
    validate(c);
    return c;
}

json to_json(const ExperimentConfig& c) {
    json fam = json::array();
    for (const auto& s : c.families) fam.push_back(to_json(s));
    return {{"families", fam},
            {"q", c.q},
            {"q_prime", std::isinf(c.q_prime) ? json("inf") : json(c.q_prime)},
            {"eps", c.eps},
            {"sigma2_list", c.sigma2_list},
            {"h", c.h},
            {"n_chains", c.n_chains},
            {"n_iters", c.n_iters},
            {"record_every", c.record_every},
            {"seed", c.seed},
            {"output_dir", c.output_dir}};
}

double phase_delta0(const PotentialSpec& spec, double sigma2) {
    const auto kind = regime_of(growth_params(spec)) == Regime::alpha2 ? InitKind::KL : InitKind::Rinf;
    return init_divergence_bound(spec, sigma2, kind).value;
}

std::optional<double> phase_upper_bound(const PotentialSpec& spec, const ExperimentConfig& cfg, double sigma2,
                                        std::vector<std::string>* notes) {
    auto note = [&](const std::string& s) {
        if (notes) notes->push_back(s);
    };
    WeightFn beta;
    try {
        beta = family_beta(spec);
    } catch (const UnsupportedFamily& e) {
        note(e.what());
        return std::nullopt;
    }
    const double k = 2.0 * cfg.q - 1.0;
    BoundQuery b;
    b.spec = spec;
    b.q = cfg.q;
    b.q_prime = cfg.q_prime;
    b.eps = cfg.eps;
    if (spec.family == Family::Gaussian) {
        // Exact Renyi divergence of order k between N(0, s I) and N(0, I).
        const double s = sigma2, inner = k / s - k + 1.0;
        if (!(inner > 0.0)) {
            note("R_{2q-1} of the initialization is infinite");
            return std::nullopt;
        }
        b.R_init[kR2qm1_0] = -0.5 * spec.d / (k - 1.0) * (k * std::log(s) + std::log(inner));
    } else {
        const double rinf = init_divergence_bound(spec, sigma2, InitKind::Rinf).value;
        b.R_init[kR2qm1_0] = rinf;
        b.R_init[kRinf0] = rinf;
        b.R_init[kRqprime0] = rinf;
    }
    const double m = modified_target_m(spec);
    b.R_init[kR2hat0] = 1.0;
    const auto first = lmc_iteration_bound(b, beta, m, true);
    if (first.infeasible) {
        note(first.infeasible_reason);
        return std::nullopt;
    }
    InitOptions opt;
    opt.T = std::max(1.0, first.intermediates.at("T"));
    try {
        b.R_init[kR2hat0] = init_divergence_bound(spec, sigma2, InitKind::R2_hat, opt).value;
    } catch (const DomainError& e) {
        note(std::string("R2_hat unavailable: ") + e.what());
        return std::nullopt;
    }
    const auto rep = lmc_iteration_bound(b, beta, m, true);
    if (rep.infeasible) {
        note(rep.infeasible_reason);
        return std::nullopt;
    }
    return rep.value;
}

PhaseRow run_phase_point(const PotentialSpec& spec, const ExperimentConfig& cfg, double sigma2, std::uint64_t seed) {
    PhaseRow row;
    const auto g = growth_params(spec);
    row.family = family_name(spec.family);
    row.alpha = g.alpha_growth;
    if (spec.family == Family::GenCauchy) row.nu = spec.nu;
    row.d = spec.d;
    row.h = cfg.h;
    row.sigma2 = sigma2;

    const double threshold = sigma2_eps(spec, cfg.q, cfg.eps);
    row.delta0_bound = phase_delta0(spec, sigma2);

    std::optional<double> delta0_min;
    try {
        delta0_min = delta0_threshold(g, spec.d, cfg.q, log_normalizing_constant(spec), surrogate_pi_moment(spec, cfg.q))
                         .value;
    } catch (const MomentUndefined&) {
    }
    auto lower = lower_bound_complexity({g, spec.d, cfg.h, row.delta0_bound, delta0_min});
    row.iters_lower_bound = lower.value;
    row.lower_bound_applies = !lower.infeasible;
    row.iters_upper_bound = phase_upper_bound(spec, cfg, sigma2);

    auto batch = gaussian_init(sigma2, spec.d, cfg.n_chains, seed, cfg.h);
    const std::uint64_t chunk = std::max<std::uint64_t>(cfg.record_every, 1000);
    while (batch.k < cfg.n_iters) {
        const auto n = std::min(chunk, cfg.n_iters - batch.k);
        auto tr = run_chains(spec, batch, n, cfg.record_every);
        if (auto hit = iterations_to_threshold(tr, threshold)) {
            row.iters_measured = *hit;
            break;
        }
    }
    return row;
}

void write_phase_header(std::ostream& os) {
    os << "family,alpha,nu,d,h,sigma2,delta0_bound,iters_measured,iters_lower_bound,iters_upper_bound\n";
}

void write_phase_row(std::ostream& os, const PhaseRow& r) {
    auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
    os << r.family << ',' << num(r.alpha) << ',' << opt(r.nu) << ',' << r.d << ',' << num(r.h) << ',' << num(r.sigma2)
       << ',' << num(r.delta0_bound) << ',' << (r.iters_measured ? std::to_string(*r.iters_measured) : "") << ','
       << opt(r.iters_lower_bound) << ',' << opt(r.iters_upper_bound) << '\n';
}

void write_phase_svg(std::ostream& os, const std::vector<PhaseRow>& rows) {
    const double W = 640, H = 420, L = 70, R = 170, T = 30, B = 60;
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    std::vector<std::string> order;
    for (const auto& r : rows) {
        if (!series.count(r.family)) order.push_back(r.family);
        auto& s = series[r.family];
        if (r.iters_measured && *r.iters_measured > 0 && r.delta0_bound > 0)
            s.emplace_back(std::log10(r.delta0_bound), std::log10(static_cast<double>(*r.iters_measured)));
    }
    double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
    for (const auto& [_, pts] : series)
        for (auto [x, y] : pts) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (!(x0 < kInf)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    x0 = std::floor(x0), x1 = std::max(std::ceil(x1), x0 + 1);
    y0 = std::floor(y0), y1 = std::max(std::ceil(y1), y0 + 1);
    auto px = [&](double x) { return L + (W - L - R) * (x - x0) / (x1 - x0); };
    auto py = [&](double y) { return H - B - (H - T - B) * (y - y0) / (y1 - y0); };
    char buf[256];
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" font-family=\"sans-serif\" "
          "font-size=\"12\">\n";
    os << "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<path d=\"M%.1f %.1f V%.1f H%.1f\" stroke=\"black\" fill=\"none\"/>\n", L, T,
                  H - B, W - R);
    os << buf;
    for (double x = x0; x <= x1 + 1e-9; x += 1) {
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">1e%d</text>\n",
                      px(x), H - B, px(x), H - B + 5, px(x), H - B + 20, static_cast<int>(x));
        os << buf;
    }
    for (double y = y0; y <= y1 + 1e-9; y += 1) {
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">1e%d</text>\n",
                      L - 5, py(y), L, py(y), L - 8, py(y) + 4, static_cast<int>(y));
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">delta0 bound</text>\n",
                  L + (W - L - R) / 2, H - 15);
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"15\" y=\"%.1f\" text-anchor=\"middle\" transform=\"rotate(-90 15 %.1f)\">iterations</text>\n",
                  T + (H - T - B) / 2, T + (H - T - B) / 2);
    os << buf;
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& pts = series[order[i]];
        const char* c = colors[i % 5];
        if (!pts.empty()) {
            os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
            for (auto [x, y] : pts) {
                std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(x), py(y));
                os << buf;
            }
            os << "\"/>\n";
        }
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" stroke-width=\"2\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\">%s%s</text>\n",
                      W - R + 15, T + 20.0 * i, W - R + 35, T + 20.0 * i, c, W - R + 40, T + 20.0 * i + 4,
                      order[i].c_str(), pts.empty() ? " (no data)" : "");
        os << buf;
    }
    os << "</svg>\n";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"LMC experiments, bound calculators and functional-inequality checks for heavy-tailed targets",
                 "heavytail"};
    app.set_help_flag("--help", "print this help");  // -h is taken by the step size
    app.require_subcommand(1);

    // sample
    auto* sample = app.add_subcommand("sample", "run LMC chains and write the second-moment trace");
    SpecFlags sample_spec;
    sample_spec.add(sample, "gaussian");
    std::string sample_config, sample_out = "trace.csv";
    double sample_sigma2 = 1.0, sample_h = 1e-2;
    std::size_t sample_chains = 1000;
    std::uint64_t sample_iters = 1000, sample_every = 10, sample_seed = 1;
    sample->add_option("--config", sample_config, "JSON config (spec, h, n_chains, n_iters, record_every, seed, sigma2)");
    auto* s_sigma2 = sample->add_option("--sigma2", sample_sigma2, "initialization variance");
    auto* s_h = sample->add_option("--h", sample_h, "step size");
    auto* s_chains = sample->add_option("--chains", sample_chains, "number of chains");
    auto* s_iters = sample->add_option("--iters", sample_iters, "iterations");
    auto* s_every = sample->add_option("--record-every", sample_every, "recording interval");
    auto* s_seed = sample->add_option("--seed", sample_seed, "seed");
    sample->add_option("--out", sample_out, "trace CSV path");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "evaluate a bound calculator and print its report as JSON");
    std::string bounds_query;
    bounds->add_option("--query", bounds_query, "JSON file with the query fields; flags override");
    std::map<std::string, std::string> bflags;
    const char* str_fields[] = {"thm", "family", "kind"};
    for (const char* k : str_fields) bounds->add_option(std::string("--") + k, bflags[k]);
    std::map<std::string, double> bnum;
    const char* num_fields[] = {"nu",  "alpha", "b",      "h",     "delta0", "delta0_min", "r",  "gamma",
                                "q",   "qprime", "eps",   "sigma2", "T",     "m",          "s",  "L",
                                "N_guess", "Rq0", "R2qm1_0", "Rqprime0", "Rinf0", "KL0", "R2hat0", "lambda"};
    for (const char* k : num_fields) bounds->add_option(std::string("--") + k, bnum[k]);
    int bounds_d = 1;
    auto* b_d = bounds->add_option("--d", bounds_d, "dimension");
    bool b_corollary = false, b_lift = false;
    auto* b_cor = bounds->add_flag("--corollary", b_corollary, "GenCauchy d >= 2 normalizing-constant estimate");
    auto* b_lft = bounds->add_flag("--lift", b_lift, "raise m, L, T, R2_hat below 1 to 1 (thm lmc)");

    // phase-transition
    auto* phase = app.add_subcommand("phase-transition", "sweep initial variances and write phase.csv, phase.svg");
    std::string phase_config;
    phase->add_option("--config", phase_config, "JSON experiment config");
    SpecFlags phase_spec;
    phase_spec.add(phase, "gaussian");
    std::vector<double> p_sigma2;
    double p_h = 0, p_q = 0, p_eps = 0;
    std::size_t p_chains = 0;
    std::uint64_t p_iters = 0, p_every = 0, p_seed = 0;
    std::string p_out;
    auto* p_sigma2_o = phase->add_option("--sigma2", p_sigma2, "initial variances (strictly increasing)");
    auto* p_h_o = phase->add_option("--h", p_h, "step size");
    auto* p_q_o = phase->add_option("--q", p_q, "Renyi order");
    auto* p_eps_o = phase->add_option("--eps", p_eps, "accuracy");
    auto* p_chains_o = phase->add_option("--chains", p_chains, "chains per point");
    auto* p_iters_o = phase->add_option("--iters", p_iters, "iteration cap per point");
    auto* p_every_o = phase->add_option("--record-every", p_every, "recording interval");
    auto* p_seed_o = phase->add_option("--seed", p_seed, "seed");
    auto* p_out_o = phase->add_option("--out-dir", p_out, "output directory");

    // verify
    auto* verify = app.add_subcommand("verify", "run a functional-inequality checker (wpi, converse, weighted, fp)");
    std::string suite;
    verify->add_option("suite", suite, "wpi, converse, weighted or fp")->required();
    SpecFlags verify_spec;
    verify_spec.add(verify, "");
    bool v_falsify = false;
    std::string v_report;
    double v_sigma0 = 4.0;
    verify->add_flag("--falsify", v_falsify, "divide the constant by 1e6; violations are then expected");
    verify->add_option("--report", v_report, "write the full JSON report here");
    verify->add_option("--sigma0-2", v_sigma0, "fp: initial variance");

    // fp-evolve
    auto* fp = app.add_subcommand("fp-evolve", "evolve the 1D Fokker-Planck equation and write the trajectory CSV");
    SpecFlags fp_spec;
    fp_spec.add(fp, "gen_cauchy");
    double fp_sigma0 = 4.0, fp_t = 5.0, fp_dt = 0.0, fp_rec = 0.01, fp_q = 2.0;
    std::size_t fp_cells = 2000;
    std::string fp_out = "fp.csv";
    fp->add_option("--sigma0-2", fp_sigma0, "rho0 = N(0, sigma0_2)");
    fp->add_option("--t-final", fp_t, "horizon");
    fp->add_option("--dt", fp_dt, "time step (default: 0.9 of the stability limit)");
    fp->add_option("--record-dt", fp_rec, "recording interval");
    fp->add_option("--cells", fp_cells, "grid cells");
    fp->add_option("--q", fp_q, "Renyi order");
    fp->add_option("--out", fp_out, "trajectory CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "invalid arguments: " << e.what() << "\n";
        return kInvalid;
    }

    if (sample->parsed()) {
        return guarded(err, [&] {
            json j = json::object();
            if (!sample_config.empty()) j = read_json_file(sample_config);
            PotentialSpec spec = j.contains("spec") ? spec_from_json(j["spec"]) : sample_spec.spec();
            if (sample_spec.given()) spec = sample_spec.spec();
            auto pick = [&](CLI::Option* o, const char* key, auto& v) {
                if (o->count() == 0 && j.contains(key)) v = j[key].get<std::remove_reference_t<decltype(v)>>();
            };
            pick(s_sigma2, "sigma2", sample_sigma2);
            pick(s_h, "h", sample_h);
            pick(s_chains, "n_chains", sample_chains);
            pick(s_iters, "n_iters", sample_iters);
            pick(s_every, "record_every", sample_every);
            pick(s_seed, "seed", sample_seed);
            require(sample_sigma2 > 0 && sample_h > 0 && sample_chains >= 1 && sample_iters >= 1 && sample_every >= 1,
                    "sigma2, h must be positive and counts >= 1");
            auto batch = gaussian_init(sample_sigma2, spec.d, sample_chains, sample_seed, sample_h);
            auto tr = run_chains(spec, batch, sample_iters, sample_every);
            auto os = open_out(sample_out);
            write_trace_csv(tr, os);
            if (tr.warning) err << "warning: " << *tr.warning << "\n";
            return kOk;
        });
    }

    if (bounds->parsed()) {
        return guarded(err, [&] {
            json q = json::object();
            if (!bounds_query.empty()) {
                q = read_json_file(bounds_query);
                if (!q.is_object()) throw DomainError("query must be a JSON object");
            }
            for (const char* k : str_fields)
                if (bounds->get_option(std::string("--") + k)->count()) q[k] = bflags[k];
            for (const char* k : num_fields)
                if (bounds->get_option(std::string("--") + k)->count()) q[k] = bnum[k];
            if (b_d->count()) q["d"] = bounds_d;
            if (b_cor->count()) q["corollary"] = b_corollary;
            if (b_lft->count()) q["lift"] = b_lift;
            const auto rep = dispatch_bound(q);
            out << to_json(rep).dump(2) << "\n";
            return kOk;
        });
    }

    if (phase->parsed()) {
        ExperimentConfig cfg;
        int rc = guarded(err, [&] {
            cfg = phase_config.empty() ? ExperimentConfig::phase_default() : config_from_json(read_json_file(phase_config));
            if (phase_spec.given()) cfg.families = {phase_spec.spec()};
            if (p_sigma2_o->count()) cfg.sigma2_list = p_sigma2;
            if (p_h_o->count()) cfg.h = p_h;
            if (p_q_o->count()) cfg.q = p_q;
            if (p_eps_o->count()) cfg.eps = p_eps;
            if (p_chains_o->count()) cfg.n_chains = p_chains;
            if (p_iters_o->count()) cfg.n_iters = p_iters;
            if (p_every_o->count()) cfg.record_every = p_every;
            if (p_seed_o->count()) cfg.seed = p_seed;
            if (p_out_o->count()) cfg.output_dir = p_out;
            validate(cfg);
            ensure_dir(cfg.output_dir);
            return kOk;
        });
        if (rc != kOk) return rc;
        const auto dir = std::filesystem::path(cfg.output_dir);
        std::ofstream csv(dir / "phase.csv", std::ios::binary);
        if (!csv) {
            err << "error: cannot write " << (dir / "phase.csv").string() << "\n";
            return kFailed;
        }
        write_phase_header(csv);
        csv.flush();
        std::vector<PhaseRow> rows;
        rc = guarded(err, [&] {
            for (std::size_t f = 0; f < cfg.families.size(); ++f) {
                for (std::size_t i = 0; i < cfg.sigma2_list.size(); ++i) {
                    const std::uint64_t seed = cfg.seed + 1000003ull * f + 7919ull * i;
                    try {
                        rows.push_back(run_phase_point(cfg.families[f], cfg, cfg.sigma2_list[i], seed));
                    } catch (const std::exception& e) {
                        throw std::runtime_error(family_name(cfg.families[f].family) + " at sigma2 = " +
                                                 num(cfg.sigma2_list[i]) + ": " + e.what());
                    }
                    write_phase_row(csv, rows.back());
                    csv.flush();
                }
            }
            return kOk;
        });
        auto svg = open_out((dir / "phase.svg").string());
        write_phase_svg(svg, rows);
        // Any module error is a failed run, partial CSV already on disk.
        return rc == kOk ? kOk : kFailed;
    }

    if (verify->parsed()) {
        static const char* suites[] = {"wpi", "converse", "weighted", "fp"};
        if (std::find(std::begin(suites), std::end(suites), suite) == std::end(suites)) {
            err << "invalid arguments: unknown suite '" << suite << "'\n";
            return kInvalid;
        }
        return guarded(err, [&] {
            SpecFlags s = verify_spec;
            if (s.family.empty()) s.family = suite == "weighted" ? "sublinear" : "gen_cauchy";
            const auto spec = s.spec();
            json report;
            std::size_t viol = 0, fviol = 0;
            if (suite == "fp") {
                FPCheckOptions opt;
                opt.sigma0_2 = v_sigma0;
                opt.falsify = v_falsify;
                auto main = fp_check(spec, opt);
                viol = main.violations.size();
                report["check"] = to_json(main);
                if (!v_falsify) {
                    opt.falsify = true;
                    auto f = fp_check(spec, opt);
                    fviol = f.violations.size();
                    report["falsification"] = to_json(f);
                }
            } else {
                const auto fs = default_test_functions();
                auto run = [&](bool falsify) {
                    if (suite == "wpi") return wpi_check(spec, family_beta(spec), fs, default_r_grid(), falsify);
                    if (suite == "converse") return converse_pi_check(spec, fs, falsify);
                    return weighted_pi_check(spec, fs, falsify);
                };
                auto main = run(v_falsify);
                viol = main.n_violations;
                report["check"] = to_json(main);
                if (!v_falsify) {
                    auto f = run(true);
                    fviol = f.n_violations;
                    report["falsification"] = to_json(f);
                }
            }
            report["suite"] = suite;
            report["target"] = to_json(spec);
            report["falsify"] = v_falsify;
            const bool ok = v_falsify ? viol == 0 : (viol == 0 && fviol > 0);
            report["passed"] = ok;
            std::string path = v_report;
            if (path.empty() && !ok) path = "verify-" + suite + ".json";
            if (!path.empty()) {
                auto os = open_out(path);
                os << report.dump(2) << "\n";
            }
            json summary = {{"suite", suite}, {"violations", viol}, {"passed", ok}};
            if (!v_falsify) summary["falsification_violations"] = fviol;
            out << summary.dump() << "\n";
            if (!ok) {
                if (!v_falsify && viol == 0) err << "falsification mode produced no violations; ";
                err << "report: " << path << "\n";
            }
            return ok ? kOk : kFailed;
        });
    }

    if (fp->parsed()) {
        return guarded(err, [&] {
            const auto spec = fp_spec.spec();
            auto layout = fp_layout(spec, fp_sigma0, fp_cells);
            auto rho0 = gaussian_on(layout, fp_sigma0);
            auto pi = pi_grid(spec, layout);
            const double dt = fp_dt > 0 ? fp_dt : 0.9 * max_stable_dt(spec, layout);
            auto frames = fokker_planck_evolve_1d(spec, rho0, fp_t, dt, fp_rec);
            auto os = open_out(fp_out);
            write_trajectory_csv(os, trajectory_table(frames, pi, fp_q));
            return kOk;
        });
    }
    return kInvalid;
}

}  // namespace heavytail
