// qbcast: experiment driver for the mixed-qubit broadcasting library.
// Subcommands: fidelity-curve, clone, universality-check, nut-sweep.
// Exit codes: 0 success, 2 usage/validation error, 3 runtime failure.

#include "qbcast/channels.hpp"
#include "qbcast/cloners.hpp"
#include "qbcast/densops.hpp"
#include "qbcast/fidelity.hpp"
#include "qbcast/nutsearch.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace qbcast;

constexpr double kUniversalityTol = 1e-6;

// full round-trip precision, '.' decimal separator
std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_cplx(cplx z) {
    return fmt17(z.real()) + (z.imag() < 0 ? "" : "+") + fmt17(z.imag()) + "i";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CLI::ValidationError("--out", "cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw CLI::ValidationError("--out", "write to '" + path + "' failed");
}

template <typename T>
T parse_value(const std::string& key, const std::string& raw);

template <>
double parse_value<double>(const std::string& key, const std::string& raw) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(raw, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != raw.size())
        throw CLI::ValidationError(key, "expected a number, got '" + raw + "'");
    return v;
}

template <>
std::size_t parse_value<std::size_t>(const std::string& key, const std::string& raw) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(raw, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != raw.size() || v < 0)
        throw CLI::ValidationError(key, "expected a nonnegative integer, got '" + raw + "'");
    return static_cast<std::size_t>(v);
}

template <>
long long parse_value<long long>(const std::string& key, const std::string& raw) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(raw, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != raw.size())
        throw CLI::ValidationError(key, "expected an integer, got '" + raw + "'");
    return v;
}

template <>
bool parse_value<bool>(const std::string& key, const std::string& raw) {
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    throw CLI::ValidationError(key, "expected a boolean, got '" + raw + "'");
}

template <>
std::string parse_value<std::string>(const std::string& key, const std::string& raw) {
    (void)key;
    return raw;
}

// Subcommand wrapper with key=value config support ('#' comments, no
// sections; keys are the long option names without dashes). Command-line
// flags override config values, which override the built-in defaults;
// unknown keys are rejected.
class ConfigurableCommand {
public:
    explicit ConfigurableCommand(CLI::App* cmd) : cmd_(cmd) {
        cmd_->add_option("--config", config_path_, "key=value config file");
    }

    template <typename T>
    CLI::Option* option(const std::string& name, T& target, const std::string& help) {
        CLI::Option* opt = cmd_->add_option(name, target, help);
        bind<T>(name, opt, target);
        return opt;
    }

    CLI::Option* flag(const std::string& name, bool& target, const std::string& help) {
        CLI::Option* opt = cmd_->add_flag(name, target, help);
        bind<bool>(name, opt, target);
        return opt;
    }

    bool parsed() const { return cmd_->parsed(); }

    // call after CLI::App::parse; command-line values win
    void apply_config() {
        if (config_path_.empty()) return;
        std::ifstream in(config_path_);
        if (!in)
            throw CLI::ValidationError("--config",
                                       "cannot read '" + config_path_ + "'");
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            const auto last = line.find_last_not_of(" \t\r");
            line = line.substr(first, last - first + 1);
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw CLI::ValidationError(
                    "--config", "line " + std::to_string(lineno) + " is not key=value");
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t");
                const auto e = s.find_last_not_of(" \t");
                return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
            };
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            const auto it = bindings_.find(key);
            if (it == bindings_.end())
                throw CLI::ValidationError("--config", "unknown key '" + key + "'");
            if (it->second.opt->count() > 0) continue;  // flag overrides config
            it->second.apply(value);
            from_config_.insert(key);
        }
    }

    // true when the option was given on the command line or in the config
    bool given(const std::string& name) const {
        const std::string key = strip(name);
        const auto it = bindings_.find(key);
        return (it != bindings_.end() && it->second.opt->count() > 0) ||
               from_config_.count(key) > 0;
    }

private:
    struct Binding {
        CLI::Option* opt;
        std::function<void(const std::string&)> apply;
    };

    static std::string strip(const std::string& name) {
        return name.substr(name.find_first_not_of('-'));
    }

    template <typename T>
    void bind(const std::string& name, CLI::Option* opt, T& target) {
        const std::string key = strip(name);
        bindings_[key] = Binding{
            opt, [key, &target](const std::string& raw) {
                target = parse_value<T>(key, raw);
            }};
    }

    CLI::App* cmd_;
    std::string config_path_;
    std::map<std::string, Binding> bindings_;
    std::set<std::string> from_config_;
};

std::vector<double> parse_levels(const std::string& text) {
    std::vector<double> levels;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        levels.push_back(parse_value<double>("--levels", item));
    }
    return levels;
}

struct MachineSpec {
    std::string name;
    std::size_t M = 2;
    double machine_theta = 0.0;
    double machine_omega = 0.0;
};

void add_machine_options(ConfigurableCommand& cc, MachineSpec& m) {
    cc.option("--machine", m.name, "cloning machine: gm | omega-dqcm | known-basis")
        ->required();
    cc.option("--M", m.M, "copy count (gm, known-basis)");
    cc.option("--machine-theta", m.machine_theta, "machine theta (known-basis)");
    cc.option("--machine-omega", m.machine_omega, "machine omega (omega-dqcm, known-basis)");
}

BroadcastChannel build_machine(const MachineSpec& m) {
    if (m.name == "gm") {
        if (m.M < 2 || m.M > 6)
            throw CLI::ValidationError("--M", "gm machine needs M in [2,6]");
        return gisin_massar_channel(m.M);
    }
    if (m.name == "omega-dqcm") return omega_dqcm(m.machine_omega);
    if (m.name == "known-basis") {
        if (m.M < 2) throw CLI::ValidationError("--M", "known-basis machine needs M >= 2");
        return known_basis_broadcaster(m.machine_theta, m.machine_omega, m.M);
    }
    throw CLI::ValidationError("--machine", "unknown machine '" + m.name + "'");
}

void scale_if_degrees(bool degrees, std::initializer_list<double*> angles) {
    if (!degrees) return;
    for (double* a : angles) *a *= std::numbers::pi / 180.0;
}

int cmd_fidelity_curve(std::size_t M, std::size_t steps, const std::string& out) {
    if (M < 2) throw CLI::ValidationError("--M", "M must be >= 2");
    if (steps < 2) throw CLI::ValidationError("--steps", "steps must be >= 2");
    std::string csv = "lambda,fidelity\n";
    for (std::size_t i = 0; i < steps; ++i) {
        const double lambda = static_cast<double>(i) / static_cast<double>(steps - 1);
        csv += fmt17(lambda) + "," + fmt17(optimal_mixed_fidelity(M, lambda)) + "\n";
    }
    if (out.empty())
        std::cout << csv;
    else
        write_file(out, csv);
    return 0;
}

int cmd_clone(const MachineSpec& m, const QubitParams& input, const std::string& out) {
    if (!(input.lambda >= 0.0 && input.lambda <= 1.0))
        throw CLI::ValidationError("--lambda", "lambda must be in [0,1]");
    const BroadcastChannel ch = build_machine(m);
    const DensityOperator rho_in = qubit_from_params(input);
    const DensityOperator rho_out = clone_marginal(ch, rho_in);
    const double fid = uhlmann_fidelity(rho_out, rho_in);
    const double bloch_in = bloch_vector(rho_in).norm();
    const double bloch_out = bloch_vector(rho_out).norm();
    const std::optional<double> shrink = shrinking_factor(rho_in, rho_out);

    std::cout << "machine           = " << m.name << "\n"
              << "clone marginal    = [ " << fmt_cplx(rho_out(0, 0)) << "  "
              << fmt_cplx(rho_out(0, 1)) << " ]\n"
              << "                    [ " << fmt_cplx(rho_out(1, 0)) << "  "
              << fmt_cplx(rho_out(1, 1)) << " ]\n"
              << "fidelity          = " << fmt17(fid) << "\n"
              << "bloch length in   = " << fmt17(bloch_in) << "\n"
              << "bloch length out  = " << fmt17(bloch_out) << "\n"
              << "shrinking factor  = " << (shrink ? fmt17(*shrink) : std::string("n/a"))
              << "\n";

    if (!out.empty()) {
        std::string csv =
            "machine,theta,omega,lambda,out_00,out_01_re,out_01_im,out_11,"
            "fidelity,bloch_len_in,bloch_len_out,shrinking_factor\n";
        csv += m.name + "," + fmt17(input.theta) + "," + fmt17(input.omega) + "," +
               fmt17(input.lambda) + "," + fmt17(rho_out(0, 0).real()) + "," +
               fmt17(rho_out(0, 1).real()) + "," + fmt17(rho_out(0, 1).imag()) + "," +
               fmt17(rho_out(1, 1).real()) + "," + fmt17(fid) + "," + fmt17(bloch_in) +
               "," + fmt17(bloch_out) + "," + (shrink ? fmt17(*shrink) : std::string("n/a")) +
               "\n";
        write_file(out, csv);
    }
    return 0;
}

int cmd_universality_check(const MachineSpec& m, std::size_t theta_steps,
                           std::size_t omega_steps, std::size_t lambda_steps,
                           std::optional<double> fix_theta, std::optional<double> fix_omega,
                           const std::string& out) {
    const BroadcastChannel ch = build_machine(m);
    const double pi = std::numbers::pi;

    std::vector<double> thetas, omegas, lambdas;
    if (fix_theta)
        thetas = {*fix_theta};
    else if (theta_steps == 0)
        thetas = default_theta_grid();
    else
        for (std::size_t i = 0; i < theta_steps; ++i)
            thetas.push_back(theta_steps == 1 ? 0.0
                                              : pi / 2.0 * static_cast<double>(i) /
                                                    static_cast<double>(theta_steps - 1));
    if (fix_omega)
        omegas = {*fix_omega};
    else if (omega_steps == 0)
        omegas = default_omega_grid();
    else
        for (std::size_t i = 0; i < omega_steps; ++i)
            omegas.push_back(2.0 * pi * static_cast<double>(i) /
                             static_cast<double>(omega_steps));
    if (lambda_steps < 2)
        lambdas = {0.0, 0.5, 1.0};
    else
        for (std::size_t i = 0; i < lambda_steps; ++i)
            lambdas.push_back(static_cast<double>(i) / static_cast<double>(lambda_steps - 1));

    std::string csv = "theta,omega,e_x,e_y_re,e_y_im,residual_x,residual_y\n";
    for (double theta : thetas)
        for (double omega : omegas) {
            const ChannelCoefficients co = compute_coefficients(ch, theta, omega);
            csv += fmt17(theta) + "," + fmt17(omega) + "," + fmt17(co.E_x) + "," +
                   fmt17(co.E_y.real()) + "," + fmt17(co.E_y.imag()) + "," +
                   fmt17(std::abs(co.E_x - 1.0)) + "," + fmt17(std::abs(co.E_y)) + "\n";
            std::cout << "theta=" << fmt17(theta) << " omega=" << fmt17(omega)
                      << " |E_x-1|=" << fmt17(std::abs(co.E_x - 1.0))
                      << " |E_y|=" << fmt17(std::abs(co.E_y)) << "\n";
        }

    double lo = 1.0, hi = 0.0;
    for (double theta : thetas)
        for (double omega : omegas)
            for (double lambda : lambdas) {
                const DensityOperator rho = qubit_from_params({theta, omega, lambda});
                for (std::size_t copy = 0; copy < ch.M; ++copy) {
                    const double f = uhlmann_fidelity(clone_marginal(ch, rho, copy), rho);
                    lo = std::min(lo, f);
                    hi = std::max(hi, f);
                }
            }
    const double spread = hi - lo;
    std::cout << "fidelity spread = " << fmt17(spread) << "\n"
              << "verdict: " << (spread < kUniversalityTol ? "UNIVERSAL" : "NOT-UNIVERSAL")
              << " (tolerance 1e-06)\n";
    if (!out.empty()) write_file(out, csv);
    return 0;
}

struct NutSweepConfig {
    std::size_t M = 2;
    std::size_t d = 4;
    std::string levels_text = "0.5,0.6,0.7,0.8,0.9,1.0";
    long long budget = 20000;
    std::size_t restarts = 8;
    std::uint64_t seed = 42;
    std::size_t sample_size = 30;
    std::size_t threads = 0;
    std::optional<double> fixed_omega;
    bool seed_at_dqcm = false;
    std::string out;
};

int cmd_nut_sweep(const NutSweepConfig& cfg) {
    if (cfg.budget <= 0) {
        std::cerr << "error: --budget must be positive\n";
        return 3;
    }
    if (cfg.M < 2) throw CLI::ValidationError("--M", "M must be >= 2");
    if (cfg.d == 0 || (2 * cfg.d) % (std::size_t{1} << cfg.M) != 0)
        throw CLI::ValidationError("--d", "2d must be divisible by 2^M");
    const std::vector<double> levels = parse_levels(cfg.levels_text);

    const StateSample sample =
        cfg.fixed_omega ? make_fixed_omega_sample(*cfg.fixed_omega, cfg.sample_size, cfg.seed)
                        : make_state_sample(cfg.sample_size, cfg.seed);
    SearchOptions opts;
    opts.budget = static_cast<std::uint64_t>(cfg.budget);
    opts.restarts = cfg.restarts;
    opts.seed = cfg.seed;
    opts.threads = cfg.threads;
    if (cfg.seed_at_dqcm) {
        if (!cfg.fixed_omega)
            throw CLI::ValidationError("--seed-at-dqcm", "requires --fixed-omega");
        if (cfg.M != 2 || cfg.d != 4)
            throw CLI::ValidationError("--seed-at-dqcm", "requires M=2, d=4");
        opts.initial = encode(omega_dqcm(*cfg.fixed_omega));
    }

    const TradeoffCurve curve = tradeoff_sweep(cfg.M, cfg.d, levels, sample, opts);

    std::string csv = "target_level,achieved_spread,achieved_mean,evaluations_used\n";
    for (const TradeoffPoint& pt : curve.points)
        csv += fmt17(pt.target_level) + "," + fmt17(pt.achieved_spread) + "," +
               fmt17(pt.achieved_mean) + "," + std::to_string(pt.evaluations_used) + "\n";
    if (cfg.out.empty())
        std::cout << csv;
    else
        write_file(cfg.out, csv);

    // the floors below are numerical evidence gathered by a finite search,
    // not a proof of impossibility
    if (curve.points.empty()) {
        std::cout << "summary: no levels requested; min spread n/a\n";
        return 0;
    }
    double min_spread = curve.points.front().achieved_spread;
    double at_level = curve.points.front().target_level;
    for (const TradeoffPoint& pt : curve.points)
        if (pt.achieved_spread < min_spread) {
            min_spread = pt.achieved_spread;
            at_level = pt.target_level;
        }
    std::cout << "summary: min achieved spread " << fmt17(min_spread) << " at level "
              << fmt17(at_level) << "; "
              << (min_spread < kUniversalityTol
                      ? "NUMERICALLY-UNIVERSAL point found"
                      : "no numerically universal channel found")
              << " (tolerance 1e-06; search floors are evidence, not proof)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mixed-qubit broadcasting experiments"};
    app.require_subcommand(1);

    // fidelity-curve
    ConfigurableCommand curve_cmd(
        app.add_subcommand("fidelity-curve", "optimal 1->M clone fidelity over a lambda grid"));
    std::size_t curve_m = 2, curve_steps = 101;
    std::string curve_out;
    std::uint64_t unused_seed_curve = 0, unused_seed_clone = 0, unused_seed_uni = 0;
    curve_cmd.option("--M", curve_m, "copy count");
    curve_cmd.option("--steps", curve_steps, "number of lambda grid rows");
    curve_cmd.option("--out", curve_out, "CSV output path");
    curve_cmd.option("--seed", unused_seed_curve, "rng seed (unused; accepted for uniformity)");

    // clone
    ConfigurableCommand clone_cmd(
        app.add_subcommand("clone", "run one input through a cloning machine"));
    MachineSpec clone_machine;
    QubitParams clone_input;
    std::string clone_out;
    bool clone_degrees = false;
    add_machine_options(clone_cmd, clone_machine);
    clone_cmd.option("--theta", clone_input.theta, "input theta")->required();
    clone_cmd.option("--omega", clone_input.omega, "input omega")->required();
    clone_cmd.option("--lambda", clone_input.lambda, "input lambda")->required();
    clone_cmd.flag("--degrees", clone_degrees, "angles are given in degrees");
    clone_cmd.option("--out", clone_out, "CSV output path");
    clone_cmd.option("--seed", unused_seed_clone, "rng seed (unused; accepted for uniformity)");

    // universality-check
    ConfigurableCommand uni_cmd(app.add_subcommand(
        "universality-check", "coefficient residuals and fidelity spread on a grid"));
    MachineSpec uni_machine;
    std::size_t uni_theta_steps = 0, uni_omega_steps = 0, uni_lambda_steps = 0;
    double uni_fix_theta = 0.0, uni_fix_omega = 0.0;
    bool uni_degrees = false;
    std::string uni_out;
    add_machine_options(uni_cmd, uni_machine);
    uni_cmd.option("--theta-steps", uni_theta_steps, "theta grid size (0 = default grid)");
    uni_cmd.option("--omega-steps", uni_omega_steps, "omega grid size (0 = default grid)");
    uni_cmd.option("--lambda-steps", uni_lambda_steps, "lambda grid size (0 = {0,1/2,1})");
    uni_cmd.option("--fix-theta", uni_fix_theta, "restrict the grid to one theta");
    uni_cmd.option("--fix-omega", uni_fix_omega, "restrict the grid to one omega");
    uni_cmd.flag("--degrees", uni_degrees, "angles are given in degrees");
    uni_cmd.option("--out", uni_out, "CSV output path");
    uni_cmd.option("--seed", unused_seed_uni, "rng seed (unused; accepted for uniformity)");

    // nut-sweep
    ConfigurableCommand nut_cmd(app.add_subcommand(
        "nut-sweep", "search for constant-fidelity channels per target level"));
    NutSweepConfig nut;
    double nut_fixed_omega = 0.0;
    nut_cmd.option("--M", nut.M, "copy count");
    nut_cmd.option("--d", nut.d, "ancilla dimension");
    nut_cmd.option("--levels", nut.levels_text, "comma-separated target fidelity levels");
    nut_cmd.option("--budget", nut.budget, "objective evaluations per restart");
    nut_cmd.option("--restarts", nut.restarts, "independent restarts per level");
    nut_cmd.option("--seed", nut.seed, "rng seed");
    nut_cmd.option("--sample-size", nut.sample_size, "probe states in the objective");
    nut_cmd.option("--threads", nut.threads, "worker threads (0 = machine cores)");
    nut_cmd.option("--fixed-omega", nut_fixed_omega,
                   "restrict the probe sample to one omega");
    nut_cmd.flag("--seed-at-dqcm", nut.seed_at_dqcm,
                 "start restart 0 from the omega-DQCM (needs --fixed-omega, M=2, d=4)");
    nut_cmd.option("--out", nut.out, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (curve_cmd.parsed()) {
            curve_cmd.apply_config();
            return cmd_fidelity_curve(curve_m, curve_steps, curve_out);
        }
        if (clone_cmd.parsed()) {
            clone_cmd.apply_config();
            scale_if_degrees(clone_degrees,
                             {&clone_input.theta, &clone_input.omega,
                              &clone_machine.machine_theta, &clone_machine.machine_omega});
            return cmd_clone(clone_machine, clone_input, clone_out);
        }
        if (uni_cmd.parsed()) {
            uni_cmd.apply_config();
            scale_if_degrees(uni_degrees, {&uni_machine.machine_theta,
                                           &uni_machine.machine_omega, &uni_fix_theta,
                                           &uni_fix_omega});
            return cmd_universality_check(
                uni_machine, uni_theta_steps, uni_omega_steps, uni_lambda_steps,
                uni_cmd.given("--fix-theta") ? std::optional<double>(uni_fix_theta)
                                             : std::nullopt,
                uni_cmd.given("--fix-omega") ? std::optional<double>(uni_fix_omega)
                                             : std::nullopt,
                uni_out);
        }
        if (nut_cmd.parsed()) {
            nut_cmd.apply_config();
            if (nut_cmd.given("--fixed-omega")) nut.fixed_omega = nut_fixed_omega;
            return cmd_nut_sweep(nut);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
