// rankgroth: command-line front end.
//
// Exit codes: 0 success, 2 usage or input error, 3 numerical failure, 1 other.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <rankgroth/rankgroth.hpp>

namespace rg = rankgroth;
using nlohmann::json;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    std::size_t samples = 2000;
    unsigned precision_bits = rg::kDefaultPrecisionBits;
    std::size_t terms = rg::kDefaultTerms;
    std::optional<double> tol;
    std::string format = "text";
    std::string output;
};

struct InstanceSource {
    std::string path;
    std::string lattice;
    std::string weights = "pm1";
};

json config_echo(const std::string& command, const Globals& g) {
    json c = {{"command", command},
              {"seed", g.seed},
              {"samples", g.samples},
              {"precision_bits", g.precision_bits},
              {"terms", g.terms},
              {"format", g.format}};
    if (g.tol) c["tol"] = *g.tol;
    return c;
}

rg::SeriesOptions series_options(const Globals& g) { return {g.terms, g.precision_bits}; }

std::vector<std::size_t> parse_dims(const std::string& text) {
    std::vector<std::size_t> dims;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, 'x')) {
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("--lattice expects extents like 4x4x4, got '" + text + "'");
        dims.push_back(std::stoul(item));
    }
    if (dims.empty()) throw std::invalid_argument("--lattice: no extents given");
    return dims;
}

rg::WeightedInstance load_source(const InstanceSource& src, std::uint64_t seed, json& config) {
    if (!src.path.empty() && !src.lattice.empty())
        throw std::invalid_argument("give either --instance or --lattice, not both");
    if (!src.path.empty()) {
        config["instance"] = src.path;
        return rg::load_instance(src.path);
    }
    if (src.lattice.empty()) throw std::invalid_argument("an instance is required (--instance or --lattice)");
    const auto graph = rg::lattice_graph(parse_dims(src.lattice));
    std::vector<double> w(graph.num_edges());
    rg::CounterRng rng(seed, 0xC0FFEE);
    for (auto& x : w) {
        if (src.weights == "pm1")
            x = rng.uniform() < 0.5 ? -1.0 : 1.0;
        else if (src.weights == "ferro")
            x = 1.0;
        else if (src.weights == "antiferro")
            x = -1.0;
        else
            throw std::invalid_argument("--weights must be pm1, ferro or antiferro");
    }
    config["lattice"] = src.lattice;
    config["weights"] = src.weights;
    return rg::WeightedInstance(graph, std::move(w));
}

void add_instance_options(CLI::App* cmd, InstanceSource& src) {
    cmd->add_option("--instance", src.path, "Instance file (edge list 'n m' + 'u v w' lines, or JSON)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--lattice", src.lattice, "Generate a box lattice instead, e.g. 4x4x4");
    cmd->add_option("--weights", src.weights, "Lattice weights: pm1 (random +-1 from --seed), ferro, antiferro")
        ->check(CLI::IsMember({"pm1", "ferro", "antiferro"}));
}

/// Writes to --output through a temporary file so a failed run leaves nothing behind.
void emit(const Globals& g, const std::string& text) {
    if (g.output.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    const std::string tmp = g.output + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write " + g.output);
        out << text;
        if (!text.empty() && text.back() != '\n') out << '\n';
        if (!out) throw std::runtime_error("write failed: " + g.output);
    }
    std::filesystem::rename(tmp, g.output);
}

std::string fmt(double x, int digits = 10) {
    std::ostringstream os;
    os.precision(digits);
    os << x;
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rank-constrained Grothendieck constants and Krivine-style rounding"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--samples", g.samples, "Monte-Carlo samples")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--precision-bits", g.precision_bits, "Mantissa bits for series coefficients")
        ->check(CLI::Range(64u, 4096u))
        ->capture_default_str();
    app.add_option("--terms", g.terms, "Number of odd Taylor coefficients")
        ->check(CLI::Range(static_cast<std::size_t>(8), static_cast<std::size_t>(8192)))
        ->capture_default_str();
    app.add_option("--tol", g.tol, "Tolerance (beta bisection, or theta/SDP tolerance for those commands)")
        ->check(CLI::PositiveNumber);
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}))
        ->capture_default_str();
    app.add_option("--output", g.output, "Write output to this file instead of stdout");
    for (auto* opt : app.get_options()) opt->configurable(false);

    // constants
    auto* c_constants = app.add_subcommand("constants", "Table of K(r, G) = 1/beta(r, G)");
    unsigned rmax = 10;
    std::vector<double> thetas, chis;
    std::string theta_graph;
    c_constants->add_option("--rmax", rmax, "Largest rank r")->check(CLI::Range(1u, 64u))->capture_default_str();
    auto* o_theta = c_constants->add_option("--theta", thetas, "theta(Gbar) values (default 2 3)")
                        ->check(CLI::Range(2.0, 1e6))
                        ->delimiter(',');
    auto* o_chi = c_constants->add_option("--chi", chis, "Use chromatic numbers instead of theta")
                      ->check(CLI::Range(2.0, 1e6))
                      ->delimiter(',');
    auto* o_graph = c_constants->add_option("--graph", theta_graph, "Solve theta(Gbar) for this graph")
                        ->check(CLI::ExistingFile);
    o_theta->excludes(o_chi)->excludes(o_graph);
    o_chi->excludes(o_graph);

    // theta
    auto* c_theta = app.add_subcommand("theta", "Theta number of the complement graph with certificate");
    std::string graph_path, theta_method = "auto";
    c_theta->add_option("--graph", graph_path, "Graph file")->required()->check(CLI::ExistingFile);
    c_theta->add_option("--method", theta_method, "auto, ipm or ap")->check(CLI::IsMember({"auto", "ipm", "ap"}))
        ->capture_default_str();

    // solve
    auto* c_solve = app.add_subcommand("solve", "Solve SDP_inf (and optionally local search in rank r)");
    InstanceSource solve_src;
    add_instance_options(c_solve, solve_src);
    unsigned solve_rank = 0, restarts = 50;
    c_solve->add_option("--rank", solve_rank, "Also run rank-r local search");
    c_solve->add_option("--restarts", restarts, "Local search restarts")->check(CLI::PositiveNumber)
        ->capture_default_str();

    // round / ground-state
    auto* c_round = app.add_subcommand("round", "Algorithm A: embed the SDP_inf solution and round to rank r");
    auto* c_ground = app.add_subcommand("ground-state", "n-vector model ground state via Algorithm A");
    InstanceSource round_src;
    unsigned r = 1;
    std::string theta_mode;
    for (auto* cmd : {c_round, c_ground}) {
        add_instance_options(cmd, round_src);
        cmd->add_option("--r", r, "Target rank r")->check(CLI::Range(1u, 64u))->capture_default_str();
        cmd->add_option("--theta-mode", theta_mode, "solve or chi:k (default chi:2 if bipartite, else solve)");
    }

    // xor-game
    auto* c_xor = app.add_subcommand("xor-game", "Classical and entangled value brackets of an XOR game");
    std::string game_path;
    unsigned dim = 2;
    double log_base = 2.0;
    unsigned xor_restarts = 200;
    c_xor->add_option("--game", game_path, "Game JSON {pi, g}")->required()->check(CLI::ExistingFile);
    c_xor->add_option("--d", dim, "Local dimension of the shared state")->check(CLI::PositiveNumber)
        ->capture_default_str();
    c_xor->add_option("--log-base", log_base, "Base of the logarithm in floor(log d)")
        ->check(CLI::Range(1.0000001, 1e9))
        ->capture_default_str();
    c_xor->add_option("--restarts", xor_restarts, "Local search restarts")->check(CLI::PositiveNumber)
        ->capture_default_str();

    // beta-q
    auto* c_betaq = app.add_subcommand("beta-q", "Dimension-dependent constant K(q -> r, G)");
    unsigned q = 2, rq = 1;
    double theta_q = 2.0, grid_step = 1e-3;
    c_betaq->add_option("--q", q, "Source dimension q")->check(CLI::Range(2u, 64u))->capture_default_str();
    c_betaq->add_option("--r", rq, "Target rank r")->check(CLI::Range(1u, 64u))->capture_default_str();
    c_betaq->add_option("--theta", theta_q, "theta(Gbar)")->check(CLI::Range(2.0, 1e6))->capture_default_str();
    c_betaq->add_option("--grid-step", grid_step, "Downward scan step")->check(CLI::Range(1e-6, 0.5))
        ->capture_default_str();

    // identity
    auto* c_ident = app.add_subcommand("identity", "Monte-Carlo check of E[h(u).h(v)] = E_r(u.v)");
    unsigned ri = 1;
    double t = 0.5;
    std::optional<std::size_t> ident_samples;
    c_ident->add_option("--r", ri, "Rank r")->check(CLI::Range(1u, 64u))->capture_default_str();
    c_ident->add_option("--t", t, "Inner product u.v")->check(CLI::Range(-1.0, 1.0))->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        std::string text;
        if (c_constants->parsed()) {
            json config = config_echo("constants", g);
            std::vector<double> values = thetas;
            std::string label = "theta";
            if (!chis.empty()) {
                values = chis;
                label = "chi";
            } else if (!theta_graph.empty()) {
                const auto cert = rg::solve_theta_complement(rg::load_graph(theta_graph));
                values = {cert.lambda};
                config["graph"] = theta_graph;
            } else if (values.empty()) {
                values = {2.0, 3.0};
            }
            config["rmax"] = rmax;
            config["parameter"] = label;
            const auto rows = rg::grothendieck_table(rmax, values, g.tol.value_or(1e-12), series_options(g));
            if (g.format == "csv") {
                text = rg::table_to_csv(rows);
            } else if (g.format == "json") {
                json j = {{"config", config}, {"rows", json::array()}};
                for (const auto& row : rows) j["rows"].push_back(rg::to_json(row));
                text = j.dump(2);
            } else {
                std::ostringstream os;
                os << "r  " << label << "  K(r,G)\n";
                for (const auto& row : rows) os << row.r << "  " << row.theta << "  " << fmt(row.k_bound, 12) << '\n';
                text = os.str();
            }
        } else if (c_theta->parsed()) {
            rg::ThetaOptions opts;
            opts.tol = g.tol.value_or(1e-6);
            opts.method = theta_method == "ipm" ? rg::ThetaMethod::interior_point
                          : theta_method == "ap" ? rg::ThetaMethod::alternating_projections
                                                 : rg::ThetaMethod::automatic;
            const auto cert = rg::solve_theta_complement(rg::load_graph(graph_path), opts);
            json config = config_echo("theta", g);
            config["graph"] = graph_path;
            config["method"] = theta_method;
            if (g.format == "json") {
                text = json{{"config", config}, {"certificate", rg::to_json(cert)}}.dump(2);
            } else if (g.format == "csv") {
                text = "lambda,lower_bound,psd_residual,affine_residual,converged\n" + fmt(cert.lambda, 12) + ',' +
                       fmt(cert.lower_bound, 12) + ',' + fmt(cert.psd_residual) + ',' + fmt(cert.affine_residual) +
                       ',' + (cert.converged ? "true" : "false") + '\n';
            } else {
                text = "theta(Gbar) = " + fmt(cert.lambda, 10) + "  (certified in [" + fmt(cert.lower_bound, 10) +
                       ", " + fmt(cert.lambda, 10) + "])\n";
            }
        } else if (c_solve->parsed()) {
            json config = config_echo("solve", g);
            const auto inst = load_source(solve_src, g.seed, config);
            const auto sol = rg::solve_sdp_infinity(inst, g.tol.value_or(1e-9), 100000, g.seed);
            json j = {{"config", config}, {"sdp_inf", rg::to_json(sol)}};
            std::ostringstream os;
            os << "SDP_inf value = " << fmt(sol.value, 12) << "  (dual bound " << fmt(sol.dual_bound, 12) << ")\n";
            if (solve_rank > 0) {
                const auto ls = rg::local_search_rank_r(inst, solve_rank, restarts, g.seed);
                j["local_search"] = {{"r", solve_rank}, {"value", ls.value}, {"restart", ls.best_restart},
                                     {"assignment", rg::to_json(ls.assignment)}};
                os << "rank-" << solve_rank << " local search value = " << fmt(ls.value, 12) << '\n';
                if (inst.num_vertices() <= 20 && solve_rank == 1)
                    os << "exact rank-1 optimum = " << fmt(rg::brute_force_rank1(inst).value, 12) << '\n';
            }
            text = g.format == "json" ? j.dump(2) : os.str();
        } else if (c_round->parsed() || c_ground->parsed()) {
            const bool ground = c_ground->parsed();
            json config = config_echo(ground ? "ground-state" : "round", g);
            const auto inst = load_source(round_src, g.seed, config);
            const auto mode =
                theta_mode.empty() ? rg::default_theta_mode(inst.graph) : rg::ThetaMode::parse(theta_mode);
            config["r"] = r;
            config["theta_mode"] = mode.str();
            rg::PipelineOptions opts;
            opts.series = series_options(g);
            if (g.tol) opts.beta_tol = *g.tol;
            const auto rep = rg::algorithm_a(inst, r, g.samples, g.seed, mode, opts);
            json j = {{"config", config}, {"report", rg::to_json(rep)}};
            std::ostringstream os;
            if (ground) {
                j["energy"] = -rep.best_value;
                j["energy_lower_bound"] = -rep.sdp_inf_upper;
                j["mean_energy"] = -rep.mean_value;
                os << "ground-state energy (best sample) = " << fmt(-rep.best_value, 12) << '\n'
                   << "certified lower bound -SDP_inf    = " << fmt(-rep.sdp_inf_upper, 12) << '\n'
                   << "mean energy = " << fmt(-rep.mean_value, 10) << " +- " << fmt(rep.std_error, 3) << '\n'
                   << "ratio mean/SDP_inf = " << fmt(rep.ratio(), 8) << "  (beta(r,G) = " << fmt(rep.beta_reference, 8)
                   << ")\n";
            } else {
                os << "mean = " << fmt(rep.mean_value, 10) << " +- " << fmt(rep.std_error, 3)
                   << "  best = " << fmt(rep.best_value, 10) << '\n'
                   << "SDP_inf = " << fmt(rep.sdp_inf_reference, 10) << "  ratio = " << fmt(rep.ratio(), 8)
                   << "  beta(r,G) = " << fmt(rep.beta_reference, 8) << "  lambda = " << fmt(rep.lambda, 8) << '\n';
            }
            if (g.format == "csv") {
                std::ostringstream cs;
                cs << "r,samples,mean,std_error,best,sdp_inf,ratio,beta,lambda\n"
                   << r << ',' << g.samples << ',' << fmt(rep.mean_value, 12) << ',' << fmt(rep.std_error, 6) << ','
                   << fmt(rep.best_value, 12) << ',' << fmt(rep.sdp_inf_reference, 12) << ',' << fmt(rep.ratio(), 10)
                   << ',' << fmt(rep.beta_reference, 12) << ',' << fmt(rep.lambda, 10) << '\n';
                text = cs.str();
            } else {
                text = g.format == "json" ? j.dump(2) : os.str();
            }
        } else if (c_xor->parsed()) {
            json config = config_echo("xor-game", g);
            config["game"] = game_path;
            config["d"] = dim;
            config["log_base"] = log_base;
            const auto game = rg::load_xor_game(game_path);
            const auto inst = rg::xor_game_instance(game);
            const auto sol = rg::solve_sdp_infinity(inst, g.tol.value_or(1e-9), 100000, g.seed);
            json j = {{"config", config}};
            std::ostringstream os;
            if (inst.num_vertices() <= 20) {
                const double opt1 = rg::brute_force_rank1(inst).value;
                j["classical"] = {{"value", (1.0 + opt1) / 2.0}, {"exact", true}};
                os << "classical value = " << fmt((1.0 + opt1) / 2.0, 12) << " (exact)\n";
            } else {
                const auto rep = rg::algorithm_a(inst, 1, g.samples, g.seed, rg::ThetaMode::chi(2));
                j["classical"] = {{"lower", (1.0 + rep.best_value) / 2.0},
                                  {"upper", (1.0 + sol.dual_bound) / 2.0},
                                  {"exact", false}};
                os << "classical value in [" << fmt((1.0 + rep.best_value) / 2.0) << ", "
                   << fmt((1.0 + sol.dual_bound) / 2.0) << "]\n";
            }
            // floor(log d) with a guard against log(8)/log(2) = 2.9999...
            const double lg = std::log(static_cast<double>(dim)) / std::log(log_base);
            const auto r_low = static_cast<unsigned>(std::max(1.0, std::floor(lg + 1e-12)));
            const auto ls = rg::local_search_rank_r(inst, r_low, xor_restarts, g.seed);
            j["entangled"] = {{"lower", (1.0 + ls.value) / 2.0},
                              {"lower_rank", r_low},
                              {"lower_is_heuristic", true},
                              {"upper", (1.0 + sol.value) / 2.0},
                              {"upper_certified", (1.0 + sol.dual_bound) / 2.0}};
            os << "entangled value (d = " << dim << ") in [" << fmt((1.0 + ls.value) / 2.0) << ", "
               << fmt((1.0 + sol.value) / 2.0) << "]  (lower: rank-" << r_low
               << " local search, upper: SDP_inf; certified upper " << fmt((1.0 + sol.dual_bound) / 2.0) << ")\n";
            text = g.format == "json" ? j.dump(2) : os.str();
        } else if (c_betaq->parsed()) {
            json config = config_echo("beta-q", g);
            config["q"] = q;
            config["r"] = rq;
            config["theta"] = theta_q;
            config["grid_step"] = grid_step;
            const auto res = rg::beta_qr(q, rq, theta_q, grid_step, g.tol.value_or(1e-12), series_options(g));
            if (g.format == "json")
                text = json{{"config", config}, {"result", rg::to_json(res)}}.dump(2);
            else if (g.format == "csv")
                text = "q,r,theta,beta,K\n" + std::to_string(q) + ',' + std::to_string(rq) + ',' + fmt(theta_q) + ',' +
                       fmt(res.beta, 12) + ',' + fmt(res.k_bound, 12) + '\n';
            else
                text = "K(" + std::to_string(q) + " -> " + std::to_string(rq) + ") = " + fmt(res.k_bound, 10) +
                       "  (beta = " + fmt(res.beta, 10) + ")\n";
        } else if (c_ident->parsed()) {
            json config = config_echo("identity", g);
            config["r"] = ri;
            config["t"] = t;
            const auto ic = rg::identity_check(ri, t, g.samples, g.seed);
            if (g.format == "json")
                text = json{{"config", config},
                            {"mc_mean", ic.mc_mean},
                            {"std_error", ic.std_error},
                            {"series_value", ic.series_value}}
                           .dump(2);
            else if (g.format == "csv")
                text = "r,t,mc_mean,std_error,series_value\n" + std::to_string(ri) + ',' + fmt(t) + ',' +
                       fmt(ic.mc_mean) + ',' + fmt(ic.std_error) + ',' + fmt(ic.series_value, 12) + '\n';
            else
                text = "Monte-Carlo " + fmt(ic.mc_mean) + " +- " + fmt(ic.std_error, 3) + "   E_r(t) = " +
                       fmt(ic.series_value, 12) + '\n';
        }
        emit(g, text);
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const rg::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
