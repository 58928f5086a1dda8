// carlab: deterministic experiment runner for the fourth-order
// unique-continuation verification lab.

#include <carlab/report.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct CommandSpec {
    std::string name;
    std::string help;
    std::vector<std::pair<std::string, std::string>> keys;  // key, help
};

const std::vector<CommandSpec> kCommands = {
    {"bracket",
     "classify a Carleman weight by its Poisson bracket on the characteristic variety",
     {{"weight", "weight spec, e.g. 'linear rho=(0,1)' or 'parab n=2 sign=+ c=1/2'"},
      {"box", "sampling box, e.g. '[-1,1]x[-1,1]'"},
      {"count", "number of admitted variety points (default 100)"},
      {"tol", "classification tolerance (default 1e-7)"},
      {"check_bound", "1 to also check the convexified decomposition and lower bound"},
      {"h", "convexification h (rational, with check_bound)"},
      {"eps", "convexification eps (rational, with check_bound)"},
      {"dump", "1 to write a.txt, b.txt, bracket.txt in the serialization format"}}},
    {"identity", "exact certificates for the closed-form bracket identities",
     {{"dim", "space dimension n >= 2"}}},
    {"scan", "h-scaling scan of sigma_min for the conjugated operator",
     {{"op", "fourth | bilap | both"},
      {"weight", "weight spec (limiting weights are convexified with eps = sqrt(h))"},
      {"grid", "grid spec, e.g. 'm=81 box=[0,1]'"},
      {"h", "list of h values, e.g. '(0.4,0.283,0.2,0.141,0.1)'"},
      {"norm", "l2 | h1 (default l2)"},
      {"dump_op", "1 to export the conjugated matrix in coordinate text form"}}},
    {"compare", "paired fourth-vs-bilaplacian scan with ordering assertions",
     {{"weight", "weight spec"},
      {"grid", "grid spec"},
      {"h", "list of h values"},
      {"norm", "l2 | h1 (default l2)"}}},
    {"cauchy", "quasi-reversibility stability experiment on a manufactured Cauchy problem",
     {{"grid", "grid spec"},
      {"weight", "weight spec for phi"},
      {"delta", "cut level defining Omega_delta = {phi > delta}"},
      {"faces", "accessible boundary faces, e.g. 'x1max' or 'x1max x2min x2max'"},
      {"lambda", "regularization weight (> 0)"},
      {"gamma", "data penalty weight (default 1e6)"},
      {"noise", "relative noise levels, e.g. '(1e-1,1e-2,1e-3,1e-4)'"},
      {"trials", "trials per level (default 5)"},
      {"utrue", "manufactured field: zero|one|linear1|cubic1|sin1|sincos"},
      {"source", "discrete | analytic (default discrete)"},
      {"q", "constant zeroth-order coefficient (default 0)"},
      {"a", "constant first-order coefficients per axis, e.g. '(1,0)'"},
      {"dump_solution", "1 to write the zero-noise solve as solution.csv"}}},
    {"caccioppoli", "annulus ratio for a discrete solution of L u = 0 on the unit ball",
     {{"grid", "grid spec covering B_1, e.g. 'm=(41,41) box=[-1,1]x[-1,1]'"},
      {"r", "outer radius of the inner annulus (rho < r < 1)"},
      {"rho", "inner radius"},
      {"utrue", "field: one|linear1|cubic1"},
      {"tol", "equation residual tolerance (default 1e-8)"}}},
    {"ucp", "spectral-gap probe: sigma_min of L restricted to functions vanishing on omega",
     {{"grid", "grid spec"},
      {"omega", "mask spec: 'box [0.4,0.6]' or 'ball (0.5) r=0.1'"}}},
};

int dispatch(const carlab::RunConfig& cfg) {
    try {
        return carlab::run_and_write(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"carlab: desk-scale numerical and symbolic checks for a fourth-order "
                 "anisotropic operator's Carleman machinery"};
    app.require_subcommand(0, 1);
    app.set_help_flag("--help", "print help");  // frees --h for the scan window

    std::string root_config;
    app.add_option("--config", root_config, "config file with a command = ... line");

    struct Bound {
        CLI::App* sub = nullptr;
        std::map<std::string, std::string> values;
        std::string config_path;
    };
    std::map<std::string, Bound> bound;

    for (const auto& spec : kCommands) {
        Bound& b = bound[spec.name];
        b.sub = app.add_subcommand(spec.name, spec.help);
        b.sub->set_help_flag("--help", "print help");
        b.sub->add_option("--config", b.config_path, "config file (flags override its keys)");
        for (const auto& [key, help] : spec.keys)
            b.sub->add_option("--" + key, b.values[key], help);
        b.sub->add_option("--seed", b.values["seed"], "master seed (default 0)");
        b.sub->add_option("--out", b.values["out"], "output directory for JSON + CSV artifacts");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& spec : kCommands) {
            Bound& b = bound[spec.name];
            if (!b.sub->parsed()) continue;
            carlab::RunConfig cfg;
            if (!b.config_path.empty()) {
                std::ifstream f(b.config_path);
                if (!f) throw std::invalid_argument("cannot read config file " + b.config_path);
                std::stringstream ss;
                ss << f.rdbuf();
                cfg = carlab::parse_config_text(ss.str());
                if (!cfg.command.empty() && cfg.command != spec.name)
                    throw std::invalid_argument("config file is for command " + cfg.command);
            }
            cfg.command = spec.name;
            for (const auto& [key, val] : b.values)
                if (!val.empty()) cfg.kv[key] = val;
            return dispatch(cfg);
        }

        if (!root_config.empty()) {
            std::ifstream f(root_config);
            if (!f) throw std::invalid_argument("cannot read config file " + root_config);
            std::stringstream ss;
            ss << f.rdbuf();
            return dispatch(carlab::parse_config_text(ss.str()));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    std::cout << app.help() << std::endl;
    return 0;
}
