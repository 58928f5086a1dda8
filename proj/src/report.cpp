#include <carlab/report.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace carlab {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

}  // namespace

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

std::string csv_scan(const ScanResult& r) {
    std::ostringstream os;
    os << "h,sigma_min,converged\n";
    for (const auto& s : r.samples)
        os << fmt17(s.h) << "," << fmt17(s.sigma_min) << "," << (s.converged ? 1 : 0) << "\n";
    return os.str();
}

std::string csv_stability(const StabilityFit& f) {
    std::ostringstream os;
    os << "noise,F,M,error\n";
    for (const auto& t : f.trials)
        os << fmt17(t.level) << "," << fmt17(t.F) << "," << fmt17(t.M) << "," << fmt17(t.error)
           << "\n";
    return os.str();
}

std::string csv_bound_check(const ConvexifiedCheck& c) {
    std::ostringstream os;
    os << "bracket_tilde,decomposition_rhs,residual,scale,margin_sum_sq,margin_per_term\n";
    for (const auto& s : c.samples)
        os << fmt17(s.bracket_tilde) << "," << fmt17(s.decomposition_rhs) << ","
           << fmt17(s.residual) << "," << fmt17(s.scale) << "," << fmt17(s.margin_sum_sq) << ","
           << fmt17(s.margin_per_term) << "\n";
    return os.str();
}

nlohmann::json json_certificates(const std::vector<IdentityCertificate>& certs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : certs) {
        arr.push_back({{"name", c.name},
                       {"exact_zero", c.exact_zero},
                       {"skipped", c.skipped},
                       {"informational", c.informational},
                       {"note", c.note}});
    }
    return arr;
}

nlohmann::json json_bracket(const BracketReport& r) {
    return {{"weight", r.weight},
            {"classification", to_string(r.classification)},
            {"exact_zero_bracket", r.exact_zero_bracket},
            {"min_bracket", r.min_bracket},
            {"max_abs_bracket", r.max_abs_bracket},
            {"tol", r.tol},
            {"samples_used", r.samples_used},
            {"sample_complete", r.sample_complete},
            {"certificates", json_certificates(r.certificates)}};
}

nlohmann::json json_bound_check(const ConvexifiedCheck& c) {
    return {{"weight", c.weight},
            {"h", c.h},
            {"eps", c.eps},
            {"tol", c.tol},
            {"samples", (int)c.samples.size()},
            {"sample_complete", c.sample_complete},
            {"decomposition_ok", c.decomposition_ok},
            {"bound_ok_sum_then_square", c.bound_ok_sum_sq},
            {"bound_ok_per_term", c.bound_ok_per_term},
            {"max_rel_residual", c.max_rel_residual},
            {"min_margin_sum_then_square", c.min_margin_sum_sq},
            {"min_margin_per_term", c.min_margin_per_term}};
}

nlohmann::json json_scan(const ScanResult& r) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : r.samples)
        samples.push_back(
            {{"h", s.h}, {"eps", s.eps}, {"sigma_min", s.sigma_min}, {"converged", s.converged}});
    return {{"op", r.op_kind},
            {"weight", r.weight},
            {"grid", r.grid},
            {"norm", to_string(r.norm_mode)},
            {"convexified", r.convexified},
            {"h_window_min", r.h_window_min},
            {"h_skipped", r.h_skipped},
            {"samples", samples},
            {"fit",
             {{"alpha", r.fit.alpha},
              {"log_c", r.fit.log_c},
              {"r2", r.fit.r2},
              {"used", r.fit.used}}}};
}

nlohmann::json json_compare(const CompareReport& r) {
    return {{"first", json_scan(r.first)},
            {"second", json_scan(r.second)},
            {"alpha_gap", r.alpha_gap},
            {"alpha_ordering_ok", r.alpha_ordering_ok},
            {"crossover_h", r.crossover_h},
            {"sigma_ordering_ok", r.sigma_ordering_ok}};
}

nlohmann::json json_stability(const StabilityFit& f) {
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& t : f.trials)
        trials.push_back({{"noise", t.level},
                          {"F", t.F},
                          {"M", t.M},
                          {"error", t.error},
                          {"converged", t.converged},
                          {"in_fit", t.in_fit}});
    return {{"trials", trials},
            {"theta_hat", f.theta_hat},
            {"theta_half_width", f.theta_half_width},
            {"C", f.C},
            {"r2", f.r2},
            {"theta_predicted", f.theta_pred},
            {"Phi", f.Phi},
            {"delta", f.delta},
            {"excluded", f.excluded}};
}

nlohmann::json json_caccioppoli(const CaccioppoliReport& r) {
    return {{"lhs", r.lhs},
            {"rhs", r.rhs},
            {"ratio", r.ratio},
            {"lhs_nodes", r.lhs_nodes},
            {"rhs_nodes", r.rhs_nodes},
            {"max_equation_residual", r.max_equation_residual}};
}

nlohmann::json json_ucp(const UcpGapReport& r) {
    return {{"gap", r.gap}, {"omega_nodes", r.omega_nodes}, {"columns", r.columns}};
}

namespace {

GridFunction constant_field(const std::shared_ptr<const Grid>& g, double re) {
    GridFunction f(g);
    for (auto& v : f.values) v = cplx(re, 0.0);
    return f;
}

RunOutput run_bracket(const RunConfig& cfg) {
    RunOutput out;
    Weight w = parse_weight_spec(cfg.get("weight"));
    Box box = parse_box_spec(cfg.get("box"));
    int count = (int)cfg.get_int_or("count", 100);
    double tol = cfg.get_real_or("tol", 1e-7);
    BracketReport rep = check_subellipticity(w, box, count, tol, cfg.seed());
    out.report["results"] = json_bracket(rep);
    if (rep.classification == WeightClass::Indefinite) out.exit_code = 2;

    if (cfg.get_int_or("dump", 0)) {
        auto [a, b] = conjugated_symbol(w);
        out.files["a.txt"] = a.to_string() + "\n";
        out.files["b.txt"] = b.to_string() + "\n";
        out.files["bracket.txt"] = poisson_bracket(a, b).to_string() + "\n";
    }

    if (cfg.get_int_or("check_bound", 0)) {
        Rat h = rat_parse(cfg.get("h"));
        Rat eps = rat_parse(cfg.get("eps"));
        ConvexifiedCheck cc =
            check_convexified_bound(w, h, eps, box, count, cfg.get_real_or("tol", 1e-6), cfg.seed());
        out.report["results"]["convexified_bound"] = json_bound_check(cc);
        out.files["bound_samples.csv"] = csv_bound_check(cc);
        if (!cc.decomposition_ok || !cc.bound_ok_sum_sq) out.exit_code = 2;
    }
    return out;
}

RunOutput run_identity(const RunConfig& cfg) {
    RunOutput out;
    auto certs = certify_identities((int)cfg.get_int("dim"));
    out.report["results"]["certificates"] = json_certificates(certs);
    for (const auto& c : certs)
        if (!c.exact_zero && !c.skipped && !c.informational) out.exit_code = 2;
    return out;
}

OpKind parse_op(const std::string& s) {
    if (s == "fourth") return OpKind::FourthSum;
    if (s == "bilap") return OpKind::Bilaplacian;
    throw std::invalid_argument("op must be fourth, bilap or both");
}

NormMode parse_norm(const std::string& s) {
    if (s == "l2") return NormMode::L2;
    if (s == "h1") return NormMode::H1scl;
    throw std::invalid_argument("norm must be l2 or h1");
}

RunOutput run_scan(const RunConfig& cfg) {
    RunOutput out;
    auto grid = parse_grid_spec(cfg.get("grid"));
    Weight w = parse_weight_spec(cfg.get("weight"));
    NormMode norm = parse_norm(cfg.get_or("norm", "l2"));
    std::vector<double> h = cfg.get_list("h");
    std::string op = cfg.get("op");
    for (const std::string& kind_name : {std::string("fourth"), std::string("bilap")}) {
        if (op != "both" && op != kind_name) continue;
        OpKind kind = parse_op(kind_name);
        ScanResult r = scan(grid, w, kind, h, norm);
        out.report["results"][kind_name] = json_scan(r);
        out.files[op == "both" ? "scan_" + kind_name + ".csv" : "scan.csv"] = csv_scan(r);
        if (cfg.get_int_or("dump_op", 0) && !r.samples.empty()) {
            double h0 = r.samples.front().h;
            Weight wh = r.convexified
                            ? w.convexify(rat_from_double(h0), rat_from_double(std::sqrt(h0)))
                            : w;
            DiscreteOperator o = kind == OpKind::FourthSum ? assemble(grid, {}, GridFunction{}, h0)
                                                           : assemble_bilaplacian(grid, h0);
            out.files["operator_" + kind_name + ".txt"] = to_coordinate_text(conjugate(o, wh, h0));
        }
    }
    if (op != "both" && op != "fourth" && op != "bilap") parse_op(op);
    return out;
}

RunOutput run_compare(const RunConfig& cfg) {
    RunOutput out;
    auto grid = parse_grid_spec(cfg.get("grid"));
    Weight w = parse_weight_spec(cfg.get("weight"));
    CompareReport rep =
        compare(grid, w, cfg.get_list("h"), OpKind::FourthSum, OpKind::Bilaplacian,
                parse_norm(cfg.get_or("norm", "l2")));
    out.report["results"] = json_compare(rep);
    out.files["scan_fourth.csv"] = csv_scan(rep.first);
    out.files["scan_bilap.csv"] = csv_scan(rep.second);
    if (!rep.alpha_ordering_ok || !rep.sigma_ordering_ok) out.exit_code = 2;
    return out;
}

RunOutput run_cauchy(const RunConfig& cfg) {
    RunOutput out;
    auto grid = parse_grid_spec(cfg.get("grid"));
    Weight w = parse_weight_spec(cfg.get("weight"));
    double delta = cfg.get_real("delta");
    auto faces = parse_faces_spec(cfg.get("faces"), grid->dim());
    TrueField tf = lookup_true_field(cfg.get("utrue"), grid->dim());

    std::vector<GridFunction> A;
    if (cfg.has("a")) {
        auto av = cfg.get_list("a");
        if ((int)av.size() != grid->dim())
            throw std::invalid_argument("key a needs one constant per axis");
        for (double c : av) A.push_back(constant_field(grid, c));
    }
    GridFunction q;
    double qc = cfg.get_real_or("q", 0.0);
    if (qc != 0.0) q = constant_field(grid, qc);

    SourceMode mode = SourceMode::Discrete;
    std::string src = cfg.get_or("source", "discrete");
    if (src == "analytic")
        mode = SourceMode::Analytic;
    else if (src != "discrete")
        throw std::invalid_argument("source must be discrete or analytic");

    ScalarField Lu;
    if (mode == SourceMode::Analytic) {
        auto av = cfg.has("a") ? cfg.get_list("a") : std::vector<double>(grid->dim(), 0.0);
        Lu = [tf, av, qc](const std::vector<double>& x) {
            cplx v = tf.d4sum(x);
            for (std::size_t j = 0; j < av.size(); j++)
                v += av[j] * cplx(0.0, -1.0) * tf.grad[j](x);
            v += qc * tf.u(x);
            return v;
        };
    }

    CauchyProblem p = manufacture(grid, tf.u, A, q, faces, w, delta, mode, Lu);
    StabilityFit fit = stability_fit(p, cfg.get_list("noise"), (int)cfg.get_int_or("trials", 5),
                                     cfg.seed(), cfg.get_real("lambda"),
                                     cfg.get_real_or("gamma", 1e6));
    out.report["results"] = json_stability(fit);
    out.files["trials.csv"] = csv_stability(fit);
    if (cfg.get_int_or("dump_solution", 0)) {
        SolveResult zr = solve(p, cfg.get_real("lambda"), cfg.get_real_or("gamma", 1e6));
        out.files["solution.csv"] = to_csv(zr.u);
        out.report["results"]["zero_noise_residual"] = zr.rel_residual;
    }
    return out;
}

RunOutput run_caccioppoli(const RunConfig& cfg) {
    RunOutput out;
    auto grid = parse_grid_spec(cfg.get("grid"));
    TrueField tf = lookup_true_field(cfg.get("utrue"), grid->dim());
    GridFunction u = GridFunction::sample(grid, tf.u);
    CaccioppoliReport rep = caccioppoli_ratio(u, cfg.get_real("r"), cfg.get_real("rho"), {}, {},
                                              cfg.get_real_or("tol", 1e-8));
    out.report["results"] = json_caccioppoli(rep);
    return out;
}

RunOutput run_ucp(const RunConfig& cfg) {
    RunOutput out;
    auto grid = parse_grid_spec(cfg.get("grid"));
    auto omega = parse_mask_spec(*grid, cfg.get("omega"));
    UcpGapReport rep = ucp_gap(grid, omega, {}, {});
    out.report["results"] = json_ucp(rep);
    return out;
}

}  // namespace

RunOutput run_command(const RunConfig& cfg) {
    validate_config(cfg);
    RunOutput out;
    if (cfg.command == "bracket")
        out = run_bracket(cfg);
    else if (cfg.command == "identity")
        out = run_identity(cfg);
    else if (cfg.command == "scan")
        out = run_scan(cfg);
    else if (cfg.command == "compare")
        out = run_compare(cfg);
    else if (cfg.command == "cauchy")
        out = run_cauchy(cfg);
    else if (cfg.command == "caccioppoli")
        out = run_caccioppoli(cfg);
    else if (cfg.command == "ucp")
        out = run_ucp(cfg);
    else
        throw std::invalid_argument("unknown command: " + cfg.command);

    std::string cfg_text = cfg.canonical_text();
    out.report["tool"] = "carlab";
    out.report["version"] = kToolVersion;
    out.report["command"] = cfg.command;
    out.report["seed"] = cfg.seed();
    out.report["config"] = cfg_text;
    out.report["config_hash"] = fnv1a_hex(cfg_text);
    out.report["timestamp"] = iso_timestamp();
    out.report["exit_code"] = out.exit_code;
    return out;
}

int run_and_write(const RunConfig& cfg) {
    RunOutput out = run_command(cfg);
    if (cfg.has("out")) {
        namespace fs = std::filesystem;
        fs::path dir(cfg.get("out"));
        fs::create_directories(dir);
        {
            std::ofstream f(dir / (cfg.command + ".json"));
            if (!f) throw std::runtime_error("cannot write output directory " + dir.string());
            f << out.report.dump(2) << "\n";
        }
        for (const auto& [name, content] : out.files) {
            std::ofstream f(dir / name);
            if (!f) throw std::runtime_error("cannot write output file " + name);
            f << content;
        }
    } else {
        std::cout << out.report.dump(2) << std::endl;
    }
    return out.exit_code;
}

}  // namespace carlab
