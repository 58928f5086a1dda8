#include <carlab/scan.hpp>

#include <algorithm>
#include <cmath>
#include <future>
#include <set>
#include <sstream>
#include <stdexcept>

namespace carlab {

std::string to_string(NormMode m) { return m == NormMode::L2 ? "l2" : "h1"; }

std::string to_string(OpKind k) { return k == OpKind::FourthSum ? "fourth" : "bilap"; }

namespace {

std::string grid_desc(const Grid& g) {
    std::ostringstream os;
    os << "m=(";
    for (int j = 0; j < g.dim(); j++) os << (j ? "," : "") << g.nodes_on_axis(j);
    os << ") box=";
    for (int j = 0; j < g.dim(); j++)
        os << (j ? "x" : "") << "[" << g.box().iv[j].first << "," << g.box().iv[j].second << "]";
    return os.str();
}

void validate_h_list(const std::vector<double>& h_list) {
    if (h_list.size() < 4) throw std::invalid_argument("h list needs at least 4 values");
    std::set<double> uniq(h_list.begin(), h_list.end());
    if (uniq.size() != h_list.size()) throw std::invalid_argument("h list has duplicates");
    double lo = *uniq.begin(), hi = *uniq.rbegin();
    if (!(lo > 0.0 && hi < 1.0)) throw std::invalid_argument("h values must lie in (0,1)");
    if (hi / lo < 4.0) throw std::invalid_argument("h list must span at least a factor of 4");
}

}  // namespace

ScanResult scan(std::shared_ptr<const Grid> grid, const Weight& w, OpKind kind,
                std::vector<double> h_list, NormMode mode) {
    validate_h_list(h_list);
    std::sort(h_list.begin(), h_list.end(), std::greater<>());

    ScanResult res;
    res.op_kind = to_string(kind);
    res.weight = w.describe();
    res.grid = grid_desc(*grid);
    res.norm_mode = mode;
    res.h_window_min = 4.0 * grid->max_spacing();

    // A limiting weight needs convexification before a quantitative scan.
    {
        auto [a, b] = conjugated_symbol(w);
        res.convexified = poisson_bracket(a, b).is_zero();
    }

    std::vector<double> h_used;
    for (double h : h_list) {
        if (h < res.h_window_min)
            res.h_skipped.push_back(h);
        else
            h_used.push_back(h);
    }

    // independent h-samples run concurrently, merged back in h order
    auto run_one = [&](double h) -> ScanSample {
        Weight wh = w;
        double eps_used = 0.0;
        if (res.convexified) {
            double eps = std::sqrt(h);
            wh = w.convexify(rat_from_double(h), rat_from_double(eps));
            eps_used = eps;
        }
        DiscreteOperator op = (kind == OpKind::FourthSum)
                                  ? assemble(grid, {}, GridFunction{}, h)
                                  : assemble_bilaplacian(grid, h);
        DiscreteOperator conj = conjugate(op, wh, h);
        SigmaResult s = (mode == NormMode::L2) ? sigma_min(conj) : sigma_min_h1scl(conj);
        return {h, eps_used, s.value, s.converged};
    };
    std::vector<std::future<ScanSample>> futures;
    for (double h : h_used) futures.push_back(std::async(std::launch::async, run_one, h));
    for (auto& f : futures) res.samples.push_back(f.get());

    if (res.samples.size() >= 4) res.fit = fit_exponent(res.samples);
    return res;
}

ExponentFit fit_exponent(const std::vector<ScanSample>& samples) {
    std::vector<double> lx, ly;
    for (const auto& s : samples) {
        if (!s.converged || !(s.sigma_min > 0.0)) continue;
        lx.push_back(std::log(s.h));
        ly.push_back(std::log(s.sigma_min));
    }
    int n = (int)lx.size();
    if (n < 4) throw std::invalid_argument("exponent fit needs at least 4 converged samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; i++) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    double den = n * sxx - sx * sx;
    if (!(std::fabs(den) > 1e-14 * n * sxx)) throw std::invalid_argument("degenerate fit: h values coincide");
    ExponentFit f;
    f.alpha = (n * sxy - sx * sy) / den;
    f.log_c = (sy - f.alpha * sx) / n;
    f.used = n;
    double ym = sy / n, ss_res = 0, ss_tot = 0;
    for (int i = 0; i < n; i++) {
        double p = f.alpha * lx[i] + f.log_c;
        ss_res += (ly[i] - p) * (ly[i] - p);
        ss_tot += (ly[i] - ym) * (ly[i] - ym);
    }
    f.r2 = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : (ss_res == 0.0 ? 1.0 : 0.0);
    return f;
}

CompareReport compare(std::shared_ptr<const Grid> grid, const Weight& w,
                      std::vector<double> h_list, OpKind kind_a, OpKind kind_b, NormMode mode) {
    CompareReport rep;
    rep.first = scan(grid, w, kind_a, h_list, mode);
    rep.second = scan(grid, w, kind_b, h_list, mode);
    rep.alpha_gap = rep.second.fit.alpha - rep.first.fit.alpha;
    rep.alpha_ordering_ok = rep.first.fit.alpha < rep.second.fit.alpha - 0.3;

    // ordering sigma_first >= sigma_second, from the smallest h upward
    rep.crossover_h = 0.0;
    rep.sigma_ordering_ok = false;
    for (auto ia = rep.first.samples.rbegin(); ia != rep.first.samples.rend(); ++ia) {
        auto ib = std::find_if(rep.second.samples.begin(), rep.second.samples.end(),
                               [&](const ScanSample& s) { return s.h == ia->h; });
        if (ib == rep.second.samples.end()) continue;
        if (ia->sigma_min >= ib->sigma_min) {
            rep.crossover_h = ia->h;
            rep.sigma_ordering_ok = true;
        } else {
            break;
        }
    }
    return rep;
}

}  // namespace carlab
