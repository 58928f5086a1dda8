#include <carlab/weights.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace carlab {

bool Box::contains(const Box& inner) const {
    if (dim() != inner.dim()) return false;
    for (int j = 0; j < dim(); j++)
        if (inner.iv[j].first < iv[j].first || inner.iv[j].second > iv[j].second) return false;
    return true;
}

Weight::Weight(WeightKind kind, PolySymbol phi, std::string spec)
    : kind_(kind), phi_(std::move(phi)), spec_(std::move(spec)) {
    int n = phi_.dim();
    grad_.reserve(n);
    for (int j = 0; j < n; j++) grad_.push_back(phi_.differentiate(Var::X, j));
    hess_.assign(n, {});
    for (int j = 0; j < n; j++) {
        hess_[j].reserve(n);
        for (int k = 0; k < n; k++) hess_[j].push_back(grad_[j].differentiate(Var::X, k));
    }
}

bool Weight::gradient_is_zero() const {
    return std::all_of(grad_.begin(), grad_.end(), [](const PolySymbol& g) { return g.is_zero(); });
}

Weight Weight::linear(std::vector<Rat> rho) {
    int n = (int)rho.size();
    if (n < 1) throw std::invalid_argument("linear weight needs at least one component");
    bool all_zero = std::all_of(rho.begin(), rho.end(), [](const Rat& r) { return r == 0; });
    if (all_zero) throw std::invalid_argument("linear weight requires rho != 0");
    PolySymbol phi(n);
    for (int j = 0; j < n; j++)
        phi += PolySymbol::constant(n, rho[j]) * PolySymbol::variable(n, Var::X, j);
    std::ostringstream spec;
    spec << "linear rho=(";
    for (int j = 0; j < n; j++) spec << (j ? "," : "") << rat_str(rho[j]);
    spec << ")";
    return Weight(WeightKind::Linear, std::move(phi), spec.str());
}

Weight Weight::paraboloid(int dim, int sign, const Rat& c) {
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
    if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
    PolySymbol phi = PolySymbol::constant(dim, Rat(-sign) * c * c);
    phi += PolySymbol::constant(dim, Rat(sign)) * PolySymbol::variable(dim, Var::X, dim - 1);
    for (int j = 0; j + 1 < dim; j++) {
        PolySymbol xj = PolySymbol::variable(dim, Var::X, j);
        phi += xj * xj;
    }
    std::ostringstream spec;
    spec << "parab n=" << dim << " sign=" << (sign > 0 ? "+" : "-") << " c=" << rat_str(c);
    return Weight(WeightKind::QuadraticParaboloid, std::move(phi), spec.str());
}

Weight Weight::general(PolySymbol phi) {
    if (phi.depends_on_xi()) throw std::invalid_argument("weight must not depend on xi");
    std::ostringstream spec;
    std::string text = phi.to_string();
    for (auto& ch : text)
        if (ch == '\n') ch = '+';
    spec << "poly n=" << phi.dim() << " \"" << text << "\"";
    return Weight(WeightKind::GeneralPoly, std::move(phi), spec.str());
}

Weight Weight::bent(const Weight& base, const Rat& ctilde) {
    int n = base.dim();
    PolySymbol phi = base.phi();
    for (int j = 0; j + 1 < n; j++) {
        PolySymbol xj = PolySymbol::variable(n, Var::X, j);
        phi += PolySymbol::constant(n, ctilde) * xj * xj;
    }
    return general(std::move(phi));
}

Weight Weight::convexify(const Rat& h, const Rat& eps) const {
    if (!(h > 0 && h < eps && eps < 1))
        throw std::invalid_argument("convexify requires 0 < h < eps < 1");
    Rat c = h / (2 * eps);
    Weight w = general(phi_.compose_weight(c));
    w.spec_ = spec_ + " convexify h=" + rat_str(h) + " eps=" + rat_str(eps);
    return w;
}

double Weight::phi_at(std::span<const double> x) const {
    if ((int)x.size() != dim()) throw std::invalid_argument("point has wrong length");
    std::vector<double> pt(2 * dim(), 0.0);
    std::copy(x.begin(), x.end(), pt.begin());
    return phi_.evaluate(pt);
}

SupResult Weight::sup_on_box(const Box& box, int samples_per_axis) const {
    int n = dim();
    if (box.dim() != n) throw std::invalid_argument("box dimension mismatch");
    for (auto& [lo, hi] : box.iv)
        if (!(lo <= hi)) throw std::invalid_argument("empty box");
    if (samples_per_axis < 2) throw std::invalid_argument("need at least 2 samples per axis");

    PolySymbol::Compiled c = phi_.compile();
    auto sweep = [&](const Box& b, std::vector<double>& argmax) {
        std::vector<int> idx(n, 0);
        std::vector<double> pt(2 * n, 0.0);
        double best = -HUGE_VAL;
        bool more = true;
        while (more) {
            for (int j = 0; j < n; j++) {
                double lo = b.iv[j].first, hi = b.iv[j].second;
                pt[j] = lo + (hi - lo) * idx[j] / (samples_per_axis - 1);
            }
            double v = c.evaluate(pt);
            if (v > best) {
                best = v;
                argmax.assign(pt.begin(), pt.begin() + n);
            }
            int j = 0;
            for (; j < n; j++) {
                if (++idx[j] < samples_per_axis) break;
                idx[j] = 0;
            }
            more = j < n;
        }
        return best;
    };

    std::vector<double> argmax(n, 0.0);
    double best = sweep(box, argmax);

    // one refinement pass around the coarse maximizer
    Box fine = box;
    double res = 0.0;
    for (int j = 0; j < n; j++) {
        double step = (box.iv[j].second - box.iv[j].first) / (samples_per_axis - 1);
        fine.iv[j].first = std::max(box.iv[j].first, argmax[j] - step);
        fine.iv[j].second = std::min(box.iv[j].second, argmax[j] + step);
        res = std::max(res, (fine.iv[j].second - fine.iv[j].first) / (samples_per_axis - 1));
    }
    std::vector<double> argmax2(n, 0.0);
    best = std::max(best, sweep(fine, argmax2));
    return {best, res};
}

std::string Weight::describe() const { return spec_; }

namespace {

std::string take_token(const std::string& s, std::size_t& i) {
    while (i < s.size() && std::isspace((unsigned char)s[i])) i++;
    if (i >= s.size()) return {};
    if (s[i] == '"') {
        std::size_t j = s.find('"', i + 1);
        if (j == std::string::npos) throw std::invalid_argument("unterminated quote in weight spec");
        std::string tok = s.substr(i + 1, j - i - 1);
        i = j + 1;
        return "\"" + tok;
    }
    std::size_t j = i;
    while (j < s.size() && !std::isspace((unsigned char)s[j])) j++;
    std::string tok = s.substr(i, j - i);
    i = j;
    return tok;
}

std::string expect_kv(const std::string& tok, const std::string& key) {
    if (tok.rfind(key + "=", 0) != 0)
        throw std::invalid_argument("weight spec: expected " + key + "=..., got '" + tok + "'");
    return tok.substr(key.size() + 1);
}

std::vector<Rat> parse_rat_tuple(const std::string& s) {
    if (s.size() < 2 || s.front() != '(' || s.back() != ')')
        throw std::invalid_argument("expected (...) tuple, got '" + s + "'");
    std::vector<Rat> out;
    std::string body = s.substr(1, s.size() - 2);
    std::size_t pos = 0;
    while (pos <= body.size()) {
        std::size_t comma = body.find(',', pos);
        std::string piece = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!piece.empty()) out.push_back(rat_parse(piece));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("empty tuple in weight spec");
    return out;
}

}  // namespace

Weight parse_weight_spec(const std::string& spec) {
    std::size_t i = 0;
    std::string head = take_token(spec, i);
    Weight w = Weight::linear({Rat(1)});  // placeholder, reassigned below
    if (head == "linear") {
        auto rho = parse_rat_tuple(expect_kv(take_token(spec, i), "rho"));
        w = Weight::linear(rho);
    } else if (head == "parab") {
        int n = std::stoi(expect_kv(take_token(spec, i), "n"));
        std::string sg = expect_kv(take_token(spec, i), "sign");
        if (sg != "+" && sg != "-") throw std::invalid_argument("parab sign must be + or -");
        Rat c = rat_parse(expect_kv(take_token(spec, i), "c"));
        w = Weight::paraboloid(n, sg == "+" ? 1 : -1, c);
    } else if (head == "poly") {
        int n = std::stoi(expect_kv(take_token(spec, i), "n"));
        std::string text = take_token(spec, i);
        if (text.empty() || text[0] != '"')
            throw std::invalid_argument("poly weight needs quoted polynomial text");
        w = Weight::general(PolySymbol::parse(n, text.substr(1)));
    } else {
        throw std::invalid_argument("unknown weight kind: '" + head + "'");
    }
    std::string tail = take_token(spec, i);
    if (tail.empty()) return w;
    if (tail != "convexify") throw std::invalid_argument("unexpected trailing token in weight spec: '" + tail + "'");
    Rat h = rat_parse(expect_kv(take_token(spec, i), "h"));
    Rat eps = rat_parse(expect_kv(take_token(spec, i), "eps"));
    if (!take_token(spec, i).empty()) throw std::invalid_argument("unexpected trailing token in weight spec");
    return w.convexify(h, eps);
}

}  // namespace carlab
