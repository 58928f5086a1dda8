#include <carlab/polysym.hpp>

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace carlab {

namespace {

constexpr int kExponentCap = 255;

void check_axis(int dim, int axis) {
    if (axis < 0 || axis >= dim) throw std::out_of_range("axis index out of range");
}

}  // namespace

PolySymbol::PolySymbol(int dim) : dim_(dim) {
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
}

PolySymbol PolySymbol::constant(int dim, const Rat& c) {
    PolySymbol p(dim);
    if (c != 0) p.terms_.emplace(Key(2 * dim, 0), c);
    return p;
}

PolySymbol PolySymbol::variable(int dim, Var which, int axis) {
    check_axis(dim, axis);
    PolySymbol p(dim);
    Key k(2 * dim, 0);
    k[(which == Var::X ? 0 : dim) + axis] = 1;
    p.terms_.emplace(std::move(k), Rat(1));
    return p;
}

PolySymbol PolySymbol::from_terms(int dim, const TermMap& raw) {
    PolySymbol p(dim);
    for (const auto& [k, c] : raw) p.add_term(k, c);
    return p;
}

void PolySymbol::add_term(const Key& k, const Rat& c) {
    if ((int)k.size() != 2 * dim_) throw std::invalid_argument("term key has wrong length");
    if (c == 0) return;
    auto it = terms_.find(k);
    if (it == terms_.end()) {
        terms_.emplace(k, c);
    } else {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

void PolySymbol::require_same_dim(const PolySymbol& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("dimension mismatch");
}

bool PolySymbol::is_canonical() const {
    for (const auto& [k, c] : terms_) {
        if ((int)k.size() != 2 * dim_ || c == 0) return false;
        Rat canon = c;
        canon.canonicalize();
        if (canon != c) return false;
    }
    return true;
}

int PolySymbol::total_degree() const {
    int deg = -1;
    for (const auto& [k, c] : terms_) {
        int d = 0;
        for (auto e : k) d += e;
        deg = std::max(deg, d);
    }
    return deg;
}

bool PolySymbol::depends_on_xi() const {
    for (const auto& [k, c] : terms_)
        for (int j = dim_; j < 2 * dim_; j++)
            if (k[j] != 0) return true;
    return false;
}

bool PolySymbol::depends_on_x() const {
    for (const auto& [k, c] : terms_)
        for (int j = 0; j < dim_; j++)
            if (k[j] != 0) return true;
    return false;
}

PolySymbol PolySymbol::operator+(const PolySymbol& o) const {
    require_same_dim(o);
    PolySymbol r = *this;
    for (const auto& [k, c] : o.terms_) r.add_term(k, c);
    return r;
}

PolySymbol PolySymbol::operator-(const PolySymbol& o) const {
    require_same_dim(o);
    PolySymbol r = *this;
    for (const auto& [k, c] : o.terms_) r.add_term(k, -c);
    return r;
}

PolySymbol PolySymbol::operator-() const {
    PolySymbol r(dim_);
    for (const auto& [k, c] : terms_) r.terms_.emplace(k, -c);
    return r;
}

PolySymbol PolySymbol::operator*(const PolySymbol& o) const {
    require_same_dim(o);
    PolySymbol r(dim_);
    Key k(2 * dim_, 0);
    for (const auto& [ka, ca] : terms_) {
        for (const auto& [kb, cb] : o.terms_) {
            for (int j = 0; j < 2 * dim_; j++) {
                int e = ka[j] + kb[j];
                if (e > kExponentCap) throw std::overflow_error("exponent cap (255) exceeded");
                k[j] = (std::uint8_t)e;
            }
            r.add_term(k, ca * cb);
        }
    }
    return r;
}

PolySymbol PolySymbol::pow(unsigned k) const {
    PolySymbol r = PolySymbol::constant(dim_, Rat(1));
    PolySymbol base = *this;
    while (k) {
        if (k & 1) r = r * base;
        base = (k >>= 1) ? base * base : base;
    }
    return r;
}

PolySymbol PolySymbol::differentiate(Var which, int axis) const {
    check_axis(dim_, axis);
    int slot = (which == Var::X ? 0 : dim_) + axis;
    PolySymbol r(dim_);
    for (const auto& [k, c] : terms_) {
        if (k[slot] == 0) continue;
        Key kd = k;
        kd[slot] -= 1;
        r.add_term(kd, c * Rat((long)k[slot]));
    }
    return r;
}

double PolySymbol::evaluate(std::span<const double> point) const {
    return compile().evaluate(point);
}

double PolySymbol::Compiled::evaluate(std::span<const double> point) const {
    if ((int)point.size() != 2 * dim) throw std::invalid_argument("point has wrong length");
    // power tables per variable
    std::vector<std::vector<double>> pw(2 * dim);
    for (int j = 0; j < 2 * dim; j++) {
        pw[j].resize(max_exp[j] + 1);
        pw[j][0] = 1.0;
        for (int e = 1; e <= max_exp[j]; e++) pw[j][e] = pw[j][e - 1] * point[j];
    }
    double acc = 0.0;
    for (std::size_t t = 0; t < coeffs.size(); t++) {
        double v = coeffs[t];
        const Key& k = keys[t];
        for (int j = 0; j < 2 * dim; j++)
            if (k[j]) v *= pw[j][k[j]];
        acc += v;
    }
    return acc;
}

PolySymbol::Compiled PolySymbol::compile() const {
    Compiled c;
    c.dim = dim_;
    c.max_exp.assign(2 * dim_, 0);
    c.coeffs.reserve(terms_.size());
    c.keys.reserve(terms_.size());
    for (const auto& [k, coeff] : terms_) {
        c.coeffs.push_back(rat_to_double(coeff));
        c.keys.push_back(k);
        for (int j = 0; j < 2 * dim_; j++) c.max_exp[j] = std::max(c.max_exp[j], (int)k[j]);
    }
    return c;
}

PolySymbol PolySymbol::substitute_scaled_xi(const PolySymbol& s) const {
    require_same_dim(s);
    if (s.depends_on_xi()) throw std::invalid_argument("scale factor must not depend on xi");
    // cache powers of s up to the max xi-degree present
    int dmax = 0;
    for (const auto& [k, c] : terms_) {
        int d = 0;
        for (int j = dim_; j < 2 * dim_; j++) d += k[j];
        dmax = std::max(dmax, d);
    }
    std::vector<PolySymbol> spow;
    spow.push_back(PolySymbol::constant(dim_, Rat(1)));
    for (int d = 1; d <= dmax; d++) spow.push_back(spow.back() * s);

    PolySymbol r(dim_);
    for (const auto& [k, c] : terms_) {
        int d = 0;
        for (int j = dim_; j < 2 * dim_; j++) d += k[j];
        PolySymbol term(dim_);
        term.add_term(k, c);
        r += term * spow[d];
    }
    return r;
}

PolySymbol PolySymbol::compose_weight(const Rat& c) const {
    if (depends_on_xi()) throw std::invalid_argument("weight must not depend on xi");
    return *this + PolySymbol::constant(dim_, c) * (*this) * (*this);
}

std::string PolySymbol::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms_) {
        if (!first) os << "\n";
        first = false;
        os << rat_str(c);
        bool any = false;
        for (int j = 0; j < 2 * dim_; j++) {
            if (!k[j]) continue;
            os << (any ? " " : " * ");
            any = true;
            if (j < dim_)
                os << "x" << (j + 1);
            else
                os << "xi" << (j - dim_ + 1);
            if (k[j] > 1) os << "^" << (int)k[j];
        }
    }
    return os.str();
}

namespace {

struct Lexer {
    const std::string& s;
    std::size_t i = 0;
    explicit Lexer(const std::string& str) : s(str) {}
    void skip_ws() {
        // newline is a term separator, not whitespace
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r' || s[i] == '*')) i++;
    }
    bool done() {
        skip_ws();
        return i >= s.size();
    }
    char peek() {
        skip_ws();
        return i < s.size() ? s[i] : '\0';
    }
};

}  // namespace

PolySymbol PolySymbol::parse(int dim, const std::string& text) {
    PolySymbol out(dim);
    Lexer lx(text);
    bool expect_term = true;
    Rat coeff(1);
    Key key(2 * dim, 0);
    bool term_open = false;

    auto flush = [&]() {
        if (term_open) out.add_term(key, coeff);
        coeff = 1;
        std::fill(key.begin(), key.end(), 0);
        term_open = false;
    };

    while (!lx.done()) {
        char c = lx.peek();
        if (c == '+' || c == '-') {
            if (term_open || !expect_term) flush();
            if (c == '-') coeff = -coeff;
            lx.i++;
            expect_term = true;
            continue;
        }
        if (c == '\n') {
            flush();
            lx.i++;
            expect_term = true;
            continue;
        }
        if (std::isdigit((unsigned char)c)) {
            std::size_t j = lx.i;
            while (j < lx.s.size() && (std::isdigit((unsigned char)lx.s[j]) || lx.s[j] == '/')) j++;
            coeff *= rat_parse(lx.s.substr(lx.i, j - lx.i));
            lx.i = j;
            term_open = true;
            expect_term = false;
            continue;
        }
        if (c == 'x') {
            bool is_xi = lx.i + 1 < lx.s.size() && lx.s[lx.i + 1] == 'i';
            lx.i += is_xi ? 2 : 1;
            std::size_t j = lx.i;
            while (j < lx.s.size() && std::isdigit((unsigned char)lx.s[j])) j++;
            if (j == lx.i) throw std::invalid_argument("variable index missing in polynomial text");
            int axis = std::stoi(lx.s.substr(lx.i, j - lx.i)) - 1;
            if (axis < 0 || axis >= dim) throw std::invalid_argument("variable index out of range in polynomial text");
            lx.i = j;
            int exp = 1;
            if (lx.i < lx.s.size() && lx.s[lx.i] == '^') {
                lx.i++;
                j = lx.i;
                while (j < lx.s.size() && std::isdigit((unsigned char)lx.s[j])) j++;
                if (j == lx.i) throw std::invalid_argument("exponent missing in polynomial text");
                exp = std::stoi(lx.s.substr(lx.i, j - lx.i));
                lx.i = j;
            }
            int slot = (is_xi ? dim : 0) + axis;
            int e = key[slot] + exp;
            if (e > kExponentCap) throw std::overflow_error("exponent cap (255) exceeded");
            key[slot] = (std::uint8_t)e;
            term_open = true;
            expect_term = false;
            continue;
        }
        throw std::invalid_argument(std::string("unexpected character in polynomial text: ") + c);
    }
    flush();
    return out;
}

}  // namespace carlab
