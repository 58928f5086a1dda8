#include <carlab/config.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace carlab {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

const std::string& RunConfig::get(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("missing required key: " + key);
    return it->second;
}

std::string RunConfig::get_or(const std::string& key, const std::string& fallback) const {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double RunConfig::get_real(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw std::invalid_argument("key " + key + " is not a real number: " + v);
    }
}

double RunConfig::get_real_or(const std::string& key, double fallback) const {
    return has(key) ? get_real(key) : fallback;
}

long RunConfig::get_int(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t pos = 0;
        long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw std::invalid_argument("key " + key + " is not an integer: " + v);
    }
}

long RunConfig::get_int_or(const std::string& key, long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t RunConfig::seed() const {
    if (!has("seed")) return 0;
    const std::string& v = get("seed");
    try {
        return std::stoull(v);
    } catch (...) {
        throw std::invalid_argument("key seed is not an unsigned integer: " + v);
    }
}

std::vector<double> RunConfig::get_list(const std::string& key) const {
    std::string v = get(key);
    if (v.size() < 2 || v.front() != '(' || v.back() != ')')
        throw std::invalid_argument("key " + key + " must be a (v1,v2,...) list");
    std::vector<double> out;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string piece;
    while (std::getline(ss, piece, ',')) {
        piece = trim(piece);
        if (piece.empty()) continue;
        out.push_back(std::stod(piece));
    }
    if (out.empty()) throw std::invalid_argument("key " + key + " is an empty list");
    return out;
}

std::string RunConfig::canonical_text() const {
    std::ostringstream os;
    os << "command = " << command << "\n";
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
    return os.str();
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        lineno++;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + " has no '='");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + " is malformed");
        if (key == "command") {
            if (!cfg.command.empty()) throw std::invalid_argument("duplicate key: command");
            cfg.command = val;
        } else {
            if (cfg.kv.count(key)) throw std::invalid_argument("duplicate key: " + key);
            cfg.kv[key] = val;
        }
    }
    return cfg;
}

void validate_config(const RunConfig& cfg) {
    static const std::map<std::string, std::pair<std::set<std::string>, std::set<std::string>>>
        schema = {
            // command -> (required keys, optional keys)
            {"bracket",
             {{"weight", "box"},
              {"count", "tol", "seed", "out", "check_bound", "h", "eps", "dump"}}},
            {"identity", {{"dim"}, {"seed", "out"}}},
            {"scan", {{"op", "weight", "grid", "h"}, {"norm", "seed", "out", "dump_op"}}},
            {"compare", {{"weight", "grid", "h"}, {"norm", "seed", "out"}}},
            {"cauchy",
             {{"grid", "weight", "delta", "faces", "lambda", "noise", "utrue"},
              {"gamma", "trials", "source", "q", "a", "seed", "out", "dump_solution"}}},
            {"caccioppoli", {{"grid", "r", "rho", "utrue"}, {"tol", "seed", "out"}}},
            {"ucp", {{"grid", "omega"}, {"seed", "out"}}},
        };
    if (cfg.command.empty()) throw std::invalid_argument("missing required key: command");
    auto it = schema.find(cfg.command);
    if (it == schema.end()) throw std::invalid_argument("unknown command: " + cfg.command);
    const auto& [required, optional] = it->second;
    for (const auto& k : required)
        if (!cfg.has(k)) throw std::invalid_argument("missing required key: " + k);
    for (const auto& [k, v] : cfg.kv)
        if (!required.count(k) && !optional.count(k))
            throw std::invalid_argument("unknown key: " + k);
}

Box parse_box_spec(const std::string& spec) {
    std::vector<std::pair<double, double>> iv;
    std::size_t i = 0;
    std::string s = trim(spec);
    while (i < s.size()) {
        if (s[i] != '[') throw std::invalid_argument("box spec: expected '[' in " + spec);
        std::size_t close = s.find(']', i);
        if (close == std::string::npos) throw std::invalid_argument("box spec: missing ']' in " + spec);
        std::string body = s.substr(i + 1, close - i - 1);
        std::size_t comma = body.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("box spec: interval needs a comma");
        double lo = std::stod(trim(body.substr(0, comma)));
        double hi = std::stod(trim(body.substr(comma + 1)));
        iv.emplace_back(lo, hi);
        i = close + 1;
        if (i < s.size()) {
            if (s[i] != 'x') throw std::invalid_argument("box spec: intervals must be joined by 'x'");
            i++;
        }
    }
    if (iv.empty()) throw std::invalid_argument("box spec is empty");
    return Box(std::move(iv));
}

std::shared_ptr<const Grid> parse_grid_spec(const std::string& spec) {
    std::string m_part, box_part;
    std::stringstream ss(spec);
    std::string tok;
    while (ss >> tok) {
        if (tok.rfind("m=", 0) == 0)
            m_part = tok.substr(2);
        else if (tok.rfind("box=", 0) == 0)
            box_part = tok.substr(4);
        else
            throw std::invalid_argument("grid spec: unexpected token '" + tok + "'");
    }
    if (m_part.empty() || box_part.empty())
        throw std::invalid_argument("grid spec needs m=... and box=...");
    std::vector<int> m;
    if (m_part.front() == '(') {
        if (m_part.back() != ')') throw std::invalid_argument("grid spec: malformed m tuple");
        std::stringstream ms(m_part.substr(1, m_part.size() - 2));
        std::string piece;
        while (std::getline(ms, piece, ',')) m.push_back(std::stoi(trim(piece)));
    } else {
        m.push_back(std::stoi(m_part));
    }
    Box box = parse_box_spec(box_part);
    if ((int)m.size() != box.dim())
        throw std::invalid_argument("grid spec: node counts and box dimension differ");
    return Grid::build(box, m);
}

std::vector<long> parse_mask_spec(const Grid& g, const std::string& spec) {
    std::stringstream ss(trim(spec));
    std::string head;
    ss >> head;
    if (head == "box") {
        std::string rest;
        std::getline(ss, rest);
        return nodes_in_box(g, parse_box_spec(trim(rest)));
    }
    if (head == "ball") {
        std::string center_tok, r_tok;
        ss >> center_tok >> r_tok;
        if (center_tok.empty() || center_tok.front() != '(' || center_tok.back() != ')')
            throw std::invalid_argument("ball mask: expected (c1,c2,...)");
        std::vector<double> c;
        std::stringstream cs(center_tok.substr(1, center_tok.size() - 2));
        std::string piece;
        while (std::getline(cs, piece, ',')) c.push_back(std::stod(trim(piece)));
        if (r_tok.rfind("r=", 0) != 0) throw std::invalid_argument("ball mask: expected r=...");
        return nodes_in_ball(g, c, std::stod(r_tok.substr(2)));
    }
    throw std::invalid_argument("mask spec must start with 'box' or 'ball'");
}

std::vector<FaceId> parse_faces_spec(const std::string& spec, int dim) {
    std::vector<FaceId> out;
    std::stringstream ss(spec);
    std::string tok;
    while (ss >> tok) {
        if (tok.size() < 5 || tok[0] != 'x')
            throw std::invalid_argument("face token must look like x1max or x2min: " + tok);
        std::string side = tok.substr(tok.size() - 3);
        int axis = std::stoi(tok.substr(1, tok.size() - 4)) - 1;
        if (axis < 0 || axis >= dim) throw std::invalid_argument("face axis out of range: " + tok);
        if (side == "max")
            out.push_back({axis, 1});
        else if (side == "min")
            out.push_back({axis, 0});
        else
            throw std::invalid_argument("face token must end in min or max: " + tok);
    }
    if (out.empty()) throw std::invalid_argument("faces spec is empty");
    return out;
}

TrueField lookup_true_field(const std::string& name, int dim) {
    TrueField tf;
    tf.name = name;
    auto x1 = [](const std::vector<double>& x) { return x[0]; };
    if (name == "zero") {
        tf.u = [](const std::vector<double>&) { return cplx(0.0); };
        tf.d4sum = tf.u;
        for (int j = 0; j < dim; j++) tf.grad.push_back(tf.u);
    } else if (name == "one") {
        tf.u = [](const std::vector<double>&) { return cplx(1.0); };
        tf.d4sum = [](const std::vector<double>&) { return cplx(0.0); };
        for (int j = 0; j < dim; j++)
            tf.grad.push_back([](const std::vector<double>&) { return cplx(0.0); });
    } else if (name == "linear1") {
        tf.u = [x1](const std::vector<double>& x) { return cplx(x1(x)); };
        tf.d4sum = [](const std::vector<double>&) { return cplx(0.0); };
        tf.grad.push_back([](const std::vector<double>&) { return cplx(1.0); });
        for (int j = 1; j < dim; j++)
            tf.grad.push_back([](const std::vector<double>&) { return cplx(0.0); });
    } else if (name == "cubic1") {
        tf.u = [x1](const std::vector<double>& x) { return cplx(x1(x) * x1(x) * x1(x)); };
        tf.d4sum = [](const std::vector<double>&) { return cplx(0.0); };
        tf.grad.push_back([x1](const std::vector<double>& x) { return cplx(3.0 * x1(x) * x1(x)); });
        for (int j = 1; j < dim; j++)
            tf.grad.push_back([](const std::vector<double>&) { return cplx(0.0); });
    } else if (name == "sin1") {
        tf.u = [x1](const std::vector<double>& x) { return cplx(std::sin(x1(x))); };
        tf.d4sum = tf.u;  // fourth derivative of sin is sin
        tf.grad.push_back([x1](const std::vector<double>& x) { return cplx(std::cos(x1(x))); });
        for (int j = 1; j < dim; j++)
            tf.grad.push_back([](const std::vector<double>&) { return cplx(0.0); });
    } else if (name == "sincos") {
        if (dim < 2) throw std::invalid_argument("sincos needs dimension >= 2");
        tf.u = [](const std::vector<double>& x) { return cplx(std::sin(x[0]) * std::cos(x[1])); };
        tf.d4sum = [](const std::vector<double>& x) {
            return cplx(2.0 * std::sin(x[0]) * std::cos(x[1]));
        };
        tf.grad.push_back(
            [](const std::vector<double>& x) { return cplx(std::cos(x[0]) * std::cos(x[1])); });
        tf.grad.push_back(
            [](const std::vector<double>& x) { return cplx(-std::sin(x[0]) * std::sin(x[1])); });
        for (int j = 2; j < dim; j++)
            tf.grad.push_back([](const std::vector<double>&) { return cplx(0.0); });
    } else {
        throw std::invalid_argument("unknown utrue field: " + name);
    }
    return tf;
}

}  // namespace carlab
