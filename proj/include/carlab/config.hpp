#pragma once

// Flat key = value config files with a strict per-command schema, plus the
// small spec grammars shared by the CLI: boxes, grids, node masks, and the
// closed-form field catalog for manufactured problems.

#include <carlab/cauchy.hpp>
#include <carlab/fdgrid.hpp>
#include <carlab/weights.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace carlab {

struct RunConfig {
    std::string command;
    std::map<std::string, std::string> kv;  // everything except `command`

    bool has(const std::string& key) const { return kv.count(key) > 0; }
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_real(const std::string& key) const;
    double get_real_or(const std::string& key, double fallback) const;
    long get_int(const std::string& key) const;
    long get_int_or(const std::string& key, long fallback) const;
    std::uint64_t seed() const;  // key "seed", default 0
    std::vector<double> get_list(const std::string& key) const;  // (v1,v2,...)

    // canonical text: sorted "key = value" lines with command first
    std::string canonical_text() const;
};

// Parses "key = value" lines; '#' starts a comment; keys may not repeat.
RunConfig parse_config_text(const std::string& text);

// Throws std::invalid_argument "unknown key: X" on schema violations.
void validate_config(const RunConfig& cfg);

Box parse_box_spec(const std::string& spec);                       // [0,1]x[-1,1]
std::shared_ptr<const Grid> parse_grid_spec(const std::string& spec);  // m=(21,21) box=[0,1]x[0,1]
std::vector<long> parse_mask_spec(const Grid& g, const std::string& spec);  // box ... | ball ...
std::vector<FaceId> parse_faces_spec(const std::string& spec, int dim);     // "x1max x2min"

// Closed-form fields for manufactured problems. Lu is assembled from the
// analytic per-axis derivatives together with constant coefficients A, q.
struct TrueField {
    std::string name;
    ScalarField u;
    ScalarField d4sum;               // sum_j d^4_j u
    std::vector<ScalarField> grad;   // d_j u (up to dim 2 catalog entries)
};

TrueField lookup_true_field(const std::string& name, int dim);

}  // namespace carlab
