#pragma once

// h-scaling scans of the smallest singular value of conjugated discrete
// operators, log-log exponent fits, and the fourth-order vs bilaplacian
// comparison.

#include <carlab/fdgrid.hpp>
#include <carlab/subellipticity.hpp>

#include <string>
#include <vector>

namespace carlab {

enum class NormMode { L2, H1scl };

struct ScanSample {
    double h = 0.0;
    double eps = 0.0;  // convexification parameter actually used (0 if none)
    double sigma_min = 0.0;
    bool converged = false;
};

struct ExponentFit {
    double alpha = 0.0;
    double log_c = 0.0;
    double r2 = 0.0;
    int used = 0;
};

struct ScanResult {
    std::string op_kind;
    std::string weight;
    std::string grid;
    NormMode norm_mode = NormMode::L2;
    bool convexified = false;        // limiting weight, scanned as phi + (h/2eps) phi^2
    double h_window_min = 0.0;       // 4 * max grid spacing
    std::vector<double> h_skipped;   // requested h below the window
    std::vector<ScanSample> samples; // sorted by h descending
    ExponentFit fit;
};

// Limiting weights (bracket identically zero) are scanned with the
// convexified weight, eps = sqrt(h) per h.
ScanResult scan(std::shared_ptr<const Grid> grid, const Weight& w, OpKind kind,
                std::vector<double> h_list, NormMode mode = NormMode::L2);

ExponentFit fit_exponent(const std::vector<ScanSample>& samples);

struct CompareReport {
    ScanResult first;
    ScanResult second;
    double alpha_gap = 0.0;        // second.alpha - first.alpha
    bool alpha_ordering_ok = false;  // first.alpha < second.alpha - 0.3
    double crossover_h = 0.0;        // largest h with sigma ordering at all h' <= it
    bool sigma_ordering_ok = false;  // ordering holds at the smallest h at least
};

CompareReport compare(std::shared_ptr<const Grid> grid, const Weight& w,
                      std::vector<double> h_list, OpKind kind_a = OpKind::FourthSum,
                      OpKind kind_b = OpKind::Bilaplacian, NormMode mode = NormMode::L2);

std::string to_string(NormMode m);
std::string to_string(OpKind k);

}  // namespace carlab
