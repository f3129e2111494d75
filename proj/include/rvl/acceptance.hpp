// =============================================================================
// The acceptance suite: one named criterion per headline numerical claim,
// each printing a single pass/fail line.
//
// Criteria mix three kinds of evidence:
//   - oracle equivalence (dynamic programming vs brute force, direct vs CRT),
//   - exact identities with pinned tolerances (Ramanujan averages, telescoping
//     closed forms, Fourier diagonalization),
//   - monitored decay trends with constants frozen from a pinned reference
//     run (Gaussian-sum decay, major-arc errors, weighted/unweighted drift).
//
// The documented error bounds scale with `tolerance`; setting it to 0 is the
// supported negative control (everything fails, measured values printed).
// Frozen constants are re-measured with `refit = true`, which prints the
// fresh values instead of comparing, so re-freezing is an explicit act.
// =============================================================================

#pragma once

#include <string>
#include <vector>

#include "rvl/harness.hpp"

namespace rvl {

struct AcceptanceOptions {
    std::uint64_t seed = 20260816;  // the pinned reference seed
    double tolerance = 1.0;         // multiplier on documented error bounds
    bool refit = false;             // report fresh fitted constants, skip frozen comparisons
    std::string out_json;           // verdict path; empty = no file
};

struct CriterionResult {
    std::string name;
    bool pass = false;
    double seconds = 0;
    std::vector<CheckRecord> checks;
};

std::vector<std::string> acceptance_names();  // the 15 criteria, in order

CriterionResult run_criterion(const std::string& name, const AcceptanceOptions& opt);

// which = "all" or a single criterion name.  Prints one line per criterion
// (details for failures), writes the JSON verdict when requested, returns the
// number of failed criteria.
int run_acceptance(const std::string& which, const AcceptanceOptions& opt);

}  // namespace rvl
