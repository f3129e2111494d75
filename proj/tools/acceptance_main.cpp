// =============================================================================
// Standalone acceptance runner: one pass/fail line per criterion, optional
// JSON verdict, exit code = number of failed criteria.
//
//   rvl-acceptance all --out verdict.json
//   rvl-acceptance vr-oracle --tolerance 0        (negative control)
//   rvl-acceptance gauss-decay --refit            (print frozen candidates)
// =============================================================================

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "rvl/acceptance.hpp"
#include "rvl/util.hpp"

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria for the prime-orbit averaging laboratory"};
    std::string which = "all";
    rvl::AcceptanceOptions opt;
    int threads = 0;

    app.add_option("criterion", which,
                   "criterion name or 'all' (see --list for names)");
    bool list = false;
    app.add_flag("--list", list, "print criterion names and exit");
    app.add_option("--tolerance", opt.tolerance,
                   "multiplier on documented error bounds (0 = negative control)");
    app.add_option("--seed", opt.seed, "RNG seed; frozen references assume the pinned default");
    app.add_option("--out", opt.out_json, "write the JSON verdict here");
    app.add_flag("--refit", opt.refit, "print fresh fitted constants instead of comparing");
    app.add_option("--threads", threads, "worker threads (0 = hardware)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (threads > 0) rvl::set_thread_count(threads);
        if (list) {
            for (const auto& n : rvl::acceptance_names()) std::printf("%s\n", n.c_str());
            return 0;
        }
        return rvl::run_acceptance(which, opt);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
