// =============================================================================
// Command-line front end.
//
// Verbs mirror the library modules one to one:
//
//   sieve            prime table dump and Chebyshev mass
//   orbit            weighted orbit of a dilated body, CSV
//   apply-average    M_N / A_N on a sparse function
//   apply-singular   truncated singular operator H_N
//   multiplier-sweep m_N or h_N along a frequency line, with envelopes
//   gauss-scan       max_a |G(a/q)| and the fitted C q^{-delta}
//   weyl-scan        exponential sums at random frequencies
//   variation        V_r / dyadic / long-short demos on a seeded sequence
//   iw-build         admissible denominator set as JSON
//   xi-eval          smooth rational-neighborhood partition values, CSV
//   telescoping      l^1 mass of consecutive kernel differences
//   run              config-driven experiment (see harness)
//   acceptance       the named acceptance criteria
//
// Common flags: --seed, --threads, --tolerance fall through to every verb;
// --out names the artifact (CSV or JSON depending on the verb).
// =============================================================================

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rvl/acceptance.hpp"
#include "rvl/expsums.hpp"
#include "rvl/harness.hpp"
#include "rvl/iw.hpp"
#include "rvl/lattice.hpp"
#include "rvl/multipliers.hpp"
#include "rvl/numtheory.hpp"
#include "rvl/operators.hpp"
#include "rvl/phase.hpp"
#include "rvl/util.hpp"
#include "rvl/variation.hpp"

using namespace rvl;

namespace {

// -----------------------------------------------------------------------------
// small shared helpers
// -----------------------------------------------------------------------------
ConvexBody body_from_name(const std::string& name) {
    if (name == "interval") return ConvexBody::cube(1);
    if (name == "cube2" || name == "square") return ConvexBody::cube(2);
    if (name == "ball2" || name == "disc") return ConvexBody::euclidean_ball(2);
    fail("unknown body '" + name + "' (interval, cube2, ball2)");
}

struct Csv {
    std::ofstream out;
    explicit Csv(const std::string& path) : out(path, std::ios::binary) {
        if (!out) fail("cannot write " + path);
    }
    void raw(const std::string& s) { out << s; }
    void num(double x) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out << buf;
    }
    void num(i64 x) { out << x; }
};

std::vector<double> parse_reals(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t c = s.find(',', pos);
        std::string tok = s.substr(pos, c == std::string::npos ? std::string::npos : c - pos);
        if (tok.empty()) fail("empty entry in list '" + s + "'");
        out.push_back(std::stod(tok));
        if (c == std::string::npos) break;
        pos = c + 1;
    }
    return out;
}

struct OrbitArgs {
    std::string body = "interval";
    int kprime = 0;
    int kpp = 0;
    bool with_sign = false;
    int degree = 2;
    i64 N = 0;
};

void add_orbit_flags(CLI::App* sub, OrbitArgs& a, bool allow_sign) {
    sub->add_option("--body", a.body, "interval, cube2 or ball2")->capture_default_str();
    sub->add_option("--kprime", a.kprime, "leading integer axes")->capture_default_str();
    sub->add_option("--kpp", a.kpp, "trailing prime axes")->capture_default_str();
    if (allow_sign) sub->add_flag("--signed", a.with_sign, "signed axes");
    sub->add_option("--degree", a.degree, "top monomial degree")->capture_default_str();
    sub->add_option("--N", a.N, "dilation scale")->required();
}

struct OrbitSetup {
    ConvexBody B;
    OrbitStructure st;
    MultiIndexSet G;
    PrimeTable primes;
};

OrbitSetup make_orbit_setup(const OrbitArgs& a, bool force_sign) {
    OrbitSetup s{body_from_name(a.body), {a.kprime, a.kpp, a.with_sign || force_sign},
                 build_gamma(a.kprime + a.kpp, a.degree), PrimeTable{}};
    if (s.st.k() != s.B.k)
        fail("body dimension " + std::to_string(s.B.k) + " does not match kprime + kpp = " +
             std::to_string(s.st.k()));
    if (a.N < 1) fail("--N must be positive");
    s.primes = sieve_primes_cached(std::max<i64>(a.N, 4));
    return s;
}

// -----------------------------------------------------------------------------
// verbs
// -----------------------------------------------------------------------------
int do_sieve(i64 limit, const std::string& out_path) {
    PrimeTable pt = sieve_primes_cached(limit);
    if (!out_path.empty()) {
        Csv csv(out_path);
        csv.raw("p,log_p\n");
        for (std::size_t i = 0; i < pt.primes.size(); ++i) {
            csv.num(pt.primes[i]);
            csv.raw(",");
            csv.num(pt.logs[i]);
            csv.raw("\n");
        }
    }
    double theta = pairwise_sum(pt.logs);
    std::printf("pi(%" PRId64 ") = %zu   theta(%" PRId64 ") = %.10g   theta/x = %.10g\n",
                limit, pt.primes.size(), limit, theta, theta / static_cast<double>(limit));
    return 0;
}

int do_orbit(const OrbitArgs& a, const std::string& out_path) {
    OrbitSetup s = make_orbit_setup(a, false);
    WeightedOrbit orb = enumerate_orbit(s.B, a.N, s.st, s.G, s.primes);
    Counting ct = counting(s.B, a.N, s.st, s.primes);
    if (!out_path.empty()) {
        Csv csv(out_path);
        std::string head;
        for (int j = 0; j < s.st.k(); ++j) head += "x" + std::to_string(j + 1) + ",";
        head += "weight";
        for (int j = 0; j < s.G.d; ++j) head += ",q" + std::to_string(j + 1);
        csv.raw(head + "\n");
        std::size_t rows = std::min<std::size_t>(orb.npoints, 2'000'000);
        for (std::size_t i = 0; i < rows; ++i) {
            auto pt = orb.point(i);
            auto im = orb.image(i);
            for (int j = 0; j < s.st.k(); ++j) {
                csv.num(pt[static_cast<std::size_t>(j)]);
                csv.raw(",");
            }
            csv.num(orb.weights[i]);
            for (int j = 0; j < s.G.d; ++j) {
                csv.raw(",");
                csv.num(im[static_cast<std::size_t>(j)]);
            }
            csv.raw("\n");
        }
        if (rows < orb.npoints)
            std::printf("note: wrote the first %zu of %zu rows\n", rows, orb.npoints);
    }
    std::printf("points %zu   vartheta %.10g   (counting pass: pi %" PRId64 " vartheta %.10g)\n",
                orb.npoints, orb.vartheta, ct.pi, ct.vartheta);
    std::printf("[%s] enumerate and counting agree\n",
                (static_cast<i64>(orb.npoints) == ct.pi && orb.vartheta == ct.vartheta) ? "OK"
                                                                                        : "FAIL");
    return (static_cast<i64>(orb.npoints) == ct.pi && orb.vartheta == ct.vartheta) ? 0 : 1;
}

int do_apply(const OrbitArgs& a, bool singular, bool unweighted, const std::string& in_path,
             const std::string& out_path) {
    OrbitSetup s = make_orbit_setup(a, singular);
    WeightedOrbit orb = enumerate_orbit(s.B, a.N, s.st, s.G, s.primes);
    if (orb.npoints == 0) fail("empty orbit at this scale");
    Lift lift = identity_lift(s.G);
    SparseFunction f =
        in_path.empty() ? SparseFunction::delta(s.G.d) : read_sparse_csv(in_path);
    SparseFunction g;
    if (singular) {
        CZKernel kern = make_cz_kernel(s.st.k());
        g = apply_singular(f, kern, orb, lift);
    } else {
        g = apply_average(f, orb, lift, !unweighted);
    }
    if (!out_path.empty()) write_sparse_csv(g, out_path);
    std::printf("support %zu -> %zu   ||f||_1 = %.10g   ||%s f||_1 = %.10g\n",
                f.support_size(), g.support_size(), lp_norm(f, 1.0),
                singular ? "H_N" : (unweighted ? "A_N" : "M_N"), lp_norm(g, 1.0));
    return 0;
}

int do_multiplier_sweep(const OrbitArgs& a, const std::string& kind, i64 grid,
                        const std::string& out_path) {
    if (grid < 1) fail("--grid must be positive");
    bool singular = kind == "singular";
    if (!singular && kind != "average") fail("--kind must be average or singular");
    OrbitSetup s = make_orbit_setup(a, singular);
    WeightedOrbit orb = enumerate_orbit(s.B, a.N, s.st, s.G, s.primes);
    std::vector<RationalFrequency> freqs;
    for (i64 i = 0; i < grid; ++i) {
        std::vector<double> theta(static_cast<std::size_t>(s.G.d), 0.0);
        theta[0] = static_cast<double>(i) / static_cast<double>(grid);
        freqs.push_back(pure_offset(std::move(theta)));
    }
    std::vector<cplx> vals;
    if (singular) {
        CZKernel kern = make_cz_kernel(s.st.k());
        vals = h_hat(freqs, orb, kern);
    } else {
        vals = m_hat(freqs, orb);
    }
    if (!out_path.empty()) {
        Csv csv(out_path);
        csv.raw("t,re,im,abs,envelope\n");
        for (std::size_t i = 0; i < freqs.size(); ++i) {
            auto xi = freqs[i].xi();
            double z = nA_norm(xi, s.G, a.N);
            double env = z > 0 ? std::min(1.0, std::pow(z, -1.0 / s.G.d)) : 1.0;
            csv.num(xi[0]);
            csv.raw(",");
            csv.num(vals[i].real());
            csv.raw(",");
            csv.num(vals[i].imag());
            csv.raw(",");
            csv.num(std::abs(vals[i]));
            csv.raw(",");
            csv.num(env);
            csv.raw("\n");
        }
    }
    double peak = 0;
    for (const auto& v : vals) peak = std::max(peak, std::abs(v));
    std::printf("%s multiplier on %" PRId64 " frequencies at N = %" PRId64 ", peak |value| = %.10g\n",
                singular ? "singular" : "averaging", grid, a.N, peak);
    return 0;
}

int do_gauss_scan(i64 qmax, int kprime, int kpp, int degree, const std::string& out_path) {
    OrbitStructure st{kprime, kpp, false};
    if (st.k() < 1) st = {0, 1, false};
    MultiIndexSet G = build_gamma(st.k(), degree);
    GaussScan scan = gauss_scan(qmax, st, G);
    if (!out_path.empty()) {
        Csv csv(out_path);
        std::string head = "q,max_abs";
        for (int j = 0; j < G.d; ++j) head += ",a" + std::to_string(j + 1);
        csv.raw(head + "\n");
        for (const auto& row : scan.rows) {
            csv.num(row.q);
            csv.raw(",");
            csv.num(row.max_abs);
            for (i64 ai : row.argmax_a) {
                csv.raw(",");
                csv.num(ai);
            }
            csv.raw("\n");
        }
    }
    std::printf("max_a |G(a/q)| <= %.6g q^{-%.6g} over q <= %" PRId64 "\n", scan.C_fit,
                scan.delta_fit, qmax);
    return 0;
}

int do_weyl_scan(const std::string& axes, int degree, i64 N, int trials, std::uint64_t seed,
                 const std::string& out_path) {
    std::vector<AxisSet> sets;
    std::size_t pos = 0;
    std::string axs = axes;
    while (pos <= axs.size()) {
        std::size_t c = axs.find(',', pos);
        std::string tok = axs.substr(pos, c == std::string::npos ? std::string::npos : c - pos);
        if (tok == "integers")
            sets.push_back(AxisSet::integers);
        else if (tok == "primes")
            sets.push_back(AxisSet::primes);
        else if (tok == "signed-primes" || tok == "signed_primes")
            sets.push_back(AxisSet::signed_primes);
        else
            fail("unknown axis '" + tok + "' (integers, primes, signed-primes)");
        if (c == std::string::npos) break;
        pos = c + 1;
    }
    int k = static_cast<int>(sets.size());
    MultiIndexSet G = build_gamma(k, degree);
    PrimeTable primes = sieve_primes_cached(std::max<i64>(N, 4));
    Rng rng(seed);
    Csv* csv = nullptr;
    Csv file(out_path.empty() ? "/dev/null" : out_path);
    if (!out_path.empty()) {
        csv = &file;
        std::string head = "trial,N,points,abs,normalized";
        for (int j = 0; j < G.d; ++j) head += ",xi" + std::to_string(j + 1);
        csv->raw(head + "\n");
    }
    for (int t = 0; t < trials; ++t) {
        ExpSumSpec spec;
        spec.k = k;
        spec.sets = sets;
        spec.G = &G;
        spec.poly.resize(static_cast<std::size_t>(G.d));
        for (auto& cc : spec.poly) cc = rng.uniform();
        bool logw = false;
        for (auto sset : sets) logw = logw || sset != AxisSet::integers;
        spec.logweights = logw;
        WeylSum ws = weyl_sum(spec, N, primes);
        std::printf("trial %2d: |S| = %.8g   |S|/N^k = %.8g   on %" PRId64 " points\n", t,
                    std::abs(ws.sum), ws.normalized, ws.points);
        if (csv) {
            csv->num(static_cast<i64>(t));
            csv->raw(",");
            csv->num(N);
            csv->raw(",");
            csv->num(ws.points);
            csv->raw(",");
            csv->num(std::abs(ws.sum));
            csv->raw(",");
            csv->num(ws.normalized);
            for (double cc : spec.poly) {
                csv->raw(",");
                csv->num(cc);
            }
            csv->raw("\n");
        }
    }
    return 0;
}

int do_variation(i64 demo, double r, const std::string& mode, double rho, std::uint64_t seed) {
    if (demo < 2) fail("--demo length must be at least 2");
    Rng rng(seed);
    std::vector<cplx> a(static_cast<std::size_t>(demo));
    for (auto& v : a) v = rng.gaussian_pair();
    if (mode == "vr") {
        double V = vr(a, r);
        std::printf("V_%g over %" PRId64 " gaussian samples: %.10g\n", r, demo, V);
        if (demo <= 14) {
            double bf = vr_bruteforce(a, r);
            bool ok = std::abs(V - bf) <= 1e-12 * std::max(1.0, bf);
            std::printf("[%s] exhaustive oracle %.10g\n", ok ? "OK" : "FAIL", bf);
            return ok ? 0 : 1;
        }
        return 0;
    }
    if (mode == "dyadic") {
        i64 len = demo;
        if (((len - 1) & (len - 2)) != 0 || len < 3)
            fail("--mode dyadic needs length 2^s + 1");
        DyadicBound b = vr_dyadic_bound(a, r);
        bool ok = b.lhs <= b.rhs * (1.0 + 1e-12);
        std::printf("V_%g = %.10g   sqrt(2) dyadic layers = %.10g\n", r, b.lhs, b.rhs);
        std::printf("[%s] dyadic bound\n", ok ? "OK" : "FAIL");
        return ok ? 0 : 1;
    }
    if (mode == "split") {
        IndexedSequence seq;
        seq.idx.resize(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) seq.idx[i] = static_cast<i64>(i + 1);
        seq.val = a;
        SplitVariation sp = split_variation(seq, rho, r);
        std::printf("total %.10g   long %.10g   short %.10g   c_min %.6g\n", sp.total,
                    sp.long_part, sp.short_part, sp.c_min);
        std::printf("[%s] total <= 2 (long + short)\n", sp.ok_c2 ? "OK" : "FAIL");
        return sp.ok_c2 ? 0 : 1;
    }
    fail("unknown --mode '" + mode + "' (vr, dyadic, split)");
}

int do_iw_build(int n, int beta, const std::string& out_path) {
    RationalSet P = build_Pn(n, beta);
    nlohmann::json j;
    j["n"] = n;
    j["beta"] = beta;
    j["n0"] = P.par.n0;
    j["D"] = P.par.D;
    j["cardinality"] = P.cardinality;
    j["magnitude_truncated"] = P.magnitude_truncated;
    j["count"] = P.qs.size();
    j["denominator_cap"] = denominator_cap(n);
    j["epsilon"] = epsilon_n(n);
    std::size_t keep = std::min<std::size_t>(P.qs.size(), 100000);
    j["qs"] = std::vector<i64>(P.qs.begin(), P.qs.begin() + static_cast<std::ptrdiff_t>(keep));
    j["qs_truncated"] = keep < P.qs.size();
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) fail("cannot write " + out_path);
        out << j.dump(2) << "\n";
    }
    std::printf("P_%d (beta %d): %zu denominators, n0 = %" PRId64 ", D = %d, cap e^{n^{1/10}} = %.6g\n",
                n, beta, P.qs.size(), P.par.n0, P.par.D, denominator_cap(n));
    return 0;
}

int do_xi_eval(int n, std::optional<int> s, int beta, double rho, double chi,
               const std::string& xi_str, i64 grid, int degree, const std::string& out_path) {
    MultiIndexSet G = build_gamma(1, degree);
    ScaleLadder ladder = make_ladder(rho, G.d, i64{1} << 20, 64);
    XiPartitionParams par;
    par.beta = beta;
    par.rho = rho;
    par.chi = chi;
    par.ladder = &ladder;
    par.G = &G;
    std::vector<double> base = parse_reals(xi_str);
    if (static_cast<int>(base.size()) != G.d)
        fail("--xi needs " + std::to_string(G.d) + " components for degree " +
             std::to_string(degree));
    std::vector<std::vector<double>> points;
    if (grid > 0) {
        for (i64 i = 0; i < grid; ++i) {
            auto xi = base;
            xi[0] = static_cast<double>(i) / static_cast<double>(grid);
            points.push_back(std::move(xi));
        }
    } else {
        points.push_back(base);
    }
    Csv* csv = nullptr;
    Csv file(out_path.empty() ? "/dev/null" : out_path);
    if (!out_path.empty()) {
        csv = &file;
        std::string head;
        for (int j = 0; j < G.d; ++j) head += "xi" + std::to_string(j + 1) + ",";
        csv->raw(head + "n,s,value\n");
    }
    double mx = 0;
    for (const auto& xi : points) {
        double v = xi_partition(xi, n, s, par);
        mx = std::max(mx, v);
        if (csv) {
            for (double x : xi) {
                csv->num(x);
                csv->raw(",");
            }
            csv->num(static_cast<i64>(n));
            csv->raw(",");
            csv->num(static_cast<i64>(s ? *s : -1));
            csv->raw(",");
            csv->num(v);
            csv->raw("\n");
        }
    }
    std::printf("Xi values at %zu points: max %.10g (n = %d%s)\n", points.size(), mx, n,
                s ? (", shell s = " + std::to_string(*s)).c_str() : "");
    return 0;
}

int do_telescoping(const std::string& kind, i64 N1, i64 N2) {
    bool singular = kind == "singular";
    if (!singular && kind != "average") fail("--kind must be average or singular");
    MultiIndexSet G = build_gamma(1, 2);
    TelescopingSetup ts;
    ts.B = ConvexBody::cube(1);
    ts.st = {0, 1, singular};
    ts.lift = identity_lift(G);
    PrimeTable primes = sieve_primes_cached(std::max<i64>(N2, 4));
    ts.primes = &primes;
    ts.kernel = make_cz_kernel(1);
    TelescopingResult r = telescoping_l1(
        singular ? TelescopingKind::singular : TelescopingKind::average, N1, N2, ts);
    std::printf("l^1 mass of kernel differences (%s, N1 = %" PRId64 ", N2 = %" PRId64 ")\n",
                kind.c_str(), N1, N2);
    std::printf("  lhs %.10g   raw factor %.10g   bound %.10g\n", r.lhs, r.raw_factor,
                r.rhs_bound);
    std::printf("[%s] lhs within the frozen-constant bound\n",
                r.lhs <= r.rhs_bound ? "OK" : "FAIL");
    std::printf("[%s] fiber closed forms\n", r.pointwise_ok ? "OK" : "FAIL");
    return (r.lhs <= r.rhs_bound && r.pointwise_ok) ? 0 : 1;
}

int do_run(const std::string& cfg_path, const std::string& out_dir, std::uint64_t seed,
           bool seed_given, std::optional<double> tolerance) {
    Config cfg = load_config(cfg_path);
    RunOptions ro;
    ro.seed = seed_given ? seed : 1;
    ro.out_dir = out_dir.empty() ? "." : out_dir;
    ro.tolerance = tolerance;
    RunReport rep = run_experiment(cfg, ro);
    std::fputs(render_report(rep).c_str(), stdout);
    std::string jpath = ro.out_dir + "/report.json";
    write_report_json(rep, jpath);
    std::printf("report: %s\n", jpath.c_str());
    return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for averaging and singular operators along primes"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 1;
    int threads = 0;
    double tolerance = -1.0;  // negative = not set
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
    app.add_option("--threads", threads, "worker threads (0 = hardware)");
    auto* tol_opt =
        app.add_option("--tolerance", tolerance, "multiplier on documented error bounds");

    // sieve
    auto* sieve_cmd = app.add_subcommand("sieve", "prime table and Chebyshev mass");
    i64 sieve_limit = 0;
    std::string sieve_out;
    sieve_cmd->add_option("--limit", sieve_limit, "sieve bound")->required();
    sieve_cmd->add_option("--out", sieve_out, "CSV of primes and logs");

    // orbit
    auto* orbit_cmd = app.add_subcommand("orbit", "weighted orbit dump");
    OrbitArgs orbit_args;
    std::string orbit_out;
    add_orbit_flags(orbit_cmd, orbit_args, true);
    orbit_cmd->add_option("--out", orbit_out, "CSV of points, weights, images");

    // apply-average
    auto* avg_cmd = app.add_subcommand("apply-average", "weighted or plain averaging operator");
    OrbitArgs avg_args;
    std::string avg_in, avg_out;
    bool avg_unweighted = false;
    add_orbit_flags(avg_cmd, avg_args, false);
    avg_cmd->add_flag("--unweighted", avg_unweighted, "use A_N (counting) instead of M_N");
    avg_cmd->add_option("--in", avg_in, "sparse input CSV (default: delta at 0)");
    avg_cmd->add_option("--out", avg_out, "sparse output CSV");

    // apply-singular
    auto* sing_cmd = app.add_subcommand("apply-singular", "truncated singular operator");
    OrbitArgs sing_args;
    std::string sing_in, sing_out;
    add_orbit_flags(sing_cmd, sing_args, false);
    sing_cmd->add_option("--in", sing_in, "sparse input CSV (default: delta at 0)");
    sing_cmd->add_option("--out", sing_out, "sparse output CSV");

    // multiplier-sweep
    auto* mult_cmd = app.add_subcommand("multiplier-sweep", "multiplier along a frequency line");
    OrbitArgs mult_args;
    std::string mult_kind = "average", mult_out;
    i64 mult_grid = 64;
    add_orbit_flags(mult_cmd, mult_args, false);
    mult_cmd->add_option("--grid", mult_grid, "frequency count on [0,1)")->capture_default_str();
    mult_cmd->add_option("--kind", mult_kind, "average or singular")->capture_default_str();
    mult_cmd->add_option("--out", mult_out, "CSV of t, value, envelope");

    // gauss-scan
    auto* gauss_cmd = app.add_subcommand("gauss-scan", "complete rational sums");
    i64 gauss_qmax = 0;
    int gauss_kprime = 0, gauss_kpp = 1, gauss_degree = 2;
    std::string gauss_out;
    gauss_cmd->add_option("--qmax", gauss_qmax, "largest modulus")->required();
    gauss_cmd->add_option("--kprime", gauss_kprime, "integer axes")->capture_default_str();
    gauss_cmd->add_option("--kpp", gauss_kpp, "prime axes")->capture_default_str();
    gauss_cmd->add_option("--degree", gauss_degree, "monomial degree")->capture_default_str();
    gauss_cmd->add_option("--out", gauss_out, "CSV of q, max |G|, argmax a");

    // weyl-scan
    auto* weyl_cmd = app.add_subcommand("weyl-scan", "exponential sums at random frequencies");
    std::string weyl_axes = "primes", weyl_out;
    int weyl_degree = 2, weyl_trials = 10;
    i64 weyl_N = 0;
    weyl_cmd->add_option("--axes", weyl_axes, "comma list: integers, primes, signed-primes")
        ->capture_default_str();
    weyl_cmd->add_option("--degree", weyl_degree, "polynomial degree")->capture_default_str();
    weyl_cmd->add_option("--N", weyl_N, "box scale")->required();
    weyl_cmd->add_option("--trials", weyl_trials, "random frequencies")->capture_default_str();
    weyl_cmd->add_option("--out", weyl_out, "CSV of per-trial sums");

    // variation
    auto* var_cmd = app.add_subcommand("variation", "variation seminorm demos");
    i64 var_demo = 32;
    double var_r = 2.0, var_rho = 0.5;
    std::string var_mode = "vr";
    var_cmd->add_option("--demo", var_demo, "sequence length")->capture_default_str();
    var_cmd->add_option("--r", var_r, "variation exponent")->capture_default_str();
    var_cmd->add_option("--rho", var_rho, "ladder exponent for --mode split")
        ->capture_default_str();
    var_cmd->add_option("--mode", var_mode, "vr, dyadic or split")->capture_default_str();

    // iw-build
    auto* iw_cmd = app.add_subcommand("iw-build", "admissible denominator set");
    int iw_n = 1, iw_beta = 1;
    std::string iw_out;
    iw_cmd->add_option("--n", iw_n, "level")->required();
    iw_cmd->add_option("--beta", iw_beta, "exponent parameter")->capture_default_str();
    iw_cmd->add_option("--out", iw_out, "JSON dump");

    // xi-eval
    auto* xi_cmd = app.add_subcommand("xi-eval", "rational-neighborhood partition values");
    int xi_n = 1, xi_beta = 1, xi_degree = 2;
    int xi_s = -1;
    double xi_rho = 0.5, xi_chi = 0.05;
    std::string xi_xi = "0,0", xi_out;
    i64 xi_grid = 0;
    xi_cmd->add_option("--n", xi_n, "bump scale index")->required();
    xi_cmd->add_option("--s", xi_s, "shell index (omit for the full union)");
    xi_cmd->add_option("--beta", xi_beta, "exponent parameter")->capture_default_str();
    xi_cmd->add_option("--rho", xi_rho, "ladder exponent")->capture_default_str();
    xi_cmd->add_option("--chi", xi_chi, "bump widening exponent")->capture_default_str();
    xi_cmd->add_option("--degree", xi_degree, "monomial degree")->capture_default_str();
    xi_cmd->add_option("--xi", xi_xi, "comma-separated frequency")->capture_default_str();
    xi_cmd->add_option("--grid", xi_grid, "sweep xi_1 over j/grid")->capture_default_str();
    xi_cmd->add_option("--out", xi_out, "CSV of values");

    // telescoping
    auto* tele_cmd = app.add_subcommand("telescoping", "kernel-difference l^1 mass");
    std::string tele_kind = "average";
    i64 tele_N1 = 0, tele_N2 = 0;
    tele_cmd->add_option("--kind", tele_kind, "average or singular")->capture_default_str();
    tele_cmd->add_option("--N1", tele_N1, "lower scale")->required();
    tele_cmd->add_option("--N2", tele_N2, "upper scale")->required();

    // run
    auto* run_cmd = app.add_subcommand("run", "config-driven experiment");
    std::string run_cfg, run_out;
    run_cmd->add_option("--config", run_cfg, "config file")->required();
    run_cmd->add_option("--out", run_out, "output directory")->capture_default_str();

    // acceptance
    auto* acc_cmd = app.add_subcommand("acceptance", "named acceptance criteria");
    std::string acc_which = "all", acc_out;
    bool acc_refit = false;
    acc_cmd->add_option("criterion", acc_which, "criterion name or 'all'");
    acc_cmd->add_option("--out", acc_out, "JSON verdict path");
    acc_cmd->add_flag("--refit", acc_refit, "print fresh fitted constants");

    for (auto* sub : {sieve_cmd, orbit_cmd, avg_cmd, sing_cmd, mult_cmd, gauss_cmd, weyl_cmd,
                      var_cmd, iw_cmd, xi_cmd, tele_cmd, run_cmd, acc_cmd})
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (threads > 0) set_thread_count(threads);
        if (*sieve_cmd) return do_sieve(sieve_limit, sieve_out);
        if (*orbit_cmd) return do_orbit(orbit_args, orbit_out);
        if (*avg_cmd) return do_apply(avg_args, false, avg_unweighted, avg_in, avg_out);
        if (*sing_cmd) return do_apply(sing_args, true, false, sing_in, sing_out);
        if (*mult_cmd) return do_multiplier_sweep(mult_args, mult_kind, mult_grid, mult_out);
        if (*gauss_cmd)
            return do_gauss_scan(gauss_qmax, gauss_kprime, gauss_kpp, gauss_degree, gauss_out);
        if (*weyl_cmd)
            return do_weyl_scan(weyl_axes, weyl_degree, weyl_N, weyl_trials, seed, weyl_out);
        if (*var_cmd) return do_variation(var_demo, var_r, var_mode, var_rho, seed);
        if (*iw_cmd) return do_iw_build(iw_n, iw_beta, iw_out);
        if (*xi_cmd)
            return do_xi_eval(xi_n, xi_cmd->count("--s") ? std::optional<int>(xi_s) : std::nullopt,
                              xi_beta, xi_rho, xi_chi, xi_xi, xi_grid, xi_degree, xi_out);
        if (*tele_cmd) return do_telescoping(tele_kind, tele_N1, tele_N2);
        if (*run_cmd)
            return do_run(run_cfg, run_out, seed, seed_opt->count() > 0,
                          tol_opt->count() > 0 ? std::optional<double>(tolerance) : std::nullopt);
        if (*acc_cmd) {
            AcceptanceOptions opt;
            if (seed_opt->count() > 0) opt.seed = seed;
            if (tol_opt->count() > 0) opt.tolerance = tolerance;
            opt.refit = acc_refit;
            opt.out_json = acc_out;
            return run_acceptance(acc_which, opt) == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
