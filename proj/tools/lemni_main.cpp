// lemni: lengths of polynomial lemniscates {|p(z)| = 1} by four methods,
// bound checks, perturbation experiments, extremal search.
//
// Exit codes: 0 success, 1 assertion failure, 2 usage error,
//             3 numerical-method failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lemni/crofton.hpp"
#include "lemni/experiments.hpp"
#include "lemni/parallel.hpp"
#include "lemni/polynomial.hpp"
#include "lemni/quadrature.hpp"
#include "lemni/tracer.hpp"
#include "lemni/verify.hpp"

namespace {

using lemni::cplx;
using lemni::ordered_json;
using lemni::Polynomial;

constexpr int kExitOk = 0;
constexpr int kExitAssertFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
    std::string poly_text;
    std::string poly_file;
    std::string out_path;
    std::string sampler = "grid:1000x1000";
    long budget = 200000;
    std::uint64_t seed = 1;
    int threads = 0;
};

Polynomial load_polynomial(const CommonOpts& opts) {
    if (!opts.poly_text.empty()) return lemni::parse_polynomial(opts.poly_text);
    if (!opts.poly_file.empty()) {
        std::ifstream in(opts.poly_file);
        if (!in) throw std::invalid_argument("cannot open polynomial file: " + opts.poly_file);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return lemni::parse_polynomial(text);
    }
    throw std::invalid_argument("a polynomial is required (--poly or --poly-file)");
}

lemni::MethodBudgets budgets_from(const CommonOpts& opts) {
    lemni::MethodBudgets b;
    b.quad.max_cells = opts.budget;
    b.quad.target_rel_err = 5e-4;
    b.crofton = lemni::SamplerSpec::parse(opts.sampler);
    return b;
}

void write_report(const CommonOpts& opts, const ordered_json& doc) {
    if (opts.out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    std::ofstream out(opts.out_path);
    if (!out) throw std::runtime_error("cannot write report: " + opts.out_path);
    out << doc.dump(2) << "\n";
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool wants_poly) {
    if (wants_poly) {
        cmd->add_option("--poly", opts.poly_text, "polynomial as 'n; re,im; ...; re,im'");
        cmd->add_option("--poly-file", opts.poly_file, "file containing the polynomial text");
    }
    cmd->add_option("--out", opts.out_path, "write the JSON report here (default: stdout)");
    cmd->add_option("--seed", opts.seed, "random seed (recorded in the report)");
    cmd->add_option("--budget", opts.budget, "work budget (quadrature cells / search evals)");
    cmd->add_option("--sampler", opts.sampler, "line sampler: grid:<nt>x<nr> or mc:<n>:<seed>");
    cmd->add_option("--threads", opts.threads, "max worker threads (0 = all cores)");
}

int run_trace(const CommonOpts& opts, const std::string& polyline_path, bool no_node_handling) {
    const Polynomial p = load_polynomial(opts);
    lemni::detail::Stopwatch watch;
    lemni::StepControl ctrl;
    ctrl.node_handling = !no_node_handling;
    const lemni::Lemniscate lem = lemni::lemniscate_length_trace(p, ctrl);

    if (!polyline_path.empty()) {
        std::ofstream out(polyline_path);
        if (!out) throw std::runtime_error("cannot write polyline: " + polyline_path);
        lemni::write_polyline_csv(lem, out);
    }

    ordered_json j;
    j["polynomial"] = lemni::format_polynomial(p);
    j["methods"] = {{"trace", {{"value", lem.total_length}, {"err", lem.length_error}}}};
    j["components"] = lem.components.size();
    j["singular"] = lem.singular;
    ordered_json pts = ordered_json::array();
    for (const auto& s : lem.singular_points) pts.push_back({s.real(), s.imag()});
    j["singular_points"] = pts;
    j["meta"] = {{"seed", opts.seed}, {"budget", opts.budget}, {"elapsed_s", watch.seconds()}};
    write_report(opts, j);
    return kExitOk;
}

int run_length(const CommonOpts& opts, const std::string& method) {
    const Polynomial p = load_polynomial(opts);
    const lemni::MethodBudgets budgets = budgets_from(opts);

    std::vector<lemni::LengthMethod> methods;
    if (method == "all") {
        methods = {lemni::LengthMethod::trace, lemni::LengthMethod::area1,
                   lemni::LengthMethod::area2, lemni::LengthMethod::crofton};
    } else if (method == "trace") {
        methods = {lemni::LengthMethod::trace};
    } else if (method == "area1") {
        methods = {lemni::LengthMethod::area1};
    } else if (method == "area2") {
        methods = {lemni::LengthMethod::area2};
    } else if (method == "crofton") {
        methods = {lemni::LengthMethod::crofton};
    } else {
        throw std::invalid_argument("unknown method: " + method);
    }

    lemni::detail::Stopwatch watch;
    ordered_json m;
    for (const auto lm : methods) {
        const auto r = lemni::measure_length(p, lm, budgets);
        m[lemni::method_name(lm)] = {{"value", r.value}, {"err", r.err}};
    }
    ordered_json j;
    j["polynomial"] = lemni::format_polynomial(p);
    j["methods"] = m;
    j["meta"] = {{"seed", opts.seed},
                 {"budget", opts.budget},
                 {"sampler", opts.sampler},
                 {"elapsed_s", watch.seconds()}};
    write_report(opts, j);
    return kExitOk;
}

int run_bounds(const CommonOpts& opts, int n, int random_count) {
    const lemni::MethodBudgets budgets = budgets_from(opts);
    std::vector<lemni::ExperimentReport> reports;

    if (!opts.poly_text.empty() || !opts.poly_file.empty()) {
        reports.push_back(lemni::bounds_report(load_polynomial(opts), budgets, opts.seed));
    } else {
        if (n < 2) throw std::invalid_argument("bounds: need --poly or --n with --random");
        if (random_count < 1) throw std::invalid_argument("bounds: --random must be >= 1");
        for (int i = 0; i < random_count; ++i) {
            lemni::RandomStream rng(opts.seed, static_cast<std::uint64_t>(i));
            std::vector<cplx> roots(static_cast<std::size_t>(n));
            for (auto& r : roots) r = rng.uniform_disk(0.5);
            reports.push_back(
                lemni::bounds_report(lemni::polynomial_from_roots(roots), budgets, opts.seed));
        }
    }

    bool all_pass = true;
    ordered_json arr = ordered_json::array();
    for (const auto& r : reports) {
        all_pass = all_pass && r.all_pass();
        arr.push_back(r.to_json());
    }
    write_report(opts, reports.size() == 1 ? arr[0] : arr);
    return all_pass ? kExitOk : kExitAssertFailure;
}

int run_perturb(const CommonOpts& opts, int n, double a, int trials, const std::string& method) {
    lemni::LengthMethod m = lemni::LengthMethod::trace;
    if (method == "area1") m = lemni::LengthMethod::area1;
    else if (method == "area2") m = lemni::LengthMethod::area2;
    else if (method == "crofton") m = lemni::LengthMethod::crofton;
    else if (method != "trace") throw std::invalid_argument("unknown method: " + method);

    const auto rep = lemni::local_max_experiment(n, a, trials, opts.seed, m, budgets_from(opts));
    write_report(opts, rep.to_json());
    return rep.all_pass() ? kExitOk : kExitAssertFailure;
}

int run_search(const CommonOpts& opts, int n) {
    const auto rep = lemni::extremal_search(n, opts.budget, opts.seed, lemni::LengthMethod::trace,
                                            budgets_from(opts));
    write_report(opts, rep.to_json());
    return rep.all_pass() ? kExitOk : kExitAssertFailure;
}

int run_crofton(const CommonOpts& opts, double window_r) {
    const Polynomial p = load_polynomial(opts);
    const auto roots = lemni::find_roots(p);
    const double R = window_r > 0.0 ? window_r : 2.0 + roots.max_abs();
    const auto spec = lemni::SamplerSpec::parse(opts.sampler);

    lemni::detail::Stopwatch watch;
    const auto [len, err] = lemni::crofton_length(lemni::modulus_count_field(p, R), R, spec);
    ordered_json j;
    j["polynomial"] = lemni::format_polynomial(p);
    j["methods"] = {{"crofton", {{"value", len}, {"err", err}}}};
    j["window_r"] = R;
    j["meta"] = {{"seed", opts.seed},
                 {"budget", opts.budget},
                 {"sampler", opts.sampler},
                 {"elapsed_s", watch.seconds()}};
    write_report(opts, j);
    return kExitOk;
}

int run_verify(const CommonOpts& opts, const std::string& suite, bool seed_given) {
    if (suite != "core") throw std::invalid_argument("unknown suite: " + suite);
    return lemni::verify::run_and_print(seed_given ? opts.seed : 2026) ? kExitOk
                                                                       : kExitAssertFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lemni: polynomial lemniscate length laboratory"};
    app.require_subcommand(1);

    CommonOpts opts;

    auto* trace = app.add_subcommand("trace", "trace the lemniscate and export a polyline");
    std::string polyline_path;
    bool no_node_handling = false;
    add_common(trace, opts, true);
    trace->add_option("--polyline", polyline_path, "write the traced polyline CSV here");
    trace->add_flag("--no-node-handling", no_node_handling,
                    "refuse to cross singular points (fails on singular curves)");

    auto* length = app.add_subcommand("length", "measure |L_p| by the selected methods");
    std::string method = "all";
    add_common(length, opts, true);
    length->add_option("--method", method, "trace|area1|area2|crofton|all");

    auto* bounds = app.add_subcommand("bounds", "check the upper bounds on |L_p|");
    int bn = 0, brandom = 1;
    add_common(bounds, opts, true);
    bounds->add_option("--n", bn, "degree for random sampling");
    bounds->add_option("--random", brandom, "number of random polynomials (roots in D_1/2)");

    auto* perturb = app.add_subcommand("perturb", "local-maximality experiment around z^n - 1");
    int pn = 3, ptrials = 200;
    double pa = 0.02;
    std::string pmethod = "trace";
    add_common(perturb, opts, false);
    perturb->add_option("--n", pn, "degree")->required();
    perturb->add_option("--a", pa, "perturbation scale (<= 0.05)");
    perturb->add_option("--trials", ptrials, "number of sampled perturbations");
    perturb->add_option("--method", pmethod, "trace|area1|area2|crofton");

    auto* search = app.add_subcommand("search", "search for the longest lemniscate");
    int sn = 2;
    add_common(search, opts, false);
    search->add_option("--n", sn, "degree (2..6)")->required();

    auto* crofton = app.add_subcommand("crofton", "Crofton line-counting length");
    double window_r = 0.0;
    add_common(crofton, opts, true);
    crofton->add_option("--window-r", window_r, "window disk radius (default 2 + max|root|)");

    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    std::string suite = "core";
    add_common(verify, opts, false);
    verify->add_option("--suite", suite, "suite name (core)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    lemni::thread_cap().store(opts.threads);

    try {
        if (trace->parsed()) return run_trace(opts, polyline_path, no_node_handling);
        if (length->parsed()) return run_length(opts, method);
        if (bounds->parsed()) return run_bounds(opts, bn, brandom);
        if (perturb->parsed()) return run_perturb(opts, pn, pa, ptrials, pmethod);
        if (search->parsed()) return run_search(opts, sn);
        if (crofton->parsed()) return run_crofton(opts, window_r);
        if (verify->parsed()) return run_verify(opts, suite, verify->count("--seed") > 0);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const lemni::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        if (!opts.out_path.empty()) {
            std::ofstream out(opts.out_path);
            ordered_json j;
            j["error"] = e.what();
            out << j.dump(2) << "\n";
        }
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
