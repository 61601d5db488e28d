// momray command line driver.
//
// Every run writes <out>/manifest.json (config echo, library versions, timings).
// Reports written next to it carry no timings, so they are byte-identical for a
// fixed config, seed and thread count.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fftw3.h>
#include <gmp.h>
#include <json.hpp>

#include "momray/coeffs.hpp"
#include "momray/identities.hpp"
#include "momray/inversion.hpp"
#include "momray/kernel.hpp"
#include "momray/raytransform.hpp"

#ifndef MOMRAY_VERSION
#define MOMRAY_VERSION "dev"
#endif

using namespace momray;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 2;
constexpr int kUsage = 64;
constexpr int kBadInput = 65;

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- options

struct Common {
    std::string out = "momray_out";
    std::uint64_t seed = 1;
    int threads = 1;
};

struct GridOpts {
    int n = 2;
    int N = 0;       // 0: 256 in the plane, 96 in space
    double h = 0;    // 0: 0.125 in the plane, 1/6 in space
    int pad = 2;

    GridSpec spec() const {
        GridSpec s;
        s.n = n;
        s.N = N > 0 ? N : (n == 3 ? 96 : 256);
        s.h = h > 0 ? h : (n == 3 ? 16.0 / 96 : 0.125);
        s.pad = pad;
        s.validate();
        return s;
    }
};

struct PhantomOpts {
    int m = 0;
    double scale = 1.0;
    std::string input;  // field file instead of the default phantom
};

void add_common(CLI::App* c, Common& o) {
    c->add_option("--out,-o", o.out, "output directory");
    c->add_option("--seed", o.seed, "random seed");
    c->add_option("--threads,-j", o.threads, "worker threads")->check(CLI::PositiveNumber);
}

void add_grid(CLI::App* c, GridOpts& g) {
    c->add_option("--n", g.n, "space dimension (2 or 3)");
    c->add_option("--N", g.N, "samples per axis (0: 256 for n=2, 96 for n=3)");
    c->add_option("--h", g.h, "grid spacing (0: 0.125 for n=2, 1/6 for n=3)");
    c->add_option("--pad", g.pad, "FFT padding factor");
}

void add_phantom(CLI::App* c, PhantomOpts& p) {
    c->add_option("--m", p.m, "tensor rank of the default phantom");
    c->add_option("--scale", p.scale, "scale of the default two-blob phantom");
    c->add_option("--input,-i", p.input, "field file used instead of the phantom");
}

void add_lines(CLI::App* c, LineConfig& l) {
    c->add_option("--n-theta", l.n_theta, "directions on the circle (n=2)");
    c->add_option("--n-polar", l.n_polar, "polar nodes (n=3)");
    c->add_option("--n-azimuth", l.n_azimuth, "azimuths (n=3)");
    c->add_option("--ds", l.ds, "offset spacing (0: h)");
    c->add_option("--extent", l.extent, "offset half-range (0: sqrt(n) L)");
    c->add_option("--t-step", l.t_step, "step along lines (0: h)");
    c->add_flag("--cubic", l.cubic, "Catmull-Rom sampling of the field");
    c->add_flag("--antipodal", l.antipodal, "use the negated direction set");
}

void add_inversion(CLI::App* c, InversionOptions& o) {
    c->add_option("--taper", o.taper, "erfc edge taper on the data (true/false)");
    c->add_option("--taper-width", o.taper_width, "taper width in cells");
    c->add_option("--taper-offset", o.taper_offset, "taper offset in widths");
    c->add_option("--roi", o.roi, "error box |x_i| <= roi L");
}

GridTensorField phantom(const PhantomOpts& p, const GridOpts& g) {
    if (!p.input.empty()) return read_field(p.input);
    GridSpec s = g.spec();
    return gaussian_phantom(s, p.m, default_blobs(s.n, p.m, p.scale));
}

std::vector<int> int_list(const std::string& s) {
    std::vector<int> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        int x = 0;
        try {
            x = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw usage_error("not an integer list: " + s);
        v.push_back(x);
    }
    if (v.empty()) throw usage_error("empty integer list");
    return v;
}

// ---------------------------------------------------------------- run state

struct Run {
    std::string command;
    fs::path out;
    json manifest;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    std::vector<std::string> files;

    void begin(const std::string& cmd, const Common& c) {
        command = cmd;
        out = c.out;
        fs::create_directories(out);
    }
    std::string path(const std::string& name) {
        files.push_back(name);
        return (out / name).string();
    }
    void time(const std::string& what, std::chrono::steady_clock::time_point since) {
        manifest["timings"][what] = std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
    }
    void write_json(const std::string& name, const json& j) {
        std::ofstream os(path(name));
        if (!os) throw std::runtime_error("cannot write " + (out / name).string());
        os << j.dump(2) << '\n';
    }
};

json versions() {
    json v;
    v["momray"] = MOMRAY_VERSION;
    v["gmp"] = gmp_version;
    v["fftw"] = std::string(fftw_version);
    v["cli11"] = CLI11_VERSION;
    v["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH);
#if defined(__clang__)
    v["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
    v["compiler"] = std::string("gcc ") + __VERSION__;
#endif
    return v;
}

// Resolved values of every option of a subcommand, for the manifest.
json echo_config(const CLI::App* sub) {
    json j;
    for (const CLI::Option* o : sub->get_options()) {
        if (o->get_lnames().empty()) continue;
        const std::string& name = o->get_lnames().front();
        if (name == "help" || name == "config") continue;
        std::string v = o->count() > 0 ? o->as<std::string>() : o->get_default_str();
        j[name] = v;
    }
    return j;
}

// ---------------------------------------------------------------- config file

// Turns a JSON object into flags placed before the real arguments, so that the
// command line wins under the take-last policy.  Top-level keys apply to every
// subcommand; an object under the subcommand's name applies to it alone.
std::vector<std::string> config_args(const std::string& path, const std::string& sub) {
    std::ifstream is(path);
    if (!is) throw usage_error("cannot open config file " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw usage_error("config file " + path + ": " + e.what());
    }
    if (!j.is_object()) throw usage_error("config file must hold a JSON object");
    std::vector<std::string> args;
    auto emit = [&](const std::string& key, const json& v) {
        std::string flag = "--" + key;
        if (v.is_boolean()) {
            args.push_back(flag + "=" + (v.get<bool>() ? "true" : "false"));
        } else if (v.is_array()) {
            std::string s;
            for (const auto& x : v) s += (s.empty() ? "" : ",") + (x.is_string() ? x.get<std::string>() : x.dump());
            args.push_back(flag + "=" + s);
        } else if (v.is_string()) {
            args.push_back(flag + "=" + v.get<std::string>());
        } else if (v.is_number()) {
            args.push_back(flag + "=" + v.dump());
        } else {
            throw usage_error("config key " + key + " has an unsupported value");
        }
    };
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!it.value().is_object()) emit(it.key(), it.value());
    if (j.contains(sub) && j[sub].is_object())
        for (auto it = j[sub].begin(); it != j[sub].end(); ++it) emit(it.key(), it.value());
    return args;
}

// ---------------------------------------------------------------- commands

struct CheckOpts {
    std::string suite = "all";
    int max_m = -1;  // -1: 3 for identities, 10 for beta
    int max_m_ladder = 4;
    std::string dims = "2,3,4";
    std::string seeds = "1,2,3,4,5";
};

int cmd_check(const CheckOpts& o, Run& run) {
    auto t = std::chrono::steady_clock::now();
    json rep;
    bool ok = true;
    if (o.suite == "beta") {
        int mm = o.max_m < 0 ? 10 : o.max_m;
        if (mm > 60) throw invalid_input("beta check limited to m <= 60");
        auto c = compare_beta(mm);
        ok = c.mismatches == 0;
        rep = {{"suite", "beta"},           {"max_m", mm},
               {"comparisons", c.cells},    {"mismatches", c.mismatches},
               {"unmasked_closed_form_mismatches", c.raw_mismatches},
               {"first_failures", c.first_failures}, {"pass", ok}};
        std::printf("beta: %ld comparisons, %ld mismatches\n", c.cells, c.mismatches);
    } else {
        if (o.suite != "all" && !is_identity(o.suite)) throw usage_error("unknown suite: " + o.suite);
        SuiteOptions so;
        so.max_m = o.max_m < 0 ? 3 : o.max_m;
        so.max_m_ladder = std::max(so.max_m, o.max_m_ladder);
        so.dims = int_list(o.dims);
        so.seeds.clear();
        for (int s : int_list(o.seeds)) so.seeds.push_back(static_cast<std::uint64_t>(s));
        for (int n : so.dims)
            if (n < 2 || n > 6) throw invalid_input("identity checks support 2 <= n <= 6");
        auto reps = run_identity_suite(o.suite, so);
        json items = json::array();
        long fails = 0;
        for (const auto& r : reps) {
            json j = to_json(r);
            j.erase("elapsed_ms");
            items.push_back(j);
            if (!r.pass) {
                ++fails;
                std::printf("FAIL %s %s\n", r.identity.c_str(), r.params.dump().c_str());
            }
        }
        ok = fails == 0;
        rep = {{"suite", o.suite}, {"checks", reps.size()}, {"failures", fails}, {"pass", ok}, {"results", items}};
        std::printf("%s: %zu checks, %ld failed\n", o.suite.c_str(), reps.size(), fails);
    }
    run.time("check", t);
    run.write_json("check.json", rep);
    return ok ? kOk : kCheckFailed;
}

struct CoeffsOpts {
    int beta = -1;
    int factors = -1;
    int n = 2;
};

int cmd_coeffs(const CoeffsOpts& o, Run& run) {
    if (o.beta < 0 && o.factors < 0) throw usage_error("coeffs needs --beta M or --factors M");
    if (o.beta >= 0) {
        std::string csv = beta_csv(o.beta);
        std::ofstream(run.path("beta.csv")) << csv;
        std::fputs(csv.c_str(), stdout);
    }
    if (o.factors >= 0) {
        if (o.n < 2) throw invalid_input("factors need n >= 2");
        std::ostringstream os;
        os.precision(17);
        os << "m,k,n,c,f,h\n";
        for (int m = 0; m <= o.factors; ++m)
            for (int k = 0; k <= m; ++k)
                os << m << ',' << k << ',' << o.n << ',' << c_coeff(m, o.n, k) << ',' << f_factor(m, k, o.n) << ','
                   << h_factor(m, k, o.n).get_str() << '\n';
        std::ofstream(run.path("factors.csv")) << os.str();
        std::fputs(os.str().c_str(), stdout);
    }
    return kOk;
}

struct ForwardOpts {
    int k = 0;
};

int cmd_forward(const PhantomOpts& p, const GridOpts& g, const LineConfig& lc, const ForwardOpts& o,
                const Common& c, Run& run) {
    auto f = phantom(p, g);
    auto L = make_lines(f.spec(), lc);
    auto t = std::chrono::steady_clock::now();
    auto sino = forward(f, L, o.k, c.threads);
    run.time("forward", t);
    write_sinogram(sino, run.path("sinogram.bin"));
    json rep = {{"m", sino.m},
                {"k", sino.k},
                {"directions", L.ndirs()},
                {"lines_per_direction", L.lines_per_dir()},
                {"boundary_leak", sino.boundary_leak},
                {"truncated", sino.boundary_leak > 1e-6}};
    run.write_json("forward.json", rep);
    if (sino.boundary_leak > 1e-6) std::printf("warning: field is not small on the box edge, lines are truncated\n");
    std::printf("%zu lines written\n", sino.v.size());
    return kOk;
}

struct AdjointOpts {
    std::string input;
    int m = 0;
    int k = 0;
    double width = 1.5;
};

int cmd_adjoint(const AdjointOpts& o, const GridOpts& g, const LineConfig& lc, const Common& c, Run& run) {
    GridSpec s = g.spec();
    Sinogram phi;
    if (!o.input.empty()) {
        phi = read_sinogram(o.input);
        if (phi.lines.n != s.n) throw invalid_input("sinogram dimension differs from the grid");
    } else {
        phi = smooth_sinogram(make_lines(s, lc), o.m, o.k, o.width, c.seed);
        write_sinogram(phi, run.path("phi.bin"));
    }
    auto t = std::chrono::steady_clock::now();
    double clipped = 0;
    auto u = adjoint(phi, s, c.threads, &clipped);
    run.time("adjoint", t);
    write_field(u, run.path("adjoint.bin"));
    write_slice_csv(u, run.path("adjoint_slice.csv"));
    run.write_json("adjoint.json", {{"m", phi.m}, {"k", phi.k}, {"clipped_fraction", clipped}});
    std::printf("clipped fraction %.3e\n", clipped);
    return kOk;
}

struct NormalOpts {
    std::string route = "kernel";
    int k = -1;  // -1: all k <= m
};

int cmd_normal(const PhantomOpts& p, const GridOpts& g, const LineConfig& lc, const NormalOpts& o, const Common& c,
               Run& run) {
    if (o.route != "kernel" && o.route != "compose" && o.route != "both")
        throw usage_error("route must be kernel, compose or both");
    auto f = phantom(p, g);
    int m = f.rank();
    if (o.k > m) throw invalid_input("k exceeds the rank");
    LineSet L;
    if (o.route != "kernel") L = make_lines(f.spec(), lc);
    json rep = {{"m", m}, {"route", o.route}, {"results", json::array()}};
    for (int k = (o.k < 0 ? 0 : o.k); k <= (o.k < 0 ? m : o.k); ++k) {
        json r = {{"k", k}};
        GridTensorField a, b;
        if (o.route != "compose") {
            auto t = std::chrono::steady_clock::now();
            a = normal_kernel(f, k);
            run.time("kernel_k" + std::to_string(k), t);
            write_field(a, run.path("normal_kernel_k" + std::to_string(k) + ".bin"));
            write_profile_csv(a, run.path("normal_kernel_k" + std::to_string(k) + "_profile.csv"));
        }
        if (o.route != "kernel") {
            auto t = std::chrono::steady_clock::now();
            b = normal_compose(f, L, k, c.threads);
            run.time("compose_k" + std::to_string(k), t);
            write_field(b, run.path("normal_compose_k" + std::to_string(k) + ".bin"));
            write_profile_csv(b, run.path("normal_compose_k" + std::to_string(k) + "_profile.csv"));
        }
        if (o.route == "both") {
            double d = rel_error(b, a);
            r["discrepancy"] = d;
            std::printf("k=%d compose vs kernel %.3e\n", k, d);
        }
        rep["results"].push_back(r);
    }
    run.write_json("normal.json", rep);
    return kOk;
}

struct SliceOpts {
    int k = 0;
    int dirs = 8;
    double tol = 1e-2;
};

int cmd_slicecheck(const PhantomOpts& p, const GridOpts& g, const LineConfig& lc, const SliceOpts& o, Run& run) {
    auto f = phantom(p, g);
    auto L = make_lines(f.spec(), lc);
    auto t = std::chrono::steady_clock::now();
    auto r = slice_residual(f, o.k, L, o.dirs);
    run.time("slicecheck", t);
    bool ok = r.residual <= o.tol;
    run.write_json("slicecheck.json", {{"m", f.rank()},
                                        {"k", o.k},
                                        {"residual", r.residual},
                                        {"per_direction", r.per_direction},
                                        {"tolerance", o.tol},
                                        {"pass", ok}});
    std::printf("slice residual %.3e (tolerance %.1e)\n", r.residual, o.tol);
    return ok ? kOk : kCheckFailed;
}

struct RoundOpts {
    std::string source = "kernel";
    double budget = 0;  // 0: 5% for m <= 1, 7% for m = 2, 8% in space
    bool diagnostics = true;
};

void write_outputs(Run& run, const GridTensorField& recon, const GridTensorField* truth) {
    write_field(recon, run.path("recon.bin"));
    write_slice_csv(recon, run.path("recon_slice.csv"));
    write_profile_csv(recon, run.path("recon_profile.csv"));
    if (truth) {
        write_field(*truth, run.path("truth.bin"));
        auto err = recon - *truth;
        write_slice_csv(err, run.path("error_slice.csv"));
        write_profile_csv(err, run.path("error_profile.csv"));
    }
}

int cmd_roundtrip(const PhantomOpts& p, const GridOpts& g, const LineConfig& lc, const InversionOptions& io,
                  const RoundOpts& o, const Common& c, Run& run) {
    if (o.source != "kernel" && o.source != "compose") throw usage_error("source must be kernel or compose");
    auto f = phantom(p, g);
    int m = f.rank();
    if (m > 2) throw invalid_input("round trips cover m <= 2");
    auto t = std::chrono::steady_clock::now();
    auto rt = round_trip(f, o.source, io, lc, c.threads, o.diagnostics);
    run.time("roundtrip", t);
    double budget = o.budget > 0 ? o.budget : (f.n() == 3 ? 0.08 : (m == 2 ? 0.07 : 0.05));
    for (int k = 0; k <= m; ++k) write_field(rt.data[k], run.path("data_k" + std::to_string(k) + ".bin"));
    write_outputs(run, rt.recon, &rt.truth);
    json rep = rt.report.to_json();
    run.manifest["timings"]["inversion"] = rep["runtime_s"];
    rep.erase("runtime_s");
    rep["source"] = o.source;
    rep["budget"] = budget;
    bool ok = rt.report.rel_error <= budget;
    rep["pass"] = ok;
    if (m == 0) rep["fitted_inversion_constant"] = measured_inversion_constant(f, rt.data[0]);
    run.write_json("report.json", rep);
    std::printf("interior relative error %.2f%% (budget %.1f%%)\n", 100 * rt.report.rel_error, 100 * budget);
    return ok ? kOk : kCheckFailed;
}

struct InvertOpts {
    std::string data;  // comma separated field files N^0 .. N^m
    std::string truth;
};

int cmd_invert(const InvertOpts& o, const InversionOptions& io, Run& run) {
    std::vector<GridTensorField> d;
    std::stringstream ss(o.data);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) d.push_back(read_field(item));
    if (d.empty()) throw usage_error("invert needs --data N0.bin,N1.bin,...");
    auto t = std::chrono::steady_clock::now();
    ReconReport rep;
    auto u = invert_full(d, io, &rep);
    run.time("invert", t);
    int m = rep.m;
    for (int k = 0; k < m; ++k) {
        rep.consistency.push_back(consistency_residual(d[k], m, k, io));
        rep.consistency_F.push_back(consistency_residual_F(d[k], m, k, io));
    }
    GridTensorField truth;
    if (!o.truth.empty()) {
        truth = read_field(o.truth);
        rep.rel_error = rel_error(u, truth, io.roi);
    }
    write_outputs(run, u, o.truth.empty() ? nullptr : &truth);
    json j = rep.to_json();
    j.erase("runtime_s");
    run.write_json("report.json", j);
    if (rep.rel_error >= 0) std::printf("interior relative error %.2f%%\n", 100 * rep.rel_error);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);

    // pull --config out and splice its contents in front of the real flags
    std::string config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
            args.erase(args.begin() + i);
            break;
        }
    }

    CLI::App app{"momray: momentum ray transforms of symmetric tensor fields"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
    app.set_help_flag("--help", "print help and exit");
    app.require_subcommand(1);
    app.set_version_flag("--version", MOMRAY_VERSION);
    app.footer("Every subcommand also takes --config FILE (JSON; flags given on the command line win).");

    Common common;
    GridOpts grid;
    PhantomOpts ph;
    LineConfig lines;
    InversionOptions inv;

    CheckOpts chk;
    auto* c_check = app.add_subcommand("check", "exact identity suites and the beta cross-check");
    c_check->add_option("--suite", chk.suite, "all, beta, or one identity name");
    c_check->add_option("--max-m", chk.max_m, "largest rank (default 3, or 10 for beta)");
    c_check->add_option("--max-m-ladder", chk.max_m_ladder, "largest rank for the A-field ladder identities");
    c_check->add_option("--dims", chk.dims, "comma separated dimensions");
    c_check->add_option("--seeds", chk.seeds, "comma separated seeds");

    CoeffsOpts co;
    auto* c_coeffs = app.add_subcommand("coeffs", "coefficient tables as CSV");
    c_coeffs->add_option("--beta", co.beta, "beta table up to this m");
    c_coeffs->add_option("--factors", co.factors, "c, f and h factors up to this m");
    c_coeffs->add_option("--n", co.n, "dimension for --factors");

    ForwardOpts fo;
    auto* c_forward = app.add_subcommand("forward", "momentum ray transform of a field");
    add_phantom(c_forward, ph);
    add_grid(c_forward, grid);
    add_lines(c_forward, lines);
    c_forward->add_option("--k", fo.k, "moment order");

    AdjointOpts ao;
    auto* c_adjoint = app.add_subcommand("adjoint", "adjoint transform of a sinogram");
    c_adjoint->add_option("--input,-i", ao.input, "sinogram file (default: smooth random sinogram)");
    c_adjoint->add_option("--m", ao.m, "rank for the generated sinogram");
    c_adjoint->add_option("--k", ao.k, "moment order for the generated sinogram");
    c_adjoint->add_option("--width", ao.width, "bump width of the generated sinogram");
    add_grid(c_adjoint, grid);
    add_lines(c_adjoint, lines);

    NormalOpts no;
    auto* c_normal = app.add_subcommand("normal", "normal operators by kernel and/or line quadrature");
    add_phantom(c_normal, ph);
    add_grid(c_normal, grid);
    add_lines(c_normal, lines);
    c_normal->add_option("--route", no.route, "kernel, compose or both");
    c_normal->add_option("--k", no.k, "moment order (default: all k <= m)");

    SliceOpts so;
    auto* c_slice = app.add_subcommand("slicecheck", "Fourier slice residual (n = 2)");
    add_phantom(c_slice, ph);
    add_grid(c_slice, grid);
    add_lines(c_slice, lines);
    c_slice->add_option("--k", so.k, "moment order");
    c_slice->add_option("--dirs", so.dirs, "directions sampled");
    c_slice->add_option("--tol", so.tol, "pass threshold");

    RoundOpts ro;
    auto* c_round = app.add_subcommand("roundtrip", "phantom, normal data, inversion, report");
    add_phantom(c_round, ph);
    add_grid(c_round, grid);
    add_lines(c_round, lines);
    add_inversion(c_round, inv);
    c_round->add_option("--source", ro.source, "kernel or compose");
    c_round->add_option("--budget", ro.budget, "interior error budget (0: 5%, 7% for m=2, 8% for n=3)");
    c_round->add_option("--diagnostics", ro.diagnostics, "Fourier-side residuals in the report (true/false)");

    InvertOpts io;
    auto* c_invert = app.add_subcommand("invert", "invert a stack of normal-operator data files");
    c_invert->add_option("--data", io.data, "comma separated files N^0,...,N^m")->required();
    c_invert->add_option("--truth", io.truth, "ground truth field for the error report");
    add_inversion(c_invert, inv);

    for (auto* sub : app.get_subcommands({})) add_common(sub, common);

    int code = kOk;
    Run run;
    CLI::App* used = nullptr;
    std::string err;
    try {
        if (!config.empty()) {
            if (args.empty()) throw usage_error("--config needs a subcommand");
            auto extra = config_args(config, args[0]);
            args.insert(args.begin() + 1, extra.begin(), extra.end());
        }
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
        used = app.get_subcommands().front();
        run.begin(used->get_name(), common);
        if (used == c_check) code = cmd_check(chk, run);
        else if (used == c_coeffs) code = cmd_coeffs(co, run);
        else if (used == c_forward) code = cmd_forward(ph, grid, lines, fo, common, run);
        else if (used == c_adjoint) code = cmd_adjoint(ao, grid, lines, common, run);
        else if (used == c_normal) code = cmd_normal(ph, grid, lines, no, common, run);
        else if (used == c_slice) code = cmd_slicecheck(ph, grid, lines, so, run);
        else if (used == c_round) code = cmd_roundtrip(ph, grid, lines, inv, ro, common, run);
        else if (used == c_invert) code = cmd_invert(io, inv, run);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    } catch (const usage_error& e) {
        std::fprintf(stderr, "momray: %s\n", e.what());
        code = kUsage;
        err = e.what();
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "momray: %s\n", e.what());
        code = kBadInput;
        err = e.what();
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "momray: %s\n", e.what());
        code = kBadInput;
        err = e.what();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "momray: %s\n", e.what());
        code = 1;
        err = e.what();
    }

    if (used && !run.out.empty()) {
        json& mf = run.manifest;
        mf["command"] = run.command;
        mf["arguments"] = args;
        if (!config.empty()) mf["config_file"] = config;
        mf["config"] = echo_config(used);
        mf["versions"] = versions();
        mf["outputs"] = run.files;
        mf["exit_code"] = code;
        if (!err.empty()) mf["error"] = err;
        mf["timings"]["total_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - run.t0).count();
        try {
            std::ofstream os(run.out / "manifest.json");
            os << mf.dump(2) << '\n';
        } catch (const std::exception&) {
        }
    }
    return code;
}
