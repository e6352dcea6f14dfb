// ergo: command-line front end for the workbench.
//
// Exit codes: 0 ok, 2 argument error, 3 resource cap, 4 a checked property failed
// (repro-all, mixing-check, spectral --verify).

#include "ergo/averages.hpp"
#include "ergo/config.hpp"
#include "ergo/mixing.hpp"
#include "ergo/pet.hpp"
#include "ergo/polyparse.hpp"
#include "ergo/recurrence.hpp"
#include "ergo/repro.hpp"
#include "ergo/szemeredi.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <thread>

#ifndef ERGO_PET_CORPUS
#define ERGO_PET_CORPUS "tests/data/pet_corpus.txt"
#endif

namespace fs = std::filesystem;
using namespace ergo;

namespace {

enum Exit { kOk = 0, kArgument = 2, kResource = 3, kVerdict = 4 };

struct verdict_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Options that can also be set from a --config JSON object.

using Setter = std::function<void(const json&)>;

struct Registry {
    std::map<const CLI::App*, std::map<std::string, Setter>> setters;
    bool format_explicit = false;

    template <class T> CLI::Option* add(CLI::App* app, const std::string& name, T& var, const std::string& desc) {
        setters[app][name] = [&var, name](const json& j) { assign(var, j, name); };
        return app->add_option("--" + name, var, desc);
    }
    CLI::Option* flag(CLI::App* app, const std::string& name, bool& var, const std::string& desc) {
        setters[app][name] = [&var, name](const json& j) {
            if (!j.is_boolean()) throw argument_error("config: '" + name + "' must be true or false");
            var = j.get<bool>();
        };
        return app->add_flag("--" + name, var, desc);
    }

    template <class T> static void assign(T& var, const json& j, const std::string& name) {
        if constexpr (std::is_same_v<T, std::string>) {
            // Descriptor options accept nested JSON directly.
            var = j.is_string() ? j.get<std::string>() : j.dump();
        } else {
            if (j.is_number_integer() || j.is_number_unsigned()) {
                if constexpr (std::is_unsigned_v<T>)
                    if (j.is_number_integer() && j.get<std::int64_t>() < 0)
                        throw argument_error("config: '" + name + "' must be nonnegative");
                var = j.get<T>();
            } else if (j.is_string()) {
                try {
                    std::size_t pos = 0;
                    auto v = std::stoll(j.get<std::string>(), &pos);
                    if (pos != j.get<std::string>().size()) throw std::invalid_argument("trailing characters");
                    var = static_cast<T>(v);
                } catch (const std::logic_error&) {
                    throw argument_error("config: '" + name + "' must be an integer");
                }
            } else {
                throw argument_error("config: '" + name + "' must be an integer");
            }
        }
    }

    void apply(const json& cfg, const CLI::App* global, const CLI::App* sub) {
        if (!cfg.is_object()) throw argument_error("config must be a JSON object");
        for (auto it = cfg.begin(); it != cfg.end(); ++it) {
            std::string key = it.key();
            std::replace(key.begin(), key.end(), '_', '-');
            if (key == "command") {
                if (!it->is_string() || it->get<std::string>() != sub->get_name())
                    throw argument_error("config is for command " + it->dump() + ", not '" + sub->get_name() + "'");
                continue;
            }
            auto& local = setters[sub];
            auto& top = setters[global];
            if (local.count(key)) local[key](*it);
            else if (top.count(key)) top[key](*it);
            else throw argument_error("config: unknown field '" + it.key() + "' for command '" + sub->get_name() + "'");
            if (key == "format") format_explicit = true;
        }
    }
};

struct Globals {
    std::uint64_t seed = 1;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string out_dir = ".";
    std::string format = "json";
    std::string config;
};

// ---------------------------------------------------------------------------
// Output paths. --out may carry an extension; without an explicit --format the
// extension picks the format.

struct Outputs {
    std::optional<fs::path> json_path, csv_path;
};

Outputs plan_outputs(const Globals& g, bool format_explicit, const std::string& out, const std::string& stem) {
    fs::path base = out.empty() ? fs::path(stem) : fs::path(out);
    std::string fmt = g.format;
    std::string ext = base.extension().string();
    if (ext == ".json" || ext == ".csv") {
        if (!format_explicit) fmt = ext.substr(1);
        base.replace_extension();
    }
    if (fmt != "json" && fmt != "csv" && fmt != "both") throw argument_error("--format must be json, csv, or both");
    if (base.is_relative()) base = fs::path(g.out_dir) / base;
    if (base.has_parent_path()) fs::create_directories(base.parent_path());
    Outputs o;
    if (fmt != "csv") o.json_path = fs::path(base.string() + ".json");
    if (fmt != "json") o.csv_path = fs::path(base.string() + ".csv");
    return o;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    if (!f) throw argument_error("cannot write " + p.string());
    f << text;
    std::cout << "wrote " << p.string() << "\n";
}

void emit(const Outputs& o, const json& report, const std::string& csv) {
    if (o.json_path) write_file(*o.json_path, report.dump(2) + "\n");
    if (o.csv_path) write_file(*o.csv_path, csv);
}

std::string csv_rational(const Rational& q) { return q.get_num().get_str() + "," + q.get_den().get_str(); }

std::optional<Rational> parse_eps(const std::string& text) {
    if (text == "auto") return std::nullopt;
    return parse_rational(text);
}

json syndetic_json(const SyndeticReport& r) {
    json j{{"eps", rational_to_json(r.eps)},
           {"eps_auto", r.eps_auto},
           {"window", {r.window_lo, r.window_hi}},
           {"members", r.members},
           {"max_gap", r.max_gap},
           {"lead_gap", r.lead_gap},
           {"trail_gap", r.trail_gap},
           {"verdict", to_string(r.verdict)}};
    j["liminf_estimate"] = r.liminf_estimate ? rational_to_json(*r.liminf_estimate) : json(nullptr);
    return j;
}

void print_syndetic(const SyndeticReport& r) {
    std::cout << "syndetic: " << to_string(r.verdict) << ", eps " << r.eps << (r.eps_auto ? " (auto)" : "") << ", "
              << r.members.size() << " members in [" << r.window_lo << ", " << r.window_hi << "], max_gap " << r.max_gap << "\n";
}

json parse_descriptor(const std::string& text, const char* what) {
    if (text.empty()) throw argument_error(std::string("--") + what + " is required");
    return load_json(text);
}

// ---------------------------------------------------------------------------
// avg-sweep

struct AvgArgs {
    std::string system, spec, observables, set, Ns = "16,64,256,1024", method = "exact", out;
    bool centered = false, claim_distinct = false;
    std::size_t samples = 400;
    std::int64_t max_N = 4096;
};

template <class Sys>
int run_avg(const Globals& g, bool fmt, const AvgArgs& a, const Sys& sys, const json& sys_json) {
    std::vector<Observable<Sys>> f;
    if (!a.observables.empty()) {
        auto arr = load_json(a.observables);
        if (!arr.is_array()) throw argument_error("--observables must be a JSON array");
        for (const auto& o : arr) f.push_back(observable_from_json(sys, o));
    }
    auto spec_text = a.spec;
    auto p = spec_text.find_first_not_of(" \t");
    if (p == std::string::npos) throw argument_error("--spec is required");
    bool linear = spec_text[p] == '(' || spec_text[p] == '[';
    std::size_t terms = 0;
    PQList pq;
    std::vector<IntPoly2> polys;
    if (linear) {
        pq = parse_pq_list(spec_text);
        terms = pq.size();
    } else {
        std::stringstream ss(spec_text);
        for (std::string t; std::getline(ss, t, ';');) polys.push_back(parse_intpoly(t));
        terms = polys.size();
    }
    if (f.empty()) {
        if (a.set.empty()) throw argument_error("give --observables (one per term) or --set (used for every term)");
        f.assign(terms, Observable<Sys>::indicator(set_from_json(sys, load_json(a.set))));
    }
    ArraySpec<Sys> spec = [&] {
        if (linear) return linear_spec(sys, f, pq, a.centered, a.claim_distinct);
        if (a.claim_distinct && !is_essentially_distinct(polys))
            throw argument_error("distinctness hypothesis violated: two exponents differ by a function of N only");
        return polynomial_spec(sys, f, polys, a.centered);
    }();
    SweepOptions so;
    if (a.method != "exact" && a.method != "mc") throw argument_error("--method must be exact or mc");
    so.montecarlo = a.method == "mc";
    so.samples = a.samples;
    so.seed = g.seed;
    so.avg = {g.jobs, a.max_N};
    auto rep = convergence_sweep(spec, parse_int_list(a.Ns), so);

    json rows = json::array();
    std::string csv = "N,value,exact_num,exact_den,standard_error\n";
    for (const auto& r : rep.rows) {
        rows.push_back({{"N", r.N},
                        {"distance_sq", r.exact ? rational_to_json(*r.exact) : json(nullptr)},
                        {"value", r.value},
                        {"method", r.method},
                        {"standard_error", r.standard_error}});
        csv += std::to_string(r.N) + "," + json(r.value).dump() + "," + (r.exact ? csv_rational(*r.exact) : ",") + "," +
               json(r.standard_error).dump() + "\n";
        std::cout << "N=" << r.N << "  ||A_N - c||^2 = " << (r.exact ? r.exact->get_str() : json(r.value).dump())
                  << (r.method == "montecarlo" ? " +- " + json(r.standard_error).dump() : "") << "\n";
    }
    auto sub = [](const SubSeries& s) { return json{{"count", s.count}, {"last", s.last}, {"min", s.min}, {"max", s.max}}; };
    json report{{"command", "avg-sweep"}, {"system", sys_json},   {"spec", spec.description},
                {"target", rational_to_json(rep.target)}, {"method", a.method}, {"rows", rows},
                {"even", sub(rep.even)},  {"odd", sub(rep.odd)},  {"verdict", to_string(rep.verdict)},
                {"tolerance", rep.tolerance}, {"centered", a.centered}};
    if (so.montecarlo) report["seed"] = g.seed;
    std::cout << "target " << rep.target << ", verdict " << to_string(rep.verdict) << "\n";
    emit(plan_outputs(g, fmt, a.out, "avg_sweep"), report, csv);
    return kOk;
}

// ---------------------------------------------------------------------------
// recurrence

struct RecArgs {
    std::string system, set, pq, out;
    std::int64_t Nmax = 256, max_N = 100000;
};

template <class Sys>
int run_recurrence(const Globals& g, bool fmt, const RecArgs& a, const Sys& sys, const json& sys_json) {
    auto A = set_from_json(sys, parse_descriptor(a.set, "set"));
    if (a.pq.empty()) throw argument_error("--pq is required");
    auto spec = recurrence_spec(sys, A, parse_pq_list(a.pq));
    auto s = recurrence_series(spec, a.Nmax, {g.jobs, a.max_N});
    json rows = json::array();
    std::string csv = "N,S_num,S_den\n";
    for (std::size_t i = 0; i < s.N.size(); ++i) {
        rows.push_back({{"N", s.N[i]}, {"S", rational_to_json(s.S[i])}});
        csv += std::to_string(s.N[i]) + "," + csv_rational(s.S[i]) + "\n";
    }
    json report{{"command", "recurrence"}, {"system", sys_json}, {"spec", s.description}, {"mu_A", rational_to_json(s.mu_A)}, {"rows", rows}};
    std::cout << s.description << ": mu(A) = " << s.mu_A << ", S(" << s.N.back() << ") = " << s.S.back() << "\n";
    emit(plan_outputs(g, fmt, a.out, "recurrence"), report, csv);
    return kOk;
}

// ---------------------------------------------------------------------------
// syndetic

std::pair<std::vector<std::int64_t>, std::vector<Rational>> read_series(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw argument_error("cannot read series '" + path + "'");
    std::vector<std::int64_t> Ns;
    std::vector<Rational> vals;
    if (fs::path(path).extension() == ".json") {
        json j;
        try {
            j = json::parse(f);
        } catch (const json::exception& e) {
            throw argument_error(std::string("malformed JSON in ") + path + ": " + e.what());
        }
        if (!j.contains("rows")) throw argument_error(path + " has no 'rows'");
        for (const auto& r : j["rows"]) {
            Ns.push_back(r.at("N").get<std::int64_t>());
            vals.push_back(rational_from_json(r.contains("S") ? r.at("S") : r.at("ratio")));
        }
        return {Ns, vals};
    }
    std::string line;
    if (!std::getline(f, line)) throw argument_error(path + " is empty");
    std::stringstream hs(line);
    std::vector<std::string> cols;
    for (std::string c; std::getline(hs, c, ',');) cols.push_back(c);
    // Accepts N,S_num,S_den (recurrence) or N,count,ratio_num,ratio_den (pattern-search).
    std::size_t num = cols.size() >= 3 && cols[1] == "S_num" ? 1 : cols.size() >= 4 && cols[2] == "ratio_num" ? 2 : 0;
    if (!num || cols[0] != "N") throw argument_error(path + ": expected header N,S_num,S_den");
    for (std::size_t lineno = 2; std::getline(f, line); ++lineno) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::vector<std::string> v;
        for (std::string c; std::getline(ls, c, ',');) v.push_back(c);
        if (v.size() < num + 2) throw argument_error(path + ":" + std::to_string(lineno) + ": too few columns");
        try {
            Ns.push_back(std::stoll(v[0]));
            vals.push_back(make_rational(BigInt(v[num]), BigInt(v[num + 1])));
        } catch (const std::invalid_argument&) {
            throw argument_error(path + ":" + std::to_string(lineno) + ": bad number");
        }
    }
    return {Ns, vals};
}

// ---------------------------------------------------------------------------
// pet-reduce

std::vector<pet::PExpr> pet_system_from_text(const std::string& text) {
    auto p = text.find_first_not_of(" \t\r\n");
    if (p == std::string::npos) throw argument_error("--system is required");
    if (text[p] != '{' && !fs::exists(text)) return pet::parse_system(text);
    json j = load_json(text);
    require_keys(j, {"generators", "elements"}, "pet system");
    auto k = json_get<std::size_t>(j, "generators", "pet system");
    if (k < 1) throw argument_error("pet system: generators must be >= 1");
    std::vector<pet::PExpr> sys;
    for (const auto& el : j.at("elements")) {
        if (!el.is_array() || el.size() > k) throw argument_error("pet system: each element lists at most 'generators' exponents");
        std::vector<IntPoly2> g;
        for (const auto& e : el) g.push_back(parse_intpoly(e.is_string() ? e.get<std::string>() : e.dump()));
        g.resize(k);
        sys.push_back(pet::PExpr::from_n(std::move(g)));
    }
    if (sys.empty()) throw argument_error("pet system has no elements");
    return sys;
}

json exprs_json(const std::vector<pet::PExpr>& v) {
    json out = json::array();
    for (const auto& e : v) {
        json gens = json::array();
        for (const auto& p : e.n_part()) gens.push_back(p.to_string());
        out.push_back(gens);
    }
    return out;
}

// ---------------------------------------------------------------------------
// mixing

MarkovShift chain_from_text(const std::string& text) {
    json j = parse_descriptor(text, "chain");
    if (j.is_array()) return MarkovShift(detail::rational_matrix(j, "chain"));
    if (j.contains("kind")) {
        auto sys = system_from_json(j);
        if (!std::holds_alternative<MarkovShift>(sys)) throw argument_error("--chain must describe a markov-shift");
        return std::get<MarkovShift>(sys);
    }
    return detail::make_markov(j);
}

json matrix_json(const Matrix& P) {
    json out = json::array();
    for (const auto& row : P) {
        json r = json::array();
        for (const auto& x : row) r.push_back(rational_to_json(x));
        out.push_back(r);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ergo: exact experiments with nonconventional ergodic averages"};
    app.require_subcommand(1);
    app.fallthrough();
    Registry reg;
    Globals g;
    reg.add(&app, "seed", g.seed, "random seed (default 1)");
    reg.add(&app, "jobs", g.jobs, "worker threads (default: available parallelism)");
    reg.add(&app, "out-dir", g.out_dir, "directory for reports (default .)");
    auto* fmt_opt = reg.add(&app, "format", g.format, "json, csv, or both")->check(CLI::IsMember({"json", "csv", "both"}));
    app.add_option("--config", g.config, "JSON file or inline object; its fields override flags");

    // avg-sweep
    AvgArgs avg;
    auto* c_avg = app.add_subcommand("avg-sweep", "L2 distance of array averages from their limit over a sweep of N");
    reg.add(c_avg, "system", avg.system, "system descriptor (file or inline JSON)");
    reg.add(c_avg, "spec", avg.spec, "exponents: \"(p,q),...\" for p n + q N, or polynomials \"n^2; 2n+N\"");
    reg.add(c_avg, "observables", avg.observables, "JSON array of observables, one per term");
    reg.add(c_avg, "set", avg.set, "set descriptor; its indicator is used for every term");
    reg.flag(c_avg, "centered", avg.centered, "subtract the integral from each observable");
    reg.flag(c_avg, "claim-distinct", avg.claim_distinct, "enforce the distinct-exponent hypothesis");
    reg.add(c_avg, "Ns", avg.Ns, "N values, e.g. 16,64,256 or 1..64");
    reg.add(c_avg, "method", avg.method, "exact or mc");
    reg.add(c_avg, "samples", avg.samples, "Monte Carlo samples per N");
    reg.add(c_avg, "max-N", avg.max_N, "cap on N for the exact method");
    reg.add(c_avg, "out", avg.out, "report name (relative to --out-dir)");

    // recurrence
    RecArgs rec;
    auto* c_rec = app.add_subcommand("recurrence", "exact multiple-recurrence series S(N)");
    reg.add(c_rec, "system", rec.system, "system descriptor (file or inline JSON)");
    reg.add(c_rec, "set", rec.set, "set descriptor A");
    reg.add(c_rec, "pq", rec.pq, "pairs \"(p,q),...\"");
    reg.add(c_rec, "Nmax", rec.Nmax, "largest N");
    reg.add(c_rec, "max-N", rec.max_N, "cap on Nmax");
    reg.add(c_rec, "out", rec.out, "series name (relative to --out-dir)");

    // syndetic
    std::string syn_in, syn_eps = "auto", syn_out;
    auto* c_syn = app.add_subcommand("syndetic", "syndeticity of {N : S(N) >= eps} on a stored series");
    reg.add(c_syn, "in", syn_in, "series CSV (N,S_num,S_den) or JSON report");
    reg.add(c_syn, "eps", syn_eps, "threshold: a rational or auto");
    reg.add(c_syn, "out", syn_out, "report name");

    // pattern-search
    std::string pat_set, pat_window = "0..10000", pat_spec, pat_eps = "auto", pat_out;
    std::int64_t pat_Nmax = 500;
    auto* c_pat = app.add_subcommand("pattern-search", "count patterns a + p_j n + q_j N inside an integer set");
    reg.add(c_pat, "set", pat_set, "\"r mod m\", \"random delta seed [window]\", or a file of integers");
    reg.add(c_pat, "window", pat_window, "materialization window lo..hi");
    reg.add(c_pat, "spec", pat_spec, "pairs \"(p,q),...\"; (0,0) is implied");
    reg.add(c_pat, "Nmax", pat_Nmax, "largest N");
    reg.add(c_pat, "eps", pat_eps, "threshold on count/N: a rational or auto");
    reg.add(c_pat, "out", pat_out, "report name");

    // pet-reduce
    std::string pet_sys, pet_h, pet_out;
    std::size_t pet_max_elements = 2048;
    long pet_max_h = 10000;
    auto* c_pet = app.add_subcommand("pet-reduce", "PET weight-matrix descent");
    reg.add(c_pet, "system", pet_sys, "\"n^3 ; n^2\" or {\"generators\":k,\"elements\":[[...]]}");
    reg.add(c_pet, "shifts", pet_h, "explicit shift schedule, e.g. 1,1,2");
    reg.add(c_pet, "max-elements", pet_max_elements, "element cap");
    reg.add(c_pet, "max-h", pet_max_h, "largest shift tried");
    reg.add(c_pet, "out", pet_out, "report name");

    // mixing
    std::string mix_chain, mix_alpha = "1..5", mix_out;
    int mix_horizon = 1;
    auto* c_mix = app.add_subcommand("mixing", "finite-horizon alpha-mixing coefficients of a Markov chain");
    reg.add(c_mix, "chain", mix_chain, "stochastic matrix: file or inline JSON");
    reg.add(c_mix, "alpha", mix_alpha, "gaps n, e.g. n=1..10");
    reg.add(c_mix, "horizon", mix_horizon, "past/future window length minus one");
    reg.add(c_mix, "out", mix_out, "report name");

    // mixing-check
    std::string chk_chain, chk_out;
    int chk_k = 3, chk_trials = 100, chk_horizon = 1;
    std::int64_t chk_max_gap = 3;
    auto* c_chk = app.add_subcommand("mixing-check", "the multi-window inequality on random ordered events");
    reg.add(c_chk, "chain", chk_chain, "stochastic matrix: file or inline JSON");
    reg.add(c_chk, "k", chk_k, "events per trial");
    reg.add(c_chk, "trials", chk_trials, "number of random trials");
    reg.add(c_chk, "horizon", chk_horizon, "window length minus one");
    reg.add(c_chk, "max-gap", chk_max_gap, "largest gap between windows");
    reg.add(c_chk, "out", chk_out, "report name");

    // spectral
    std::string sp_eps = "1/10", sp_out;
    int sp_kmax = 2;
    bool sp_verify = false, sp_witness = false;
    std::size_t sp_samples = 1000;
    std::int64_t sp_ncap = 10'000'000;
    auto* c_sp = app.add_subcommand("spectral", "nested level sets for the weak-mixing counterexample");
    reg.add(c_sp, "eps", sp_eps, "epsilon in (0, 1/(2 pi))");
    reg.add(c_sp, "kmax", sp_kmax, "number of levels (<= 4)");
    reg.flag(c_sp, "verify", sp_verify, "sample points and check the orbit bound");
    reg.flag(c_sp, "witness", sp_witness, "exact non-convergence witness at each verified level");
    reg.add(c_sp, "samples", sp_samples, "points per level");
    reg.add(c_sp, "n-cap", sp_ncap, "largest n checked");
    reg.add(c_sp, "out", sp_out, "report name");

    // repro-all
    std::string rep_only, rep_corpus = ERGO_PET_CORPUS;
    auto* c_rep = app.add_subcommand("repro-all", "rerun every acceptance experiment and write its artifact");
    reg.add(c_rep, "only", rep_only, "comma-separated criterion numbers");
    reg.add(c_rep, "corpus", rep_corpus, "PET corpus file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kArgument;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        reg.format_explicit = fmt_opt->count() > 0;
        if (!g.config.empty()) reg.apply(load_json(g.config), &app, sub);
        if (g.jobs < 1) throw argument_error("--jobs must be >= 1");
        const bool fmt = reg.format_explicit;

        if (sub == c_avg) {
            json sj = parse_descriptor(avg.system, "system");
            return std::visit([&](const auto& sys) { return run_avg(g, fmt, avg, sys, sj); }, system_from_json(sj));
        }
        if (sub == c_rec) {
            json sj = parse_descriptor(rec.system, "system");
            return std::visit([&](const auto& sys) { return run_recurrence(g, fmt, rec, sys, sj); }, system_from_json(sj));
        }
        if (sub == c_syn) {
            if (syn_in.empty()) throw argument_error("--in is required");
            auto [Ns, vals] = read_series(syn_in);
            auto rep = detect_syndetic(Ns, vals, parse_eps(syn_eps));
            print_syndetic(rep);
            std::string csv = "N\n";
            for (auto N : rep.members) csv += std::to_string(N) + "\n";
            json report = syndetic_json(rep);
            report["command"] = "syndetic";
            report["input"] = fs::path(syn_in).filename().string();
            emit(plan_outputs(g, fmt, syn_out, "syndetic"), report, csv);
            return kOk;
        }
        if (sub == c_pat) {
            auto win = parse_int_list(pat_window);
            if (pat_window.find("..") == std::string::npos || win.size() < 2) throw argument_error("--window must be lo..hi");
            std::int64_t lo = win.front(), hi = win.back();
            if (hi - lo > 100'000'000) throw resource_error("window longer than 1e8");
            auto S = parse_integer_set(pat_set, lo, hi);
            if (pat_spec.empty()) throw argument_error("--spec is required");
            auto pq = parse_pq_list(pat_spec);
            auto series = pattern_series(S, pq, pat_Nmax, g.jobs);
            auto rep = syndetic_pattern_report(series, parse_eps(pat_eps));
            auto last = pattern_count(S, pq, pat_Nmax, 10);
            std::vector<std::int64_t> sizes;
            for (std::int64_t w = 16; w <= S.length(); w *= 4) sizes.push_back(w);
            if (sizes.empty()) sizes.push_back(S.length());
            auto dens = upper_density(S, sizes);
            json rows = json::array();
            std::string csv = "N,count,ratio_num,ratio_den\n";
            for (std::size_t i = 0; i < series.N.size(); ++i) {
                rows.push_back({{"N", series.N[i]}, {"count", series.count[i]}, {"ratio", rational_to_json(series.ratio[i])}});
                csv += std::to_string(series.N[i]) + "," + std::to_string(series.count[i]) + "," + csv_rational(series.ratio[i]) + "\n";
            }
            json wit = json::array();
            for (const auto& w : last.witnesses) wit.push_back({{"a", w.a}, {"n", w.n}});
            std::string spec_str;
            for (auto [p, q] : pattern_pairs(pq)) spec_str += (spec_str.empty() ? "" : ",") + ("(" + std::to_string(p) + "," + std::to_string(q) + ")");
            json report{{"command", "pattern-search"},
                        {"set", pat_set},
                        {"window", {lo, hi}},
                        {"members", S.count()},
                        {"spec", spec_str},
                        {"upper_density", {{"value", rational_to_json(dens.density)}, {"lo", dens.lo}, {"size", dens.size}}},
                        {"a_range_at_Nmax", {series.a_lo, series.a_hi}},
                        {"rows", rows},
                        {"witnesses_at_Nmax", wit},
                        {"syndetic", syndetic_json(rep)}};
            std::cout << "pattern " << spec_str << " in " << pat_set << ": count(" << pat_Nmax << ") = " << last.count << "\n";
            print_syndetic(rep);
            emit(plan_outputs(g, fmt, pat_out, "pattern_search"), report, csv);
            return kOk;
        }
        if (sub == c_pet) {
            auto sys = pet_system_from_text(pet_sys);
            std::vector<BigInt> hs;
            if (!pet_h.empty())
                for (auto h : parse_int_list(pet_h)) hs.emplace_back(static_cast<long>(h));
            pet::PetOptions po;
            po.max_elements = pet_max_elements;
            po.max_h = pet_max_h;
            auto trace = pet::pet_trace(sys, hs, po);
            json chain = json::array(), steps = json::array();
            std::string csv = "step,r,d,classes\n";
            for (std::size_t i = 0; i < trace.chain.size(); ++i) {
                chain.push_back(trace.chain[i].to_rows());
                for (int r = 1; r <= trace.chain[i].rows(); ++r)
                    for (int d = 1; d <= trace.chain[i].cols(); ++d)
                        if (trace.chain[i].at(r, d))
                            csv += std::to_string(i) + "," + std::to_string(r) + "," + std::to_string(d) + "," +
                                   std::to_string(trace.chain[i].at(r, d)) + "\n";
            }
            for (const auto& s : trace.steps)
                steps.push_back({{"h", s.h.get_str()},
                                 {"pivot", s.pivot},
                                 {"auxiliary", exprs_json(s.auxiliary)},
                                 {"reduced", exprs_json(s.reduced)},
                                 {"before", s.before.to_rows()},
                                 {"after", s.after.to_rows()},
                                 {"precedes", pet::precedes(s.after, s.before)}});
            json report{{"command", "pet-reduce"},     {"input", exprs_json(sys)},           {"chain", chain},
                        {"steps", steps},              {"final_system", exprs_json(trace.final_system)},
                        {"ends_at_base", trace.ends_at_base}};
            std::cout << "descent in " << trace.steps.size() << " steps to " << trace.final_system.size() << " degree-1 elements"
                      << (trace.ends_at_base ? " (base case)" : "") << "\n";
            emit(plan_outputs(g, fmt, pet_out, "pet_reduce"), report, csv);
            return kOk;
        }
        if (sub == c_mix) {
            auto chain = chain_from_text(mix_chain);
            std::string spec = mix_alpha;
            if (spec.rfind("n=", 0) == 0) spec = spec.substr(2);
            json rows = json::array();
            std::string csv = "n,alpha_num,alpha_den\n";
            for (auto n : parse_int_list(spec)) {
                auto a = alpha_coefficient(chain, n, mix_horizon);
                rows.push_back({{"n", n}, {"alpha", rational_to_json(a)}, {"value", a.get_d()}});
                csv += std::to_string(n) + "," + csv_rational(a) + "\n";
                std::cout << "alpha(" << n << ") = " << a << "\n";
            }
            json report{{"command", "mixing"}, {"matrix", matrix_json(chain.transition())}, {"horizon", mix_horizon}, {"rows", rows}};
            emit(plan_outputs(g, fmt, mix_out, "mixing"), report, csv);
            return kOk;
        }
        if (sub == c_chk) {
            auto chain = chain_from_text(chk_chain);
            if (chk_k < 1 || chk_trials < 1 || chk_horizon < 0 || chk_max_gap < 1)
                throw argument_error("need k >= 1, trials >= 1, horizon >= 0, max-gap >= 1");
            const int s = static_cast<int>(chain.transition().size());
            std::mt19937_64 rng(g.seed);
            json rows = json::array();
            std::string csv = "trial,lhs_num,lhs_den,rhs_num,rhs_den,holds\n";
            int held = 0;
            for (int t = 0; t < chk_trials; ++t) {
                std::vector<WindowEvent> G;
                std::int64_t at = 0;
                for (int i = 0; i < chk_k; ++i) {
                    auto len = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(chk_horizon + 1));
                    G.push_back(random_window_event(s, at, at + len, rng));
                    at += len + 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(chk_max_gap));
                }
                auto c = mixing_inequality_check(chain, G, chk_horizon);
                held += c.holds;
                json windows = json::array();
                for (const auto& e : G) windows.push_back({e.m, e.n});
                rows.push_back({{"trial", t}, {"windows", windows}, {"lhs", rational_to_json(c.lhs)}, {"rhs", rational_to_json(c.rhs)},
                                {"holds", c.holds}});
                csv += std::to_string(t) + "," + csv_rational(c.lhs) + "," + csv_rational(c.rhs) + "," + (c.holds ? "1" : "0") + "\n";
            }
            json report{{"command", "mixing-check"}, {"matrix", matrix_json(chain.transition())}, {"k", chk_k}, {"horizon", chk_horizon},
                        {"seed", g.seed}, {"trials", rows}, {"held", held}};
            std::cout << held << "/" << chk_trials << " trials satisfy the inequality\n";
            emit(plan_outputs(g, fmt, chk_out, "mixing_check"), report, csv);
            if (held != chk_trials) throw verdict_failure("mixing inequality failed in " + std::to_string(chk_trials - held) + " trials");
            return kOk;
        }
        if (sub == c_sp) {
            auto c = spectral_levels(parse_rational(sp_eps), sp_kmax);
            json N = json::array(), eps_k = json::array(), checks = json::array(), wits = json::array();
            std::string csv = "k,N_k,eps_k_num,eps_k_den\n";
            for (int k = 0; k <= c.depth(); ++k) {
                N.push_back(c.N[static_cast<std::size_t>(k)].get_str());
                eps_k.push_back(rational_to_json(c.eps_k[static_cast<std::size_t>(k)]));
                csv += std::to_string(k) + "," + c.N[static_cast<std::size_t>(k)].get_str() + "," + csv_rational(c.eps_k[static_cast<std::size_t>(k)]) + "\n";
                std::cout << "N_" << k << " = " << c.N[static_cast<std::size_t>(k)] << "\n";
            }
            bool ok = true;
            if (sp_verify || sp_witness) {
                for (int k = 1; k <= c.depth(); ++k) {
                    auto v = verify_spectral_bound(c, k, sp_samples, g.seed + static_cast<std::uint64_t>(k), sp_ncap);
                    ok = ok && v.holds;
                    json pts = json::array();
                    for (const auto& u : v.points) pts.push_back(rational_to_json(u));
                    checks.push_back({{"k", k}, {"samples", v.samples}, {"n_checked", v.n_checked}, {"truncated", v.truncated},
                                      {"max_deviation", rational_to_json(v.max_deviation)}, {"holds", v.holds}, {"points", pts}});
                    std::cout << "k=" << k << ": max dist(u n N_k, Z) = " << v.max_deviation << " over " << v.samples << " points, n <= "
                              << v.n_checked << (v.truncated ? " (truncated)" : "") << (v.holds ? "  ok" : "  VIOLATED") << "\n";
                    if (sp_witness && !v.points.empty()) {
                        auto w = nonconvergence_witness(c, v.points.front(), k);
                        ok = ok && w.holds;
                        wits.push_back({{"k", k}, {"N", w.N.get_str()}, {"u", rational_to_json(w.u)},
                                        {"norm_sq", rational_to_json(w.norm_sq)}, {"bound_sq", rational_to_json(w.bound_sq)}, {"holds", w.holds}});
                        std::cout << "k=" << k << ": ||A_N||^2 = " << w.norm_sq.get_d() << " >= " << w.bound_sq.get_d() << (w.holds ? "  ok" : "  VIOLATED")
                                  << "\n";
                    }
                }
            }
            json report{{"command", "spectral"}, {"eps", rational_to_json(c.eps)}, {"N", N}, {"eps_k", eps_k}};
            if (sp_verify || sp_witness) {
                report["seed"] = g.seed;
                report["checks"] = checks;
            }
            if (sp_witness) report["witnesses"] = wits;
            emit(plan_outputs(g, fmt, sp_out, "spectral"), report, csv);
            if (!ok) throw verdict_failure("spectral bound violated");
            return kOk;
        }
        if (sub == c_rep) {
            repro::ReproOptions ro;
            ro.jobs = g.jobs;
            ro.seed = g.seed;
            ro.pet_corpus = rep_corpus;
            if (!rep_only.empty())
                for (auto id : parse_int_list(rep_only)) ro.only.insert(static_cast<int>(id));
            auto base = plan_outputs(g, true, "repro_summary", "repro_summary");
            json summary = json::array();
            std::string csv = "criterion,pass,detail\n";
            int failed = 0;
            repro::run(ro, [&](const repro::CriterionResult& r) {
                std::cout << repro::format_line(r) << std::endl;
                failed += !r.pass;
                json art{{"criterion", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}, {"artifact", r.artifact}};
                char name[32];
                std::snprintf(name, sizeof name, "criterion_%02d.json", r.id);
                write_file(fs::path(g.out_dir) / name, art.dump(2) + "\n");
                summary.push_back({{"criterion", r.id}, {"pass", r.pass}, {"detail", r.detail}});
                std::string detail = r.detail;
                std::replace(detail.begin(), detail.end(), '"', '\'');
                csv += std::to_string(r.id) + "," + (r.pass ? "1" : "0") + ",\"" + detail + "\"\n";
            });
            emit(base, json{{"command", "repro-all"}, {"criteria", summary}, {"failed", failed}}, csv);
            if (failed) throw verdict_failure(std::to_string(failed) + " criteria failed");
            return kOk;
        }
        throw argument_error("unhandled subcommand");
    } catch (const argument_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kArgument;
    } catch (const unsupported_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kArgument;
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kArgument;
    } catch (const resource_error& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return kResource;
    } catch (const verdict_failure& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return kVerdict;
    } catch (const json::exception& e) {
        std::cerr << "error: bad JSON input: " << e.what() << "\n";
        return kArgument;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kArgument;
    }
}
