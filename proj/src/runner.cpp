#include "qboltz/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "qboltz/anosov.hpp"
#include "qboltz/avalanche.hpp"
#include "qboltz/coleman_hepp.hpp"
#include "qboltz/entropy.hpp"
#include "qboltz/errors.hpp"
#include "qboltz/histories.hpp"
#include "qboltz/random.hpp"
#include "qboltz/suites.hpp"

namespace qboltz::runner {

using nlohmann::json;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double second_law_tolerance = 1e-9;
constexpr double overlap_zero_tolerance = 1e-8;
constexpr double curve_agreement_tolerance = 1e-10;
constexpr double history_sum_tolerance = 1e-10;
constexpr std::size_t max_histories = 4096;

// Runs fn(i) for i in [0, count) on up to `workers` threads. Results land in
// slot i, so the output order never depends on scheduling.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t count, unsigned workers, F&& fn) {
    std::vector<T> out(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                out[i] = fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next = count;
            }
        }
    };
    const unsigned n = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < n; ++k) {
        pool.emplace_back(work);
    }
    work();
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return out;
}

class Csv {
public:
    explicit Csv(std::initializer_list<const char*> header) {
        bool first = true;
        for (const char* h : header) {
            os_ << (first ? "" : ",") << h;
            first = false;
        }
        os_ << '\n';
    }

    Csv& row() {
        fresh_ = true;
        return *this;
    }
    Csv& operator<<(double v) { return cell(format_number(v)); }
    Csv& operator<<(int v) { return cell(std::to_string(v)); }
    Csv& operator<<(std::size_t v) { return cell(std::to_string(v)); }
    Csv& operator<<(const std::string& v) { return cell(v); }
    std::string str() const { return os_.str(); }
    void end() { os_ << '\n'; }

private:
    Csv& cell(const std::string& s) {
        os_ << (fresh_ ? "" : ",") << s;
        fresh_ = false;
        return *this;
    }

    std::ostringstream os_;
    bool fresh_ = true;
};

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

json number_or_string(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

json complex_json(Complex c) {
    return json::array({c.real(), c.imag()});
}

// Typed access to the params object. Problems are collected as diagnostics;
// the returned value is then the default.
class Reader {
public:
    Reader(const json& params, std::vector<std::string>& diags, std::set<std::string> known)
        : params_(params), diags_(diags), known_(std::move(known)) {
        if (!params_.is_object()) {
            diags_.push_back("params must be an object");
        }
    }

    bool has(const std::string& key) const { return params_.is_object() && params_.contains(key) && !params_.at(key).is_null(); }
    const json& raw(const std::string& key) const { return params_.at(key); }

    void diag(const std::string& key, const std::string& what) { diags_.push_back("params." + key + ": " + what); }

    long long integer(const std::string& key, long long def) {
        if (!has(key)) {
            return def;
        }
        const json& v = raw(key);
        if (v.is_number_integer()) {
            return v.get<long long>();
        }
        if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>() && std::abs(v.get<double>()) < 1e15) {
            return static_cast<long long>(v.get<double>());
        }
        diag(key, "must be an integer");
        return def;
    }

    double real(const std::string& key, double def) {
        if (!has(key)) {
            return def;
        }
        const json& v = raw(key);
        if (v.is_number()) {
            return v.get<double>();
        }
        if (v.is_string()) {
            const std::string s = v.get<std::string>();
            if (s == "inf" || s == "infinity") {
                return inf;
            }
        }
        diag(key, "must be a number");
        return def;
    }

    Complex complex(const std::string& key, Complex def) {
        if (!has(key)) {
            return def;
        }
        const json& v = raw(key);
        if (v.is_number()) {
            return v.get<double>();
        }
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
            return {v[0].get<double>(), v[1].get<double>()};
        }
        diag(key, "must be a number or a [re, im] pair");
        return def;
    }

    std::string text(const std::string& key, const std::string& def) {
        if (!has(key)) {
            return def;
        }
        if (raw(key).is_string()) {
            return raw(key).get<std::string>();
        }
        diag(key, "must be a string");
        return def;
    }

    bool flag(const std::string& key, bool def) {
        if (!has(key)) {
            return def;
        }
        if (raw(key).is_boolean()) {
            return raw(key).get<bool>();
        }
        diag(key, "must be true or false");
        return def;
    }

    void finish() {
        if (!params_.is_object()) {
            return;
        }
        for (const auto& [k, v] : params_.items()) {
            if (!known_.contains(k)) {
                diags_.push_back("params." + k + ": unknown parameter");
            }
        }
    }

private:
    const json& params_;
    std::vector<std::string>& diags_;
    std::set<std::string> known_;
};

void library_check(std::vector<std::string>& diags, auto&& check) {
    try {
        check();
    } catch (const Error& e) {
        diags.emplace_back(e.what());
    }
}

// Normalization is checked here so the diagnostic names the invariant the
// same way for every experiment.
void check_normalization(std::vector<std::string>& diags, Complex cp, Complex cm) {
    const double norm = std::norm(cp) + std::norm(cm);
    if (std::abs(norm - 1.0) > 1e-12) {
        diags.push_back("normalization invariant |c+|^2 + |c-|^2 = 1 violated: got " + format_number(norm));
    }
}

// ---- entropy-suite ----

struct EntropySuiteParams {
    std::size_t second_law_trials = 1000;
    std::size_t lemma_trials = 500;
};

EntropySuiteParams read_entropy_suite(const json& params, std::vector<std::string>& diags) {
    Reader r(params, diags, {"second_law_trials", "lemma_trials"});
    EntropySuiteParams p;
    const long long a = r.integer("second_law_trials", 1000);
    const long long b = r.integer("lemma_trials", 500);
    if (a < 0 || a >= (1LL << 32)) {
        r.diag("second_law_trials", "must lie in [0, 2^32)");
    }
    if (b < 0 || b >= (1LL << 32)) {
        r.diag("lemma_trials", "must lie in [0, 2^32)");
    }
    p.second_law_trials = static_cast<std::size_t>(std::max(0LL, a));
    p.lemma_trials = static_cast<std::size_t>(std::max(0LL, b));
    r.finish();
    return p;
}

RunResult run_entropy_suite(const RunConfig& c, const EntropySuiteParams& p) {
    RunResult out;
    out.engines = {"dense-eigensolver"};
    const auto trials = parallel_map<suites::SecondLawTrial>(p.second_law_trials, c.workers,
                                                             [&](std::size_t i) { return suites::second_law_trial(c.seed, i); });
    Csv csv({"trial", "dim", "cells", "s_qb_initial", "s_qb_final", "gap", "witness"});
    double min_gap = inf;
    std::size_t gap_violations = 0;
    std::size_t equality_violations = 0;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const auto& t = trials[i];
        csv.row() << i << static_cast<int>(t.dim) << t.cells << t.s_qb_initial << t.s_qb_final << t.gap << t.witness;
        csv.end();
        min_gap = std::min(min_gap, t.gap);
        gap_violations += t.gap < -second_law_tolerance ? 1 : 0;
        equality_violations += (t.witness <= 1e-12 && std::abs(t.gap) > second_law_tolerance) ? 1 : 0;
    }
    out.files["second_law.csv"] = csv.str();
    if (gap_violations > 0) {
        out.violations.push_back(std::to_string(gap_violations) + " second-law trials with gap < -1e-9");
    }
    if (equality_violations > 0) {
        out.violations.push_back(std::to_string(equality_violations) + " trials with zero witness but nonzero gap");
    }

    json lemmas = json::object();
    for (const suites::Lemma lemma : suites::all_lemmas) {
        const auto slack = parallel_map<double>(p.lemma_trials, c.workers,
                                                [&](std::size_t i) { return suites::lemma_trial(lemma, c.seed, i); });
        std::size_t failures = 0;
        double min_slack = inf;
        for (const double s : slack) {
            failures += s < 0.0 ? 1 : 0;
            min_slack = std::min(min_slack, s);
        }
        const std::string name(suites::lemma_name(lemma));
        lemmas[name] = {{"trials", p.lemma_trials}, {"failures", failures}, {"min_slack", number_or_string(min_slack)}};
        if (failures > 0) {
            out.violations.push_back(std::to_string(failures) + " failures of relative-entropy property " + name);
        }
    }
    json report = {
        {"second_law",
         {{"trials", p.second_law_trials},
          {"min_gap", number_or_string(min_gap)},
          {"tolerance", second_law_tolerance},
          {"violations", gap_violations},
          {"zero_witness_nonzero_gap", equality_violations}}},
        {"lemmas", lemmas},
        {"lemma_tolerance", suites::lemma_tolerance},
    };
    out.files["lemmas.json"] = dump(report);
    return out;
}

// ---- coleman-hepp ----

struct ColemanHeppRun {
    coleman_hepp::Params p;
    int slope_from = 2;
    int slope_to = 12;
    int observable_sites = 1;
};

ColemanHeppRun read_coleman_hepp(const json& params, std::vector<std::string>& diags) {
    Reader r(params, diags, {"L", "N", "c_plus", "c_minus", "beta_B", "sign", "slope_L", "observable_sites"});
    ColemanHeppRun run;
    const std::string odd = "L must be a nonnegative integer so that N = 2L+1 is odd, as the two phase cells require";
    if (r.has("L") && r.has("N")) {
        r.diag("L", "give either L or N, not both");
    }
    if (r.has("L")) {
        const json& v = r.raw("L");
        const bool integral = v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
        if (!integral || v.get<double>() < 0) {
            r.diag("L", odd);
        } else {
            run.p.L = static_cast<int>(v.get<double>());
        }
    } else if (r.has("N")) {
        const json& v = r.raw("N");
        const bool integral = v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
        const long long n = integral ? static_cast<long long>(v.get<double>()) : 0;
        if (!integral || n < 1 || n % 2 == 0) {
            r.diag("N", "N must be odd (N = 2L+1 with L a nonnegative integer), as the two phase cells require");
        } else {
            run.p.L = static_cast<int>((n - 1) / 2);
        }
    }
    run.p.c_plus = r.complex("c_plus", run.p.c_plus);
    run.p.c_minus = r.complex("c_minus", run.p.c_minus);
    // null, "inf" or an absent key all select the zero-temperature chain.
    run.p.beta_B = r.real("beta_B", inf);
    run.p.sign = static_cast<int>(r.integer("sign", 1));
    if (r.has("slope_L")) {
        const json& v = r.raw("slope_L");
        if (v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer()) {
            run.slope_from = v[0].get<int>();
            run.slope_to = v[1].get<int>();
        } else {
            r.diag("slope_L", "must be a pair [L_from, L_to] of integers");
        }
    }
    if (run.slope_from < 1 || run.slope_to <= run.slope_from || run.slope_to > 30) {
        r.diag("slope_L", "need 1 <= L_from < L_to <= 30");
    }
    run.observable_sites = static_cast<int>(r.integer("observable_sites", 1));
    if (run.observable_sites < 0 || run.observable_sites >= run.p.sites()) {
        r.diag("observable_sites", "a local observable covers 0..N-1 chain sites");
    }
    r.finish();
    check_normalization(diags, run.p.c_plus, run.p.c_minus);
    library_check(diags, [&] { run.p.validate(); });
    return run;
}

json ch_params_json(const coleman_hepp::Params& p) {
    return {{"L", p.L}, {"N", p.sites()}, {"c_plus", complex_json(p.c_plus)}, {"c_minus", complex_json(p.c_minus)},
            {"beta_B", number_or_string(p.beta_B)}, {"sign", p.sign}};
}

Matrix sigma1_string(int factors) {
    Matrix m = pauli_x();
    for (int k = 1; k < factors; ++k) {
        m = tensor(m, pauli_x());
    }
    return m;
}

RunResult run_coleman_hepp(const RunConfig& c, const ColemanHeppRun& run) {
    namespace ch = coleman_hepp;
    const ch::Params& p = run.p;
    RunResult out;
    out.engines = {"coleman-hepp/structured-binomial"};
    const auto curve = ch::qb_entropy_curve(p);
    const ch::CrossTermMass cm = ch::cross_term_mass(p);

    Csv csv({"t", "s_vn", "s_qb", "witness", "m_plus"});
    for (const auto& pt : curve) {
        csv.row() << pt.t << pt.s_vn << pt.s_qb << pt.witness << cm.m_plus;
        csv.end();
        if (pt.s_qb < pt.s_vn - 1e-10) {
            out.violations.push_back("S_QB below S_vN at t = " + std::to_string(pt.t));
        }
    }
    out.files["curve.csv"] = csv.str();

    const double label_entropy = shannon_entropy(std::vector<double>{std::norm(p.c_plus), std::norm(p.c_minus)});
    json report = {
        {"params", ch_params_json(p)},
        {"s_qb_initial", curve.front().s_qb},
        {"s_qb_final", curve.back().s_qb},
        {"s_vn", curve.front().s_vn},
        {"label_entropy", label_entropy},
        {"chain_mixture_entropy", ch::chain_mixture_entropy(p)},
        {"cross_term_mass", {{"m_plus", cm.m_plus}, {"m_minus", cm.m_minus}}},
        {"final_witness", curve.back().witness},
    };
    try {
        report["entropy_jump"] = ch::entropy_jump(p);
    } catch (const DegenerateAmplitudes&) {
        report["entropy_jump"] = nullptr;
    }
    if (!p.zero_temperature() && p.beta_B > 0.0) {
        report["cross_term_log_slope"] = {
            {"L_from", run.slope_from},
            {"L_to", run.slope_to},
            {"value", ch::cross_term_log_slope(p.beta_B, run.slope_from, run.slope_to)},
            {"reference", -std::log(std::cosh(p.beta_B))},
        };
    } else {
        report["cross_term_log_slope"] = nullptr;
    }

    const int m = run.observable_sites;
    if (m <= 2 * c.dense_cap + 1) {
        const Complex local = ch::offdiag_overlap(p, p.sites(), sigma1_string(m + 1), c.dense_cap);
        report["local_offdiag_final"] = {{"sites", m}, {"abs", std::abs(local)}};
    }
    if (p.L <= c.dense_cap) {
        const Complex z = ch::offdiag_overlap(p, p.sites(), ch::flip_string(p.L), c.dense_cap);
        report["flip_string_offdiag_final"] = {{"abs", std::abs(z)}, {"expected", std::abs(p.c_plus * p.c_minus)}};

        out.engines.push_back("coleman-hepp/dense");
        const auto dense = ch::dense_qb_entropy_curve(p, c.dense_cap);
        double dev = 0.0;
        for (std::size_t t = 0; t < curve.size(); ++t) {
            dev = std::max({dev, std::abs(dense[t].s_qb - curve[t].s_qb), std::abs(dense[t].s_vn - curve[t].s_vn),
                            std::abs(dense[t].witness - curve[t].witness)});
        }
        report["dense_max_deviation"] = dev;
        if (dev > curve_agreement_tolerance) {
            out.violations.push_back("structured and dense engines differ by " + format_number(dev));
        }
    } else {
        report["dense_max_deviation"] = nullptr;
    }
    out.files["report.json"] = dump(report);
    return out;
}

// ---- avalanche ----

struct AvalancheRun {
    avalanche::Params p;
    bool compare_reported = true;
};

AvalancheRun read_avalanche(const json& params, std::vector<std::string>& diags) {
    Reader r(params, diags, {"n", "permutation", "notation", "steps", "c_plus", "c_minus", "start", "orbit_cap", "compare_reported"});
    AvalancheRun run;
    const std::string perm = r.text("permutation", "2341");
    const std::string notation = r.text("notation", "one-line");
    run.p.n = static_cast<int>(r.integer("n", 0));
    try {
        const std::vector<int> parsed = avalanche::parse_permutation(perm);
        if (run.p.n == 0) {
            run.p.n = static_cast<int>(parsed.size());
        }
        if (notation == "one-line") {
            run.p.permutation = parsed;
        } else if (notation == "cycle") {
            run.p.permutation = avalanche::cycle_to_one_line(parsed, run.p.n);
        } else {
            r.diag("notation", "must be \"one-line\" or \"cycle\"");
        }
    } catch (const Error& e) {
        r.diag("permutation", e.what());
    }
    run.p.steps = static_cast<int>(r.integer("steps", 12));
    run.p.c_plus = r.complex("c_plus", run.p.c_plus);
    run.p.c_minus = r.complex("c_minus", run.p.c_minus);
    run.p.start = r.text("start", "");
    const long long cap = r.integer("orbit_cap", 0);
    if (cap < 0) {
        r.diag("orbit_cap", "must be nonnegative");
    }
    run.p.orbit_cap = static_cast<std::uint64_t>(std::max(0LL, cap));
    run.compare_reported = r.flag("compare_reported", true);
    r.finish();
    check_normalization(diags, run.p.c_plus, run.p.c_minus);
    library_check(diags, [&] { run.p.validate(); });
    if (run.p.n > avalanche::max_orbit_sites) {
        diags.push_back("avalanche: n exceeds the orbit cap of " + std::to_string(avalanche::max_orbit_sites) + " sites");
    }
    return run;
}

json orbit_json(const avalanche::OrbitReport& r, const avalanche::Params& p) {
    json configs = json::array();
    for (const auto c : r.orbit) {
        configs.push_back(avalanche::config_string(c, p.n));
    }
    json sectors = json::object();
    for (const auto& [m, d] : r.sector_dims) {
        sectors[std::to_string(m)] = d;
    }
    return {
        {"n", p.n},
        {"permutation", avalanche::format_permutation(p.permutation)},
        {"start", avalanche::config_string(p.start_config(), p.n)},
        {"orbit", configs},
        {"orbit_length", r.orbit.size()},
        {"orbit_dim", r.orbit_dim},
        {"sector_dims", sectors},
        {"magnetization_numerator", r.magnetization_numerator},
        {"mean_magnetization", r.mean_magnetization},
        {"entropy_curve", r.entropy_curve},
    };
}

// Reported n = 6 figures, with both readings of the printed permutations.
json reported_comparison() {
    avalanche::Params n4;
    const avalanche::OrbitReport r4 = avalanche::orbit_analysis(n4);
    const bool n4_ok = r4.orbit_dim == 6 && r4.sector_dims == std::map<int, std::size_t>{{-1, 2}, {0, 2}, {1, 2}};

    struct Reported {
        const char* text;
        std::size_t orbit_dim;
        int numerator;
    };
    const Reported reported[] = {{"254613", 26, -8}, {"234516", 31, -3}};
    json cases = json::array();
    std::string unmatched;
    for (const Reported& rep : reported) {
        const std::vector<int> digits = avalanche::parse_permutation(rep.text);
        json readings = json::object();
        bool reproduced = false;
        for (const char* notation : {"one-line", "cycle"}) {
            avalanche::Params p;
            p.n = 6;
            p.permutation = std::string(notation) == "cycle" ? avalanche::cycle_to_one_line(digits, 6) : digits;
            const avalanche::OrbitReport r = avalanche::orbit_analysis(p);
            const bool match = r.orbit_dim == rep.orbit_dim && r.magnetization_numerator == rep.numerator;
            reproduced = reproduced || match;
            readings[notation] = {
                {"one_line", avalanche::format_permutation(p.permutation)},
                {"orbit_dim", r.orbit_dim},
                {"magnetization_numerator", r.magnetization_numerator},
                {"mean_magnetization", r.mean_magnetization},
                {"matches_reported", match},
            };
        }
        if (!reproduced) {
            unmatched += (unmatched.empty() ? "" : ", ") + std::string(rep.text);
        }
        cases.push_back({{"permutation", rep.text},
                         {"reported_orbit_dim", rep.orbit_dim},
                         {"reported_mean_magnetization", std::to_string(rep.numerator) + "/" + std::to_string(rep.orbit_dim)},
                         {"computed", readings},
                         {"reproduced", n4_ok && reproduced}});
    }
    json j = {
        {"n4_reference", {{"permutation", "2341"}, {"orbit_dim", r4.orbit_dim}, {"reproduced", n4_ok}}},
        {"n6_cases", cases},
        {"n6_all_reproduced", n4_ok && unmatched.empty()},
        {"reported_n6_sector_dims", {3, 3, 12, 6, 16}},
        {"reported_n6_sector_sum", 40},
    };
    if (!unmatched.empty()) {
        j["discrepancy"] =
            "Not reproduced under either reading of the printed permutation: " + unmatched +
            ". No permutation of 6 sites gives an orbit of dimension 26 under the convention that reproduces n = 4. "
            "The reported n = 6 sector dimensions sum to 40, above both reported orbit dimensions.";
    }
    return j;
}

RunResult run_avalanche(const RunConfig&, const AvalancheRun& run) {
    RunResult out;
    out.engines = {"avalanche/basis-orbit"};
    const avalanche::OrbitReport r = avalanche::orbit_analysis(run.p);
    out.files["orbit.json"] = dump(orbit_json(r, run.p));
    if (run.p.n <= avalanche::max_trace_sites) {
        out.engines.push_back("avalanche/dense-trace");
        Csv csv({"step", "s_qb", "s_vn"});
        const auto trace = avalanche::entropy_trace(run.p);
        for (const auto& t : trace) {
            csv.row() << t.step << t.s_qb << t.s_vn;
            csv.end();
        }
        out.files["entropy.csv"] = csv.str();
        for (std::size_t s = 0; s < trace.size() && s < r.entropy_curve.size(); ++s) {
            if (std::abs(trace[s].s_qb - r.entropy_curve[s]) > curve_agreement_tolerance) {
                out.violations.push_back("dense trace and orbit curve differ at step " + std::to_string(s));
                break;
            }
        }
    }
    if (run.compare_reported) {
        out.files["comparison.json"] = dump(reported_comparison());
    }
    return out;
}

// ---- anosov ----

struct AnosovRun {
    anosov::Params p;
    int points = 512;
    double t_max = 5.0;
    int t_steps = 201;
};

AnosovRun read_anosov(const json& params, std::vector<std::string>& diags) {
    Reader r(params, diags, {"lambda", "mu", "S0", "points", "t_max", "t_steps", "case_b"});
    AnosovRun run;
    run.p.lyapunov = r.real("lambda", 1.0);
    run.p.coupling = r.real("mu", 1.0);
    run.p.support_radius = r.real("S0", 0.25);
    run.points = static_cast<int>(r.integer("points", 512));
    run.t_max = r.real("t_max", 5.0);
    run.t_steps = static_cast<int>(r.integer("t_steps", 201));
    if (r.has("case_b")) {
        const json& b = r.raw("case_b");
        if (!b.is_object()) {
            r.diag("case_b", "must be an object {re_lambda2, alpha_p2, t0}");
        } else {
            std::vector<std::string> inner;
            Reader rb(b, inner, {"re_lambda2", "alpha_p2", "t0"});
            anosov::CaseB cb;
            cb.re_lambda2 = rb.real("re_lambda2", 1.0);
            cb.alpha_p2 = rb.real("alpha_p2", 1.0);
            cb.t0 = rb.real("t0", 0.0);
            rb.finish();
            for (const auto& d : inner) {
                diags.push_back("case_b." + d.substr(7));
            }
            run.p.case_b = cb;
        }
    }
    if (run.points < 3 || run.points > (1 << 20)) {
        r.diag("points", "must lie in [3, 2^20]");
    }
    if (!(run.t_max >= 0.0) || !std::isfinite(run.t_max)) {
        r.diag("t_max", "must be finite and nonnegative");
    }
    if (run.t_steps < 2 || run.t_steps > 100000) {
        r.diag("t_steps", "must lie in [2, 100000]");
    }
    r.finish();
    library_check(diags, [&] { run.p.validate(); });
    if (run.points >= 3 && run.p.support_radius > 0.0 && (run.points - 1) / (2.0 * run.p.support_radius) < anosov::min_points_per_unit) {
        diags.push_back("anosov: the packet grid needs at least 16 points per unit length");
    }
    return run;
}

RunResult run_anosov(const RunConfig& c, const AnosovRun& run) {
    namespace an = anosov;
    RunResult out;
    out.engines = {"anosov/trapezoid-quadrature"};
    const an::WavePacket phi = an::WavePacket::bump(run.p.support_radius, run.points);
    const an::CaseAReport a = an::decoherence_time_case_a(run.p);
    std::optional<an::CaseBReport> b;
    if (run.p.case_b) {
        b = an::decoherence_time_case_b(run.p);
    }
    const auto t_star = an::oracle_threshold(run.p);

    const auto n = static_cast<std::size_t>(run.t_steps);
    const double dt = run.t_max / static_cast<double>(n - 1);
    const auto ov = parallel_map<Complex>(n, c.workers, [&](std::size_t i) { return an::overlap(dt * static_cast<double>(i), phi, run.p); });

    Csv csv({"t", "s", "abs_overlap", "re_overlap", "im_overlap", "past_oracle_threshold", "a1_condition_past_t01", "a2_condition_past_t02"});
    double max_past = 0.0;
    double max_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = dt * static_cast<double>(i);
        const bool past = t_star && t > *t_star;
        const bool flag_a = a.a1_below_one && t > a.t01;
        const bool flag_b = b && b->decoherence_time && t > *b->decoherence_time;
        csv.row() << t << an::translation_magnitude(t, run.p) << std::abs(ov[i]) << ov[i].real() << ov[i].imag()
                  << static_cast<int>(past) << static_cast<int>(flag_a) << static_cast<int>(flag_b);
        csv.end();
        max_abs = std::max(max_abs, std::abs(ov[i]));
        if (past) {
            max_past = std::max(max_past, std::abs(ov[i]));
        }
    }
    out.files["overlap.csv"] = csv.str();
    if (max_past > overlap_zero_tolerance) {
        out.violations.push_back("overlap past the support threshold reaches " + format_number(max_past));
    }
    if (max_abs > 1.0 + 1e-12) {
        out.violations.push_back("overlap modulus exceeds 1");
    }

    json thresholds = {
        {"lambda", run.p.lyapunov},
        {"mu", run.p.coupling},
        {"S0", run.p.support_radius},
        {"case_a", {{"t01", a.t01}, {"a1", a.a1}, {"a1_below_one", a.a1_below_one}}},
        {"oracle_t_star", t_star ? json(*t_star) : json("never")},
        {"max_abs_overlap_past_t_star", max_past},
    };
    if (b) {
        thresholds["case_b"] = {{"a2", b->a2},
                                {"t02", b->t02},
                                {"decoherence_time", b->decoherence_time ? json(*b->decoherence_time) : json("never")}};
    } else {
        thresholds["case_b"] = nullptr;
    }
    out.files["thresholds.json"] = dump(thresholds);
    return out;
}

// ---- histories ----

struct HistoriesRun {
    Index dim = 8;
    int events = 3;
    std::size_t cells = 2;
    int support_steps = 20;
};

HistoriesRun read_histories(const json& params, std::vector<std::string>& diags) {
    Reader r(params, diags, {"dim", "events", "cells", "support_steps"});
    HistoriesRun run;
    run.dim = static_cast<Index>(r.integer("dim", 8));
    run.events = static_cast<int>(r.integer("events", 3));
    run.cells = static_cast<std::size_t>(std::max(0LL, r.integer("cells", 2)));
    run.support_steps = static_cast<int>(r.integer("support_steps", 20));
    if (run.dim < 2 || run.dim > 64) {
        r.diag("dim", "must lie in [2, 64]");
    }
    if (run.events < 1 || run.events > 8) {
        r.diag("events", "must lie in [1, 8]");
    }
    if (run.cells < 1 || static_cast<Index>(run.cells) > run.dim) {
        r.diag("cells", "must lie in [1, dim]");
    } else if (run.events >= 1 && run.events <= 8 && std::pow(static_cast<double>(run.cells), run.events) > static_cast<double>(max_histories)) {
        r.diag("cells", "cells^events exceeds the cap of 4096 histories");
    }
    if (run.support_steps < 0 || run.support_steps > 10000) {
        r.diag("support_steps", "must lie in [0, 10000]");
    }
    r.finish();
    return run;
}

RunResult run_histories(const RunConfig& c, const HistoriesRun& run) {
    RunResult out;
    out.engines = {"histories/class-operators"};
    auto rng = random::stream(c.seed, 0);
    const DensityMatrix rho = random::density_matrix(run.dim, rng);
    std::vector<HistoryEvent> events;
    for (int k = 0; k < run.events; ++k) {
        UnitaryMap u = random::unitary(run.dim, rng);
        events.push_back({std::move(u), random::projector_family(run.dim, run.cells, rng)});
    }
    const HistorySpec spec(std::move(events));
    const DecoherenceMatrix d = decoherence_functional(rho, spec);
    const std::vector<double> w = history_probabilities(d);

    Csv dcsv({"row", "col", "re", "im"});
    for (Index i = 0; i < d.entries().rows(); ++i) {
        for (Index j = 0; j < d.entries().cols(); ++j) {
            dcsv.row() << static_cast<int>(i) << static_cast<int>(j) << d.entries()(i, j).real() << d.entries()(i, j).imag();
            dcsv.end();
        }
    }
    out.files["D.csv"] = dcsv.str();

    Csv wcsv({"history", "labels", "w"});
    double sum = 0.0;
    for (std::size_t h = 0; h < w.size(); ++h) {
        std::string labels;
        for (const std::size_t a : spec.labels(h)) {
            labels += (labels.empty() ? "" : "-") + std::to_string(a);
        }
        wcsv.row() << h << labels << w[h];
        wcsv.end();
        sum += w[h];
    }
    out.files["W.csv"] = wcsv.str();
    if (std::abs(sum - 1.0) > history_sum_tolerance) {
        out.violations.push_back("history probabilities sum to " + format_number(sum));
    }

    auto rng_support = random::stream(c.seed, 1);
    const UnitaryMap u = random::unitary(run.dim, rng_support);
    PureState psi = PureState::basis(run.dim, 0);
    Csv scsv({"t", "support"});
    for (int t = 0; t <= run.support_steps; ++t) {
        scsv.row() << t << support_cardinality(psi);
        scsv.end();
        psi = u.apply(psi);
    }
    out.files["support.csv"] = scsv.str();

    json summary = {
        {"dim", run.dim},
        {"events", run.events},
        {"cells", run.cells},
        {"history_count", spec.history_count()},
        {"sum_w", sum},
        {"max_off_diagonal", d.max_off_diagonal()},
        {"decoheres_1e-9", decoheres(d, 1e-9)},
    };
    out.files["histories.json"] = dump(summary);
    return out;
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256: digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

json RunConfig::to_json() const {
    return {{"experiment", experiment}, {"seed", seed},      {"output_dir", output_dir.string()},
            {"dense_cap", dense_cap},   {"workers", workers}, {"params", params}};
}

RunConfig parse_config(const json& j) {
    if (!j.is_object()) {
        throw ConfigInvalid("config must be a JSON object");
    }
    RunConfig c;
    for (const auto& [k, v] : j.items()) {
        if (k == "experiment") {
            if (!v.is_string()) {
                throw ConfigInvalid("experiment must be a string");
            }
            c.experiment = v.get<std::string>();
        } else if (k == "seed") {
            if (!v.is_number_unsigned()) {
                throw ConfigInvalid("seed must be a nonnegative 64-bit integer");
            }
            c.seed = v.get<std::uint64_t>();
        } else if (k == "output_dir") {
            if (!v.is_string()) {
                throw ConfigInvalid("output_dir must be a string");
            }
            c.output_dir = v.get<std::string>();
        } else if (k == "dense_cap") {
            if (!v.is_number_integer()) {
                throw ConfigInvalid("dense_cap must be an integer");
            }
            c.dense_cap = v.get<int>();
        } else if (k == "workers") {
            if (!v.is_number_unsigned()) {
                throw ConfigInvalid("workers must be a positive integer");
            }
            c.workers = v.get<unsigned>();
        } else if (k == "params") {
            c.params = v;
        } else {
            throw ConfigInvalid("unknown config field '" + k + "'");
        }
    }
    return c;
}

std::vector<std::string> validate(const RunConfig& c) {
    std::vector<std::string> diags;
    if (c.dense_cap < 0 || c.dense_cap > coleman_hepp::default_dense_cap) {
        diags.push_back("dense_cap must lie in [0, " + std::to_string(coleman_hepp::default_dense_cap) + "]");
    }
    if (c.workers < 1 || c.workers > 256) {
        diags.push_back("workers must lie in [1, 256]");
    }
    if (c.experiment == "entropy-suite") {
        read_entropy_suite(c.params, diags);
    } else if (c.experiment == "coleman-hepp") {
        read_coleman_hepp(c.params, diags);
    } else if (c.experiment == "avalanche") {
        read_avalanche(c.params, diags);
    } else if (c.experiment == "anosov") {
        read_anosov(c.params, diags);
    } else if (c.experiment == "histories") {
        read_histories(c.params, diags);
    } else {
        std::string names;
        for (const char* n : experiment_names) {
            names += (names.empty() ? "" : ", ") + std::string(n);
        }
        diags.push_back("unknown experiment '" + c.experiment + "'; expected one of " + names);
    }
    return diags;
}

RunResult execute(const RunConfig& c) {
    std::vector<std::string> diags = validate(c);
    if (!diags.empty()) {
        std::string msg = "invalid config:";
        for (const auto& d : diags) {
            msg += "\n  " + d;
        }
        throw ConfigInvalid(msg);
    }
    if (c.experiment == "entropy-suite") {
        return run_entropy_suite(c, read_entropy_suite(c.params, diags));
    }
    if (c.experiment == "coleman-hepp") {
        return run_coleman_hepp(c, read_coleman_hepp(c.params, diags));
    }
    if (c.experiment == "avalanche") {
        return run_avalanche(c, read_avalanche(c.params, diags));
    }
    if (c.experiment == "anosov") {
        return run_anosov(c, read_anosov(c.params, diags));
    }
    return run_histories(c, read_histories(c.params, diags));
}

json RunManifest::to_json() const {
    json files_json = json::array();
    for (const auto& f : files) {
        files_json.push_back({{"name", f.name}, {"sha256", f.sha256}});
    }
    return {{"config", config},       {"files", files_json},          {"engines", engines},
            {"wall_time", wall_time}, {"tool_version", version}, {"violations", violations}};
}

RunManifest run(const RunConfig& c) {
    const auto start = std::chrono::steady_clock::now();
    RunResult result = execute(c);
    RunManifest m;
    m.config = c.to_json();
    m.engines = result.engines;
    m.violations = result.violations;

    std::filesystem::create_directories(c.output_dir);
    for (const auto& [name, content] : result.files) {
        std::ofstream f(c.output_dir / name, std::ios::binary);
        f << content;
        if (!f) {
            throw Error("cannot write " + (c.output_dir / name).string());
        }
        m.files.push_back({name, sha256_hex(content)});
    }
    m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream f(c.output_dir / "manifest.json", std::ios::binary);
    f << dump(m.to_json());
    if (!f) {
        throw Error("cannot write manifest.json");
    }
    return m;
}

int exit_code(const RunManifest& manifest) {
    return manifest.violations.empty() ? 0 : 3;
}

}  // namespace qboltz::runner
