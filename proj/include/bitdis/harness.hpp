#pragma once

#include <json.hpp>

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bitdis/analyzer.hpp"
#include "bitdis/dynamics.hpp"
#include "bitdis/stats.hpp"

namespace bitdis {

struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sample-size rule: a constant, or one of the two growth laws used by the
// fast-convergence regimes, ceil(c*sqrt(n*ln n)) and ceil(c*ln n).
struct EllExpr {
    enum class Kind { constant, sqrt_n_log_n, log_n } kind = Kind::constant;
    double c = 1.0;
    long k = 1;
    std::string label = "1";

    long eval(long n) const {
        switch (kind) {
            case Kind::constant: return k;
            case Kind::sqrt_n_log_n:
                return std::max(1l, static_cast<long>(std::ceil(
                                        c * std::sqrt(static_cast<double>(n) *
                                                      std::log(static_cast<double>(n))))));
            case Kind::log_n:
                return std::max(1l, static_cast<long>(std::ceil(
                                        c * std::log(static_cast<double>(n)))));
        }
        return 1;
    }

    static EllExpr constant(long k) {
        EllExpr e;
        e.kind = Kind::constant;
        e.k = k;
        e.label = std::to_string(k);
        return e;
    }

    // Accepts "<int>", "ceil(sqrt(n*ln n))", "ceil(C*sqrt(n*ln n))",
    // "ceil(ln n)", "ceil(C*ln n)".
    static EllExpr parse(const std::string& raw) {
        std::string s;
        for (char ch : raw)
            if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
        if (s.empty()) throw SpecError("empty ell expression");
        if (s.find_first_not_of("0123456789") == std::string::npos) {
            EllExpr e = constant(std::stol(s));
            if (e.k < 1) throw SpecError("ell must be >= 1");
            return e;
        }
        if (!s.starts_with("ceil(") || !s.ends_with(")"))
            throw SpecError("unsupported ell expression: '" + raw + "'");
        std::string inner = s.substr(5, s.size() - 6);
        EllExpr e;
        e.c = 1.0;
        const auto star = inner.find('*');
        // A leading numeric factor ends at the first '*' that is not part of
        // "n*lnn"; detect by trying to parse a number prefix.
        if (star != std::string::npos) {
            const std::string head = inner.substr(0, star);
            char* end = nullptr;
            const double c = std::strtod(head.c_str(), &end);
            if (end != nullptr && *end == '\0' && end != head.c_str()) {
                e.c = c;
                inner = inner.substr(star + 1);
            }
        }
        if (inner == "sqrt(n*lnn)")
            e.kind = Kind::sqrt_n_log_n;
        else if (inner == "lnn")
            e.kind = Kind::log_n;
        else
            throw SpecError("unsupported ell expression: '" + raw + "'");
        if (e.c <= 0.0) throw SpecError("ell expression factor must be positive");
        e.label = raw;
        return e;
    }
};

struct ProtocolSource {
    bool is_builtin = true;
    Builtin which = Builtin::voter;
    EllExpr ell = EllExpr::constant(1);
    std::string file_path;

    // Builtin protocols may scale ell with n; file protocols are fixed.
    Protocol instantiate(long n) const {
        if (is_builtin) return builtin(which, ell.eval(n));
        std::ifstream in(file_path);
        if (!in) throw SpecError("cannot open protocol file: " + file_path);
        std::stringstream ss;
        ss << in.rdbuf();
        return load_protocol(ss.str());
    }
};

struct X0Rule {
    enum class Kind { count, fraction, adversarial } kind = Kind::count;
    std::vector<long> counts;        // kind == count (grid allowed)
    std::vector<double> fractions;   // kind == fraction (grid allowed)

    std::vector<long> resolve(long n, int z, const std::optional<Classification>& cls) const {
        const long lo = z == 1 ? 1 : 0;
        const long hi = z == 1 ? n : n - 1;
        std::vector<long> out;
        switch (kind) {
            case Kind::count:
                for (long c : counts) {
                    if (c < lo || c > hi)
                        throw SpecError("x0 = " + std::to_string(c) +
                                        " violates the configuration invariant for n = " +
                                        std::to_string(n));
                    out.push_back(c);
                }
                break;
            case Kind::fraction:
                for (double f : fractions) {
                    long c = std::lround(f * static_cast<double>(n));
                    c = std::clamp(c, lo, hi);
                    out.push_back(c);
                }
                break;
            case Kind::adversarial:
                if (!cls.has_value())
                    throw SpecError("adversarial x0 requires a classifiable protocol");
                out.push_back(cls->suggested_x0(n, z));
                break;
        }
        return out;
    }
};

struct MaxRoundsRule {
    bool use_default = true;
    unsigned long long value = 0;

    unsigned long long resolve(long n, Mode mode) const {
        return use_default ? default_max_rounds(n, mode) : value;
    }
};

struct ExperimentSpec {
    ProtocolSource protocol;
    std::vector<long> ns;
    int z = 1;
    X0Rule x0;
    Mode mode = Mode::parallel;
    long trials = 1;
    std::uint64_t master_seed = 0;
    MaxRoundsRule max_rounds;
    std::string statistic = "median";
    double censor_threshold = 0.10;

    void check() const {
        if (ns.empty()) throw SpecError("spec: need at least one n");
        for (long n : ns)
            if (n < 2) throw SpecError("spec: every n must be >= 2");
        if (trials < 1) throw SpecError("spec: trials must be >= 1");
        if (z != 0 && z != 1) throw SpecError("spec: z must be 0 or 1");
        if (statistic != "median" && statistic != "mean" && statistic != "q90")
            throw SpecError("spec: statistic must be one of median|mean|q90");
        if (censor_threshold < 0.0 || censor_threshold > 1.0)
            throw SpecError("spec: censor_threshold must lie in [0,1]");
    }

    static ExperimentSpec from_json_text(const std::string& text);
};

inline ExperimentSpec ExperimentSpec::from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SpecError(std::string("spec parse error: ") + e.what());
    }
    ExperimentSpec s;
    try {
        const auto& pj = doc.at("protocol");
        if (pj.contains("builtin")) {
            s.protocol.is_builtin = true;
            s.protocol.which = builtin_from_name(pj.at("builtin").get<std::string>());
            const auto& ej = pj.at("ell");
            s.protocol.ell = ej.is_number_integer() ? EllExpr::constant(ej.get<long>())
                                                    : EllExpr::parse(ej.get<std::string>());
        } else if (pj.contains("file")) {
            s.protocol.is_builtin = false;
            s.protocol.file_path = pj.at("file").get<std::string>();
        } else {
            throw SpecError("spec: protocol needs 'builtin' or 'file'");
        }

        for (const auto& v : doc.at("n")) s.ns.push_back(v.get<long>());
        s.z = doc.at("z").get<int>();

        const auto& xj = doc.at("x0");
        if (xj.is_number_integer()) {
            s.x0.kind = X0Rule::Kind::count;
            s.x0.counts = {xj.get<long>()};
        } else if (xj.is_string() && xj.get<std::string>() == "adversarial") {
            s.x0.kind = X0Rule::Kind::adversarial;
        } else if (xj.is_object() && xj.contains("count")) {
            s.x0.kind = X0Rule::Kind::count;
            s.x0.counts = {xj.at("count").get<long>()};
        } else if (xj.is_object() && xj.contains("fraction")) {
            s.x0.kind = X0Rule::Kind::fraction;
            s.x0.fractions = {xj.at("fraction").get<double>()};
        } else if (xj.is_object() && xj.contains("grid_fractions")) {
            s.x0.kind = X0Rule::Kind::fraction;
            for (const auto& v : xj.at("grid_fractions")) s.x0.fractions.push_back(v.get<double>());
        } else if (xj.is_object() && xj.contains("grid_counts")) {
            s.x0.kind = X0Rule::Kind::count;
            for (const auto& v : xj.at("grid_counts")) s.x0.counts.push_back(v.get<long>());
        } else {
            throw SpecError("spec: unsupported x0 rule");
        }

        s.mode = mode_from_name(doc.value("mode", std::string("parallel")));
        s.trials = doc.at("trials").get<long>();
        s.master_seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("max_rounds") && !doc["max_rounds"].is_string()) {
            s.max_rounds.use_default = false;
            s.max_rounds.value = doc["max_rounds"].get<unsigned long long>();
            if (s.max_rounds.value == 0) throw SpecError("spec: max_rounds must be > 0");
        }
        s.statistic = doc.value("statistic", std::string("median"));
        s.censor_threshold = doc.value("censor_threshold", 0.10);
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("spec: ") + e.what());
    }
    s.check();
    return s;
}

// One trial's outcome. tau is in rounds for parallel mode and in
// parallel-round equivalents (activations / n) for sequential mode; the raw
// activation count is always carried alongside.
struct ResultRow {
    long n = 0;
    long ell = 1;
    std::string protocol;
    int z = 1;
    long x0 = 0;
    std::uint64_t seed = 0;
    long trial = 0;
    bool censored = false;
    CensorReason censor_reason = CensorReason::none;
    double tau = 0.0;
    unsigned long long activations = 0;
    double wall_ms = 0.0;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

inline std::string format_tau(double tau) {
    if (tau == std::floor(tau) && std::fabs(tau) < 1e15)
        return std::to_string(static_cast<long long>(tau));
    return format_double(tau);
}

inline unsigned long long env_worker_count() {
    if (const char* env = std::getenv("BITDIS_WORKERS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != nullptr && *end == '\0' && v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

}  // namespace detail

// Runs every (n, x0, trial) cell of the spec. Trials are independent and
// distributed over worker threads; each cell derives its own generator from
// (master seed, n, x0, trial), so the row set is identical no matter how many
// workers run or in which order cells finish. Rows come back canonically
// sorted by (n, x0, trial). `progress`, when given, is invoked from worker
// threads as rows complete (in completion order).
inline std::vector<ResultRow> sweep(const ExperimentSpec& spec, unsigned long long workers = 0,
                                    const std::function<void(const ResultRow&)>& progress = {}) {
    spec.check();
    if (workers == 0) workers = detail::env_worker_count();

    struct Cell {
        long n;
        long x0;
        long trial;
        const Protocol* protocol;
        const AdoptTable* table;
        unsigned long long max_rounds;
        std::size_t slot;
    };

    // Per-n protocol instances (ell may scale with n) and adoption tables,
    // built once and shared read-only across workers.
    std::vector<Protocol> protocols;
    std::vector<AdoptTable> tables;
    std::vector<Cell> cells;

    protocols.reserve(spec.ns.size());
    for (long n : spec.ns) protocols.push_back(spec.protocol.instantiate(n));
    tables.reserve(protocols.size());
    for (std::size_t ni = 0; ni < spec.ns.size(); ++ni)
        tables.push_back(AdoptTable::build(protocols[ni], spec.ns[ni]));

    std::size_t slot = 0;
    for (std::size_t ni = 0; ni < spec.ns.size(); ++ni) {
        const long n = spec.ns[ni];
        // Classification is recomputed per n since ell may scale with n.
        std::optional<Classification> cls_n;
        if (spec.x0.kind == X0Rule::Kind::adversarial) cls_n = classify(protocols[ni]);
        const auto x0s = spec.x0.resolve(n, spec.z, cls_n);
        const auto mr = spec.max_rounds.resolve(n, spec.mode);
        for (long x0 : x0s)
            for (long trial = 0; trial < spec.trials; ++trial)
                cells.push_back(Cell{n, x0, trial, &protocols[ni], &tables[ni], mr, slot++});
    }

    std::vector<ResultRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size() || failed.load()) return;
            const Cell& cell = cells[i];
            try {
                ResultRow row;
                row.n = cell.n;
                row.ell = cell.protocol->ell;
                row.protocol = cell.protocol->name;
                row.z = spec.z;
                row.x0 = cell.x0;
                row.trial = cell.trial;
                row.seed = derive_seed(spec.master_seed, static_cast<std::uint64_t>(cell.n),
                                       static_cast<std::uint64_t>(cell.x0),
                                       static_cast<std::uint64_t>(cell.trial));
                Rng rng = make_rng(row.seed);
                const Configuration c0(cell.n, spec.z, cell.x0);
                const auto t0 = std::chrono::steady_clock::now();
                const RunOutcome o = run_until_consensus(c0, *cell.protocol, spec.mode,
                                                         cell.max_rounds, rng, nullptr,
                                                         cell.table);
                const auto t1 = std::chrono::steady_clock::now();
                row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
                row.censored = !o.converged;
                row.censor_reason = o.censored;
                row.tau = o.converged
                              ? (spec.mode == Mode::parallel ? static_cast<double>(o.tau)
                                                             : static_cast<double>(o.tau) /
                                                                   static_cast<double>(cell.n))
                              : 0.0;
                row.activations = o.activations;
                rows[cell.slot] = std::move(row);
                if (progress) progress(rows[cell.slot]);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(error_mutex);
                failed.store(true);
                if (error_message.empty()) error_message = e.what();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    const auto nworkers = std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(1, cells.size()));
    for (std::size_t w = 0; w < nworkers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load()) throw std::runtime_error("sweep: " + error_message);
    return rows;  // slot order == (n, x0, trial) construction order
}

// Least-squares fit of log(statistic of tau) against log n. Censored rows
// never enter silently: any n whose censoring fraction exceeds the threshold
// either vetoes the fit (refuse policy, the default) or is dropped with a
// recorded warning (exclude policy). Fewer than 3 surviving points refuses.
enum class CensorPolicy { refuse, exclude };

struct ScalingFit {
    bool refused = false;
    std::string reason;
    double slope = 0.0;
    double intercept = 0.0;
    std::string statistic = "median";
    struct Point {
        long n = 0;
        double value = 0.0;
        double censor_fraction = 0.0;
        long rows = 0;
        bool excluded = false;
    };
    std::vector<Point> points;
    std::vector<double> residuals;
    std::vector<std::string> warnings;
};

inline ScalingFit fit_scaling(const std::vector<ResultRow>& rows, const std::string& statistic,
                              double censor_threshold = 0.10,
                              CensorPolicy policy = CensorPolicy::refuse) {
    ScalingFit fit;
    fit.statistic = statistic;
    std::map<long, std::vector<const ResultRow*>> by_n;
    for (const auto& r : rows) by_n[r.n].push_back(&r);

    for (const auto& [n, group] : by_n) {
        ScalingFit::Point pt;
        pt.n = n;
        pt.rows = static_cast<long>(group.size());
        long censored = 0;
        std::vector<double> taus;
        for (const auto* r : group) {
            if (r->censored)
                ++censored;
            else
                taus.push_back(r->tau);
        }
        pt.censor_fraction =
            static_cast<double>(censored) / static_cast<double>(group.size());
        if (pt.censor_fraction > censor_threshold) {
            if (policy == CensorPolicy::refuse) {
                fit.refused = true;
                fit.reason = "censoring fraction " + detail::format_double(pt.censor_fraction) +
                             " at n = " + std::to_string(n) + " exceeds threshold " +
                             detail::format_double(censor_threshold);
            } else {
                pt.excluded = true;
                fit.warnings.push_back("excluded n = " + std::to_string(n) +
                                       " (censoring fraction " +
                                       detail::format_double(pt.censor_fraction) + ")");
            }
        }
        if (!taus.empty()) {
            if (statistic == "median")
                pt.value = median(taus);
            else if (statistic == "mean")
                pt.value = mean(taus);
            else if (statistic == "q90")
                pt.value = quantile(taus, 0.9);
            else
                throw std::invalid_argument("fit_scaling: unknown statistic " + statistic);
        }
        fit.points.push_back(pt);
    }
    if (fit.refused) return fit;

    std::vector<double> lx, ly;
    for (const auto& pt : fit.points) {
        if (pt.excluded) continue;
        if (pt.value <= 0.0) {
            fit.refused = true;
            fit.reason = "non-positive statistic at n = " + std::to_string(pt.n) +
                         " cannot enter a log-log fit";
            return fit;
        }
        lx.push_back(std::log(static_cast<double>(pt.n)));
        ly.push_back(std::log(pt.value));
    }
    if (lx.size() < 3) {
        fit.refused = true;
        if (fit.reason.empty())
            fit.reason = "need >= 3 usable n values, have " + std::to_string(lx.size());
        return fit;
    }
    const OlsFit ols = ols_fit(lx, ly);
    fit.slope = ols.slope;
    fit.intercept = ols.intercept;
    fit.residuals = ols.residuals;
    return fit;
}

// ---------------------------------------------------------------------------
// Report emission.

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string csv_header() {
    return "n,ell,protocol,z,x0,seed,trial,tau,censored,activations,wall_ms";
}

inline std::string row_to_csv(const ResultRow& r) {
    std::string out;
    out += std::to_string(r.n);
    out += ',';
    out += std::to_string(r.ell);
    out += ',';
    out += r.protocol;
    out += ',';
    out += std::to_string(r.z);
    out += ',';
    out += std::to_string(r.x0);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += std::to_string(r.trial);
    out += ',';
    if (!r.censored) out += detail::format_tau(r.tau);
    out += ',';
    out += r.censored ? '1' : '0';
    out += ',';
    out += std::to_string(r.activations);
    out += ',';
    out += detail::format_double(r.wall_ms);
    return out;
}

inline void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << csv_header() << '\n';
    for (const auto& r : rows) out << row_to_csv(r) << '\n';
}

inline std::string fit_to_text(const ScalingFit& fit, std::uint64_t spec_hash) {
    std::ostringstream os;
    os << "spec_hash: " << std::hex << spec_hash << std::dec << '\n';
    os << "statistic: " << fit.statistic << '\n';
    if (fit.refused) {
        os << "fit: refused\n";
        os << "reason: " << fit.reason << '\n';
    } else {
        os << "fit: log(" << fit.statistic << ") = " << detail::format_double(fit.intercept)
           << " + " << detail::format_double(fit.slope) << " * log(n)\n";
        os << "slope: " << detail::format_double(fit.slope) << '\n';
    }
    for (const auto& w : fit.warnings) os << "warning: " << w << '\n';
    os << "n,value,censor_fraction,rows,excluded\n";
    for (const auto& pt : fit.points)
        os << pt.n << ',' << detail::format_double(pt.value) << ','
           << detail::format_double(pt.censor_fraction) << ',' << pt.rows << ','
           << (pt.excluded ? 1 : 0) << '\n';
    if (!fit.residuals.empty()) {
        os << "residuals:";
        for (double r : fit.residuals) os << ' ' << detail::format_double(r);
        os << '\n';
    }
    return os.str();
}

// Self-contained log-log scatter of the per-n statistic with the fit line.
inline std::string plot_svg(const ScalingFit& fit) {
    const double W = 640, H = 480, ml = 70, mr = 20, mt = 30, mb = 50;
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    std::vector<std::pair<double, double>> pts;
    for (const auto& pt : fit.points) {
        if (pt.excluded || pt.value <= 0.0) continue;
        const double lx = std::log10(static_cast<double>(pt.n));
        const double ly = std::log10(pt.value);
        pts.emplace_back(lx, ly);
        xlo = std::min(xlo, lx);
        xhi = std::max(xhi, lx);
        ylo = std::min(ylo, ly);
        yhi = std::max(yhi, ly);
    }
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (pts.empty()) {
        os << "<text x=\"40\" y=\"50\">no plottable points"
           << (fit.refused ? " (fit refused: " + fit.reason + ")" : "") << "</text>\n</svg>\n";
        return os.str();
    }
    if (xhi - xlo < 1e-9) xhi = xlo + 1.0;
    if (yhi - ylo < 1e-9) yhi = ylo + 1.0;
    const double padx = 0.05 * (xhi - xlo), pady = 0.08 * (yhi - ylo);
    xlo -= padx; xhi += padx; ylo -= pady; yhi += pady;
    auto X = [&](double lx) { return ml + (lx - xlo) / (xhi - xlo) * (W - ml - mr); };
    auto Y = [&](double ly) { return H - mb - (ly - ylo) / (yhi - ylo) * (H - mt - mb); };
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
       << H - mb << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 12)
       << "\" text-anchor=\"middle\">log10 n</text>\n";
    os << "<text x=\"16\" y=\"" << (H / 2) << "\" transform=\"rotate(-90 16 " << (H / 2)
       << ")\" text-anchor=\"middle\">log10 " << fit.statistic << "</text>\n";
    if (!fit.refused) {
        // Fit line in natural-log space mapped to log10 axes.
        const double l10 = std::log(10.0);
        auto fit_ly = [&](double lx10) {
            return (fit.intercept + fit.slope * (lx10 * l10)) / l10;
        };
        os << "<line x1=\"" << X(xlo) << "\" y1=\"" << Y(fit_ly(xlo)) << "\" x2=\"" << X(xhi)
           << "\" y2=\"" << Y(fit_ly(xhi)) << "\" stroke=\"#c23\" stroke-width=\"1.5\"/>\n";
        os << "<text x=\"" << (ml + 8) << "\" y=\"" << (mt - 8) << "\">slope "
           << detail::format_double(fit.slope) << "</text>\n";
    }
    for (const auto& [lx, ly] : pts)
        os << "<circle cx=\"" << X(lx) << "\" cy=\"" << Y(ly)
           << "\" r=\"4\" fill=\"#26c\"/>\n";
    os << "</svg>\n";
    return os.str();
}

struct ReportPaths {
    std::string results_csv;
    std::string fit_txt;
    std::string plot_svg;
};

inline ReportPaths emit_report(const std::vector<ResultRow>& rows, const ScalingFit& fit,
                               const std::string& out_dir, const std::string& spec_text,
                               bool with_plot = true) {
    if (rows.empty()) throw std::invalid_argument("emit_report: no rows");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    ReportPaths paths;
    paths.results_csv = (fs::path(out_dir) / "results.csv").string();
    paths.fit_txt = (fs::path(out_dir) / "fit.txt").string();
    write_results_csv(rows, paths.results_csv);
    {
        std::ofstream out(paths.fit_txt, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + paths.fit_txt);
        out << fit_to_text(fit, fnv1a64(spec_text));
    }
    if (with_plot) {
        paths.plot_svg = (fs::path(out_dir) / "plot.svg").string();
        std::ofstream out(paths.plot_svg, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + paths.plot_svg);
        out << plot_svg(fit);
    }
    return paths;
}

}  // namespace bitdis
