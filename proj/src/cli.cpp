#include "pdd/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "pdd/dual_process.hpp"
#include "pdd/errors.hpp"
#include "pdd/parallel.hpp"
#include "pdd/partition.hpp"
#include "pdd/sampling.hpp"
#include "pdd/serialize.hpp"
#include "pdd/transition.hpp"
#include "pdd/urns.hpp"

namespace pdd::cli {

namespace {

using nlohmann::json;

// Raised for inputs that parse but make no sense together.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

Partition parse_partition(const std::string& text) {
    std::vector<int> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            throw UsageError("not a partition: " + text);
        }
        if (used != item.size() || v <= 0) throw UsageError("not a partition: " + text);
        parts.push_back(v);
    }
    return Partition::from_unsorted(parts);
}

Frequencies parse_frequencies(const std::vector<double>& atoms, const char* what) {
    try {
        return Frequencies(atoms);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string(what) + ": " + e.what());
    }
}

// Every option of the chosen subcommand with its effective value.
json describe(const CLI::App& sub) {
    json config = json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string name = opt->get_lnames().front();
        if (name == "help") continue;
        if (opt->get_expected_max() == 0) {
            config[name] = opt->count() > 0;
        } else if (opt->count() == 0) {
            config[name] = opt->get_default_str();
        } else if (opt->get_delimiter() != '\0' || opt->results().size() == 1) {
            std::string joined;
            for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
            config[name] = joined;
        } else {
            config[name] = opt->results();  // repeated option
        }
    }
    return config;
}

struct Output {
    std::ostream* stream;
    std::unique_ptr<std::ofstream> file;
    std::string path;
};

Output open_output(const std::string& path, std::ostream& fallback) {
    Output o{&fallback, nullptr, path};
    if (!path.empty() && path != "-") {
        o.file = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*o.file) throw UsageError("cannot open output file " + path);
        o.stream = o.file.get();
    }
    return o;
}

struct Common {
    std::string alpha = "0";
    std::string theta = "1";
    std::string output;
};

ExactParams exact_params(const Common& c) {
    ExactParams p;
    try {
        p.alpha = parse_rational(c.alpha);
        p.theta = parse_rational(c.theta);
    } catch (const std::exception&) {
        throw UsageError("alpha and theta must be numbers (decimal or p/q)");
    }
    p.validate();
    return p;
}

Params double_params(const Common& c) { return to_double(exact_params(c)); }

void add_params(CLI::App* sub, Common& c) {
    sub->add_option("--alpha", c.alpha, "discount parameter in [0, 1) (decimal or p/q)")->capture_default_str();
    sub->add_option("--theta", c.theta, "mass parameter, > -alpha (decimal or p/q)")->capture_default_str();
}

void add_output(CLI::App* sub, Common& c) {
    sub->add_option("--output,-o", c.output, "output file (default: standard output)");
}

struct Settings {
    Common common;
    // tables
    int n = 0;
    bool infinite = false;
    std::vector<double> times;
    bool precision_report = false;
    double mass_tol = 1e-12;
    std::string eta = "2";
    std::vector<std::string> etas;
    std::string omega;
    // stochastic
    std::uint64_t seed = 0;
    std::string mode;
    std::int64_t count = 1;
    int m = 1;
    double t = 1.0;
    std::vector<double> x{1.0};
    std::vector<double> y{1.0};
    int top = 0;
    double tail_tol = kDefaultTailTolerance;
    // density
    std::string form = "mixture";
    int trunc = 25;
    bool allow_small_t = false;
    // verify
    std::string what;
    std::int64_t trials = 100000;
    int workers = 1;
    int n_max = 1000;
    double z_threshold = 3.0;
    double p_floor = 1e-3;
    double mc_tail_tol = McConfig{}.tail_tolerance;
    std::string cells;
    std::string gamma = "2";
};

void write_meta_csv(std::ostream& os, const json& meta) { os << "# meta: " << meta.dump() << "\n"; }
void write_meta_json(std::ostream& os, const json& meta) { os << json{{"meta", meta}}.dump() << "\n"; }

// ---------------------------------------------------------------- tables

int cmd_partitions(const Settings& s, const json& meta, std::ostream& out) {
    if (s.n < 0) throw UsageError("--n must be non-negative");
    Output o = open_output(s.common.output, out);
    write_meta_csv(*o.stream, meta);
    *o.stream << "partition,length,dim\n";
    for (const auto& eta : enumerate_partitions(s.n))
        *o.stream << csv_quote(to_string(eta)) << "," << eta.length() << "," << to_string(dim_partition(eta)) << "\n";
    return kOk;
}

int cmd_ewens_pitman(const Settings& s, const json& meta, std::ostream& out) {
    if (s.n < 1) throw UsageError("--n must be at least 1");
    const ExactParams p = exact_params(s.common);
    Output o = open_output(s.common.output, out);
    write_meta_csv(*o.stream, meta);
    *o.stream << "partition,probability,probability_exact\n";
    for (const auto& eta : enumerate_partitions(s.n)) {
        const Rational m = ewens_pitman(eta, p);
        *o.stream << csv_quote(to_string(eta)) << "," << fmt(to_double(m)) << "," << to_string(m) << "\n";
    }
    return kOk;
}

int cmd_death_probs(const Settings& s, const json& meta, std::ostream& out) {
    if (s.times.empty()) throw UsageError("--t needs at least one time");
    if (!s.infinite && s.n < 1) throw UsageError("give --n N (N >= 1) or --infinite");
    const double theta = to_double(parse_rational(s.common.theta));
    std::vector<DeathProbTable> tables;
    for (double t : s.times)
        tables.push_back(s.infinite ? death_prob_table_infinite(theta, t, s.mass_tol) : death_prob_table(s.n, theta, t));
    Output o = open_output(s.common.output, out);
    write_meta_csv(*o.stream, meta);
    *o.stream << "t,l,probability" << (s.precision_report ? ",precision_bits" : "") << "\n";
    for (const auto& table : tables)
        for (const auto& [l, v] : table.values) {
            *o.stream << fmt(table.t) << "," << l << "," << fmt(v);
            if (s.precision_report) {
                auto it = table.precision_bits.find(l);
                *o.stream << "," << (it == table.precision_bits.end() ? 0 : it->second);
            }
            *o.stream << "\n";
        }
    return kOk;
}

int cmd_dual_transition(const Settings& s, const json& meta, std::ostream& out) {
    if (s.times.empty()) throw UsageError("--t needs at least one time");
    const Partition eta = parse_partition(s.eta);
    if (eta.empty()) throw UsageError("--eta must be non-empty");
    const double theta = to_double(parse_rational(s.common.theta));
    std::vector<Partition> targets;
    if (!s.omega.empty()) {
        targets.push_back(parse_partition(s.omega));
    } else {
        for (int w = 1; w <= eta.size(); ++w)
            for (const auto& omega : enumerate_partitions(w))
                if (is_subpartition(omega, eta)) targets.push_back(omega);
    }
    std::vector<std::string> rows;
    for (double t : s.times)
        for (const auto& omega : targets)
            rows.push_back(fmt(t) + "," + csv_quote(to_string(omega)) + "," + fmt(dual_transition(eta, omega, theta, t)));
    Output o = open_output(s.common.output, out);
    write_meta_csv(*o.stream, meta);
    *o.stream << "t,omega,probability\n";
    for (const auto& r : rows) *o.stream << r << "\n";
    return kOk;
}

// ---------------------------------------------------------------- samples

json lazy_sample_json(LazyFrequencies& x, const Settings& s) {
    if (s.top > 0) {
        Frequencies f = x.top(static_cast<std::size_t>(s.top));
        return json(f);
    }
    return json(x.truncated(s.tail_tol));
}

int cmd_sample(const Settings& s, const json& meta, std::ostream& out) {
    if (s.count < 0) throw UsageError("--count must be non-negative");
    const Params p = double_params(s.common);
    Rng rng = make_rng(s.seed, 0);
    std::vector<std::string> lines;
    const Partition omega = parse_partition(s.omega);
    const Frequencies x = parse_frequencies(s.x, "--x");
    if (s.mode == "pd-cond" && omega.empty()) throw UsageError("pd-cond needs a non-empty --omega");
    if (s.mode == "urn" && s.m < 0) throw UsageError("--m must be non-negative");
    if (s.mode == "split-urn" && s.n < 1) throw UsageError("split-urn needs --n >= 1");
    if ((s.mode == "split-urn" || s.mode == "transition") && !(s.t > 0.0)) throw UsageError("--t must be positive");
    for (std::int64_t i = 0; i < s.count; ++i) {
        json rec;
        if (s.mode == "pd") {
            LazyFrequencies y = stick_breaking_sampler(p, rng);
            rec = lazy_sample_json(y, s);
        } else if (s.mode == "pd-cond") {
            LazyFrequencies y = sample_pd_conditional(omega, p, rng);
            rec = lazy_sample_json(y, s);
        } else if (s.mode == "urn") {
            const UrnRun run = polya_urn_run(omega, s.m, p, rng);
            rec = json{{"partition", run.combined}, {"added", run.added}};
        } else if (s.mode == "split-urn") {
            rec = json(split_urn(s.n, s.t, p, rng));
        } else {  // transition
            LazyFrequencies y = sample_transition(x, s.t, p, rng);
            rec = lazy_sample_json(y, s);
        }
        lines.push_back(rec.dump());
    }
    Output o = open_output(s.common.output, out);
    write_meta_json(*o.stream, meta);
    for (const auto& l : lines) *o.stream << l << "\n";
    return kOk;
}

// ---------------------------------------------------------------- density

int cmd_density(const Settings& s, const json& meta, std::ostream& out) {
    if (!(s.t > 0.0)) throw UsageError("--t must be positive");
    if (s.t < 0.05 && !s.allow_small_t)
        throw UsageError("t < 0.05 is outside the reliable range of the truncated densities; "
                         "pass --allow-small-t to evaluate anyway");
    const Params p = double_params(s.common);
    const Frequencies x = parse_frequencies(s.x, "--x");
    const Frequencies y = parse_frequencies(s.y, "--y");
    const DensityEval d =
        s.form == "spectral" ? density_spectral(x, y, s.t, p, s.trunc) : density_mixture(x, y, s.t, p, s.trunc);
    Output o = open_output(s.common.output, out);
    write_meta_json(*o.stream, meta);
    *o.stream << json(d).dump() << "\n";
    return kOk;
}

// ---------------------------------------------------------------- verify

struct CellTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CellTable mc_cells(const std::vector<MCReport>& reports) {
    CellTable t{{"label", "exact", "estimate", "std_error", "trials", "z_score", "pass"}, {}};
    for (const auto& r : reports)
        t.rows.push_back({r.label, fmt(r.exact_value), fmt(r.estimate), fmt(r.std_error), std::to_string(r.trials),
                          fmt(r.z_score), r.pass ? "true" : "false"});
    return t;
}

CellTable chi_cells(const ChiSquareReport& r) {
    CellTable t{{"cell", "observed", "expected"}, {}};
    for (const auto& c : r.cells) t.rows.push_back({c.label, std::to_string(c.observed), fmt(c.expected)});
    return t;
}

int cmd_verify(const Settings& s, const json& meta, std::ostream& out) {
    const Params p = double_params(s.common);
    McConfig cfg;
    cfg.trials = s.trials;
    cfg.seed = s.seed;
    cfg.workers = s.workers;
    cfg.z_threshold = s.z_threshold;
    cfg.p_floor = s.p_floor;
    cfg.tail_tolerance = s.mc_tail_tol;
    if (s.trials < 1) throw UsageError("--trials must be positive");
    if (s.workers < 1) throw UsageError("--workers must be at least 1");

    json report;
    CellTable cells;
    bool pass = false;
    if (s.what == "duality" || s.what == "stationarity") {
        std::vector<Partition> etas;
        for (const auto& e : s.etas.empty() ? std::vector<std::string>{s.eta} : s.etas) {
            etas.push_back(parse_partition(e));
            if (etas.back().empty()) throw UsageError("--eta must be non-empty");
        }
        if (!(s.t > 0.0)) throw UsageError("--t must be positive");
        const auto reports = s.what == "duality"
                                 ? verify_duality(etas, parse_frequencies(s.x, "--x"), s.t, p, cfg)
                                 : verify_stationarity(etas, s.t, p, cfg);
        cells = mc_cells(reports);
        if (reports.size() == 1) {
            report = reports.front();
            pass = reports.front().pass;
        } else {
            const FamilyReport family = bonferroni_report(reports);
            report = json{{"reports", reports}, {"family", family}, {"pass", family.pass}};
            pass = family.pass;
        }
    } else if (s.what == "split-urn") {
        if (s.n < 1) throw UsageError("split-urn needs --n >= 1");
        if (!(s.t > 0.0)) throw UsageError("--t must be positive");
        const auto r = verify_split_urn(s.n, s.t, p, cfg);
        report = r;
        cells = chi_cells(r);
        pass = r.chi.pass;
    } else if (s.what == "urn-conditional") {
        const Partition omega = parse_partition(s.omega);
        if (s.n < omega.size() || s.n < 1) throw UsageError("urn-conditional needs --n >= max(1, |omega|)");
        const auto r = verify_urn_conditional(omega, s.n, p, cfg);
        report = r;
        cells = chi_cells(r);
        pass = r.chi.pass;
    } else if (s.what == "representation") {
        const auto r = empirical_representation_check(s.n_max, p, cfg);
        report = r;
        cells.header = {"n", "median_discrepancy"};
        for (std::size_t i = 0; i < r.n_grid.size(); ++i)
            cells.rows.push_back({std::to_string(r.n_grid[i]), fmt(r.median_discrepancy[i])});
        pass = r.pass;
    } else {  // radon-nikodym
        const Partition omega = parse_partition(s.omega.empty() ? "2" : s.omega);
        const Partition gamma = parse_partition(s.gamma);
        const auto r = verify_radon_nikodym(omega, gamma, p, cfg);
        report = r;
        cells = mc_cells({r.reweighted, r.direct});
        pass = r.pass;
    }

    Output o = open_output(s.common.output, out);
    write_meta_json(*o.stream, meta);
    *o.stream << report.dump() << "\n";
    std::string cells_path = s.cells;
    if (cells_path.empty() && o.file) cells_path = o.path + ".cells.csv";
    Output c = open_output(cells_path, *o.stream);
    write_meta_csv(*c.stream, meta);
    for (std::size_t i = 0; i < cells.header.size(); ++i) *c.stream << (i ? "," : "") << cells.header[i];
    *c.stream << "\n";
    for (const auto& row : cells.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) *c.stream << (i ? "," : "") << csv_quote(row[i]);
        *c.stream << "\n";
    }
    return pass ? kOk : kVerificationFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-parameter Poisson-Dirichlet diffusion: dual process, urns and transition law", "pdd"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Settings s;

    auto* partitions = app.add_subcommand("partitions", "list the partitions of n");
    partitions->add_option("--n", s.n, "size")->required();
    add_output(partitions, s.common);

    auto* ewens = app.add_subcommand("ewens-pitman", "Ewens-Pitman probabilities on the partitions of n");
    ewens->add_option("--n", s.n, "size")->required();
    add_params(ewens, s.common);
    add_output(ewens, s.common);

    auto* death = app.add_subcommand("death-probs", "block-counting death process transition probabilities");
    auto* death_n = death->add_option("--n", s.n, "starting number of blocks");
    auto* death_inf = death->add_flag("--infinite", s.infinite, "start from the entrance boundary at infinity");
    death_n->excludes(death_inf);
    death->add_option("--theta", s.common.theta, "mass parameter, > -1")->capture_default_str();
    death->add_option("--t", s.times, "times, comma separated")->required()->delimiter(',');
    death->add_flag("--precision-report", s.precision_report, "add the working precision (bits) of every entry");
    death->add_option("--mass-tol", s.mass_tol, "stopping tolerance on the missing mass of infinite-start tables")
        ->capture_default_str();
    add_output(death, s.common);

    auto* dual = app.add_subcommand("dual-transition", "transition probabilities of the partition-valued dual");
    dual->add_option("--eta", s.eta, "starting partition, e.g. 2,1")->required();
    dual->add_option("--omega", s.omega, "target partition (default: every omega contained in eta)");
    dual->add_option("--theta", s.common.theta, "mass parameter, > -1")->capture_default_str();
    dual->add_option("--t", s.times, "times, comma separated")->required()->delimiter(',');
    add_output(dual, s.common);

    auto* sample = app.add_subcommand("sample", "draw samples as JSON lines");
    sample->add_option("--mode", s.mode, "pd | pd-cond | urn | split-urn | transition")
        ->required()
        ->check(CLI::IsMember({"pd", "pd-cond", "urn", "split-urn", "transition"}));
    sample->add_option("--seed", s.seed, "random seed")->required();
    sample->add_option("--count", s.count, "number of samples")->capture_default_str();
    add_params(sample, s.common);
    sample->add_option("--omega", s.omega, "configuration for pd-cond and urn, e.g. 2,1");
    sample->add_option("--m", s.m, "urn draws")->capture_default_str();
    sample->add_option("--n", s.n, "sample size for split-urn");
    sample->add_option("--t", s.t, "time for split-urn and transition")->capture_default_str();
    sample->add_option("--x", s.x, "starting point for transition, comma separated atoms")
        ->delimiter(',')
        ->capture_default_str();
    sample->add_option("--top", s.top, "report only the K largest atoms (0: all realised atoms)")->capture_default_str();
    sample->add_option("--tail-tol", s.tail_tol, "stick truncation: expected squared tail mass")->capture_default_str();
    add_output(sample, s.common);

    auto* density = app.add_subcommand("density", "truncated transition density p(t, x, y)");
    density->add_option("--form", s.form, "mixture | spectral")
        ->capture_default_str()
        ->check(CLI::IsMember({"mixture", "spectral"}));
    density->add_option("--x", s.x, "atoms of x, comma separated")->required()->delimiter(',');
    density->add_option("--y", s.y, "atoms of y, comma separated")->required()->delimiter(',');
    density->add_option("--t", s.t, "time")->required();
    density->add_option("--trunc", s.trunc, "truncation order (at most 30)")->capture_default_str();
    density->add_flag("--allow-small-t", s.allow_small_t, "evaluate for t < 0.05");
    add_params(density, s.common);
    add_output(density, s.common);

    auto* verify = app.add_subcommand("verify", "Monte Carlo verification against exact values");
    verify->add_option("--what", s.what,
                       "duality | split-urn | representation | urn-conditional | stationarity | radon-nikodym")
        ->required()
        ->check(CLI::IsMember(
            {"duality", "split-urn", "representation", "urn-conditional", "stationarity", "radon-nikodym"}));
    verify->add_option("--seed", s.seed, "random seed")->required();
    verify->add_option("--trials", s.trials, "Monte Carlo trials")->capture_default_str();
    verify->add_option("--workers", s.workers, "parallel workers (results depend on seed and worker count)")
        ->capture_default_str();
    add_params(verify, s.common);
    verify->add_option("--eta", s.etas, "partition(s) for duality/stationarity; repeat for several")
        ->take_all()
        ->expected(1);
    verify->add_option("--x", s.x, "starting point atoms, comma separated")->delimiter(',')->capture_default_str();
    verify->add_option("--t", s.t, "time")->capture_default_str();
    verify->add_option("--n", s.n, "sample size for split-urn and urn-conditional");
    verify->add_option("--n-max", s.n_max, "urn size for representation")->capture_default_str();
    verify->add_option("--omega", s.omega, "starting configuration for urn-conditional and radon-nikodym");
    verify->add_option("--gamma", s.gamma, "test partition for radon-nikodym")->capture_default_str();
    verify->add_option("--z-threshold", s.z_threshold, "pass threshold on |z|")->capture_default_str();
    verify->add_option("--p-floor", s.p_floor, "pass threshold on chi-square p-values")->capture_default_str();
    verify->add_option("--tail-tol", s.mc_tail_tol, "stick truncation: expected squared tail mass")
        ->capture_default_str();
    verify->add_option("--cells", s.cells, "per-cell CSV file (default: <output>.cells.csv, or after the report)");
    add_output(verify, s.common);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    CLI::App* chosen = app.get_subcommands().front();
    json meta{{"program", "pdd"}, {"version", kVersion}, {"subcommand", chosen->get_name()}, {"config", describe(*chosen)}};
    try {
        const std::string name = chosen->get_name();
        if (name == "partitions") return cmd_partitions(s, meta, out);
        if (name == "ewens-pitman") return cmd_ewens_pitman(s, meta, out);
        if (name == "death-probs") return cmd_death_probs(s, meta, out);
        if (name == "dual-transition") return cmd_dual_transition(s, meta, out);
        if (name == "sample") return cmd_sample(s, meta, out);
        if (name == "density") return cmd_density(s, meta, out);
        return cmd_verify(s, meta, out);
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::invalid_argument& e) {  // DomainError, ResourceLimit, UsageError
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumericalError;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

}  // namespace pdd::cli
