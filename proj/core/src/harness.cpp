#include "qpjacobi/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qpjacobi/avalanche.hpp"
#include "qpjacobi/frequency.hpp"
#include "qpjacobi/green.hpp"
#include "qpjacobi/jacobi.hpp"
#include "qpjacobi/localization.hpp"
#include "qpjacobi/parallel.hpp"
#include "qpjacobi/resonance.hpp"
#include "qpjacobi/transfer.hpp"

namespace fs = std::filesystem;

namespace qpj {

const char* tool_version() { return "qpjacobi 0.1.0"; }

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double OmegaSpec::value() const {
    switch (kind) {
        case Kind::literal:
            return literal;
        case Kind::golden:
            return golden_mean();
        case Kind::silver:
            return silver_mean();
        case Kind::quotients:
            return value_from_quotients(quotients);
    }
    return 0.0;
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& config_dir) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    ExperimentConfig cfg;
    cfg.raw_json = json_text;
    cfg.config_dir = config_dir;
    cfg.model_path = j.at("model").get<std::string>();

    if (j.contains("omega")) {
        const auto& o = j["omega"];
        if (o.is_string()) {
            std::string s = o.get<std::string>();
            if (s == "golden") {
                cfg.omega.kind = OmegaSpec::Kind::golden;
            } else if (s == "silver") {
                cfg.omega.kind = OmegaSpec::Kind::silver;
            } else {
                throw std::invalid_argument("config: unknown omega name: " + s);
            }
        } else if (o.is_number()) {
            cfg.omega.kind = OmegaSpec::Kind::literal;
            cfg.omega.literal = o.get<double>();
        } else if (o.is_object() && o.contains("literal")) {
            cfg.omega.kind = OmegaSpec::Kind::literal;
            cfg.omega.literal = o["literal"].get<double>();
        } else if (o.is_object() && o.contains("quotients")) {
            cfg.omega.kind = OmegaSpec::Kind::quotients;
            for (const auto& q : o["quotients"]) cfg.omega.quotients.push_back(q.get<std::int64_t>());
        } else {
            throw std::invalid_argument("config: malformed omega spec");
        }
    }

    cfg.scales = j.value("scales", std::vector<long>{256});
    for (long n : cfg.scales) {
        if (n < 1) throw std::invalid_argument("config: scales must be positive");
    }
    cfg.x_grid = j.value("x_grid", 512);
    if (cfg.x_grid < 1) throw std::invalid_argument("config: x_grid must be positive");
    if (j.contains("energy_window")) {
        auto w = j["energy_window"];
        cfg.energy_window = {{w.at(0).get<double>(), w.at(1).get<double>()}};
    }
    cfg.preset = j.value("preset", "custom");
    if (cfg.preset != "custom" && cfg.preset != "paper")
        throw std::invalid_argument("config: preset must be 'paper' or 'custom'");
    if (j.contains("params")) {
        const auto& p = j["params"];
        cfg.params.p = p.value("p", cfg.params.p);
        cfg.params.A = p.value("A", cfg.params.A);
        cfg.params.tau = p.value("tau", cfg.params.tau);
        cfg.params.sigma = p.value("sigma", cfg.params.sigma);
        cfg.params.Q = p.value("Q", cfg.params.Q);
        cfg.params.M = p.value("M", cfg.params.M);
        cfg.params.l = p.value("l", cfg.params.l);
        if (cfg.params.tau < 0 || cfg.params.sigma < 0 || cfg.params.l < 1)
            throw std::invalid_argument("config: invalid preset params");
    }
    cfg.out_dir = j.value("out", "out");
    cfg.threads = j.value("threads", 0);
    cfg.seed = j.value("seed", 1ull);
    cfg.bad_set_path = j.value("bad_set", std::string{});
    if (j.contains("ldt")) {
        cfg.ldt_h_values = j["ldt"].value("h_values", cfg.ldt_h_values);
        cfg.ldt_c0_proxy = j["ldt"].value("c0_proxy", cfg.ldt_c0_proxy);
    }
    cfg.x = j.value("x", 0.0);
    cfg.y = j.value("y", 0.0);
    cfg.energy_samples = j.value("energy_samples", 20);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config file not readable: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), fs::path(path).parent_path().string());
}

PresetParams effective_params(const ExperimentConfig& cfg, long n) {
    PresetParams out = cfg.params;
    if (cfg.preset == "paper") {
        PaperParameters pp;
        pp.p = cfg.params.p;
        pp.A = cfg.params.A;
        out.sigma = pp.sigma(n);
        out.Q = pp.q(n);
        out.M = n;
        out.l = std::max<long>(2, pp.l(n));
        out.tau = pp.tau(n);
    }
    return out;
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["config_hash"] = config_hash;
    j["tool_version"] = tool_version;
    j["grid_provenance"] = grid_provenance;
    j["wall_clock_seconds"] = wall_clock_seconds;
    nlohmann::ordered_json tasks_j = nlohmann::ordered_json::array();
    for (const auto& t : tasks) {
        nlohmann::ordered_json files = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < t.files.size(); ++i) {
            files.push_back({{"path", t.files[i]}, {"fnv1a64", t.hashes[i]}});
        }
        tasks_j.push_back({{"name", t.name},
                           {"failed", t.failed},
                           {"diagnostic", t.diagnostic},
                           {"files", files}});
    }
    j["tasks"] = tasks_j;
    return j.dump(2);
}

namespace {

struct TaskContext {
    const ExperimentConfig& cfg;
    SamplingPair pair;
    double omega;
    int threads;
    fs::path out;
    TaskRecord* record;

    void emit(const std::string& filename, const std::string& content) const {
        fs::path p = out / filename;
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + p.string());
        f << content;
        f.close();
        record->files.push_back(filename);
        record->hashes.push_back(fnv1a_hex(content));
    }
};

class Csv {
  public:
    explicit Csv(std::vector<std::string> header) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
        columns_ = header.size();
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }
    std::string str() const { return out_.str(); }

  private:
    std::ostringstream out_;
    std::size_t columns_;
};

std::string fd(double v) { return format_double(v); }

/// `count` roughly equally spaced eigenvalues of the scale-N window at the
/// config's base phase.
std::vector<double> spectrum_samples(const TaskContext& ctx, long n, int count) {
    auto spec = eigenvalues_only(
        build_window(ctx.pair, cplx(ctx.cfg.x, 0.0), ctx.omega, Interval::first(n)));
    std::vector<double> es;
    if (spec.empty()) return es;
    int c = std::min<int>(count, static_cast<int>(spec.size()));
    for (int i = 0; i < c; ++i) {
        std::size_t idx = (spec.size() - 1) * static_cast<std::size_t>(i) / std::max(1, c - 1);
        es.push_back(spec[idx]);
    }
    es.erase(std::unique(es.begin(), es.end()), es.end());
    return es;
}

int phase_grid(const TaskContext& ctx) {
    // convergent denominator nearest the configured grid (equidistribution)
    auto cf = continued_fraction(ctx.omega, 40);
    auto q = cf.denominator_near(ctx.cfg.x_grid);
    return static_cast<int>(std::max<std::int64_t>(8, q));
}

IntervalUnion prior_bad_set(const TaskContext& ctx) {
    if (ctx.cfg.bad_set_path.empty()) return {};
    fs::path p = ctx.cfg.bad_set_path;
    if (p.is_relative() && !ctx.cfg.config_dir.empty()) p = fs::path(ctx.cfg.config_dir) / p;
    return load_bad_set(p.string());
}

void run_spectrum(const TaskContext& ctx) {
    for (long n : ctx.cfg.scales) {
        JacobiWindow w = build_window(ctx.pair, cplx(ctx.cfg.x, 0.0), ctx.omega, Interval::first(n));
        SpectralData sd = eigensystem(w);
        Csv csv({"N", "j", "energy", "residual"});
        for (long j = 0; j < n; ++j) {
            csv.row({std::to_string(n), std::to_string(j), fd(sd.eigenvalues[j]), fd(sd.residuals[j])});
        }
        ctx.emit("spectrum_N" + std::to_string(n) + ".csv", csv.str());
    }
}

void run_lyapunov(const TaskContext& ctx) {
    int grid = phase_grid(ctx);
    Csv csv({"N", "E", "y", "grid", "L_plain", "L_a", "matched_D", "relation_residual",
             "quadrature_error_estimate", "excluded_points"});
    nlohmann::ordered_json summary;
    summary["grid"] = grid;
    for (long n : ctx.cfg.scales) {
        auto es = spectrum_samples(ctx, n, ctx.cfg.energy_samples);
        auto rows = parallel_map<std::vector<std::string>>(
            es.size(), ctx.threads, [&](std::size_t i) -> std::vector<std::string> {
                LyapunovEstimate le = lyapunov(ctx.pair, ctx.cfg.y, ctx.omega, cplx(es[i], 0.0), n,
                                               grid, Variant::plain);
                return {std::to_string(n), fd(es[i]),  fd(ctx.cfg.y),
                        std::to_string(grid), fd(le.value), fd(le.value_a),
                        fd(le.matched_d),  fd(le.relation_residual),
                        fd(le.quadrature_error_estimate), std::to_string(le.excluded_points)};
            });
        for (const auto& r : rows) csv.row(r);
    }
    ctx.emit("lyapunov.csv", csv.str());
    ctx.emit("lyapunov_summary.json", summary.dump(2));
}

void run_gaps(const TaskContext& ctx) {
    IntervalUnion excluded = prior_bad_set(ctx);
    nlohmann::ordered_json summary = nlohmann::ordered_json::array();
    for (long n : ctx.cfg.scales) {
        GapReport rep = gap_report(ctx.pair, ctx.cfg.x, ctx.omega, n, ctx.cfg.params.p, excluded);
        Csv csv({"N", "j", "energy", "min_gap", "below_threshold", "excluded"});
        for (long j = 0; j < n; ++j) {
            bool ex = excluded.contains(rep.eigenvalues[j]);
            csv.row({std::to_string(n), std::to_string(j), fd(rep.eigenvalues[j]),
                     fd(rep.min_gaps[j]), rep.min_gaps[j] < rep.threshold ? "1" : "0",
                     ex ? "1" : "0"});
        }
        ctx.emit("gaps_N" + std::to_string(n) + ".csv", csv.str());
        nlohmann::ordered_json s;
        s["N"] = n;
        s["p"] = ctx.cfg.params.p;
        s["threshold"] = rep.threshold;
        s["min_gap"] = rep.min_gap;
        s["below_threshold_fraction_outside_excluded"] = rep.below_threshold_fraction;
        s["considered"] = rep.considered;
        s["histogram_log10"] = rep.histogram;
        s["note"] = "asymptotic separation claim is desk-unverifiable; fraction recorded, not asserted";
        summary.push_back(s);
    }
    ctx.emit("gaps_summary.json", summary.dump(2));
}

void run_resonances(const TaskContext& ctx) {
    IntervalUnion bad = prior_bad_set(ctx);
    nlohmann::ordered_json summary = nlohmann::ordered_json::array();
    for (long n : ctx.cfg.scales) {
        PresetParams pp = effective_params(ctx.cfg, n);
        auto events = elimination_scan(ctx.pair, ctx.omega, pp.l, pp.sigma, pp.Q, pp.M, bad,
                                       ctx.cfg.x_grid, ctx.cfg.energy_window, ctx.threads);
        Csv csv({"x", "m", "j", "k", "gap", "energy", "excluded"});
        long violations = 0;
        for (const auto& e : events) {
            csv.row({fd(e.x), std::to_string(e.m), std::to_string(e.j), std::to_string(e.k),
                     fd(e.gap), fd(e.energy), e.excluded ? "1" : "0"});
            if (!e.excluded) ++violations;
        }
        ctx.emit("resonances_N" + std::to_string(n) + ".csv", csv.str());
        nlohmann::ordered_json s;
        s["N"] = n;
        s["l"] = pp.l;
        s["sigma"] = pp.sigma;
        s["Q"] = pp.Q;
        s["M"] = pp.M;
        s["grid"] = ctx.cfg.x_grid;
        s["events"] = events.size();
        s["violations"] = violations;
        s["bad_set_mes"] = bad.mes();
        s["bad_set_com"] = bad.com();
        summary.push_back(s);
    }
    ctx.emit("resonances_summary.json", summary.dump(2));
}

void run_badset(const TaskContext& ctx) {
    IntervalUnion prior = prior_bad_set(ctx);
    nlohmann::ordered_json summary = nlohmann::ordered_json::array();
    for (long n : ctx.cfg.scales) {
        PresetParams pp = effective_params(ctx.cfg, n);
        SlopeBadSet sbs = slope_bad_set(ctx.pair, ctx.omega, pp.l, pp.tau, ctx.cfg.x_grid,
                                        prior.empty() ? nullptr : &prior);
        BadSetMetadata meta;
        meta.tau = pp.tau;
        meta.sigma = pp.sigma;
        meta.l = pp.l;
        meta.omega = ctx.omega;
        meta.grid = ctx.cfg.x_grid;
        meta.model_hash = fnv1a_hex(model_to_json(ctx.pair));
        ctx.emit("badset_l" + std::to_string(pp.l) + ".json", bad_set_to_json(sbs.z_y, meta));
        nlohmann::ordered_json s;
        s["N"] = n;
        s["l"] = pp.l;
        s["tau"] = pp.tau;
        s["mes"] = sbs.z_y.mes();
        s["com"] = sbs.z_y.com();
        long src = 0;
        for (long c : sbs.intervals_per_branch) src += c;
        s["source_intervals"] = src;
        s["ambiguous_points"] = sbs.ambiguous_points;
        s["refinement_cells"] = sbs.refinement_cells;
        summary.push_back(s);
    }
    ctx.emit("badset_summary.json", summary.dump(2));
}

void run_localize(const TaskContext& ctx) {
    for (long n : ctx.cfg.scales) {
        PresetParams pp = effective_params(ctx.cfg, n);
        JacobiWindow w = build_window(ctx.pair, cplx(ctx.cfg.x, 0.0), ctx.omega, Interval::first(n));
        SpectralData sd = eigensystem(w);
        std::vector<long> qs{pp.Q, 2 * pp.Q};
        for (auto& q : qs) q = std::min<long>(q, n / 2);
        auto rows = parallel_map<std::vector<std::string>>(
            n, ctx.threads, [&](std::size_t j) -> std::vector<std::string> {
                LocalizationProfile lp =
                    localization_profile(ctx.pair, ctx.cfg.x, ctx.omega, w, sd, j, qs);
                return {std::to_string(n),           std::to_string(j),
                        fd(lp.energy),               std::to_string(lp.center),
                        fd(lp.fitted_rate),          std::to_string(lp.fit_points),
                        fd(lp.tail_mass.at(qs[0])),  fd(lp.tail_mass.at(qs[1])),
                        fd(lp.restriction_distance)};
            });
        Csv csv({"N", "j", "energy", "center", "fitted_rate", "fit_points",
                 "tail_mass_Q" + std::to_string(qs[0]), "tail_mass_Q" + std::to_string(qs[1]),
                 "restriction_distance"});
        for (const auto& r : rows) csv.row(r);
        ctx.emit("localize_N" + std::to_string(n) + ".csv", csv.str());
    }
}

void run_green_check(const TaskContext& ctx) {
    int grid = phase_grid(ctx);
    Csv csv({"N", "E", "dist_to_spectrum", "identity_defect", "hermitian_defect",
             "decay_applicable", "decay_holds", "decay_max_violation"});
    for (long n : ctx.cfg.scales) {
        auto spec = eigenvalues_only(
            build_window(ctx.pair, cplx(ctx.cfg.x, 0.0), ctx.omega, Interval::first(n)));
        // probe energies between consecutive eigenvalues (midpoints are as far
        // from the spectrum as the local gap allows)
        std::vector<double> es;
        for (int i = 0; i < ctx.cfg.energy_samples && i + 1 < static_cast<int>(spec.size()); ++i) {
            std::size_t idx = (spec.size() - 2) * static_cast<std::size_t>(i) /
                              std::max(1, ctx.cfg.energy_samples - 1);
            es.push_back(0.5 * (spec[idx] + spec[idx + 1]));
        }
        LyapunovEstimate le = lyapunov(ctx.pair, 0.0, ctx.omega,
                                       cplx(es.empty() ? 0.0 : es.front(), 0.0),
                                       std::min<long>(n, 64), grid, Variant::plain);
        double gamma = le.value;  // measured L - D margin at this scale
        for (double e : es) {
            double dist = std::numeric_limits<double>::infinity();
            for (double mu : spec) dist = std::min(dist, std::abs(mu - e));
            auto G = green_matrix(ctx.pair, ctx.cfg.x, ctx.omega, n, e);
            JacobiWindow w =
                build_window(ctx.pair, cplx(ctx.cfg.x, 0.0), ctx.omega, Interval::first(n));
            double defect = 0.0, herm = 0.0;
            for (long r = 0; r < n; ++r) {
                for (long c = 0; c < n; ++c) {
                    cplx acc(0.0, 0.0);
                    acc += (w.diag[r] - e) * G[r * n + c];
                    if (r > 0) acc += w.lower[r - 1] * G[(r - 1) * n + c];
                    if (r + 1 < n) acc += w.upper[r] * G[(r + 1) * n + c];
                    if (r == c) acc -= 1.0;
                    defect = std::max(defect, std::abs(acc));
                    herm = std::max(herm, std::abs(G[r * n + c] - std::conj(G[c * n + r])));
                }
            }
            double K = 2.0 * std::pow(std::log(static_cast<double>(n)), 2.0);
            DecayCertificate dc =
                decay_certificate(ctx.pair, ctx.cfg.x, ctx.omega, n, e, K, gamma, le.value_a);
            csv.row({std::to_string(n), fd(e), fd(dist), fd(defect), fd(herm),
                     dc.applicable ? "1" : "0", dc.holds ? "1" : "0", fd(dc.max_violation)});
        }
    }
    ctx.emit("green_check.csv", csv.str());
}

void run_ldt(const TaskContext& ctx) {
    int grid = std::max(1024, phase_grid(ctx));
    nlohmann::ordered_json summary = nlohmann::ordered_json::array();
    for (long n : ctx.cfg.scales) {
        auto es = spectrum_samples(ctx, n, 3);
        double e = es.empty() ? 0.0 : es[es.size() / 2];
        auto fractions = ldt_empirical(ctx.pair, ctx.omega, e, n, ctx.cfg.ldt_h_values, grid,
                                       ctx.cfg.ldt_c0_proxy);
        Csv csv({"N", "E", "H", "fraction"});
        for (const auto& [h, frac] : fractions) {
            csv.row({std::to_string(n), fd(e), fd(h), fd(frac)});
        }
        ctx.emit("ldt_N" + std::to_string(n) + ".csv", csv.str());
        nlohmann::ordered_json s;
        s["N"] = n;
        s["E"] = e;
        s["grid"] = grid;
        s["c0_proxy"] = ctx.cfg.ldt_c0_proxy;
        summary.push_back(s);
    }
    ctx.emit("ldt_summary.json", summary.dump(2));
}

void run_avalanche_check(const TaskContext& ctx) {
    std::mt19937_64 rng(ctx.cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Csv csv({"trial", "n", "mu", "conds", "discrepancy", "bound_ratio"});
    int trials = 200;
    double max_ratio = 0.0;
    for (int t = 0; t < trials; ++t) {
        int n = 2 + static_cast<int>(unif(rng) * 18);
        double mu = 1e3 * (1.0 + 9.0 * unif(rng));
        std::vector<ScaledMatrix2> seq;
        for (int j = 0; j < n; ++j) {
            double th1 = 2.0 * M_PI * unif(rng), th2 = 2.0 * M_PI * unif(rng);
            double s = mu * (1.0 + unif(rng));
            // rotation * diag(s, 1/s) * rotation: hyperbolic with det 1
            double c1 = std::cos(th1), s1 = std::sin(th1), c2 = std::cos(th2), s2 = std::sin(th2);
            cplx a = c1 * s * c2 - s1 * (1.0 / s) * s2;
            cplx b = c1 * s * s2 + s1 * (1.0 / s) * c2;
            cplx c = -s1 * s * c2 - c1 * (1.0 / s) * s2;
            cplx d = -s1 * s * s2 + c1 * (1.0 / s) * c2;
            seq.push_back(ScaledMatrix2::from(a, b, c, d));
        }
        APReport rep = ap_check(seq);
        if (!rep.conditions()) {
            --t;  // resample; conditions define the population
            continue;
        }
        max_ratio = std::max(max_ratio, rep.bound_ratio);
        csv.row({std::to_string(t), std::to_string(n), fd(rep.mu), "1", fd(rep.discrepancy),
                 fd(rep.bound_ratio)});
    }
    ctx.emit("avalanche_random.csv", csv.str());

    nlohmann::ordered_json summary;
    summary["max_bound_ratio"] = max_ratio;
    summary["envelope"] = 20.0;
    summary["envelope_exceeded"] = max_ratio > 20.0;

    // determinant block chain on the model
    auto es = spectrum_samples(ctx, 256, 3);
    double e = es.empty() ? 0.0 : es[es.size() / 2];
    nlohmann::ordered_json chains = nlohmann::ordered_json::array();
    for (long l : {16L, 32L}) {
        std::vector<long> lens(8, l);
        ChainReport cr = chain_blocks(ctx.pair, cplx(ctx.cfg.x, 0.0), ctx.omega, cplx(e, 0.0), lens);
        nlohmann::ordered_json c;
        c["l"] = l;
        c["m"] = cr.m;
        c["residual"] = cr.residual;
        c["u_equality_gap"] = cr.u_equality_gap;
        chains.push_back(c);
    }
    summary["chains"] = chains;
    ctx.emit("avalanche_summary.json", summary.dump(2));
}

void run_identities(const TaskContext& ctx) {
    std::mt19937_64 rng(ctx.cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    bool all_pass = true;
    auto record = [&](const std::string& name, double worst, double tol) {
        bool pass = worst <= tol;
        all_pass = all_pass && pass;
        checks.push_back({{"name", name}, {"worst", worst}, {"tolerance", tol}, {"pass", pass}});
    };

    const SamplingPair& pair = ctx.pair;
    double omega = ctx.omega;

    // transfer entries vs determinant expressions
    double worst = 0.0;
    for (int t = 0; t < 24; ++t) {
        double x = unif(rng);
        cplx E(4.0 * unif(rng) - 2.0, 0.0);
        long n = 1 + static_cast<long>(unif(rng) * 32);
        ScaledMatrix2 M = transfer_product(pair, cplx(x, 0.0), omega, n, E, Variant::a);
        cplx z(x, 0.0);
        ScaledValue e00 = determinant(pair, z, omega, Interval::first(n), E);
        ScaledValue e01 = n >= 2 ? -(ScaledValue::from(pair.tilde_b(z)) *
                                     determinant(pair, z + omega, omega, Interval::first(n - 1), E))
                                 : ScaledValue::from(-pair.tilde_b(z));
        ScaledValue e10 = ScaledValue::from(pair.b(z + static_cast<double>(n) * omega)) *
                          (n >= 2 ? determinant(pair, z, omega, Interval::first(n - 1), E)
                                  : ScaledValue::one());
        ScaledValue e11 =
            n >= 2 ? -(ScaledValue::from(pair.tilde_b(z) * pair.b(z + static_cast<double>(n) * omega)) *
                       (n >= 3 ? determinant(pair, z + omega, omega, Interval::first(n - 2), E)
                               : ScaledValue::one()))
                   : ScaledValue::zero();
        if (n == 2) e11 = -(ScaledValue::from(pair.tilde_b(z) * pair.b(z + 2.0 * omega)));
        const ScaledValue expect[4] = {e00, e01, e10, e11};
        for (int idx = 0; idx < 4; ++idx) {
            ScaledValue got = M.entry(idx / 2, idx % 2);
            worst = std::max(worst, got.relative_error_to(expect[idx]));
        }
    }
    record("transfer_entry_identity", worst, 1e-9);

    // det M_l^a = conj(P_l(x)) P_l(x + omega): step-factored determinant for
    // every length, assembled 2x2 determinant only while the subtraction still
    // carries digits (hyperbolic products cancel like exp(-2 l L))
    worst = 0.0;
    double worst_direct = 0.0;
    for (int t = 0; t < 24; ++t) {
        double x = unif(rng);
        cplx E(4.0 * unif(rng) - 2.0, 0.0);
        long n = 1 + static_cast<long>(unif(rng) * 24);
        ScaledMatrix2 M = transfer_product(pair, cplx(x, 0.0), omega, n, E, Variant::a);
        ScaledValue det_factored = ScaledValue::one();
        for (long j = 0; j < n; ++j) {
            det_factored = det_factored * (pair.tilde_b(cplx(x, 0.0) + static_cast<double>(j) * omega) *
                                           pair.b(cplx(x, 0.0) + static_cast<double>(j + 1) * omega));
        }
        ScaledValue p0 = ScaledValue::one(), p1 = ScaledValue::one();
        for (long k = 0; k < n; ++k) {
            p0 = p0 * pair.b(cplx(x, 0.0) + static_cast<double>(k) * omega);
            p1 = p1 * pair.b(cplx(x + omega, 0.0) + static_cast<double>(k) * omega);
        }
        ScaledValue expect{p0.log_mag + p1.log_mag, std::conj(p0.unit) * p1.unit,
                           p0.is_zero || p1.is_zero};
        worst = std::max(worst, det_factored.relative_error_to(expect));
        double cancel = std::abs(M.m[0] * M.m[3]) + std::abs(M.m[1] * M.m[2]);
        cplx direct = M.m[0] * M.m[3] - M.m[1] * M.m[2];
        if (std::abs(direct) > 1e-6 * cancel && !M.is_zero) {
            ScaledValue dv = M.det();
            worst_direct = std::max(worst_direct, dv.relative_error_to(expect));
        }
    }
    record("det_product_identity", worst, 1e-9);
    record("det_product_identity_direct", worst_direct, 1e-9);

    // log||M^u|| = -(1/2)(S~ + S(.+omega)) + log||M^a||
    worst = 0.0;
    for (int t = 0; t < 24; ++t) {
        double x = unif(rng);
        cplx E(4.0 * unif(rng) - 2.0, 0.0);
        long n = 1 + static_cast<long>(unif(rng) * 48);
        double lu = transfer_product(pair, cplx(x, 0.0), omega, n, E, Variant::u).log_norm();
        double la = transfer_product(pair, cplx(x, 0.0), omega, n, E, Variant::a).log_norm();
        BirkhoffSums b0 = birkhoff_sums(pair, cplx(x, 0.0), omega, n);
        BirkhoffSums b1 = birkhoff_sums(pair, cplx(x + omega, 0.0), omega, n);
        worst = std::max(worst, std::abs(lu - (-0.5 * (b0.s_tilde + b1.s) + la)));
    }
    record("unimodular_scaling_identity", worst, 1e-9);

    // S_N = S~_N on the torus
    worst = 0.0;
    for (int t = 0; t < 24; ++t) {
        BirkhoffSums bs = birkhoff_sums(pair, cplx(unif(rng), 0.0), omega, 128);
        worst = std::max(worst, std::abs(bs.s - bs.s_tilde));
    }
    record("birkhoff_conjugate_equality", worst, 1e-9);

    // eigensystem covariance under window shifts
    worst = 0.0;
    for (int t = 0; t < 8; ++t) {
        double x = unif(rng);
        long m = static_cast<long>(unif(rng) * 40);
        long l = 4 + static_cast<long>(unif(rng) * 12);
        auto ea = eigenvalues_only(build_window(pair, cplx(x, 0.0), omega, {m, m + l - 1}));
        auto eb = eigenvalues_only(
            build_window(pair, cplx(x + static_cast<double>(m) * omega, 0.0), omega, Interval::first(l)));
        for (long j = 0; j < l; ++j) worst = std::max(worst, std::abs(ea[j] - eb[j]));
    }
    record("eigensystem_covariance", worst, 1e-10);

    // determinant vanishes on the eigensolver spectrum
    worst = 0.0;
    for (int t = 0; t < 8; ++t) {
        double x = unif(rng);
        long n = 8 + static_cast<long>(unif(rng) * 24);
        JacobiWindow w = build_window(pair, cplx(x, 0.0), omega, Interval::first(n));
        SpectralData sd = eigensystem(w);
        // |f(E_j)| relative to the characteristic scale exp(max log)
        double ref = determinant(pair, cplx(x, 0.0), omega, Interval::first(n),
                                 cplx(sd.eigenvalues[0] + 1.0, 0.5))
                         .log_mag;
        for (long j = 0; j < n; ++j) {
            ScaledValue f = determinant(pair, cplx(x, 0.0), omega, Interval::first(n),
                                        cplx(sd.eigenvalues[j], 0.0));
            if (!f.is_zero) worst = std::max(worst, std::exp(f.log_mag - ref));
        }
    }
    record("determinant_zero_on_spectrum", worst, 1e-7);

    // Poisson identity on eigenpairs of interior sub-windows
    worst = 0.0;
    long excluded = 0;
    for (int t = 0; t < 4; ++t) {
        double x = unif(rng);
        long n = 24;
        JacobiWindow w = build_window(pair, cplx(x, 0.0), omega, Interval::first(n));
        SpectralData sd = eigensystem(w);
        for (long j = 0; j < n; j += 3) {
            for (long a = 1; a + 8 <= n - 1; a += 5) {
                Interval sub{a, a + 7};
                for (long m = sub.lo; m <= sub.hi; m += 2) {
                    PoissonResidual pr =
                        poisson_residual(w, sd.eigenvectors[j], sd.eigenvalues[j], sub, m);
                    if (pr.singular) {
                        ++excluded;
                        continue;
                    }
                    worst = std::max(worst, pr.residual);
                }
            }
        }
    }
    record("poisson_identity", worst, 1e-8);

    // resolvent identity and Hermitian symmetry at mid-gap energies
    worst = 0.0;
    double worst_h = 0.0;
    for (int t = 0; t < 4; ++t) {
        double x = unif(rng);
        long n = 12;
        auto spec = eigenvalues_only(build_window(pair, cplx(x, 0.0), omega, Interval::first(n)));
        double e = 0.5 * (spec[n / 2 - 1] + spec[n / 2]);
        auto G = green_matrix(pair, x, omega, n, e);
        JacobiWindow w = build_window(pair, cplx(x, 0.0), omega, Interval::first(n));
        for (long r = 0; r < n; ++r) {
            for (long c = 0; c < n; ++c) {
                cplx acc = (w.diag[r] - e) * G[r * n + c];
                if (r > 0) acc += w.lower[r - 1] * G[(r - 1) * n + c];
                if (r + 1 < n) acc += w.upper[r] * G[(r + 1) * n + c];
                if (r == c) acc -= 1.0;
                worst = std::max(worst, std::abs(acc));
                worst_h = std::max(worst_h, std::abs(G[r * n + c] - std::conj(G[c * n + r])));
            }
        }
    }
    record("resolvent_identity", worst, 1e-8);
    record("resolvent_hermitian_symmetry", worst_h, 1e-9);

    // Dirichlet determinant vector matches the eigensolver
    worst = 0.0;
    for (int t = 0; t < 6; ++t) {
        double x = unif(rng);
        long n = 4 + static_cast<long>(unif(rng) * 12);
        JacobiWindow w = build_window(pair, cplx(x, 0.0), omega, Interval::first(n));
        SpectralData sd = eigensystem(w);
        long j = static_cast<long>(unif(rng) * n);
        DirichletVector dv;
        try {
            dv = dirichlet_eigenvector(pair, x, omega, n, sd.eigenvalues[j]);
        } catch (const std::exception&) {
            continue;  // b vanished on the orbit
        }
        if (dv.degraded) continue;
        cplx overlap(0.0, 0.0);
        for (long k = 0; k < n; ++k) overlap += std::conj(dv.values[k]) * sd.eigenvectors[j][k];
        worst = std::max(worst, 1.0 - std::abs(overlap));
    }
    record("dirichlet_vector_overlap", worst, 1e-8);

    nlohmann::ordered_json summary;
    summary["checks"] = checks;
    summary["all_pass"] = all_pass;
    summary["poisson_singular_excluded"] = excluded;
    ctx.emit("identities_summary.json", summary.dump(2));
    if (!all_pass) throw std::runtime_error("identity suite failed");
}

}  // namespace

int run_subcommand(const std::string& subcommand, const ExperimentConfig& config,
                   RunManifest* manifest_out) {
    auto t0 = std::chrono::steady_clock::now();
    RunManifest manifest;
    manifest.tool_version = tool_version();

    // resolve model path relative to the config location
    fs::path model_path = config.model_path;
    if (model_path.is_relative() && !config.config_dir.empty())
        model_path = fs::path(config.config_dir) / model_path;

    SamplingPair pair;
    ExperimentConfig cfg = config;
    try {
        pair = load_model(model_path.string());
        std::ifstream mf(model_path, std::ios::binary);
        std::stringstream ms;
        ms << mf.rdbuf();
        manifest.config_hash = fnv1a_hex(cfg.raw_json + "\n" + ms.str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "{\"error\":\"config\",\"detail\":\"%s\"}\n", e.what());
        return 1;
    }

    double omega = cfg.omega.value();
    auto cf = continued_fraction(omega, 40);
    manifest.grid_provenance = "q_s=" + std::to_string(cf.denominator_near(cfg.x_grid));

    int threads = cfg.threads;
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;

    fs::path out(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
        std::fprintf(stderr, "{\"error\":\"config\",\"detail\":\"cannot create output dir %s\"}\n",
                     out.string().c_str());
        return 1;
    }

    TaskRecord record;
    record.name = subcommand;
    TaskContext ctx{cfg, pair, omega, threads, out, &record};

    int status = 0;
    try {
        if (subcommand == "spectrum") {
            run_spectrum(ctx);
        } else if (subcommand == "lyapunov") {
            run_lyapunov(ctx);
        } else if (subcommand == "gaps") {
            run_gaps(ctx);
        } else if (subcommand == "resonances") {
            run_resonances(ctx);
        } else if (subcommand == "badset") {
            run_badset(ctx);
        } else if (subcommand == "localize") {
            run_localize(ctx);
        } else if (subcommand == "green-check") {
            run_green_check(ctx);
        } else if (subcommand == "ldt") {
            run_ldt(ctx);
        } else if (subcommand == "avalanche-check") {
            run_avalanche_check(ctx);
        } else if (subcommand == "identities") {
            run_identities(ctx);
        } else {
            std::fprintf(stderr, "{\"error\":\"config\",\"detail\":\"unknown subcommand %s\"}\n",
                         subcommand.c_str());
            return 1;
        }
    } catch (const std::exception& e) {
        record.failed = true;
        record.diagnostic = e.what();
        status = 2;
    }

    manifest.tasks.push_back(record);
    auto t1 = std::chrono::steady_clock::now();
    manifest.wall_clock_seconds = std::chrono::duration<double>(t1 - t0).count();

    std::ofstream mf(out / "manifest.json", std::ios::binary);
    mf << manifest.to_json();
    if (manifest_out) *manifest_out = manifest;
    return status;
}

}  // namespace qpj
