#include "stc/cli.hpp"

#include "stc/analysis.hpp"
#include "stc/numfield.hpp"
#include "stc/sim.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace stc::cli {
namespace {

using Json = nlohmann::ordered_json;

struct Options {
    std::string field = "Q(zeta8)";
    bool alamouti = false;
    std::string radii;
    std::string snr = "10:22:2";
    double r = 0.0;
    int n = 2;
    int n_r = 2;
    int K = 1;
    std::uint64_t trials = 10000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::uint64_t target_errors = 0;
    std::uint64_t max_trials = 0;
    std::string code = "alamouti";
    double base_radius = 2.0;
    double delta = 0.7;
    std::optional<std::size_t> budget;
    std::string out;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
std::string num(std::uint64_t v) { return std::to_string(v); }
std::string num(std::size_t v, int) { return std::to_string(v); }
std::string flag(bool v) { return v ? "true" : "false"; }

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct Result {
    Table table;
    Json summary = Json::object();
    int exit_code = kExitOk;
};

/// "lo:hi:step", a single value, or a comma-separated list of either.
std::vector<double> parse_grid_list(const std::string& text, const char* what) {
    if (text.empty()) throw PreconditionError(std::string("missing ") + what + " grid");
    std::vector<double> grid;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto piece = parse_grid(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        grid.insert(grid.end(), piece.begin(), piece.end());
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw PreconditionError(std::string(what) + " grid must be strictly increasing");
    return grid;
}

std::size_t resolve_budget(const Options& o) {
    if (o.budget) return *o.budget;
    if (const char* env = std::getenv("STC_DMT_BUDGET")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0' || v == 0)
            throw PreconditionError(std::string("STC_DMT_BUDGET must be a positive integer, got '") + env + "'");
        return std::size_t(v);
    }
    return kDefaultEnumerationBudget;
}

NumberFieldSpec resolve_field(const std::string& name) {
    for (const auto& id : catalog_ids())
        if (id == name) return catalog_field(id);
    if (!std::filesystem::exists(name))
        throw PreconditionError("missing field spec: '" + name + "' is neither a catalog id nor a file");
    return load_field_spec(name);
}

Json config_echo(const std::string& command, const Options& o, const std::vector<std::string_view>& keys) {
    Json c;
    c["subcommand"] = command;
    for (auto k : keys) {
        if (k == "field") c["field"] = o.field;
        else if (k == "alamouti") c["alamouti"] = o.alamouti;
        else if (k == "radii") c["radii"] = o.radii;
        else if (k == "snr") c["snr"] = o.snr;
        else if (k == "r") c["r"] = o.r;
        else if (k == "n") c["n"] = o.n;
        else if (k == "nr") c["nr"] = o.n_r;
        else if (k == "K") c["K"] = o.K;
        else if (k == "trials") c["trials"] = o.trials;
        else if (k == "seed") c["seed"] = o.seed;
        else if (k == "workers") c["workers"] = o.workers;
        else if (k == "target-errors") c["target-errors"] = o.target_errors;
        else if (k == "max-trials") c["max-trials"] = o.max_trials;
        else if (k == "code") c["code"] = o.code;
        else if (k == "base-radius") c["base-radius"] = o.base_radius;
        else if (k == "delta") c["delta"] = o.delta;
        else if (k == "budget") c["budget"] = resolve_budget(o);
    }
    return c;
}

Json fit_summary(const ErrorRateCurve& curve) {
    Json j;
    const auto window = auto_window(curve);
    if (!window) {
        j["fit"] = nullptr;
        j["fit_note"] = "no grid prefix meets the 20-error floor";
        return j;
    }
    try {
        const auto s = dmt_slope(curve, window->first, window->second);
        j["fit"] = {{"lo_db", s.lo_db}, {"hi_db", s.hi_db}, {"slope", s.slope}, {"d_hat", s.d_hat}, {"stderr", s.stderr_}};
    } catch (const PreconditionError& ex) {
        j["fit"] = nullptr;
        j["fit_note"] = ex.what();
    }
    return j;
}

ChannelConfig channel_config(const Options& o) {
    ChannelConfig cfg;
    cfg.n_r = o.n_r;
    cfg.snr_grid_db = parse_grid_list(o.snr, "snr");
    cfg.r = o.r;
    cfg.trials_per_snr = o.trials;
    cfg.master_seed = o.seed;
    cfg.workers = o.workers;
    cfg.target_errors = o.target_errors;
    cfg.max_trials_per_snr = o.max_trials;
    return cfg;
}

/// Scheme for --code plus its block size n (= n_t = T).
std::pair<CodeScheme, int> resolve_code(const Options& o) {
    if (o.code == "alamouti") return {CodeScheme::alamouti_box(), 2};
    const auto f = resolve_field(o.code);
    return {CodeScheme::spherical(field_lattice(f), o.base_radius, f.id), f.n};
}

Result cmd_count(const Options& o) {
    const auto radii = parse_grid_list(o.radii.empty() ? "4:40:4" : o.radii, "radius");
    const MatrixLattice lattice = o.alamouti ? alamouti_lattice() : field_lattice(resolve_field(o.field));
    const auto fit = count_scaling_fit(lattice, std::span<const double>(radii), resolve_budget(o));
    Result res;
    res.table.columns = {"R", "count"};
    for (std::size_t i = 0; i < radii.size(); ++i) res.table.rows.push_back({num(radii[i]), num(fit.counts[i], 0)});
    res.summary = {{"lattice", o.alamouti ? std::string("alamouti") : o.field}, {"k_hat", fit.k_hat}, {"c_hat", fit.c_hat}};
    return res;
}

Result cmd_units(const Options& o) {
    const auto radii = parse_grid_list(o.radii.empty() ? "4:64:4" : o.radii, "radius");
    const auto f = resolve_field(o.field);
    const auto budget = resolve_budget(o);
    std::vector<double> counts;
    Result res;
    res.table.columns = {"R", "units"};
    for (double R : radii) {
        counts.push_back(double(enumerate_units_ball(f, R, budget).size()));
        res.table.rows.push_back({num(R), num(std::uint64_t(counts.back()))});
    }
    const auto poly = polylog_fit(counts, radii, double(f.n - 1));
    const auto power = power_law_fit(counts, radii);
    res.summary = {{"field", f.id},
                   {"polylog_power", f.n - 1},
                   {"m_hat", poly.m_hat},
                   {"max_relative_residual", poly.residual},
                   {"flagged", poly.flagged},
                   {"power_exponent", power.exponent},
                   {"power_c_hat", power.c_hat}};
    return res;
}

Result cmd_zeta(const Options& o) {
    const auto radii = parse_grid_list(o.radii.empty() ? "5:30:5" : o.radii, "radius");
    const auto f = resolve_field(o.field);
    const auto budget = resolve_budget(o);
    Result res;
    res.table.columns = {"R", "classes", "value", "bound", "dominated"};
    std::size_t violations = 0;
    for (double R : radii) {
        const auto census = norm_census(f, R, budget);
        const auto rep = restricted_zeta_sum(f, census, double(o.n_r));
        const bool ok = rep.value <= rep.bound_value;
        violations += ok ? 0 : 1;
        res.table.rows.push_back({num(R), num(rep.term_count, 0), num(rep.value), num(rep.bound_value), flag(ok)});
    }
    res.summary = {{"field", f.id}, {"s", o.n_r}, {"violations", violations}};
    return res;
}

Result cmd_elemsum(const Options& o) {
    const auto radii = parse_grid_list(o.radii.empty() ? "4,8,16,32" : o.radii, "radius");
    const auto f = resolve_field(o.field);
    const auto series = full_element_sum_series(f, radii, o.n_r, resolve_budget(o));
    Result res;
    res.table.columns = {"R", "elements", "classes", "max_class_size", "value", "decomposition", "identity_exact", "bound"};
    std::vector<double> max_sizes, values, m_ratio;
    bool identity = true;
    const double value_power = 3.0 * f.n - 1.0;
    for (const auto& rep : series) {
        res.table.rows.push_back({num(rep.radius), num(rep.term_count, 0), num(rep.class_count, 0),
                                  num(rep.max_class_size, 0), num(rep.value), num(rep.decomposition),
                                  flag(rep.identity_exact), num(rep.bound_value)});
        max_sizes.push_back(double(rep.max_class_size));
        values.push_back(rep.value);
        m_ratio.push_back(rep.value / std::pow(std::log(rep.radius), value_power));
        identity = identity && rep.identity_exact;
    }
    const auto sizes_fit = polylog_fit(max_sizes, radii, double(f.n - 1));
    const auto value_fit = polylog_fit(values, radii, value_power);
    Json m = Json::array();
    for (double v : m_ratio) m.push_back(v);
    double spread = 0;
    if (m_ratio.size() >= 3) {
        const auto top = std::span<const double>(m_ratio).last(3);
        spread = *std::max_element(top.begin(), top.end()) / *std::min_element(top.begin(), top.end());
    }
    res.summary = {{"field", f.id},
                   {"n_r", o.n_r},
                   {"identity_exact", identity},
                   {"max_class_size_residual", sizes_fit.residual},
                   {"value_m_hat", value_fit.m_hat},
                   {"value_residual", value_fit.residual},
                   {"m_per_radius", m},
                   {"m_spread_top3", spread}};
    return res;
}

Result cmd_bound(const Options& o) {
    const auto grid = parse_grid_list(o.snr, "snr");
    Result res;
    res.table.columns = {"rho_db", "union_bound"};
    std::vector<double> lx, ly;
    for (double db : grid) {
        const double b = alamouti_union_bound(db_to_linear(db), o.r, o.n_r);
        res.table.rows.push_back({num(db), num(b)});
        if (b < 1.0) {
            lx.push_back(db / 10.0);
            ly.push_back(std::log10(b));
        }
    }
    res.summary = {{"r", o.r}, {"n_r", o.n_r}};
    if (lx.size() >= 2) res.summary["slope_below_one"] = fit_line(lx, ly).slope;
    else res.summary["slope_below_one"] = nullptr;
    return res;
}

void append_curve(Table& t, Json& s, const DmtCurve& c) {
    Json pts = Json::array();
    for (const auto& [r, d] : c.points) {
        t.rows.push_back({c.label, num(r), num(d)});
        pts.push_back({r, d});
    }
    s[c.label] = pts;
}

Result cmd_curves(const Options& o) {
    Result res;
    res.table.columns = {"curve", "r", "d"};
    append_curve(res.table, res.summary, dmt_upper_bound_curve(o.n, o.n_r));
    if (o.n == 2) append_curve(res.table, res.summary, alamouti_dmt_curve(o.n_r));
    if (o.K >= 2) {
        const auto mac = mac_dmt_curves(o.n, o.n_r, o.K);
        append_curve(res.table, res.summary, mac.joint);
        append_curve(res.table, res.summary, mac.per_user);
    }
    return res;
}

void rate_rows(Result& res, const ErrorRateCurve& curve) {
    res.table.columns = {"rho_db", "code_size", "errors", "trials", "p_e", "degenerate"};
    for (const auto& e : curve.entries)
        res.table.rows.push_back({num(e.rho_db), num(e.code_size, 0), num(e.errors), num(e.trials), num(e.p_e), flag(e.degenerate)});
}

Result cmd_pep(const Options& o) {
    ChannelConfig cfg = channel_config(o);
    cfg.n_t = cfg.T = o.n;
    const ComplexMatrix x = ComplexMatrix::Zero(o.n, o.n);
    const ComplexMatrix xp = o.delta * ComplexMatrix::Identity(o.n, o.n);
    const auto curve = estimate_pairwise_error(x, xp, cfg);
    Result res;
    res.table.columns = {"rho_db", "errors", "trials", "p_e", "det_bound"};
    const double det_abs = std::pow(std::abs(o.delta), o.n);
    for (const auto& e : curve.entries)
        res.table.rows.push_back({num(e.rho_db), num(e.errors), num(e.trials), num(e.p_e),
                                  num(pep_lower_bound_exponent(o.n, o.n_r, det_abs, db_to_linear(e.rho_db)))});
    res.summary = fit_summary(curve);
    return res;
}

Result cmd_simulate(const Options& o) {
    ChannelConfig cfg = channel_config(o);
    validate(cfg);
    const auto [scheme, n] = resolve_code(o);
    cfg.n_t = cfg.T = n;
    const auto curve = estimate_error_rate(scheme, cfg);
    Result res;
    rate_rows(res, curve);
    res.summary = {{"code", scheme.label}};
    res.summary.update(fit_summary(curve));
    return res;
}

Result cmd_mac(const Options& o) {
    ChannelConfig cfg = channel_config(o);
    validate(cfg);
    const auto [scheme, n] = resolve_code(o);
    cfg.n_t = cfg.T = n;
    if (o.K < 1) throw PreconditionError("K must be positive");
    const auto mac = mac_simulate(std::vector<CodeScheme>(std::size_t(o.K), scheme), cfg);
    Result res;
    res.table.columns = {"rho_db", "code_size", "trials", "joint_errors", "joint_p_e"};
    for (int k = 1; k <= o.K; ++k) {
        res.table.columns.push_back("user" + std::to_string(k) + "_errors");
        res.table.columns.push_back("user" + std::to_string(k) + "_p_e");
    }
    bool ordered = true;
    for (std::size_t i = 0; i < mac.joint.entries.size(); ++i) {
        const auto& e = mac.joint.entries[i];
        std::vector<std::string> row{num(e.rho_db), num(e.code_size, 0), num(e.trials), num(e.errors), num(e.p_e)};
        for (const auto& u : mac.per_user) {
            row.push_back(num(u.entries[i].errors));
            row.push_back(num(u.entries[i].p_e));
            ordered = ordered && u.entries[i].p_e <= e.p_e;
        }
        res.table.rows.push_back(std::move(row));
    }
    res.summary = {{"code", scheme.label}, {"K", o.K}, {"per_user_le_joint", ordered}};
    res.summary.update(fit_summary(mac.joint));
    return res;
}

RingElement random_element(TrialStream& s, int size, std::int64_t span) {
    IntVector c(std::size_t(size), 0);
    for (auto& v : c) v = std::int64_t(s.index(std::uint64_t(2 * span + 1))) - span;
    return RingElement(std::span<const std::int64_t>(c));
}

ComplexMatrix random_gaussian(TrialStream& s, int rows, int cols) { return sample_channel(rows, cols, s); }

Result cmd_check(const Options& o) {
    const auto budget = resolve_budget(o);
    std::vector<NumberFieldSpec> fields;
    const auto ids = catalog_ids();
    for (const auto& id : ids) fields.push_back(catalog_field(id));
    if (std::find(ids.begin(), ids.end(), o.field) == ids.end()) fields.push_back(resolve_field(o.field));

    Result res;
    res.table.columns = {"property", "pass", "detail"};
    Json props = Json::object();
    std::size_t failures = 0;
    auto record = [&](const std::string& name, bool ok, const std::string& detail) {
        res.table.rows.push_back({name, flag(ok), detail});
        props[name] = ok;
        failures += ok ? 0 : 1;
    };
    std::uint32_t stream = 0;

    for (const auto& f : fields) {
        try {
            validate(f);
            const auto back = parse_field_spec(field_spec_to_json(f));
            const bool same = back.n == f.n && back.mul_tensor == f.mul_tensor;
            record("field_spec:" + f.id, same, same ? "valid, JSON round trip exact" : "JSON round trip changed the field");
        } catch (const PreconditionError& ex) {
            record("field_spec:" + f.id, false, ex.what());
            continue;
        }

        std::size_t hom_bad = 0, norm_bad = 0;
        for (std::uint64_t t = 0; t < 200; ++t) {
            TrialStream s(o.seed, stream, t);
            const auto x = random_element(s, f.basis_size(), 5), y = random_element(s, f.basis_size(), 5);
            const auto xy = ring_mul(f, x, y);
            const ComplexMatrix lhs = embed(f, xy), rhs = embed(f, x) * embed(f, y);
            if ((lhs - rhs).norm() > 1e-9 * std::max(1.0, rhs.norm())) ++hom_bad;
            if (norm_abs(f, xy) != norm_abs(f, x) * norm_abs(f, y)) ++norm_bad;
        }
        ++stream;
        record("ring_homomorphism:" + f.id, hom_bad == 0, std::to_string(hom_bad) + " violations in 200");
        record("norm_multiplicative:" + f.id, norm_bad == 0, std::to_string(norm_bad) + " violations in 200");

        std::size_t det_bad = 0;
        const auto ball = enumerate_integers_ball(f, 5.0, budget);
        for (const auto& x : ball)
            if (!x.is_zero() && norm_abs(f, x) < 1) ++det_bad;
        record("minimum_determinant:" + f.id, det_bad == 0,
               std::to_string(det_bad) + " violations in " + std::to_string(ball.size()) + " elements at R = 5");

        const auto am = am_gm_chain(f, 5.0, budget);
        record("am_gm_chain:" + f.id, am.violations == 0,
               std::to_string(am.violations) + " violations in " + std::to_string(am.elements) + " elements at R = 5");
    }

    std::size_t dsum_bad = 0, svd_bad = 0, alam_bad = 0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
        TrialStream s(o.seed, stream, t);
        const std::vector<ComplexMatrix> blocks{random_gaussian(s, 2, 2), random_gaussian(s, 2, 2)};
        if (!det_sum_inequality_check(blocks).ok) ++dsum_bad;
        if (!singular_value_match(random_gaussian(s, 4, 2))) ++svd_bad;
        std::array<std::int64_t, 4> x{};
        for (auto& v : x) v = std::int64_t(s.index(2001)) - 1000;
        const ComplexMatrix a = alamouti(double(x[0]), double(x[1]), double(x[2]), double(x[3]));
        const std::complex<double> det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        const double sq = double(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
        if (det != std::complex<double>(sq, 0.0)) ++alam_bad;
    }
    record("det_sum_inequality", dsum_bad == 0, std::to_string(dsum_bad) + " violations in 1000");
    record("singular_value_match", svd_bad == 0, std::to_string(svd_bad) + " violations in 1000");
    record("alamouti_determinant", alam_bad == 0, std::to_string(alam_bad) + " violations in 1000");

    const auto ub = dmt_upper_bound_curve(2, 2);
    const auto al = alamouti_dmt_curve(2);
    const auto mac = mac_dmt_curves(2, 2, 2);
    using P = std::pair<double, double>;
    const bool ends = ub.points.front() == P{0, 4} && ub.points.back() == P{1, 0} && al.points == ub.points &&
                      mac.joint.points.front() == P{0, 4} && mac.joint.points.back() == P{2, 0} &&
                      mac.per_user.points.back() == P{1, 0};
    record("dmt_curve_endpoints", ends, "n = 2, n_r = 2, K = 2");

    const bool kat = philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u};
    record("philox_known_answer", kat, "zero counter and key");

    res.summary = {{"properties", props}, {"failed", failures}};
    res.exit_code = failures == 0 ? kExitOk : kExitInvalid;
    return res;
}

std::string csv_cell(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string q = "\"";
    for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

void write_csv(std::ostream& os, const std::vector<std::string>& header, const Table& t) {
    for (const auto& h : header) os << h << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
        os << '\n';
    }
}

void emit(const Result& res, const Json& config, const Options& o, std::ostream& out) {
    const std::vector<std::string> header{std::string("# stc_dmt ") + STC_VERSION, "# config: " + config.dump(),
                                          "# master_seed: " + std::to_string(o.seed)};
    Json doc;
    doc["tool"] = "stc_dmt";
    doc["version"] = STC_VERSION;
    doc["config"] = config;
    doc["master_seed"] = o.seed;
    doc["summary"] = res.summary;
    const std::string json_text = doc.dump(2) + "\n";
    if (o.out.empty()) {
        write_csv(out, header, res.table);
        out << json_text;
        return;
    }
    std::ofstream csv(o.out + ".csv", std::ios::binary), js(o.out + ".json", std::ios::binary);
    if (!csv || !js) throw Error("cannot write output files with stem '" + o.out + "'");
    write_csv(csv, header, res.table);
    js << json_text;
    out << "wrote " << o.out << ".csv and " << o.out << ".json\n";
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lattice space-time code and DMT experiment runner", "stc_dmt"};
    app.require_subcommand(1);
    app.set_version_flag("--version", STC_VERSION);
    Options o;

    auto common = [&](CLI::App* s, const std::vector<std::string_view>& keys) {
        for (auto k : keys) {
            if (k == "field") s->add_option("--field", o.field, "catalog id or path to a field-spec JSON file")->capture_default_str();
            else if (k == "radii") s->add_option("--radii", o.radii, "radius grid lo:hi:step or comma list");
            else if (k == "snr") s->add_option("--snr", o.snr, "SNR grid in dB, lo:hi:step or comma list")->capture_default_str();
            else if (k == "r") s->add_option("--r", o.r, "multiplexing gain")->capture_default_str();
            else if (k == "n") s->add_option("--n", o.n, "block size n = n_t = T")->capture_default_str();
            else if (k == "nr") s->add_option("--nr", o.n_r, "receive antennas")->capture_default_str();
            else if (k == "K") s->add_option("--K", o.K, "number of users")->capture_default_str();
            else if (k == "trials") s->add_option("--trials", o.trials, "trials per SNR point (minimum when adaptive)")->capture_default_str();
            else if (k == "seed") s->add_option("--seed", o.seed, "master seed")->capture_default_str();
            else if (k == "workers") s->add_option("--workers", o.workers, "worker threads")->capture_default_str();
            else if (k == "target-errors") s->add_option("--target-errors", o.target_errors, "stop a point after this many errors")->capture_default_str();
            else if (k == "max-trials") s->add_option("--max-trials", o.max_trials, "trial cap per point when adaptive")->capture_default_str();
            else if (k == "code") s->add_option("--code", o.code, "alamouti, a catalog field id or a field-spec path")->capture_default_str();
            else if (k == "base-radius") s->add_option("--base-radius", o.base_radius, "spherical code radius at r = 0")->capture_default_str();
            else if (k == "delta") s->add_option("--delta", o.delta, "difference X' - X = delta * I")->capture_default_str();
            else if (k == "budget") s->add_option("--budget", o.budget, "enumeration cap (default STC_DMT_BUDGET or 10^7)");
            else if (k == "alamouti") s->add_flag("--alamouti", o.alamouti, "use the Alamouti lattice instead of a field");
        }
        s->add_option("--out", o.out, "output stem: writes STEM.csv and STEM.json");
    };

    struct Command {
        const char* name;
        const char* help;
        std::vector<std::string_view> keys;
        Result (*handler)(const Options&);
    };
    const std::vector<Command> commands{
        {"count", "lattice points in Frobenius balls and the R^k fit", {"field", "alamouti", "radii", "budget"}, cmd_count},
        {"units", "units in balls and the (log R)^(n-1) fit", {"field", "radii", "budget"}, cmd_units},
        {"zeta", "restricted zeta sums against their bound", {"field", "radii", "nr", "budget"}, cmd_zeta},
        {"elemsum", "full element sums and class sizes", {"field", "radii", "nr", "budget"}, cmd_elemsum},
        {"bound", "Alamouti union bound over an SNR grid", {"snr", "r", "nr"}, cmd_bound},
        {"curves", "closed-form DMT curves", {"n", "nr", "K"}, cmd_curves},
        {"pep", "pairwise error probability for X' - X = delta * I",
         {"snr", "n", "nr", "delta", "trials", "seed", "workers", "target-errors", "max-trials"}, cmd_pep},
        {"simulate", "single-user error rate",
         {"code", "base-radius", "snr", "r", "nr", "trials", "seed", "workers", "target-errors", "max-trials"}, cmd_simulate},
        {"mac", "K-user joint decoding",
         {"code", "base-radius", "snr", "r", "nr", "K", "trials", "seed", "workers", "target-errors", "max-trials"}, cmd_mac},
        {"check", "invariant suite, one pass/fail row per property", {"field", "seed", "budget"}, cmd_check},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) {
        auto* s = app.add_subcommand(c.name, c.help);
        common(s, c.keys);
        subs.push_back(s);
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInvalid;
    }

    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        const auto& c = commands[i];
        try {
            const Json config = config_echo(c.name, o, c.keys);
            const Result res = c.handler(o);
            emit(res, config, o, out);
            return res.exit_code;
        } catch (const BudgetExceeded& ex) {
            err << "budget exhausted: " << ex.what() << '\n';
            return kExitBudget;
        } catch (const std::exception& ex) {
            err << "error: " << ex.what() << '\n';
            return kExitInvalid;
        }
    }
    return kExitInvalid;
}

} // namespace stc::cli
