#include "qcorr/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace qcorr {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s)
{
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok)
        out.push_back(tok);
    return out;
}

double to_double(const std::string& key, const std::string& v)
{
    if (v == "nan" || v == "auto")
        return std::numeric_limits<double>::quiet_NaN();
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("config: " + key + ": expected a number, got '" + v + "'");
    return out;
}

long to_long(const std::string& key, const std::string& v)
{
    long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("config: " + key + ": expected an integer, got '" + v + "'");
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v)
{
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("config: " + key + ": expected an unsigned integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "yes" || v == "1" || v == "on")
        return true;
    if (v == "false" || v == "no" || v == "0" || v == "off")
        return false;
    throw ConfigError("config: " + key + ": expected true or false, got '" + v + "'");
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

std::vector<double> to_doubles(const std::string& key, const std::string& v)
{
    std::vector<double> out;
    for (const auto& t : split_ws(v))
        out.push_back(to_double(key, t));
    return out;
}

std::string from_doubles(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? " " : "") + format_double(v[i]);
    return out;
}

template <class E>
struct EnumTable {
    std::vector<std::pair<std::string, E>> entries;

    E parse(const std::string& key, const std::string& v) const
    {
        for (const auto& [n, e] : entries)
            if (n == v)
                return e;
        std::string allowed;
        for (const auto& [n, e] : entries)
            allowed += (allowed.empty() ? "" : ", ") + n;
        throw ConfigError("config: " + key + ": '" + v + "' is not one of " + allowed);
    }

    std::string name(E e) const
    {
        for (const auto& [n, x] : entries)
            if (x == e)
                return n;
        return "?";
    }
};

const EnumTable<HamiltonianKind> kHamiltonians{{{"harmonic", HamiltonianKind::harmonic},
                                                 {"quartic", HamiltonianKind::quartic},
                                                 {"double_well", HamiltonianKind::double_well},
                                                 {"cosine_lattice", HamiltonianKind::cosine_lattice},
                                                 {"zero", HamiltonianKind::zero}}};
const EnumTable<LindbladScheme> kLindbladSchemes{{{"split", LindbladScheme::split}, {"rk4", LindbladScheme::rk4}}};
const EnumTable<DriftScheme> kDriftSchemes{{{"rk4", DriftScheme::rk4}, {"euler", DriftScheme::euler}}};
const EnumTable<LangevinScheme> kLangevinSchemes{
    {{"heun", LangevinScheme::stratonovich_heun}, {"ito", LangevinScheme::ito_euler}}};
const EnumTable<OutputFormat> kFormats{{{"csv", OutputFormat::csv}, {"json", OutputFormat::json}}};

// "re_x im_x re_p im_p; ..." with L = (re_x + i im_x)·x + (re_p + i im_p)·p
std::vector<LindbladSpec> to_lindblad(const std::string& key, const std::string& v)
{
    std::vector<LindbladSpec> out;
    if (trim(v).empty() || trim(v) == "none")
        return out;
    std::istringstream is(v);
    std::string item;
    while (std::getline(is, item, ';')) {
        const std::vector<double> c = to_doubles(key, item);
        if (c.size() != 4)
            throw ConfigError("config: " + key + ": each operator needs 4 numbers (re_x im_x re_p im_p)");
        out.push_back({cplx(c[0], c[1]), cplx(c[2], c[3])});
    }
    return out;
}

std::string from_lindblad(const std::vector<LindbladSpec>& l)
{
    if (l.empty())
        return "none";
    std::string out;
    for (std::size_t i = 0; i < l.size(); ++i) {
        if (i)
            out += "; ";
        out += from_doubles({l[i].x_coeff.real(), l[i].x_coeff.imag(), l[i].p_coeff.real(), l[i].p_coeff.imag()});
    }
    return out;
}

struct Field {
    std::string key;
    std::function<void(ScenarioConfig&, const std::string&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

#define QCORR_DOUBLE(k, m)                                                          \
    Field{k, [](ScenarioConfig& c, const std::string& v) { c.m = to_double(k, v); }, \
          [](const ScenarioConfig& c) { return format_double(c.m); }}
#define QCORR_LONG(k, m)                                                                              \
    Field{k, [](ScenarioConfig& c, const std::string& v) { c.m = static_cast<decltype(c.m)>(to_long(k, v)); }, \
          [](const ScenarioConfig& c) { return std::to_string(c.m); }}
#define QCORR_BOOL(k, m)                                                          \
    Field{k, [](ScenarioConfig& c, const std::string& v) { c.m = to_bool(k, v); }, \
          [](const ScenarioConfig& c) { return from_bool(c.m); }}
#define QCORR_STRING(k, m)                                               \
    Field{k, [](ScenarioConfig& c, const std::string& v) { c.m = v; }, \
          [](const ScenarioConfig& c) { return c.m; }}
#define QCORR_ENUM(k, m, table)                                                      \
    Field{k, [](ScenarioConfig& c, const std::string& v) { c.m = table.parse(k, v); }, \
          [](const ScenarioConfig& c) { return table.name(c.m); }}

const std::vector<Field>& fields()
{
    static const std::vector<Field> f = {
        QCORR_STRING("name", name),
        QCORR_ENUM("model.hamiltonian", hamiltonian, kHamiltonians),
        QCORR_DOUBLE("model.omega", omega),
        QCORR_DOUBLE("model.anharmonic", anharmonic),
        QCORR_DOUBLE("model.well_depth", well_depth),
        QCORR_DOUBLE("model.cosine_amplitude", cosine_amplitude),
        QCORR_DOUBLE("model.cosine_wavenumber", cosine_wavenumber),
        Field{"model.lindblad",
              [](ScenarioConfig& c, const std::string& v) { c.lindblad = to_lindblad("model.lindblad", v); },
              [](const ScenarioConfig& c) { return from_lindblad(c.lindblad); }},
        QCORR_DOUBLE("model.gamma", gamma),
        QCORR_DOUBLE("model.hbar", hbar),
        QCORR_DOUBLE("model.box_x", box_x),
        QCORR_DOUBLE("model.box_p", box_p),
        QCORR_LONG("model.probes", probes),
        QCORR_DOUBLE("initial.mean_x", mean_x),
        QCORR_DOUBLE("initial.mean_p", mean_p),
        Field{"initial.cov",
              [](ScenarioConfig& c, const std::string& v) {
                  if (v == "coherent") {
                      c.coherent = true;
                      return;
                  }
                  const std::vector<double> s = to_doubles("initial.cov", v);
                  if (s.size() != 3)
                      throw ConfigError("config: initial.cov: expected 'coherent' or 'sxx sxp spp'");
                  c.coherent = false;
                  c.cov_xx = s[0];
                  c.cov_xp = s[1];
                  c.cov_pp = s[2];
              },
              [](const ScenarioConfig& c) {
                  return c.coherent ? std::string("coherent") : from_doubles({c.cov_xx, c.cov_xp, c.cov_pp});
              }},
        Field{"initial.snapshot",
              [](ScenarioConfig& c, const std::string& v) { c.initial_snapshot = v == "none" ? "" : v; },
              [](const ScenarioConfig& c) { return c.initial_snapshot.empty() ? "none" : c.initial_snapshot; }},
        Field{"solvers",
              [](ScenarioConfig& c, const std::string& v) {
                  c.run_quantum = c.run_mixture = c.run_classical = false;
                  for (const auto& s : split_ws(v)) {
                      if (s == "quantum")
                          c.run_quantum = true;
                      else if (s == "mixture")
                          c.run_mixture = true;
                      else if (s == "classical")
                          c.run_classical = true;
                      else
                          throw ConfigError("config: solvers: unknown solver '" + s + "'");
                  }
              },
              [](const ScenarioConfig& c) {
                  std::string out;
                  if (c.run_quantum)
                      out += "quantum ";
                  if (c.run_mixture)
                      out += "mixture ";
                  if (c.run_classical)
                      out += "classical ";
                  return trim(out);
              }},
        QCORR_DOUBLE("time.end", t_end),
        QCORR_LONG("time.outputs", outputs),
        QCORR_LONG("quantum.n", quantum_n),
        QCORR_DOUBLE("quantum.length", quantum_length),
        QCORR_DOUBLE("quantum.extent", quantum_extent),
        QCORR_ENUM("quantum.scheme", quantum_scheme, kLindbladSchemes),
        QCORR_DOUBLE("quantum.dt", quantum_dt),
        QCORR_LONG("mixture.particles", particles),
        QCORR_DOUBLE("mixture.dt", mixture_dt),
        Field{"mixture.lambda_star",
              [](ScenarioConfig& c, const std::string& v) { c.lambda_star = to_double("mixture.lambda_star", v); },
              [](const ScenarioConfig& c) {
                  return std::isnan(c.lambda_star) ? std::string("auto") : format_double(c.lambda_star);
              }},
        QCORR_ENUM("mixture.drift", mixture_drift, kDriftSchemes),
        QCORR_LONG("classical.points", points),
        QCORR_DOUBLE("classical.dt", classical_dt),
        QCORR_ENUM("classical.scheme", classical_scheme, kLangevinSchemes),
        Field{"observables", [](ScenarioConfig& c, const std::string& v) { c.observables = split_ws(v); },
              [](const ScenarioConfig& c) {
                  std::string out;
                  for (const auto& o : c.observables)
                      out += (out.empty() ? "" : " ") + o;
                  return out;
              }},
        QCORR_DOUBLE("observables.clip", clip),
        QCORR_BOOL("metrics.trace_distance", trace_distance),
        QCORR_BOOL("metrics.l1_distance", l1_distance),
        Field{"seed", [](ScenarioConfig& c, const std::string& v) { c.seed = to_u64("seed", v); },
              [](const ScenarioConfig& c) { return std::to_string(c.seed); }},
        QCORR_LONG("workers", workers),
        QCORR_STRING("output.dir", out_dir),
        QCORR_ENUM("output.format", format, kFormats),
        QCORR_BOOL("output.snapshots", snapshots),
    };
    return f;
}

#undef QCORR_DOUBLE
#undef QCORR_LONG
#undef QCORR_BOOL
#undef QCORR_STRING
#undef QCORR_ENUM

using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_lines(const std::string& text)
{
    KeyValues kv;
    std::set<std::string> seen;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config: line " + std::to_string(lineno) + ": empty key");
        if (!seen.insert(key).second)
            throw ConfigError("config: duplicate key '" + key + "'");
        kv.emplace_back(std::move(key), std::move(value));
    }
    return kv;
}

ScenarioConfig apply(const KeyValues& kv)
{
    ScenarioConfig cfg;
    for (const auto& [k, v] : kv)
        if (k == "preset")
            cfg = preset_config(v);
    std::map<std::string, const Field*> index;
    for (const auto& f : fields())
        index[f.key] = &f;
    for (const auto& [k, v] : kv) {
        if (k == "preset")
            continue;
        auto it = index.find(k);
        if (it == index.end())
            throw ConfigError("config: unknown key '" + k + "'");
        it->second->set(cfg, v);
    }
    return cfg;
}

}  // namespace

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const { return emit_config(*this) == emit_config(o); }

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& f : fields())
            k.push_back(f.key);
        return k;
    }();
    return keys;
}

std::vector<std::string> preset_names() { return {"harmonic", "damped", "quartic", "cosine"}; }

ScenarioConfig preset_config(const std::string& name)
{
    ScenarioConfig c;
    c.name = name;
    if (name == "harmonic") {
        c.hamiltonian = HamiltonianKind::harmonic;
        c.lindblad = {{1.0, 0.0}, {0.0, 1.0}};
    } else if (name == "damped") {
        c.hamiltonian = HamiltonianKind::harmonic;
        c.lindblad = {{std::sqrt(0.5), cplx(0.0, std::sqrt(0.5))}};
    } else if (name == "quartic") {
        c.hamiltonian = HamiltonianKind::quartic;
        c.anharmonic = 0.25;
        c.lindblad = {{1.0, 0.0}, {0.0, 1.0}};
        c.hbar = 0.05;
        c.t_end = 5.0;
        c.box_x = 2.0;
        c.box_p = 2.0;
        c.quantum_extent = 2.5;
        c.observables = {"x", "x2", "p2"};
        c.clip = 4.0;
    } else if (name == "cosine") {
        c.hamiltonian = HamiltonianKind::cosine_lattice;
        c.lindblad = {{1.0, 0.0}, {0.0, 1.0}};
        c.gamma = 0.5;
        c.box_x = 4.0;
        c.box_p = 3.0;
        c.quantum_extent = 6.0;
        c.t_end = 5.0;
    } else {
        throw ConfigError("config: unknown preset '" + name + "'");
    }
    return c;
}

ScenarioConfig parse_config(const std::string& text) { return apply(parse_lines(text)); }

std::vector<std::string> emit_config_lines(const ScenarioConfig& cfg)
{
    std::vector<std::string> out;
    for (const auto& f : fields())
        out.push_back(f.key + " = " + f.get(cfg));
    return out;
}

std::string emit_config(const ScenarioConfig& cfg)
{
    std::string out;
    for (const auto& l : emit_config_lines(cfg))
        out += l + '\n';
    return out;
}

void validate_config(const ScenarioConfig& c)
{
    auto require = [](bool ok, const std::string& what) {
        if (!ok)
            throw ConfigError("config: " + what);
    };
    require(c.hbar > 0 && std::isfinite(c.hbar), "model.hbar must be positive");
    require(c.gamma >= 0 && std::isfinite(c.gamma), "model.gamma must be nonnegative");
    require(c.box_x > 0 && c.box_p > 0, "model.box_x and model.box_p must be positive");
    require(c.probes > 0, "model.probes must be positive");
    require(c.t_end >= 0 && std::isfinite(c.t_end), "time.end must be nonnegative");
    require(c.outputs >= 1, "time.outputs must be at least 1");
    require(c.run_quantum || c.run_mixture || c.run_classical, "solvers must name at least one solver");
    require(c.quantum_n >= 0 && c.quantum_n % 2 == 0, "quantum.n must be even (0 selects it automatically)");
    require(c.quantum_length >= 0, "quantum.length must be nonnegative");
    require(c.quantum_extent > 0, "quantum.extent must be positive");
    require(c.quantum_dt > 0 && c.mixture_dt > 0 && c.classical_dt > 0, "time steps must be positive");
    require(c.particles > 0, "mixture.particles must be positive");
    require(c.points > 1, "classical.points must exceed 1");
    require(std::isnan(c.lambda_star) || (c.lambda_star > 0 && c.lambda_star <= 1),
            "mixture.lambda_star must be auto or in (0, 1]");
    require(c.clip >= 0, "observables.clip must be nonnegative");
    require(c.workers >= 1, "workers must be at least 1");
    if (!c.coherent) {
        require(c.cov_xx > 0 && c.cov_pp > 0, "initial.cov must be positive definite");
        const double det = c.cov_xx * c.cov_pp - c.cov_xp * c.cov_xp;
        require(std::abs(std::sqrt(std::max(det, 0.0)) - c.hbar / 2) <= 1e-8 * c.hbar,
                "initial.cov must be a pure-state covariance (det = ħ²/4)");
    }
    static const std::set<std::string> known{"one", "x", "p", "x2", "p2", "xp"};
    for (const auto& o : c.observables)
        require(known.count(o) > 0, "unknown observable '" + o + "' (one, x, p, x2, p2, xp)");
    require(!c.observables.empty(), "observables must not be empty");
}

SweepSpec parse_sweep(const std::string& text)
{
    KeyValues base, sweep;
    for (auto& kv : parse_lines(text)) {
        if (kv.first.rfind("sweep.", 0) == 0)
            sweep.push_back(std::move(kv));
        else
            base.push_back(std::move(kv));
    }
    SweepSpec s;
    s.base = apply(base);
    s.hbar = {s.base.hbar};
    s.gamma = {s.base.gamma};
    for (const auto& [k, v] : sweep) {
        if (k == "sweep.hbar") {
            s.hbar = to_doubles(k, v);
        } else if (k == "sweep.gamma") {
            s.gamma = to_doubles(k, v);
        } else if (k == "sweep.window") {
            const auto w = to_doubles(k, v);
            if (w.size() != 2)
                throw ConfigError("config: sweep.window: expected 'lo hi'");
            s.window_lo = w[0];
            s.window_hi = w[1];
        } else if (k == "sweep.b_q") {
            s.quantum_anharmonicity = to_bool(k, v);
        } else {
            throw ConfigError("config: unknown key '" + k + "'");
        }
    }
    return s;
}

std::string emit_sweep(const SweepSpec& s)
{
    std::string out = emit_config(s.base);
    out += "sweep.hbar = " + from_doubles(s.hbar) + '\n';
    out += "sweep.gamma = " + from_doubles(s.gamma) + '\n';
    out += "sweep.window = " + from_doubles({s.window_lo, s.window_hi}) + '\n';
    out += "sweep.b_q = " + from_bool(s.quantum_anharmonicity) + '\n';
    return out;
}

void validate_sweep(const SweepSpec& s)
{
    validate_config(s.base);
    if (s.hbar.empty() || s.gamma.empty())
        throw ConfigError("config: sweep axes must be nonempty");
    for (double h : s.hbar)
        if (!(h > 0))
            throw ConfigError("config: sweep.hbar values must be positive");
    for (double g : s.gamma)
        if (!(g >= 0))
            throw ConfigError("config: sweep.gamma values must be nonnegative");
    if (!(0 <= s.window_lo && s.window_lo < s.window_hi && s.window_hi <= 1))
        throw ConfigError("config: sweep.window must satisfy 0 <= lo < hi <= 1");
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace qcorr
