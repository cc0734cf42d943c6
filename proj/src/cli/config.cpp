#include "acch/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace acch::cli {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty())
            out.push_back(trim(item));
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    T value{};
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("'" + key + "': cannot parse '" + text + "' as a number");
    if constexpr (std::is_floating_point_v<T>)
        if (!std::isfinite(value))
            throw ConfigError("'" + key + "': value must be finite");
    return value;
}

bool parse_bool(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    if (t == "true" || t == "yes" || t == "on" || t == "1")
        return true;
    if (t == "false" || t == "no" || t == "off" || t == "0")
        return false;
    throw ConfigError("'" + key + "': expected a boolean, got '" + text + "'");
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text)
{
    std::vector<T> out;
    for (const auto& item : split_list(text))
        out.push_back(parse_number<T>(key, item));
    if (out.empty())
        throw ConfigError("'" + key + "': empty list");
    return out;
}

template <class E, class F>
std::vector<E> parse_enum_list(const std::string& key, const std::string& text, F parse)
{
    std::vector<E> out;
    for (const auto& item : split_list(text)) {
        try {
            out.push_back(parse(item));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("'" + key + "': " + e.what());
        }
    }
    if (out.empty())
        throw ConfigError("'" + key + "': empty list");
    return out;
}

template <class F>
auto parse_enum(const std::string& key, const std::string& text, F parse)
{
    try {
        return parse(trim(text));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("'" + key + "': " + e.what());
    }
}

InitialKind parse_initial_kind(const std::string& s)
{
    if (s == "trigonometric" || s == "trig")
        return InitialKind::Trigonometric;
    if (s == "random" || s == "random_uniform")
        return InitialKind::RandomUniform;
    if (s == "uniform")
        return InitialKind::Uniform;
    throw std::invalid_argument("unknown initial condition '" + s + "'");
}

std::string initial_kind_name(InitialKind k)
{
    switch (k) {
    case InitialKind::Trigonometric: return "trigonometric";
    case InitialKind::RandomUniform: return "random";
    case InitialKind::Uniform: return "uniform";
    }
    return "?";
}

KernelMode parse_kernel(const std::string& s)
{
    if (s == "series")
        return KernelMode::Series;
    if (s == "exact")
        return KernelMode::ExactQuotient;
    throw std::invalid_argument("unknown kernel '" + s + "'");
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

/// Every accepted key, by section.
const std::map<std::string, std::map<std::string, Setter>>& schema()
{
    static const std::map<std::string, std::map<std::string, Setter>> s = {
        {"grid",
         {
             {"dim", [](RunConfig& c, auto& k, auto& v) { c.grid.dim = parse_number<int>(k, v); }},
             {"n",
              [](RunConfig& c, auto& k, auto& v) {
                  const int n = parse_number<int>(k, v);
                  c.grid.counts = {n, n, n};
              }},
             {"nx", [](RunConfig& c, auto& k, auto& v) { c.grid.counts[0] = parse_number<int>(k, v); }},
             {"ny", [](RunConfig& c, auto& k, auto& v) { c.grid.counts[1] = parse_number<int>(k, v); }},
             {"nz", [](RunConfig& c, auto& k, auto& v) { c.grid.counts[2] = parse_number<int>(k, v); }},
             {"length",
              [](RunConfig& c, auto& k, auto& v) {
                  const double l = parse_number<double>(k, v);
                  c.grid.lengths = {l, l, l};
              }},
             {"lx", [](RunConfig& c, auto& k, auto& v) { c.grid.lengths[0] = parse_number<double>(k, v); }},
             {"ly", [](RunConfig& c, auto& k, auto& v) { c.grid.lengths[1] = parse_number<double>(k, v); }},
             {"lz", [](RunConfig& c, auto& k, auto& v) { c.grid.lengths[2] = parse_number<double>(k, v); }},
             {"bc", [](RunConfig& c, auto& k, auto& v) { c.grid.bc = parse_enum(k, v, parse_boundary); }},
         }},
        {"physics",
         {
             {"alpha", [](RunConfig& c, auto& k, auto& v) { c.params.alpha = parse_number<double>(k, v); }},
             {"beta", [](RunConfig& c, auto& k, auto& v) { c.params.beta = parse_number<double>(k, v); }},
             {"gamma", [](RunConfig& c, auto& k, auto& v) { c.params.gamma = parse_number<double>(k, v); }},
             {"theta", [](RunConfig& c, auto& k, auto& v) { c.params.theta = parse_number<double>(k, v); }},
             {"rho", [](RunConfig& c, auto& k, auto& v) { c.params.rho = parse_number<double>(k, v); }},
             {"series_order",
              [](RunConfig& c, auto& k, auto& v) { c.params.series_order = parse_number<int>(k, v); }},
         }},
        {"initial",
         {
             {"type", [](RunConfig& c, auto& k, auto& v) { c.initial.kind = parse_enum(k, v, parse_initial_kind); }},
             {"u0", [](RunConfig& c, auto& k, auto& v) { c.initial.u0 = parse_number<double>(k, v); }},
             {"v0", [](RunConfig& c, auto& k, auto& v) { c.initial.v0 = parse_number<double>(k, v); }},
             {"amplitude",
              [](RunConfig& c, auto& k, auto& v) {
                  c.initial.amplitude_u = c.initial.amplitude_v = parse_number<double>(k, v);
              }},
             {"amplitude_u",
              [](RunConfig& c, auto& k, auto& v) { c.initial.amplitude_u = parse_number<double>(k, v); }},
             {"amplitude_v",
              [](RunConfig& c, auto& k, auto& v) { c.initial.amplitude_v = parse_number<double>(k, v); }},
             {"seed", [](RunConfig& c, auto& k, auto& v) { c.initial.seed = parse_number<std::uint64_t>(k, v); }},
         }},
        {"time",
         {
             {"mode",
              [](RunConfig& c, auto& k, auto& v) {
                  const std::string m = trim(v);
                  if (m != "adaptive" && m != "fixed")
                      throw ConfigError("'" + k + "': expected adaptive or fixed");
                  c.time.adaptive = m == "adaptive";
              }},
             {"dt", [](RunConfig& c, auto& k, auto& v) { c.time.dt_fixed = parse_number<double>(k, v); }},
             {"dt_min", [](RunConfig& c, auto& k, auto& v) { c.time.dt_min = parse_number<double>(k, v); }},
             {"dt_max", [](RunConfig& c, auto& k, auto& v) { c.time.dt_max = parse_number<double>(k, v); }},
             {"eta", [](RunConfig& c, auto& k, auto& v) { c.time.eta = parse_number<double>(k, v); }},
             {"max_substeps",
              [](RunConfig& c, auto& k, auto& v) { c.time.max_substeps = parse_number<int>(k, v); }},
             {"max_retries", [](RunConfig& c, auto& k, auto& v) { c.time.max_retries = parse_number<int>(k, v); }},
             {"horizon", [](RunConfig& c, auto& k, auto& v) { c.horizon = parse_number<double>(k, v); }},
             {"max_steps", [](RunConfig& c, auto& k, auto& v) { c.max_steps = parse_number<long>(k, v); }},
         }},
        {"solver",
         {
             {"precond",
              [](RunConfig& c, auto& k, auto& v) {
                  c.solver.schwarz.variant = parse_enum(k, v, parse_schwarz_variant);
              }},
             {"overlap", [](RunConfig& c, auto& k, auto& v) { c.solver.schwarz.overlap = parse_number<int>(k, v); }},
             {"subsolver",
              [](RunConfig& c, auto& k, auto& v) {
                  c.solver.schwarz.solver = parse_enum(k, v, parse_subdomain_solver);
              }},
             {"subdomains",
              [](RunConfig& c, auto& k, auto& v) { c.solver.schwarz.subdomains = parse_number<int>(k, v); }},
             {"threads", [](RunConfig& c, auto& k, auto& v) { c.threads = parse_number<int>(k, v); }},
             {"reuse", [](RunConfig& c, auto& k, auto& v) { c.solver.newton.reuse = parse_bool(k, v); }},
             {"restart", [](RunConfig& c, auto& k, auto& v) { c.solver.newton.restart = parse_number<int>(k, v); }},
             {"max_linear",
              [](RunConfig& c, auto& k, auto& v) { c.solver.newton.max_linear = parse_number<int>(k, v); }},
             {"max_newton",
              [](RunConfig& c, auto& k, auto& v) { c.solver.newton.max_newton = parse_number<int>(k, v); }},
             {"rtol", [](RunConfig& c, auto& k, auto& v) { c.solver.newton.rtol = parse_number<double>(k, v); }},
             {"atol", [](RunConfig& c, auto& k, auto& v) { c.solver.newton.atol = parse_number<double>(k, v); }},
             {"linear_rtol",
              [](RunConfig& c, auto& k, auto& v) { c.solver.newton.linear_rtol = parse_number<double>(k, v); }},
             {"linear_atol",
              [](RunConfig& c, auto& k, auto& v) { c.solver.newton.linear_atol = parse_number<double>(k, v); }},
             {"keep_slack",
              [](RunConfig& c, auto& k, auto& v) { c.solver.newton.keep_slack = parse_number<double>(k, v); }},
             {"fallback_forcing",
              [](RunConfig& c, auto& k, auto& v) { c.solver.newton.fallback_forcing = parse_number<double>(k, v); }},
             {"conserve_mass",
              [](RunConfig& c, auto& k, auto& v) { c.solver.newton.conserve_mass = parse_bool(k, v); }},
             {"mobility",
              [](RunConfig& c, auto& k, auto& v) {
                  c.solver.scheme.mobility = parse_enum(k, v, parse_mobility_level);
              }},
             {"kernel",
              [](RunConfig& c, auto& k, auto& v) { c.solver.scheme.kernel = parse_enum(k, v, parse_kernel); }},
         }},
        {"output",
         {
             {"directory", [](RunConfig& c, auto&, auto& v) { c.output.directory = trim(v); }},
             {"history", [](RunConfig& c, auto& k, auto& v) { c.output.history = parse_bool(k, v); }},
             {"snapshot_every",
              [](RunConfig& c, auto& k, auto& v) { c.output.snapshot_every = parse_number<int>(k, v); }},
             {"snapshot_times",
              [](RunConfig& c, auto& k, auto& v) { c.output.snapshot_times = parse_list<double>(k, v); }},
             {"final_snapshot",
              [](RunConfig& c, auto& k, auto& v) { c.output.final_snapshot = parse_bool(k, v); }},
         }},
        {"converge",
         {
             {"meshes", [](RunConfig& c, auto& k, auto& v) { c.converge.meshes = parse_list<int>(k, v); }},
             {"reference_mesh",
              [](RunConfig& c, auto& k, auto& v) { c.converge.reference_mesh = parse_number<int>(k, v); }},
             {"time_mesh", [](RunConfig& c, auto& k, auto& v) { c.converge.time_mesh = parse_number<int>(k, v); }},
             {"dts", [](RunConfig& c, auto& k, auto& v) { c.converge.dts = parse_list<double>(k, v); }},
             {"reference_dt",
              [](RunConfig& c, auto& k, auto& v) { c.converge.reference_dt = parse_number<double>(k, v); }},
             {"space_dt", [](RunConfig& c, auto& k, auto& v) { c.converge.space_dt = parse_number<double>(k, v); }},
         }},
        {"bench",
         {
             {"steps", [](RunConfig& c, auto& k, auto& v) { c.bench.steps = parse_number<int>(k, v); }},
             {"dt", [](RunConfig& c, auto& k, auto& v) { c.bench.dt = parse_number<double>(k, v); }},
             {"variants",
              [](RunConfig& c, auto& k, auto& v) {
                  c.bench.variants = parse_enum_list<SchwarzVariant>(k, v, parse_schwarz_variant);
              }},
             {"overlaps", [](RunConfig& c, auto& k, auto& v) { c.bench.overlaps = parse_list<int>(k, v); }},
             {"solvers",
              [](RunConfig& c, auto& k, auto& v) {
                  c.bench.solvers = parse_enum_list<SubdomainSolver>(k, v, parse_subdomain_solver);
              }},
             {"threads", [](RunConfig& c, auto& k, auto& v) { c.bench.threads = parse_list<int>(k, v); }},
             {"weak_cells", [](RunConfig& c, auto& k, auto& v) { c.bench.weak_cells = parse_number<int>(k, v); }},
         }},
    };
    return s;
}

}  // namespace

void RunConfig::validate() const
{
    try {
        (void)grid.make();
        params.validate();
        time.validate();
        solver.newton.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(horizon > 0.0))
        throw ConfigError("time horizon must be positive");
    if (max_steps < 0)
        throw ConfigError("max_steps must be non-negative");
    if (threads < 1)
        throw ConfigError("threads must be at least 1");
    if (solver.schwarz.overlap < 0 || solver.schwarz.subdomains < 0)
        throw ConfigError("overlap and subdomains must be non-negative");
    if (output.snapshot_every < 0)
        throw ConfigError("snapshot_every must be non-negative");
    if (initial.amplitude_u < 0.0 || initial.amplitude_v < 0.0)
        throw ConfigError("initial amplitudes must be non-negative");
    switch (initial.kind) {
    case InitialKind::Uniform:
        if (!admissible(initial.u0, initial.v0))
            throw ConfigError("uniform initial state is not admissible");
        break;
    case InitialKind::RandomUniform: {
        // Every corner of the sampling box must be admissible.
        for (double su : {-1.0, 1.0})
            for (double sv : {-1.0, 1.0})
                if (!admissible(initial.u0 + su * initial.amplitude_u, sv * initial.amplitude_v))
                    throw ConfigError("random initial range leaves the admissible set");
        break;
    }
    case InitialKind::Trigonometric:
        if (grid.dim != 2)
            throw ConfigError("the trigonometric initial state is two-dimensional");
        break;
    }
    for (int n : converge.meshes)
        if (n < 4)
            throw ConfigError("convergence meshes need at least 4 cells");
    for (double d : converge.dts)
        if (!(d > 0.0))
            throw ConfigError("convergence step sizes must be positive");
    if (!(converge.reference_dt > 0.0) || !(converge.space_dt > 0.0))
        throw ConfigError("convergence step sizes must be positive");
    if (bench.steps < 1 || !(bench.dt > 0.0))
        throw ConfigError("bench needs steps >= 1 and dt > 0");
    for (int t : bench.threads)
        if (t < 1)
            throw ConfigError("bench thread counts must be at least 1");
    for (int o : bench.overlaps)
        if (o < 0)
            throw ConfigError("bench overlaps must be non-negative");
}

RunConfig parse_config(std::istream& in, const std::string& origin)
{
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    RunConfig cfg;
    bool eta_set = false;
    for (const auto& [section, body] : tree) {
        const auto sec = schema().find(section);
        if (sec == schema().end() || body.data() != "")
            throw ConfigError(origin + ": unknown section or top-level key '" + section + "'");
        for (const auto& [key, node] : body) {
            const auto it = sec->second.find(key);
            if (it == sec->second.end())
                throw ConfigError(origin + ": unknown key '" + key + "' in [" + section + "]");
            try {
                it->second(cfg, section + "." + key, node.data());
            } catch (const ConfigError& e) {
                throw ConfigError(origin + ": " + e.what());
            }
            eta_set = eta_set || (section == "time" && key == "eta");
        }
    }
    if (!eta_set)
        cfg.time.eta = cfg.grid.dim == 3 ? 1e2 : 1e4;
    if (cfg.grid.dim == 2) {
        cfg.grid.counts[2] = 1;
        cfg.grid.lengths[2] = 1.0;
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

namespace {

std::string num(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F f)
{
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i)
        s += (i ? ", " : "") + f(xs[i]);
    return s;
}

}  // namespace

std::string format_config(const RunConfig& c)
{
    std::ostringstream o;
    const auto i2s = [](int x) { return std::to_string(x); };
    o << "[grid]\ndim = " << c.grid.dim << "\nnx = " << c.grid.counts[0] << "\nny = " << c.grid.counts[1] << '\n';
    if (c.grid.dim == 3)
        o << "nz = " << c.grid.counts[2] << '\n';
    o << "lx = " << num(c.grid.lengths[0]) << "\nly = " << num(c.grid.lengths[1]) << '\n';
    if (c.grid.dim == 3)
        o << "lz = " << num(c.grid.lengths[2]) << '\n';
    o << "bc = " << to_string(c.grid.bc) << "\n\n";
    o << "[physics]\nalpha = " << num(c.params.alpha) << "\nbeta = " << num(c.params.beta)
      << "\ngamma = " << num(c.params.gamma) << "\ntheta = " << num(c.params.theta) << "\nrho = " << num(c.params.rho)
      << "\nseries_order = " << c.params.series_order << "\n\n";
    o << "[initial]\ntype = " << initial_kind_name(c.initial.kind) << "\nu0 = " << num(c.initial.u0)
      << "\nv0 = " << num(c.initial.v0) << "\namplitude_u = " << num(c.initial.amplitude_u)
      << "\namplitude_v = " << num(c.initial.amplitude_v) << "\nseed = " << c.initial.seed << "\n\n";
    o << "[time]\nmode = " << (c.time.adaptive ? "adaptive" : "fixed") << "\ndt = " << num(c.time.dt_fixed)
      << "\ndt_min = " << num(c.time.dt_min) << "\ndt_max = " << num(c.time.dt_max) << "\neta = " << num(c.time.eta)
      << "\nmax_retries = " << c.time.max_retries << "\nmax_substeps = " << c.time.max_substeps << "\nhorizon = " << num(c.horizon)
      << "\nmax_steps = " << c.max_steps << "\n\n";
    const auto& n = c.solver.newton;
    o << "[solver]\nprecond = " << to_string(c.solver.schwarz.variant) << "\noverlap = " << c.solver.schwarz.overlap
      << "\nsubsolver = " << to_string(c.solver.schwarz.solver) << "\nsubdomains = " << c.solver.schwarz.subdomains
      << "\nthreads = " << c.threads << "\nreuse = " << (n.reuse ? "true" : "false") << "\nrestart = " << n.restart
      << "\nmax_linear = " << n.max_linear << "\nmax_newton = " << n.max_newton << "\nrtol = " << num(n.rtol)
      << "\natol = " << num(n.atol) << "\nlinear_rtol = " << num(n.linear_rtol)
      << "\nlinear_atol = " << num(n.linear_atol) << "\nconserve_mass = " << (n.conserve_mass ? "true" : "false")
      << "\nfallback_forcing = " << num(n.fallback_forcing) << "\nkeep_slack = " << num(n.keep_slack)
      << "\nmobility = " << to_string(c.solver.scheme.mobility)
      << "\nkernel = " << (c.solver.scheme.kernel == KernelMode::Series ? "series" : "exact") << "\n\n";
    o << "[output]\ndirectory = " << c.output.directory << "\nhistory = " << (c.output.history ? "true" : "false")
      << "\nsnapshot_every = " << c.output.snapshot_every << '\n';
    if (!c.output.snapshot_times.empty())
        o << "snapshot_times = " << join(c.output.snapshot_times, num) << '\n';
    o << "final_snapshot = " << (c.output.final_snapshot ? "true" : "false") << "\n\n";
    o << "[converge]\nmeshes = " << join(c.converge.meshes, i2s) << "\nreference_mesh = " << c.converge.reference_mesh
      << "\ntime_mesh = " << c.converge.time_mesh << "\ndts = " << join(c.converge.dts, num)
      << "\nreference_dt = " << num(c.converge.reference_dt) << "\nspace_dt = " << num(c.converge.space_dt) << "\n\n";
    o << "[bench]\nsteps = " << c.bench.steps << "\ndt = " << num(c.bench.dt)
      << "\nvariants = " << join(c.bench.variants, [](SchwarzVariant v) { return to_string(v); })
      << "\noverlaps = " << join(c.bench.overlaps, i2s)
      << "\nsolvers = " << join(c.bench.solvers, [](SubdomainSolver s) { return to_string(s); })
      << "\nthreads = " << join(c.bench.threads, i2s) << "\nweak_cells = " << c.bench.weak_cells << '\n';
    return o.str();
}

}  // namespace acch::cli
