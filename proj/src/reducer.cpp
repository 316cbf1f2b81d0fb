#include "mechsql/reducer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "mechsql/error.hpp"

namespace mechsql {

namespace {

std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos)
        return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
            ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t')
            ++j;
        if (j > i)
            out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

double to_double(std::string_view tok, int line)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
        throw ConfigError(fmt::format("'{}' is not a number", tok), line);
    return v;
}

int to_index(std::string_view tok, int line)
{
    int v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0)
        throw ConfigError(fmt::format("'{}' is not a non-negative index", tok), line);
    return v;
}

double max_abs_frequency(const ParametricSystem& s)
{
    double m = 0.0;
    for (double w : s.omega)
        m = std::max(m, std::abs(w));
    return m;
}

bool degenerate(const ParametricSystem& s, int i, int j)
{
    return std::abs(s.omega[i] - s.omega[j]) < degeneracy_tolerance * max_abs_frequency(s);
}

} // namespace

ParametricSystem::ParametricSystem(std::vector<double> Omega_, std::vector<double> omega_)
    : Omega(std::move(Omega_)), omega(std::move(omega_))
{
    chi.assign(omega.size() * omega.size() * Omega.size(), 0.0);
}

double ParametricSystem::coupling(int i, int j, int nu) const
{
    return chi[(static_cast<std::size_t>(i) * omega.size() + j) * Omega.size() + nu];
}

void ParametricSystem::set_coupling(int i, int j, int nu, double value)
{
    if (i < 0 || j < 0 || nu < 0 || i >= n_ext() || j >= n_ext() || nu >= n_mech())
        throw ConfigError(fmt::format("coupling index ({}, {}, {}) out of range", i, j, nu));
    if (chi.size() != omega.size() * omega.size() * Omega.size())
        chi.assign(omega.size() * omega.size() * Omega.size(), 0.0);
    chi[(static_cast<std::size_t>(i) * omega.size() + j) * Omega.size() + nu] = value;
    chi[(static_cast<std::size_t>(j) * omega.size() + i) * Omega.size() + nu] = value;
}

void ParametricSystem::validate() const
{
    if (Omega.empty())
        throw ConfigError("system needs at least one mechanical mode");
    if (omega.size() < 2)
        throw ConfigError("system needs at least two external modes");
    if (chi.size() != omega.size() * omega.size() * Omega.size())
        throw ConfigError("coupling tensor has the wrong size");
    for (double W : Omega) {
        if (!(W > 0.0))
            throw ConfigError("mechanical frequencies must be positive");
    }
    if (drive_index < 0 || drive_index >= n_ext())
        throw ConfigError(fmt::format("drive index {} out of range", drive_index));
    if (!decay.empty() && decay.size() != omega.size())
        throw ConfigError("decay list must have one entry per external mode");
    for (int i = 0; i < n_ext(); ++i) {
        for (int j = 0; j < n_ext(); ++j) {
            for (int nu = 0; nu < n_mech(); ++nu) {
                if (coupling(i, j, nu) != coupling(j, i, nu))
                    throw ConfigError(fmt::format("coupling not symmetric in ({}, {}) for nu = {}", i, j, nu));
            }
        }
    }
    for (int i = 0; i < n_ext(); ++i) {
        for (int j = i + 1; j < n_ext(); ++j) {
            if (degenerate(*this, i, j))
                throw DegenerateModes(fmt::format("external modes {} and {} are degenerate", i, j));
        }
    }
}

RegimeReport validate_dispersive(const ParametricSystem& s, double threshold)
{
    RegimeReport report;
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < s.n_ext(); ++i) {
        for (int j = i + 1; j < s.n_ext(); ++j) {
            const double gap = std::abs(s.omega[i] - s.omega[j]);
            const bool deg = degenerate(s, i, j);
            double chi_max = 0.0;
            for (int nu = 0; nu < s.n_mech(); ++nu)
                chi_max = std::max(chi_max, std::abs(s.coupling(i, j, nu)));
            double mech_max = 0.0;
            for (double W : s.Omega)
                mech_max = std::max(mech_max, W);
            const double r_chi = deg ? inf : chi_max / gap;
            const double r_mech = deg ? inf : mech_max / gap;
            report.checks.push_back({fmt::format("chi_{}{}/|domega|", i, j), r_chi, threshold, r_chi < threshold});
            report.checks.push_back({fmt::format("Omega/|domega_{}{}|", i, j), r_mech, threshold, r_mech < threshold});
        }
    }
    return report;
}

double EffectiveFrequency::evaluate(const std::vector<double>& q) const
{
    double w = constant;
    for (std::size_t nu = 0; nu < linear.size(); ++nu) {
        w += linear[nu] * q[nu];
        for (std::size_t mu = 0; mu < linear.size(); ++mu)
            w += quadratic[nu][mu] * q[nu] * q[mu];
    }
    return w;
}

DispersiveReduction reduce(const ParametricSystem& s)
{
    s.validate();
    const int n = s.n_mech();
    const int np = s.n_ext();
    const int p = s.drive_index;

    DispersiveReduction r;
    for (int i = 0; i < np; ++i) {
        EffectiveFrequency f;
        f.constant = s.omega[i];
        f.linear.resize(n);
        f.quadratic.assign(n, std::vector<double>(n, 0.0));
        for (int nu = 0; nu < n; ++nu)
            f.linear[nu] = s.coupling(i, i, nu);
        // Second order: (sum_nu chi_ij nu q_nu)^2 / (omega_i - omega_j).
        for (int j = 0; j < np; ++j) {
            if (j == i)
                continue;
            const double inv = 1.0 / (s.omega[i] - s.omega[j]);
            for (int nu = 0; nu < n; ++nu) {
                for (int mu = 0; mu < n; ++mu)
                    f.quadratic[nu][mu] += s.coupling(i, j, nu) * s.coupling(i, j, mu) * inv;
            }
        }
        r.omega_prime.push_back(std::move(f));
    }

    r.residual_linear.assign(np, 0.0);
    for (int i = 0; i < np; ++i) {
        if (i != p)
            r.residual_linear[i] = s.coupling(p, i, 0) * s.drive_amplitude / (s.omega[i] - s.omega[p]);
    }

    for (int nu = 0; nu < n; ++nu) {
        if (s.coupling(p, p, nu) != 0.0)
            r.qnd_violations.push_back(fmt::format("linear self-coupling chi_{}{}{} = {:.6g}", p, p, nu, s.coupling(p, p, nu)));
    }
    for (int i = 0; i < np; ++i) {
        if (i == p)
            continue;
        for (int nu = 1; nu < n; ++nu) {
            if (s.coupling(p, i, nu) != 0.0)
                r.qnd_violations.push_back(
                    fmt::format("probe couples to mechanical mode {}: chi_{}{}{} = {:.6g}", nu, p, i, nu, s.coupling(p, i, nu)));
        }
    }
    r.qnd_conditions_ok = r.qnd_violations.empty();
    return r;
}

std::vector<double> brute_force_eigen(const ParametricSystem& s, const std::vector<double>& q)
{
    if (static_cast<int>(q.size()) != s.n_mech())
        throw ConfigError(fmt::format("expected {} clamped coordinates, got {}", s.n_mech(), q.size()));
    const int np = s.n_ext();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(np, np);
    for (int i = 0; i < np; ++i) {
        M(i, i) = s.omega[i];
        for (int j = 0; j < np; ++j) {
            for (int nu = 0; nu < s.n_mech(); ++nu)
                M(i, j) += s.coupling(i, j, nu) * q[nu];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M);
    if (solver.info() != Eigen::Success)
        throw Error("EigenFailure", "eigensolver did not converge");

    // Pair eigenvectors with bare modes by decreasing overlap.
    struct Pair {
        double overlap;
        int mode;
        int eig;
    };
    std::vector<Pair> pairs;
    for (int k = 0; k < np; ++k) {
        for (int i = 0; i < np; ++i)
            pairs.push_back({std::abs(solver.eigenvectors()(i, k)), i, k});
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.overlap > b.overlap; });
    std::vector<double> out(np, std::nan(""));
    std::vector<bool> used_mode(np, false), used_eig(np, false);
    for (const auto& pr : pairs) {
        if (used_mode[pr.mode] || used_eig[pr.eig])
            continue;
        used_mode[pr.mode] = used_eig[pr.eig] = true;
        out[pr.mode] = solver.eigenvalues()(pr.eig);
    }
    return out;
}

TripartiteEquivalent to_tripartite(const ParametricSystem& s)
{
    const auto red = reduce(s);
    if (!red.qnd_conditions_ok) {
        std::string msg = "QND conditions violated:";
        for (const auto& v : red.qnd_violations)
            msg += " " + v + ";";
        throw QndViolated(msg);
    }

    const int p = s.drive_index;
    TripartiteEquivalent t;
    t.probe = p;
    t.idle = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < s.n_ext(); ++i) {
        if (i == p)
            continue;
        const double gap = std::abs(s.omega[i] - s.omega[p]);
        if (gap < best) {
            best = gap;
            t.idle = i;
        }
    }
    for (int i = 0; i < s.n_ext(); ++i) {
        if (i != p && i != t.idle && std::abs(s.omega[i] - s.omega[p]) == best)
            t.warnings.push_back(fmt::format("idle modes {} and {} are equidistant from the probe; chose {}", t.idle, i, t.idle));
    }

    t.omega_s = best / 2.0;
    t.G_0 = std::abs(s.coupling(p, t.idle, 0));
    t.driven_mode = s.omega[t.idle] > s.omega[p] ? DrivenMode::common : DrivenMode::differential;
    t.quadratic_full = red.omega_prime[p].quadratic[0][0];
    t.quadratic_tripartite = s.coupling(p, t.idle, 0) * s.coupling(p, t.idle, 0) / (s.omega[p] - s.omega[t.idle]);
    if (t.G_0 == 0.0)
        t.warnings.push_back("probe and nearest idle mode are uncoupled");

    if (!s.decay.empty()) {
        RateParams r;
        r.omega_m = s.Omega[0];
        r.gamma_m = s.gamma_m;
        r.n_th = s.n_th;
        r.omega_s = t.omega_s;
        r.gamma_c = s.decay[p];
        r.gamma_d = s.decay[t.idle];
        r.G_0 = t.G_0;
        r.c_bar = s.drive_amplitude;
        r.driven_mode = t.driven_mode;
        t.rates = r;
    }
    return t;
}

ParametricSystem parse_system(std::string_view text)
{
    std::vector<double> Omega, omega, decay;
    std::optional<std::pair<int, double>> drive;
    double gamma_m = 0.0, n_th = 0.0;
    struct ChiEntry {
        int i, j, nu;
        double value;
        int line;
    };
    std::vector<ChiEntry> entries;
    std::vector<std::string> seen;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos)
            raw = raw.substr(0, hash);
        raw = trim(raw);
        if (raw.empty())
            continue;

        const auto eq = raw.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(fmt::format("expected 'key = values', got '{}'", raw), line_no);
        const auto lhs = split_ws(trim(raw.substr(0, eq)));
        const auto rhs = split_ws(trim(raw.substr(eq + 1)));
        if (lhs.empty() || rhs.empty())
            throw ConfigError("empty key or value", line_no);

        if (lhs[0] == "chi") {
            if (lhs.size() != 4 || rhs.size() != 1)
                throw ConfigError("expected 'chi i j nu = value'", line_no);
            entries.push_back({to_index(lhs[1], line_no), to_index(lhs[2], line_no), to_index(lhs[3], line_no),
                               to_double(rhs[0], line_no), line_no});
            continue;
        }
        if (lhs.size() != 1)
            throw ConfigError(fmt::format("unexpected key '{}'", trim(raw.substr(0, eq))), line_no);
        const std::string key(lhs[0]);
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw ConfigError(fmt::format("duplicate key '{}'", key), line_no);
        seen.push_back(key);

        auto list = [&] {
            std::vector<double> v;
            for (auto tok : rhs)
                v.push_back(to_double(tok, line_no));
            return v;
        };
        auto scalar = [&] {
            if (rhs.size() != 1)
                throw ConfigError(fmt::format("'{}' takes one value", key), line_no);
            return to_double(rhs[0], line_no);
        };
        if (key == "Omega")
            Omega = list();
        else if (key == "omega")
            omega = list();
        else if (key == "decay")
            decay = list();
        else if (key == "gamma_m")
            gamma_m = scalar();
        else if (key == "n_th")
            n_th = scalar();
        else if (key == "drive") {
            if (rhs.size() != 2)
                throw ConfigError("expected 'drive = index amplitude'", line_no);
            drive = std::make_pair(to_index(rhs[0], line_no), to_double(rhs[1], line_no));
        } else
            throw ConfigError(fmt::format("unknown key '{}'", key), line_no);
    }

    if (Omega.empty())
        throw ConfigError("missing 'Omega'");
    if (omega.empty())
        throw ConfigError("missing 'omega'");
    if (!drive)
        throw ConfigError("missing 'drive'");

    ParametricSystem s(Omega, omega);
    s.decay = decay;
    s.gamma_m = gamma_m;
    s.n_th = n_th;
    s.drive_index = drive->first;
    s.drive_amplitude = drive->second;
    std::vector<int> set_at(s.chi.size(), 0);
    for (const auto& e : entries) {
        if (e.i >= s.n_ext() || e.j >= s.n_ext() || e.nu >= s.n_mech())
            throw ConfigError(fmt::format("coupling index ({}, {}, {}) out of range", e.i, e.j, e.nu), e.line);
        const auto k = (static_cast<std::size_t>(e.i) * omega.size() + e.j) * Omega.size() + e.nu;
        if (set_at[k] && s.chi[k] != e.value)
            throw ConfigError(fmt::format("conflicting values for chi {} {} {} (first on line {})", e.i, e.j, e.nu, set_at[k]),
                              e.line);
        s.set_coupling(e.i, e.j, e.nu, e.value);
        set_at[k] = e.line;
        set_at[(static_cast<std::size_t>(e.j) * omega.size() + e.i) * Omega.size() + e.nu] = e.line;
    }
    s.validate();
    return s;
}

ParametricSystem load_system_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open system file '{}'", path));
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_system(buf.str());
}

ParametricSystem coupled_cavity_system(const RateParams& r)
{
    // Common drive pumps the lower mode omega_0 - omega_s.
    const double sign = r.driven_mode == DrivenMode::common ? 1.0 : -1.0;
    ParametricSystem s({r.omega_m}, {-sign * r.omega_s, sign * r.omega_s});
    s.set_coupling(0, 1, 0, r.G_0);
    s.drive_index = 0;
    s.drive_amplitude = r.c_bar;
    s.decay = {r.gamma_c, r.gamma_d};
    s.gamma_m = r.gamma_m;
    s.n_th = r.n_th;
    return s;
}

Table reduction_table(const ParametricSystem& s, const DispersiveReduction& r)
{
    Table t;
    t.columns = {"mode", "omega", "linear_q1", "quadratic_q1q1", "residual_linear", "is_probe"};
    for (int i = 0; i < s.n_ext(); ++i) {
        const auto& f = r.omega_prime[i];
        t.add_row({static_cast<std::int64_t>(i), f.constant, f.linear[0], f.quadratic[0][0], r.residual_linear[i],
                   i == s.drive_index});
    }
    return t;
}

} // namespace mechsql
