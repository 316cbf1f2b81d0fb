#include "mechsql/config_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "mechsql/constants.hpp"
#include "mechsql/error.hpp"

namespace mechsql {

namespace {

constexpr std::string_view kDefaultConfig = R"(# Membrane-in-the-middle parameter set.
#
# L is read as the full cavity length; gamma_c = gamma_d = c t0^2 / (2 L) and
# G_0 = 2 sqrt(2) omega_0 x_q / L. `derive` also prints the sub-cavity (L/2)
# reading for comparison.
#
# I_0 is the power that places omega_eff at omega_m sqrt(n_th/Q_m) under the
# convention c_bar = sqrt(2 I_0 / (gamma_c hbar omega_0)). At 5 nW this
# convention puts the spring past its instability (K/omega_m ~ 2.16).
model = physical
m = 50 pg
omega_m = 100 kHz
Q_m = 3.2e7
lambda = 532 nm
L = 3 cm
r_m = 0.9999
finesse = 6e5
T = 0.1 K
I_0 = 2.31729918 nW
driven_mode = common
)";

constexpr std::string_view kToyConfig = R"(# Dimensionless toy set: all regime checks pass.
model = rates
omega_m = 1
omega_s = 50
gamma_c = 0.1
gamma_d = 0.1
G_0 = 0.05
c_bar = 20
n_th = 0
gamma_m = 0
driven_mode = common
)";

enum class Dim { none, mass, angular, length, temperature, power, text };

struct KeySpec {
    Dim dim;
    bool required;
};

const std::map<std::string, KeySpec, std::less<>>& physical_keys()
{
    static const std::map<std::string, KeySpec, std::less<>> keys{
        {"m", {Dim::mass, true}},         {"omega_m", {Dim::angular, true}},
        {"Q_m", {Dim::none, true}},       {"lambda", {Dim::length, true}},
        {"L", {Dim::length, true}},       {"r_m", {Dim::none, false}},
        {"t_m", {Dim::none, false}},      {"finesse", {Dim::none, true}},
        {"T", {Dim::temperature, true}},  {"I_0", {Dim::power, true}},
        {"driven_mode", {Dim::text, false}},
    };
    return keys;
}

const std::map<std::string, KeySpec, std::less<>>& rate_keys()
{
    static const std::map<std::string, KeySpec, std::less<>> keys{
        {"omega_m", {Dim::angular, true}},  {"omega_s", {Dim::angular, true}},
        {"gamma_c", {Dim::angular, true}},  {"gamma_d", {Dim::angular, false}},
        {"gamma_m", {Dim::angular, false}}, {"G_0", {Dim::angular, true}},
        {"c_bar", {Dim::none, true}},       {"n_th", {Dim::none, false}},
        {"driven_mode", {Dim::text, false}},
    };
    return keys;
}

std::optional<double> unit_factor(Dim dim, std::string_view unit)
{
    struct U {
        std::string_view name;
        double factor;
    };
    static const std::vector<U> mass{{"kg", 1.0}, {"g", 1e-3}, {"mg", 1e-6}, {"ug", 1e-9}, {"ng", 1e-12}, {"pg", 1e-15}};
    static const std::vector<U> angular{{"rad/s", 1.0}, {"Hz", two_pi}, {"kHz", two_pi * 1e3},
                                        {"MHz", two_pi * 1e6}, {"GHz", two_pi * 1e9}};
    static const std::vector<U> length{{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}};
    static const std::vector<U> temperature{{"K", 1.0}, {"mK", 1e-3}, {"uK", 1e-6}};
    static const std::vector<U> power{{"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}, {"nW", 1e-9}, {"pW", 1e-12}};

    const std::vector<U>* table = nullptr;
    switch (dim) {
    case Dim::none:
    case Dim::text:
        return unit.empty() ? std::optional<double>(1.0) : std::nullopt;
    case Dim::mass: table = &mass; break;
    case Dim::angular: table = &angular; break;
    case Dim::length: table = &length; break;
    case Dim::temperature: table = &temperature; break;
    case Dim::power: table = &power; break;
    }
    if (unit.empty())
        return 1.0;
    for (const auto& u : *table) {
        if (u.name == unit)
            return u.factor;
    }
    return std::nullopt;
}

std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    std::string unit;
    int line = 0;
};

// key -> entry, keeping the raw text so the model can be chosen first.
using EntryMap = std::map<std::string, Entry, std::less<>>;

void parse_line(std::string_view raw, int line, EntryMap& entries, bool allow_replace)
{
    auto text = raw;
    if (const auto hash = text.find('#'); hash != std::string_view::npos)
        text = text.substr(0, hash);
    text = trim(text);
    if (text.empty())
        return;

    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError(fmt::format("expected 'key = value [unit]', got '{}'", text), line);
    const auto key = trim(text.substr(0, eq));
    const auto rhs = trim(text.substr(eq + 1));
    if (key.empty())
        throw ConfigError("missing key before '='", line);
    if (rhs.empty())
        throw ConfigError(fmt::format("missing value for '{}'", key), line);

    Entry entry;
    entry.line = line;
    const auto space = rhs.find_first_of(" \t");
    if (space == std::string_view::npos) {
        entry.value = std::string(rhs);
    } else {
        entry.value = std::string(rhs.substr(0, space));
        entry.unit = std::string(trim(rhs.substr(space)));
        if (entry.unit.find_first_of(" \t") != std::string::npos)
            throw ConfigError(fmt::format("trailing text after unit in '{}'", rhs), line);
    }

    const auto [it, inserted] = entries.try_emplace(std::string(key), entry);
    if (!inserted) {
        if (!allow_replace)
            throw ConfigError(fmt::format("duplicate key '{}'", key), line);
        it->second = entry;
    }
}

double parse_number(const std::string& key, const Entry& e)
{
    double value = 0.0;
    const char* begin = e.value.data();
    const char* end = begin + e.value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value))
        throw ConfigError(fmt::format("'{}' is not a number (key '{}')", e.value, key), e.line);
    return value;
}

double number_in_si(const std::string& key, const Entry& e, Dim dim)
{
    const double raw = parse_number(key, e);
    const auto factor = unit_factor(dim, e.unit);
    if (!factor)
        throw ConfigError(fmt::format("unknown unit '{}' for '{}'", e.unit, key), e.line);
    return raw * *factor;
}

ModelConfig build(const EntryMap& entries)
{
    bool rates_model = false;
    if (const auto it = entries.find("model"); it != entries.end()) {
        if (!it->second.unit.empty())
            throw ConfigError("'model' takes no unit", it->second.line);
        if (it->second.value == "rates")
            rates_model = true;
        else if (it->second.value != "physical")
            throw ConfigError(fmt::format("model must be 'physical' or 'rates', got '{}'", it->second.value),
                              it->second.line);
    }
    const auto& spec = rates_model ? rate_keys() : physical_keys();

    for (const auto& [key, entry] : entries) {
        if (key == "model")
            continue;
        if (!spec.contains(key))
            throw ConfigError(fmt::format("unknown key '{}' for model '{}'", key, rates_model ? "rates" : "physical"),
                              entry.line);
    }
    for (const auto& [key, ks] : spec) {
        if (ks.required && !entries.contains(key))
            throw ConfigError(fmt::format("missing required key '{}'", key));
    }

    auto get = [&](const std::string& key) { return number_in_si(key, entries.find(key)->second, spec.at(key).dim); };
    auto get_or = [&](const std::string& key, double fallback) {
        return entries.contains(key) ? get(key) : fallback;
    };
    auto mode = [&]() {
        const auto it = entries.find("driven_mode");
        if (it == entries.end())
            return DrivenMode::common;
        try {
            return driven_mode_from_string(it->second.value);
        } catch (const ConfigError& e) {
            throw ConfigError(e.what(), it->second.line);
        }
    };
    // Range checks are reported against the offending line when possible.
    auto checked = [&](auto&& fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            if (e.line() > 0)
                throw;
            throw ConfigError(e.what());
        }
    };

    if (rates_model) {
        RateParams r;
        r.omega_m = get("omega_m");
        r.omega_s = get("omega_s");
        r.gamma_c = get("gamma_c");
        r.gamma_d = get_or("gamma_d", r.gamma_c);
        r.gamma_m = get_or("gamma_m", 0.0);
        r.G_0 = get("G_0");
        r.c_bar = get("c_bar");
        r.n_th = get_or("n_th", 0.0);
        r.driven_mode = mode();
        checked([&] { r.validate(); });
        return r;
    }

    SystemConfig c;
    c.m = get("m");
    c.omega_m = get("omega_m");
    c.Q_m = get("Q_m");
    c.lambda = get("lambda");
    c.L = get("L");
    c.finesse = get("finesse");
    c.T = get("T");
    c.I_0 = get("I_0");
    c.driven_mode = mode();
    const bool has_r = entries.contains("r_m");
    const bool has_t = entries.contains("t_m");
    if (has_r == has_t)
        throw ConfigError("exactly one of 'r_m' or 't_m' must be given");
    if (has_r) {
        const auto& e = entries.find("r_m")->second;
        try {
            c.set_r_m(get("r_m"));
        } catch (const ConfigError& err) {
            throw ConfigError(err.what(), e.line);
        }
    } else {
        c.t_m = get("t_m");
    }
    checked([&] { c.validate(); });
    return c;
}

std::string num(double v) { return fmt::format("{:.12g}", v); }

} // namespace

ModelConfig parse_config(std::string_view text, std::span<const std::string> overrides)
{
    EntryMap entries;
    int line = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto len = (nl == std::string_view::npos ? text.size() : nl) - pos;
        ++line;
        parse_line(text.substr(pos, len), line, entries, false);
        if (nl == std::string_view::npos)
            break;
        pos = nl + 1;
    }
    for (const auto& o : overrides) {
        try {
            parse_line(o, 0, entries, true);
            // r_m and t_m are alternatives: overriding one drops the other.
            const auto key = trim(std::string_view(o).substr(0, o.find('=')));
            if (key == "r_m")
                entries.erase("t_m");
            else if (key == "t_m")
                entries.erase("r_m");
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("--set '{}': {}", o, e.what()));
        }
    }
    return build(entries);
}

ModelConfig load_config_file(const std::string& path, std::span<const std::string> overrides)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open config file '{}'", path));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), overrides);
}

std::string format_config(const ModelConfig& config)
{
    std::string out;
    auto line = [&](std::string_view key, const std::string& value, std::string_view unit = {}) {
        out += fmt::format("{} = {}{}{}\n", key, value, unit.empty() ? "" : " ", unit);
    };
    if (const auto* c = std::get_if<SystemConfig>(&config)) {
        line("model", "physical");
        line("m", num(c->m), "kg");
        line("omega_m", num(c->omega_m), "rad/s");
        line("Q_m", num(c->Q_m));
        line("lambda", num(c->lambda), "m");
        line("L", num(c->L), "m");
        line("t_m", num(c->t_m));
        line("finesse", num(c->finesse));
        line("T", num(c->T), "K");
        line("I_0", num(c->I_0), "W");
        line("driven_mode", std::string(to_string(c->driven_mode)));
    } else {
        const auto& r = std::get<RateParams>(config);
        line("model", "rates");
        line("omega_m", num(r.omega_m), "rad/s");
        line("omega_s", num(r.omega_s), "rad/s");
        line("gamma_c", num(r.gamma_c), "rad/s");
        line("gamma_d", num(r.gamma_d), "rad/s");
        line("gamma_m", num(r.gamma_m), "rad/s");
        line("G_0", num(r.G_0), "rad/s");
        line("c_bar", num(r.c_bar));
        line("n_th", num(r.n_th));
        line("driven_mode", std::string(to_string(r.driven_mode)));
    }
    return out;
}

std::string text_hash(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

std::string config_hash(const ModelConfig& config) { return text_hash(format_config(config)); }

std::string_view default_config_text() { return kDefaultConfig; }

ModelConfig default_config() { return parse_config(kDefaultConfig); }

std::string_view toy_config_text() { return kToyConfig; }

} // namespace mechsql
