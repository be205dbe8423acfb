#include "nmsoc/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "nmsoc/common.hpp"
#include "nmsoc/format.hpp"

namespace nmsoc {
namespace {

using Setter = std::function<void(Config&, std::string_view)>;

template <typename T>
T parse_number(std::string_view text)
{
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("invalid numeric value '" + std::string(text) + "'");
    }
    return value;
}

struct Field {
    std::string_view key;
    Setter set;
    std::function<std::string(const Config&)> get;
};

template <typename T>
Field field(std::string_view key, T Config::*member)
{
    return Field{
        key,
        [member](Config& c, std::string_view v) { c.*member = parse_number<T>(v); },
        [member](const Config& c) { return format_number(c.*member); },
    };
}

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = {
        field("freq_mhz", &Config::freq_mhz),
        field("e_sop_pj", &Config::e_sop_pj),
        field("e_core_active_cycle_pj", &Config::e_core_active_cycle_pj),
        field("e_core_idle_cycle_pj", &Config::e_core_idle_cycle_pj),
        field("e_core_gated_cycle_pj", &Config::e_core_gated_cycle_pj),
        field("e_hop_p2p_pj", &Config::e_hop_p2p_pj),
        field("e_hop_bcast_pj", &Config::e_hop_bcast_pj),
        field("buffer_depth", &Config::buffer_depth),
        field("grants_per_cycle", &Config::grants_per_cycle),
        field("handshake_cycles", &Config::handshake_cycles),
        field("neurons_per_core", &Config::neurons_per_core),
        field("mp_bits", &Config::mp_bits),
        field("pipeline_buffer_depth", &Config::pipeline_buffer_depth),
        field("spe_spike_overhead_cycles", &Config::spe_spike_overhead_cycles),
        field("core_eject_per_cycle", &Config::core_eject_per_cycle),
        field("watchdog_cycles", &Config::watchdog_cycles),
        field("router_sample_cycles", &Config::router_sample_cycles),
        field("sweep_inputs", &Config::sweep_inputs),
        field("sweep_neurons", &Config::sweep_neurons),
        field("sweep_fanout", &Config::sweep_fanout),
    };
    return table;
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw ConfigError(message);
    }
}

} // namespace

void validate(const Config& c)
{
    require(c.freq_mhz > 0, "freq_mhz must be positive");
    require(c.e_sop_pj >= 0 && c.e_core_active_cycle_pj >= 0 && c.e_core_idle_cycle_pj >= 0 &&
                c.e_core_gated_cycle_pj >= 0 && c.e_hop_p2p_pj >= 0 && c.e_hop_bcast_pj >= 0,
        "energy coefficients must be non-negative");
    require(c.buffer_depth >= 1, "buffer_depth must be >= 1");
    require(c.grants_per_cycle >= 1, "grants_per_cycle must be >= 1");
    require(c.handshake_cycles >= 1, "handshake_cycles must be >= 1");
    require(c.neurons_per_core >= 1 && c.neurons_per_core <= 8192,
        "neurons_per_core must be in [1, 8192]");
    require(c.mp_bits >= 8 && c.mp_bits <= 32, "mp_bits must be in [8, 32]");
    require(c.pipeline_buffer_depth >= 1, "pipeline_buffer_depth must be >= 1");
    require(c.spe_spike_overhead_cycles >= 0, "spe_spike_overhead_cycles must be >= 0");
    require(c.core_eject_per_cycle >= 0, "core_eject_per_cycle must be >= 0");
    require(c.watchdog_cycles >= 1, "watchdog_cycles must be >= 1");
    require(c.router_sample_cycles >= 0, "router_sample_cycles must be >= 0");
    require(c.sweep_inputs >= 16, "sweep_inputs must be >= 16");
    require(c.sweep_neurons >= 1, "sweep_neurons must be >= 1");
    require(c.sweep_fanout >= 1 && c.sweep_fanout <= c.sweep_neurons,
        "sweep_fanout must be in [1, sweep_neurons]");
}

Config parse_config(std::string_view text, const std::string& source)
{
    Config config;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(source, line_no, "expected key=value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto& table = fields();
        auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
        if (it == table.end()) {
            throw ParseError(source, line_no, "unknown key '" + std::string(key) + "'");
        }
        try {
            it->set(config, value);
        } catch (const ConfigError& e) {
            throw ParseError(source, line_no, e.what());
        }
    }
    validate(config);
    return config;
}

Config load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.string());
}

Config resolve_config(const std::optional<std::filesystem::path>& explicit_path)
{
    if (explicit_path) {
        return load_config(*explicit_path);
    }
    if (const char* env = std::getenv("NOC_SIM_CONFIG"); env != nullptr && *env != '\0') {
        return load_config(env);
    }
    return Config{};
}

std::string to_text(const Config& config)
{
    std::string out;
    for (const auto& f : fields()) {
        out += std::string(f.key) + "=" + f.get(config) + "\n";
    }
    return out;
}

} // namespace nmsoc
