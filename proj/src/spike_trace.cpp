#include "nmsoc/spike_trace.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace nmsoc {
namespace {

constexpr const char* kHeader = "timestep,core,neuron";

std::uint32_t parse_field(std::string_view text, const std::string& source, std::size_t line)
{
    std::uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ParseError(source, line, "expected a non-negative integer, got '" + std::string(text) + "'");
    }
    return value;
}

std::string strip(std::string s)
{
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) {
        s.pop_back();
    }
    return s;
}

} // namespace

std::vector<Spike> read_spike_trace(std::istream& in, const std::string& source)
{
    std::string line;
    std::size_t number = 0;
    if (!std::getline(in, line)) {
        throw ParseError(source, 1, "missing header");
    }
    ++number;
    if (strip(line) != kHeader) {
        throw ParseError(source, number, std::string("expected header '") + kHeader + "'");
    }
    std::vector<Spike> spikes;
    while (std::getline(in, line)) {
        ++number;
        line = strip(line);
        if (line.empty()) {
            continue;
        }
        std::string_view view(line);
        auto c1 = view.find(',');
        auto c2 = c1 == std::string_view::npos ? c1 : view.find(',', c1 + 1);
        if (c2 == std::string_view::npos || view.find(',', c2 + 1) != std::string_view::npos) {
            throw ParseError(source, number, "expected three comma-separated fields");
        }
        spikes.push_back(Spike{parse_field(view.substr(0, c1), source, number),
            parse_field(view.substr(c1 + 1, c2 - c1 - 1), source, number),
            parse_field(view.substr(c2 + 1), source, number)});
    }
    return spikes;
}

std::vector<Spike> load_spike_trace(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open spike trace '" + path.string() + "'");
    }
    return read_spike_trace(in, path.string());
}

void write_spike_trace(std::ostream& out, const std::vector<Spike>& spikes)
{
    out << kHeader << '\n';
    for (const auto& s : spikes) {
        out << s.timestep << ',' << s.core << ',' << s.neuron << '\n';
    }
}

void save_spike_trace(const std::filesystem::path& path, const std::vector<Spike>& spikes)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write spike trace '" + path.string() + "'");
    }
    write_spike_trace(out, spikes);
}

} // namespace nmsoc
