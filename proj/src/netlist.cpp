#include "nmsoc/netlist.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nmsoc/format.hpp"

namespace nmsoc {
namespace {

constexpr std::string_view kHeader = "nmsoc-netlist 1";

class LineParser {
public:
    LineParser(std::string_view line, const std::string& source, std::size_t number)
        : source_(source), number_(number)
    {
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
                ++i;
            }
            auto start = i;
            while (i < line.size() && line[i] != ' ' && line[i] != '\t') {
                ++i;
            }
            if (i > start) {
                tokens_.push_back(line.substr(start, i - start));
            }
        }
    }

    bool empty() const { return tokens_.empty(); }
    std::string_view directive() const { return tokens_.front(); }
    std::size_t remaining() const { return tokens_.size() - pos_; }

    std::string_view word()
    {
        if (pos_ >= tokens_.size()) {
            fail("missing field");
        }
        return tokens_[pos_++];
    }

    void expect(std::string_view keyword)
    {
        auto w = word();
        if (w != keyword) {
            fail("expected '" + std::string(keyword) + "', got '" + std::string(w) + "'");
        }
    }

    template <typename T>
    T integer()
    {
        auto w = word();
        T value{};
        auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), value);
        if (ec != std::errc() || ptr != w.data() + w.size()) {
            fail("expected an integer, got '" + std::string(w) + "'");
        }
        return value;
    }

    double real()
    {
        auto w = word();
        double value = 0;
        auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), value);
        if (ec != std::errc() || ptr != w.data() + w.size()) {
            fail("expected a number, got '" + std::string(w) + "'");
        }
        return value;
    }

    void done()
    {
        if (pos_ != tokens_.size()) {
            fail("unexpected trailing field '" + std::string(tokens_[pos_]) + "'");
        }
    }

    [[noreturn]] void fail(const std::string& message) const { throw ParseError(source_, number_, message); }

private:
    const std::string& source_;
    std::size_t number_;
    std::vector<std::string_view> tokens_;
    std::size_t pos_ = 1;
};

} // namespace

const NetlistCore* Netlist::find_core(CoreId id) const
{
    auto it = std::find_if(cores.begin(), cores.end(), [&](const NetlistCore& c) { return c.id == id; });
    return it == cores.end() ? nullptr : &*it;
}

bool Netlist::is_input(CoreId core, std::uint32_t neuron) const
{
    return std::find(inputs.begin(), inputs.end(), NeuronRef{core, neuron}) != inputs.end();
}

std::vector<core::InputLine> input_lines(const Netlist& netlist, CoreId core)
{
    std::set<NeuronRef> sources;
    for (const auto& s : netlist.synapses) {
        if (s.core == core) {
            sources.insert(NeuronRef{s.pre_core, s.pre_neuron});
        }
    }
    const std::set<NeuronRef> inputs(netlist.inputs.begin(), netlist.inputs.end());
    std::vector<core::InputLine> lines;
    for (const auto& src : sources) {
        lines.push_back(core::InputLine{src.core, src.neuron, inputs.contains(src)});
    }
    return lines;
}

std::vector<std::uint8_t> synapse_image(const Netlist& netlist, CoreId core)
{
    const auto* c = netlist.find_core(core);
    if (c == nullptr) {
        return {};
    }
    const auto lines = input_lines(netlist, core);
    std::map<NeuronRef, std::size_t> line_of;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        line_of[NeuronRef{lines[i].src_core, lines[i].src_neuron}] = i;
    }
    std::vector<std::uint8_t> image(lines.size() * c->neurons, core::kNoSynapse);
    for (const auto& s : netlist.synapses) {
        if (s.core == core) {
            image[line_of.at(NeuronRef{s.pre_core, s.pre_neuron}) * c->neurons + s.post] = s.index;
        }
    }
    return image;
}

std::string emit_netlist(const Netlist& n)
{
    std::ostringstream out;
    out << kHeader << '\n';
    out << "neurons_per_core " << n.neurons_per_core << '\n';
    for (const auto& c : n.cores) {
        out << "core " << c.id << " N " << c.weight_count << " W " << c.weight_width << " threshold "
            << c.threshold << " leak " << c.leak << " reset " << core::to_string(c.reset) << " neurons "
            << c.neurons << '\n';
        out << "scale " << c.id << ' ' << format_number(c.scale) << '\n';
        out << "codebook " << c.id;
        for (auto v : c.codebook) {
            out << ' ' << v;
        }
        out << '\n';
    }
    for (const auto& s : n.synapses) {
        out << "syn " << s.core << ' ' << s.pre_core << ':' << s.pre_neuron << ' ' << s.post << ' '
            << static_cast<int>(s.index) << '\n';
    }
    for (const auto& r : n.routes) {
        out << "route " << r.router << ' ' << r.in_core << ' ' << r.slot << ' ' << r.dest_core << ' '
            << router::to_string(r.mode) << '\n';
    }
    for (const auto& r : n.relays) {
        out << "relay " << r.core << ' ' << r.origin << ' ' << r.router << '\n';
    }
    for (const auto& i : n.inputs) {
        out << "input " << i.core << ' ' << i.neuron << '\n';
    }
    for (const auto& o : n.outputs) {
        out << "output " << o.core << ' ' << o.neuron << ' ' << o.buffer << ' ' << o.id << '\n';
    }
    return out.str();
}

Netlist parse_netlist(std::string_view text, const std::string& source)
{
    Netlist n;
    std::map<CoreId, std::size_t> core_index;
    std::set<CoreId> with_codebook;
    std::size_t number = 0;
    bool header_seen = false;

    auto core_ref = [&](LineParser& p, CoreId id) -> NetlistCore& {
        auto it = core_index.find(id);
        if (it == core_index.end()) {
            p.fail("core " + std::to_string(id) + " is not declared");
        }
        return n.cores[it->second];
    };
    auto neuron_ref = [&](LineParser& p, CoreId id, std::uint32_t neuron) {
        auto& c = core_ref(p, id);
        if (neuron >= c.neurons) {
            p.fail("neuron " + std::to_string(neuron) + " out of range for core " + std::to_string(id));
        }
    };

    while (!text.empty()) {
        auto eol = text.find('\n');
        auto raw = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++number;
        if (auto hash = raw.find('#'); hash != std::string_view::npos && !(number == 1 && raw == kHeader)) {
            raw = raw.substr(0, hash);
        }
        if (!raw.empty() && raw.back() == '\r') {
            raw.remove_suffix(1);
        }
        LineParser p(raw, source, number);
        if (p.empty()) {
            continue;
        }
        if (!header_seen) {
            if (raw != kHeader) {
                p.fail("expected header '" + std::string(kHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        const auto d = p.directive();
        if (d == "neurons_per_core") {
            n.neurons_per_core = p.integer<std::uint32_t>();
            if (n.neurons_per_core == 0 || n.neurons_per_core > 8192) {
                p.fail("neurons_per_core must be in [1, 8192]");
            }
        } else if (d == "core") {
            NetlistCore c;
            c.id = p.integer<CoreId>();
            p.expect("N");
            c.weight_count = p.integer<int>();
            p.expect("W");
            c.weight_width = p.integer<int>();
            p.expect("threshold");
            c.threshold = p.integer<std::int32_t>();
            p.expect("leak");
            c.leak = p.integer<std::int32_t>();
            p.expect("reset");
            try {
                c.reset = core::parse_reset_mode(p.word());
            } catch (const std::invalid_argument& e) {
                p.fail(e.what());
            }
            p.expect("neurons");
            c.neurons = p.integer<std::uint32_t>();
            p.done();
            if (c.id >= (1u << kCoreIdBits)) {
                p.fail("core id " + std::to_string(c.id) + " does not fit the 5-bit core id");
            }
            if (!core::supported_codebook_parameter(c.weight_count) ||
                !core::supported_codebook_parameter(c.weight_width)) {
                p.fail("N and W must be 4, 8 or 16");
            }
            if (c.leak < 0) {
                p.fail("leak must be non-negative");
            }
            if (c.neurons > n.neurons_per_core) {
                p.fail("core " + std::to_string(c.id) + " has more neurons than neurons_per_core");
            }
            if (!core_index.emplace(c.id, n.cores.size()).second) {
                p.fail("core " + std::to_string(c.id) + " declared twice");
            }
            n.cores.push_back(c);
        } else if (d == "scale") {
            auto& c = core_ref(p, p.integer<CoreId>());
            c.scale = p.real();
            p.done();
            if (!(c.scale > 0)) {
                p.fail("scale must be positive");
            }
        } else if (d == "codebook") {
            const auto id = p.integer<CoreId>();
            auto& c = core_ref(p, id);
            if (!with_codebook.insert(id).second) {
                p.fail("codebook for core " + std::to_string(id) + " given twice");
            }
            std::vector<std::int32_t> values;
            while (p.remaining() > 0) {
                values.push_back(p.integer<std::int32_t>());
            }
            if (values.size() != static_cast<std::size_t>(c.weight_count)) {
                p.fail("codebook has " + std::to_string(values.size()) + " values, core declares N " +
                    std::to_string(c.weight_count));
            }
            try {
                core::WeightCodebook check(values, c.weight_width);
            } catch (const ConfigError& e) {
                p.fail(e.what());
            }
            c.codebook = std::move(values);
        } else if (d == "syn") {
            NetlistSynapse s;
            s.core = p.integer<CoreId>();
            auto pre = p.word();
            auto colon = pre.find(':');
            if (colon == std::string_view::npos) {
                p.fail("expected pre-synaptic neuron as <core>:<neuron>");
            }
            auto as_int = [&](std::string_view w) {
                std::uint32_t v = 0;
                auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
                if (ec != std::errc() || ptr != w.data() + w.size() || w.empty()) {
                    p.fail("bad pre-synaptic neuron '" + std::string(pre) + "'");
                }
                return v;
            };
            s.pre_core = as_int(pre.substr(0, colon));
            s.pre_neuron = as_int(pre.substr(colon + 1));
            s.post = p.integer<std::uint32_t>();
            const auto index = p.integer<int>();
            p.done();
            neuron_ref(p, s.core, s.post);
            neuron_ref(p, s.pre_core, s.pre_neuron);
            if (index < 0 || index >= core_ref(p, s.core).weight_count) {
                p.fail("weight index " + std::to_string(index) + " out of range");
            }
            s.index = static_cast<std::uint8_t>(index);
            n.synapses.push_back(s);
        } else if (d == "route") {
            NetlistRoute r;
            r.router = p.integer<NodeId>();
            r.in_core = p.integer<CoreId>();
            r.slot = p.integer<int>();
            r.dest_core = p.integer<CoreId>();
            try {
                r.mode = router::parse_mode(p.word());
            } catch (const std::invalid_argument& e) {
                p.fail(e.what());
            }
            p.done();
            if (r.slot < 0 || r.slot >= router::kPorts) {
                p.fail("slot must be in [0, 5)");
            }
            n.routes.push_back(r);
        } else if (d == "relay") {
            NetlistRelay r;
            r.core = p.integer<CoreId>();
            r.origin = p.integer<CoreId>();
            r.router = p.integer<NodeId>();
            p.done();
            n.relays.push_back(r);
        } else if (d == "input") {
            NeuronRef ref;
            ref.core = p.integer<CoreId>();
            ref.neuron = p.integer<std::uint32_t>();
            p.done();
            neuron_ref(p, ref.core, ref.neuron);
            n.inputs.push_back(ref);
        } else if (d == "output") {
            NetlistOutput o;
            o.core = p.integer<CoreId>();
            o.neuron = p.integer<std::uint32_t>();
            o.buffer = p.integer<int>();
            o.id = p.integer<std::uint32_t>();
            p.done();
            neuron_ref(p, o.core, o.neuron);
            if (o.buffer < 0 || o.buffer > 3) {
                p.fail("output buffer must be 0..3");
            }
            if (o.id >= (1u << 13)) {
                p.fail("output id must fit 13 bits");
            }
            n.outputs.push_back(o);
        } else {
            p.fail("unknown directive '" + std::string(d) + "'");
        }
    }
    if (!header_seen) {
        throw ParseError(source, number == 0 ? 1 : number, "empty netlist");
    }
    for (const auto& c : n.cores) {
        if (!with_codebook.contains(c.id)) {
            throw ParseError(source, number, "core " + std::to_string(c.id) + " has no codebook");
        }
    }
    return n;
}

Netlist load_netlist(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open netlist '" + path.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_netlist(text.str(), path.string());
}

void save_netlist(const std::filesystem::path& path, const Netlist& netlist)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write netlist '" + path.string() + "'");
    }
    out << emit_netlist(netlist);
}

} // namespace nmsoc
