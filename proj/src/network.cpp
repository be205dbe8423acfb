#include "nmsoc/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nmsoc/common.hpp"
#include "nmsoc/format.hpp"

namespace nmsoc::compiler {

std::uint32_t NetworkDescription::neuron_count() const
{
    std::uint32_t n = 0;
    for (const auto& l : layers) {
        n += l.count;
    }
    return n;
}

std::uint32_t NetworkDescription::first_neuron(std::size_t layer) const
{
    std::uint32_t n = 0;
    for (std::size_t i = 0; i < layer; ++i) {
        n += layers.at(i).count;
    }
    return n;
}

std::size_t NetworkDescription::layer_of(std::uint32_t neuron) const
{
    std::uint32_t end = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        end += layers[i].count;
        if (neuron < end) {
            return i;
        }
    }
    throw std::out_of_range("neuron " + std::to_string(neuron) + " is not in the network");
}

void validate(const NetworkDescription& net)
{
    const auto n = net.neuron_count();
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& l = net.layers[i];
        if (!std::isfinite(l.threshold) || !std::isfinite(l.leak) || l.leak < 0) {
            throw std::invalid_argument("layer " + std::to_string(i) + " needs a finite threshold and leak >= 0");
        }
    }
    for (const auto& c : net.connections) {
        if (c.pre >= n || c.post >= n) {
            throw std::invalid_argument("connection " + std::to_string(c.pre) + " -> " + std::to_string(c.post) +
                " names a neuron beyond " + std::to_string(n));
        }
        if (net.is_input(c.post)) {
            throw std::invalid_argument("connection into input neuron " + std::to_string(c.post));
        }
        if (!std::isfinite(c.weight)) {
            throw std::invalid_argument("non-finite weight on connection " + std::to_string(c.pre) + " -> " +
                std::to_string(c.post));
        }
    }
}

NetworkDescription parse_network(std::string_view text, const std::string& source)
{
    NetworkDescription net;
    std::size_t number = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        std::istringstream fields(line);
        std::vector<std::string> t;
        for (std::string w; fields >> w;) {
            t.push_back(w);
        }
        if (t.empty()) {
            continue;
        }
        auto fail = [&](const std::string& msg) { throw ParseError(source, number, msg); };
        auto integer = [&](const std::string& w) {
            std::uint32_t v = 0;
            auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
            if (ec != std::errc() || ptr != w.data() + w.size()) {
                fail("expected a non-negative integer, got '" + w + "'");
            }
            return v;
        };
        auto real = [&](const std::string& w) {
            double v = 0;
            auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
            if (ec != std::errc() || ptr != w.data() + w.size() || !std::isfinite(v)) {
                fail("expected a finite number, got '" + w + "'");
            }
            return v;
        };
        if (t[0] == "layer") {
            if (t.size() != 5 && !(t.size() == 6 && t[5] == "input")) {
                fail("expected 'layer <count> <threshold> <leak> <zero|sub> [input]'");
            }
            Layer l;
            l.count = integer(t[1]);
            l.threshold = real(t[2]);
            l.leak = real(t[3]);
            if (l.leak < 0) {
                fail("leak must be non-negative");
            }
            try {
                l.reset = core::parse_reset_mode(t[4]);
            } catch (const std::invalid_argument& e) {
                fail(e.what());
            }
            l.input = t.size() == 6;
            net.layers.push_back(l);
        } else if (t[0] == "conn") {
            if (t.size() != 4) {
                fail("expected 'conn <pre> <post> <weight>'");
            }
            Connection c{integer(t[1]), integer(t[2]), real(t[3])};
            const auto n = net.neuron_count();
            if (c.pre >= n || c.post >= n) {
                fail("connection names a neuron not declared by a preceding layer");
            }
            if (net.is_input(c.post)) {
                fail("connection into input neuron " + std::to_string(c.post));
            }
            net.connections.push_back(c);
        } else {
            fail("unknown record '" + t[0] + "'");
        }
    }
    return net;
}

NetworkDescription load_network(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open network '" + path.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_network(text.str(), path.string());
}

std::string emit_network(const NetworkDescription& net)
{
    std::ostringstream out;
    for (const auto& l : net.layers) {
        out << "layer " << l.count << ' ' << format_number(l.threshold) << ' ' << format_number(l.leak) << ' '
            << core::to_string(l.reset) << (l.input ? " input" : "") << '\n';
    }
    for (const auto& c : net.connections) {
        out << "conn " << c.pre << ' ' << c.post << ' ' << format_number(c.weight) << '\n';
    }
    return out.str();
}

NetworkDescription random_network(Rng& rng, const RandomNetworkOptions& o)
{
    if (o.layers < 2 || o.min_neurons > o.max_neurons || o.min_neurons < static_cast<std::uint32_t>(o.layers)) {
        throw std::invalid_argument("random network needs >= 2 layers and a valid neuron range");
    }
    const auto total = o.min_neurons + static_cast<std::uint32_t>(rng.below(o.max_neurons - o.min_neurons + 1));
    NetworkDescription net;
    const double threshold = rng.uniform(0.5, 2.0);
    const double leak = rng.bernoulli(0.5) ? 0.0 : rng.uniform(0.0, 0.1);
    const auto reset = rng.bernoulli(0.5) ? core::ResetMode::ToZero : core::ResetMode::Subtract;

    // Split `total` into roughly equal layers, remainder to the first.
    const auto per = total / static_cast<std::uint32_t>(o.layers);
    for (int i = 0; i < o.layers; ++i) {
        Layer l;
        l.count = per + (i == 0 ? total % static_cast<std::uint32_t>(o.layers) : 0);
        l.threshold = threshold;
        l.leak = leak;
        l.reset = reset;
        l.input = i == 0;
        net.layers.push_back(l);
    }
    for (std::size_t i = 0; i + 1 < net.layers.size(); ++i) {
        const auto a = net.first_neuron(i);
        const auto b = net.first_neuron(i + 1);
        for (std::uint32_t pre = a; pre < a + net.layers[i].count; ++pre) {
            for (std::uint32_t post = b; post < b + net.layers[i + 1].count; ++post) {
                if (rng.bernoulli(o.connection_probability)) {
                    net.connections.push_back(Connection{pre, post, rng.uniform(-0.6, 1.0)});
                }
            }
        }
    }
    return net;
}

std::vector<NeuronSpike> random_input_spikes(const NetworkDescription& net, std::uint32_t timesteps, double rate,
    Rng& rng)
{
    std::vector<NeuronSpike> spikes;
    for (std::uint32_t t = 0; t < timesteps; ++t) {
        for (std::uint32_t n = 0; n < net.neuron_count(); ++n) {
            if (net.is_input(n) && rng.bernoulli(rate)) {
                spikes.push_back(NeuronSpike{t, n});
            }
        }
    }
    return spikes;
}

} // namespace nmsoc::compiler
