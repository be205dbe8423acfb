#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nmsoc/compiler.hpp"
#include "nmsoc/config.hpp"
#include "nmsoc/efficiency.hpp"
#include "nmsoc/fabric.hpp"
#include "nmsoc/format.hpp"
#include "nmsoc/golden.hpp"
#include "nmsoc/isa.hpp"
#include "nmsoc/netlist.hpp"
#include "nmsoc/quantize.hpp"
#include "nmsoc/spike_trace.hpp"
#include "nmsoc/topology.hpp"
#include "nmsoc/traffic.hpp"

namespace nmsoc::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config_path;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
};

std::string rational_text(const topology::Rational& r)
{
    if (r.denominator() == 1) {
        return std::to_string(r.numerator());
    }
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

class Session {
public:
    Session(const Globals& g, std::string command, std::ostream& out) : g_(g), command_(std::move(command)), out_(out)
    {
        std::optional<fs::path> path;
        if (!g.config_path.empty()) {
            path = g.config_path;
        }
        config_ = resolve_config(path);
    }

    const Config& config() const { return config_; }
    std::ostream& out() { return out_; }

    fs::path output(const std::string& path) const
    {
        fs::path p(path);
        return p.is_absolute() ? p : fs::path(g_.out_dir) / p;
    }

    void write(const std::string& path, const std::string& text)
    {
        const auto p = output(path);
        if (p.has_parent_path()) {
            fs::create_directories(p.parent_path());
        }
        std::ofstream f(p, std::ios::binary);
        if (!f) {
            throw Error("cannot write '" + p.string() + "'");
        }
        f << text;
        outputs_.push_back(p.string());
    }

    void param(const std::string& key, const std::string& value) { params_.emplace_back(key, value); }

    /// Writes `<command>.manifest` into the output directory.
    void manifest()
    {
        std::ostringstream m;
        m << "command=" << command_ << '\n';
        m << "version=" << kVersion << '\n';
        m << "seed=" << g_.seed << '\n';
        for (const auto& [k, v] : params_) {
            m << "arg." << k << '=' << v << '\n';
        }
        for (const auto& o : outputs_) {
            m << "output=" << o << '\n';
        }
        std::istringstream cfg(to_text(config_));
        for (std::string line; std::getline(cfg, line);) {
            m << "config." << line << '\n';
        }
        const auto p = fs::path(g_.out_dir) / (command_ + ".manifest");
        fs::create_directories(g_.out_dir);
        std::ofstream f(p, std::ios::binary);
        if (!f) {
            throw Error("cannot write '" + p.string() + "'");
        }
        f << m.str();
    }

private:
    const Globals& g_;
    std::string command_;
    std::ostream& out_;
    Config config_;
    std::vector<std::pair<std::string, std::string>> params_;
    std::vector<std::string> outputs_;
};

std::pair<int, int> parse_dims(const std::string& text)
{
    const auto x = text.find('x');
    int w = 0;
    int h = 0;
    if (x != std::string::npos) {
        auto r1 = std::from_chars(text.data(), text.data() + x, w);
        auto r2 = std::from_chars(text.data() + x + 1, text.data() + text.size(), h);
        if (r1.ec == std::errc() && r1.ptr == text.data() + x && r2.ec == std::errc() &&
            r2.ptr == text.data() + text.size()) {
            return {w, h};
        }
    }
    throw UsageError("--dims expects WxH, got '" + text + "'");
}

// topo-stats ---------------------------------------------------------------

struct TopoArgs {
    std::string topology = "fullerene";
    std::string dims;
    int fanout = 4;
    int depth = 3;
    bool level2 = false;
    bool router_grid = false;
    std::string out;
    std::string histogram;
    std::string edges;
};

topology::TopologyGraph build_topology(const TopoArgs& a)
{
    using namespace topology;
    auto dims = [&] {
        if (a.dims.empty()) {
            throw UsageError("--dims is required for --topology " + a.topology);
        }
        return parse_dims(a.dims);
    };
    std::optional<TopologyGraph> g;
    try {
        if (a.topology == "fullerene") {
            g = build_fullerene_domain();
        } else if (a.topology == "mesh") {
            auto [w, h] = dims();
            g = a.router_grid ? build_mesh_noc(w, h) : build_mesh(w, h);
        } else if (a.topology == "torus") {
            auto [w, h] = dims();
            g = build_torus(w, h);
        } else if (a.topology == "tree") {
            g = build_tree(a.fanout, a.depth);
        } else {
            throw UsageError("unknown topology '" + a.topology + "'");
        }
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (a.level2) {
        if (a.topology != "fullerene") {
            throw UsageError("--level2 applies to the fullerene topology only");
        }
        g = attach_level2(*g);
    }
    return *g;
}

void cmd_topo_stats(Session& s, const TopoArgs& a)
{
    const auto g = build_topology(a);
    const auto d = topology::degree_stats(g);
    const auto l = topology::latency_stats(g);

    std::ostringstream csv;
    csv << "topology,nodes,edges,cores,mean_degree,degree_variance,mean_core_hops,diameter,core_pairs,"
           "mean_degree_exact,degree_variance_exact,mean_core_hops_exact\n";
    csv << g.name() << ',' << g.node_count() << ',' << g.edge_count() << ','
        << g.count_of_kind(topology::NodeKind::Core) << ',' << format_fixed(topology::to_double(d.mean_degree)) << ','
        << format_fixed(topology::to_double(d.degree_variance)) << ','
        << format_fixed(topology::to_double(l.mean_core_pair_hops)) << ',' << l.diameter_hops << ',' << l.core_pairs
        << ',' << rational_text(d.mean_degree) << ',' << rational_text(d.degree_variance) << ','
        << rational_text(l.mean_core_pair_hops) << '\n';

    std::ostringstream hist;
    hist << "histogram,value,count\n";
    for (const auto& [deg, n] : d.degree_histogram) {
        hist << "degree," << deg << ',' << n << '\n';
    }
    for (const auto& [hops, n] : l.histogram) {
        hist << "core_hops," << hops << ',' << n << '\n';
    }

    if (a.out.empty()) {
        s.out() << csv.str();
    } else {
        s.write(a.out, csv.str());
    }
    std::string hist_path = a.histogram;
    if (hist_path.empty() && !a.out.empty()) {
        hist_path = fs::path(a.out).replace_extension().string() + "_histogram.csv";
    }
    if (!hist_path.empty()) {
        s.write(hist_path, hist.str());
    }
    if (!a.edges.empty()) {
        std::ostringstream e;
        std::ostringstream k;
        topology::write_edge_list(e, g);
        topology::write_node_kinds(k, g);
        s.write(a.edges, e.str());
        s.write(fs::path(a.edges).replace_extension().string() + "_kinds.txt", k.str());
    }
    s.param("topology", g.name());
    s.manifest();
}

// traffic ------------------------------------------------------------------

struct TrafficArgs {
    std::string pattern = "uniform-random";
    std::vector<double> rates{0.1};
    std::uint64_t cycles = 20000;
    std::uint64_t warmup = 2000;
    bool single_router = false;
    std::string out;
};

void cmd_traffic(Session& s, const TrafficArgs& a, std::uint64_t seed)
{
    router::TrafficOptions o;
    try {
        o.pattern = router::parse_pattern(a.pattern);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    for (double r : a.rates) {
        if (!(r > 0.0 && r <= 1.0)) {
            throw UsageError("--rate must be in (0, 1], got " + format_number(r));
        }
    }
    o.measure_cycles = a.cycles;
    o.warmup_cycles = a.warmup;
    o.single_router = a.single_router;
    o.seed = seed;

    std::ostringstream csv;
    csv << router::traffic_csv_header() << '\n';
    for (double r : a.rates) {
        o.rate = r;
        csv << router::traffic_csv_rows(router::run_traffic(s.config(), o));
    }
    if (a.out.empty()) {
        s.out() << csv.str();
    } else {
        s.write(a.out, csv.str());
    }
    s.param("pattern", a.pattern);
    s.manifest();
}

// sweep-sparsity -----------------------------------------------------------

void cmd_sweep(Session& s, int step, const std::string& out, std::uint64_t seed)
{
    if (step < 1 || step > 100) {
        throw UsageError("--step must be in [1, 100]");
    }
    const auto grid = core::percent_grid(step);
    const auto points = core::efficiency_curve(s.config(), grid, seed);
    std::ostringstream csv;
    csv << "sparsity,spikes,sops,cycles,gsops,pj_per_sop,baseline_gsops,baseline_pj_per_sop,energy_ratio\n";
    for (const auto& p : points) {
        csv << format_fixed(p.sparsity, 2) << ',' << p.spikes << ',' << p.zero_skip.sops << ','
            << p.zero_skip.core_active_cycles << ',' << format_fixed(p.gsops) << ',' << format_fixed(p.pj_per_sop)
            << ',' << format_fixed(p.baseline_gsops) << ',' << format_fixed(p.baseline_pj_per_sop) << ','
            << format_fixed(p.energy_ratio()) << '\n';
    }
    if (out.empty()) {
        s.out() << csv.str();
    } else {
        s.write(out, csv.str());
    }
    s.manifest();
}

// quantize -----------------------------------------------------------------

std::vector<double> read_weights(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open weights '" + path + "'");
    }
    std::vector<double> w;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
            line.pop_back();
        }
        if (line.empty() || (number == 1 && line == "weight")) {
            continue;
        }
        double v = 0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        if (ec != std::errc() || ptr != line.data() + line.size() || !std::isfinite(v)) {
            throw ParseError(path, number, "expected a weight, got '" + line + "'");
        }
        w.push_back(v);
    }
    return w;
}

void cmd_quantize(Session& s, const std::string& in, int n, int w, const std::string& out,
    const std::string& assignments)
{
    if (!core::supported_codebook_parameter(n) || !core::supported_codebook_parameter(w)) {
        throw UsageError("--N and --W must be 4, 8 or 16");
    }
    const auto weights = read_weights(in);
    if (weights.empty()) {
        throw Error("weights file '" + in + "' holds no weights");
    }
    const auto q = compiler::quantize_codebook(weights, n, w);
    std::ostringstream csv;
    csv << "index,centroid,value,occupancy\n";
    for (std::size_t i = 0; i < q.report.centroids.size(); ++i) {
        csv << i << ',' << format_number(q.report.centroids[i]) << ',' << q.codebook[i] << ',' << q.report.occupancy[i]
            << '\n';
    }
    s.write(out, csv.str());
    if (!assignments.empty()) {
        std::ostringstream a;
        a << "weight,index\n";
        for (std::size_t i = 0; i < weights.size(); ++i) {
            a << format_number(weights[i]) << ',' << static_cast<int>(q.indexes[i]) << '\n';
        }
        s.write(assignments, a.str());
    }
    s.out() << "weights=" << weights.size() << " iterations=" << q.report.iterations
            << " mse=" << format_number(q.report.mse) << " uniform_mse=" << format_number(q.report.uniform_mse)
            << " scale=" << format_number(q.scale) << '\n';
    s.param("in", in);
    s.manifest();
}

// compile ------------------------------------------------------------------

struct CompileArgs {
    std::string net;
    std::string topology = "fullerene";
    int n = 16;
    int w = 8;
    int neurons_per_core = 0;
    int output_buffer = 0;
    std::string out;
    std::string inputs;
    std::string trace_out;
};

std::vector<compiler::NeuronSpike> read_neuron_spikes(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open input spikes '" + path + "'");
    }
    std::vector<compiler::NeuronSpike> spikes;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
            line.pop_back();
        }
        if (line.empty() || (number == 1 && line == "timestep,neuron")) {
            continue;
        }
        const auto comma = line.find(',');
        compiler::NeuronSpike sp;
        auto r1 = std::from_chars(line.data(), line.data() + (comma == std::string::npos ? 0 : comma), sp.timestep);
        auto r2 = comma == std::string::npos ? r1
                                             : std::from_chars(line.data() + comma + 1, line.data() + line.size(), sp.neuron);
        if (comma == std::string::npos || r1.ec != std::errc() || r2.ec != std::errc() ||
            r2.ptr != line.data() + line.size()) {
            throw ParseError(path, number, "expected 'timestep,neuron'");
        }
        spikes.push_back(sp);
    }
    return spikes;
}

void cmd_compile(Session& s, const CompileArgs& a)
{
    if (a.topology != "fullerene") {
        throw UsageError("compile supports --topology fullerene only");
    }
    const auto net = compiler::load_network(a.net);
    compiler::CompileOptions o;
    o.weight_count = a.n;
    o.weight_width = a.w;
    o.neurons_per_core = static_cast<std::uint32_t>(a.neurons_per_core > 0 ? a.neurons_per_core : s.config().neurons_per_core);
    o.mp_bits = s.config().mp_bits;
    o.output_buffer = a.output_buffer;
    if (!core::supported_codebook_parameter(o.weight_count) || !core::supported_codebook_parameter(o.weight_width)) {
        throw UsageError("--N and --W must be 4, 8 or 16");
    }
    const auto compiled = compiler::compile(net, topology::build_fullerene_domain(), o);
    s.write(a.out, emit_netlist(compiled.netlist));
    if (!a.inputs.empty()) {
        if (a.trace_out.empty()) {
            throw UsageError("--inputs needs --trace-out");
        }
        const auto spikes = read_neuron_spikes(a.inputs);
        for (const auto& sp : spikes) {
            if (sp.neuron >= net.neuron_count() || !net.is_input(sp.neuron)) {
                throw Error("input spike names neuron " + std::to_string(sp.neuron) + ", which is not an input neuron");
            }
        }
        std::ostringstream t;
        write_spike_trace(t, compiler::map_spikes(compiled.placement, spikes));
        s.write(a.trace_out, t.str());
    }
    s.out() << "cores=" << compiled.netlist.cores.size() << " synapses=" << compiled.netlist.synapses.size()
            << " routes=" << compiled.netlist.routes.size()
            << " inter_core_edges=" << compiler::inter_core_edges(net, compiled.placement) << '\n';
    s.param("net", a.net);
    s.manifest();
}

// run / golden / host ------------------------------------------------------

struct RunArgs {
    std::string netlist;
    std::string trace;
    std::uint32_t timesteps = 0;
    std::string out = "spikes.csv";
    std::string telemetry;
    std::string router_telemetry;
    std::string outputs;
    int threads = 1;
};

std::vector<Spike> maybe_trace(const std::string& path)
{
    return path.empty() ? std::vector<Spike>{} : load_spike_trace(path);
}

std::string spikes_text(const std::vector<Spike>& spikes)
{
    std::ostringstream o;
    write_spike_trace(o, spikes);
    return o.str();
}

void cmd_run(Session& s, const RunArgs& a)
{
    if (a.threads < 1) {
        throw UsageError("--threads must be at least 1");
    }
    const auto netlist = load_netlist(a.netlist);
    const auto trace = maybe_trace(a.trace);
    const auto result = fabric::run_inference(netlist, trace, a.timesteps, s.config(), a.threads);
    s.write(a.out, spikes_text(result.spikes));
    if (!a.telemetry.empty()) {
        s.write(a.telemetry, fabric::telemetry_csv(result.telemetry, s.config()));
    }
    if (!a.router_telemetry.empty()) {
        s.write(a.router_telemetry, fabric::router_samples_csv(result.telemetry));
    }
    if (!a.outputs.empty()) {
        std::ostringstream o;
        o << "buffer,neuron_id,timestep\n";
        for (std::size_t b = 0; b < result.outputs.size(); ++b) {
            for (const auto& r : result.outputs[b]) {
                o << b << ',' << r.neuron_id << ',' << r.timestep << '\n';
            }
        }
        s.write(a.outputs, o.str());
    }
    s.out() << "timesteps=" << result.telemetry.timesteps << " cycles=" << result.telemetry.cycles
            << " spikes=" << result.spikes.size() << " sops=" << result.telemetry.ledger.sops << '\n';
    s.param("netlist", a.netlist);
    s.param("trace", a.trace);
    s.param("timesteps", std::to_string(a.timesteps));
    s.manifest();
}

void cmd_golden(Session& s, const RunArgs& a)
{
    const auto netlist = load_netlist(a.netlist);
    const auto trace = maybe_trace(a.trace);
    const auto spikes = compiler::golden_eval(netlist, trace, a.timesteps, core::MpRange::of_bits(s.config().mp_bits));
    s.write(a.out, spikes_text(spikes));
    s.param("netlist", a.netlist);
    s.param("timesteps", std::to_string(a.timesteps));
    s.manifest();
}

void cmd_host(Session& s, const RunArgs& a, const std::string& program_path)
{
    std::ifstream in(program_path);
    if (!in) {
        throw Error("cannot open program '" + program_path + "'");
    }
    std::vector<fabric::Instruction> program;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            program.push_back(fabric::parse_instruction(line));
        } catch (const std::invalid_argument& e) {
            throw ParseError(program_path, number, e.what());
        }
    }
    fabric::Fabric fab(load_netlist(a.netlist), s.config(), a.threads);
    const auto trace = maybe_trace(a.trace);
    const auto host = fab.host_program(program, trace, a.timesteps);
    std::ostringstream o;
    o << "read,buffer,neuron_id,timestep\n";
    for (std::size_t i = 0; i < host.reads.size(); ++i) {
        for (const auto& r : host.reads[i].second) {
            o << i << ',' << host.reads[i].first << ',' << r.neuron_id << ',' << r.timestep << '\n';
        }
    }
    s.write(a.out, o.str());
    for (auto w : fabric::encode_program(program)) {
        char buf[16];
        auto r = std::to_chars(buf, buf + sizeof buf, w, 16);
        s.out() << "0x" << std::string(8 - static_cast<std::size_t>(r.ptr - buf), '0') << std::string(buf, r.ptr) << ' ';
    }
    s.out() << "\nwakes=" << host.wakes.size() << " sleep_cycles=" << host.host_sleep_cycles
            << " timesteps=" << fab.barrier().committed << '\n';
    s.param("program", program_path);
    s.manifest();
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Neuromorphic SoC simulator", "nmsoc"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "Configuration file (key=value); falls back to $NOC_SIM_CONFIG");
    app.add_option("--seed", g.seed, "Seed for every randomized input");
    app.add_option("--out-dir", g.out_dir, "Directory for relative output paths and the run manifest");
    app.fallthrough();

    TopoArgs topo;
    auto* c_topo = app.add_subcommand("topo-stats", "Degree and latency statistics of an interconnect");
    c_topo->add_option("--topology", topo.topology, "fullerene, mesh, tree or torus");
    c_topo->add_option("--dims", topo.dims, "WxH for mesh and torus");
    c_topo->add_option("--fanout", topo.fanout, "Tree fanout");
    c_topo->add_option("--depth", topo.depth, "Tree depth");
    c_topo->add_flag("--level2", topo.level2, "Attach the level-2 router");
    c_topo->add_flag("--router-grid", topo.router_grid, "Mesh of routers with one core per router");
    c_topo->add_option("--out", topo.out, "Statistics CSV (stdout if omitted)");
    c_topo->add_option("--histogram", topo.histogram, "Degree and hop histogram CSV");
    c_topo->add_option("--edges", topo.edges, "Edge-list export");

    TrafficArgs traffic;
    double rate = -1;
    std::vector<double> rates;
    auto* c_traffic = app.add_subcommand("traffic", "Synthetic traffic through the routers");
    c_traffic->add_option("--pattern", traffic.pattern, "uniform-random, hotspot, neighbor or broadcast");
    auto* o_rate = c_traffic->add_option("--rate", rate, "Injection rate in (0, 1]");
    c_traffic->add_option("--rates", rates, "Several injection rates")->delimiter(',')->excludes(o_rate);
    c_traffic->add_option("--cycles", traffic.cycles, "Measured cycles");
    c_traffic->add_option("--warmup", traffic.warmup, "Warm-up cycles");
    c_traffic->add_flag("--single-router", traffic.single_router, "One router with five sinks");
    c_traffic->add_option("--out", traffic.out, "Output CSV (stdout if omitted)");

    int step = 1;
    std::string sweep_out;
    auto* c_sweep = app.add_subcommand("sweep-sparsity", "Throughput and energy per SOP against input sparsity");
    c_sweep->add_option("--step", step, "Sparsity step in percent");
    c_sweep->add_option("--out", sweep_out, "Output CSV (stdout if omitted)");

    std::string q_in;
    std::string q_out;
    std::string q_assign;
    int q_n = 16;
    int q_w = 8;
    auto* c_quant = app.add_subcommand("quantize", "Non-uniform codebook for a weight list");
    c_quant->add_option("--in", q_in, "Weights, one per line")->required();
    c_quant->add_option("--N", q_n, "Codebook size");
    c_quant->add_option("--W", q_w, "Weight width in bits");
    c_quant->add_option("--out", q_out, "Codebook CSV")->required();
    c_quant->add_option("--assignments", q_assign, "Per-weight index CSV");

    CompileArgs comp;
    auto* c_comp = app.add_subcommand("compile", "Map a network onto the fabric");
    c_comp->add_option("--net", comp.net, "Network description")->required();
    c_comp->add_option("--topology", comp.topology, "Target topology");
    c_comp->add_option("--N", comp.n, "Codebook size");
    c_comp->add_option("--W", comp.w, "Weight width in bits");
    c_comp->add_option("--neurons-per-core", comp.neurons_per_core, "Core capacity (config value if omitted)");
    c_comp->add_option("--output-buffer", comp.output_buffer, "Output buffer of the last layer");
    c_comp->add_option("--out", comp.out, "Netlist")->required();
    c_comp->add_option("--inputs", comp.inputs, "Network input spikes (timestep,neuron)");
    c_comp->add_option("--trace-out", comp.trace_out, "Input trace in fabric coordinates");

    RunArgs run_args;
    auto* c_run = app.add_subcommand("run", "Simulate a netlist");
    c_run->add_option("--netlist", run_args.netlist, "Netlist")->required();
    c_run->add_option("--trace", run_args.trace, "Input spike trace");
    c_run->add_option("--timesteps", run_args.timesteps, "Timesteps")->required();
    c_run->add_option("--out", run_args.out, "Output spike trace");
    c_run->add_option("--telemetry", run_args.telemetry, "Telemetry totals CSV");
    c_run->add_option("--router-telemetry", run_args.router_telemetry, "Sampled router telemetry CSV");
    c_run->add_option("--outputs", run_args.outputs, "Output buffer records CSV");
    c_run->add_option("--threads", run_args.threads, "Worker threads for core computation");

    RunArgs golden_args;
    auto* c_golden = app.add_subcommand("golden", "Sequential reference evaluation of a netlist");
    c_golden->add_option("--netlist", golden_args.netlist, "Netlist")->required();
    c_golden->add_option("--trace", golden_args.trace, "Input spike trace");
    c_golden->add_option("--timesteps", golden_args.timesteps, "Timesteps")->required();
    c_golden->add_option("--out", golden_args.out, "Output spike trace");

    RunArgs host_args;
    std::string program;
    host_args.out = "reads.csv";
    auto* c_host = app.add_subcommand("host", "Execute a neuromorphic instruction script");
    c_host->add_option("--netlist", host_args.netlist, "Netlist")->required();
    c_host->add_option("--program", program, "Instruction script, one per line")->required();
    c_host->add_option("--trace", host_args.trace, "Input spike trace");
    c_host->add_option("--timesteps", host_args.timesteps, "Timesteps armed by network_start")->required();
    c_host->add_option("--out", host_args.out, "Output buffer reads CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        auto* cmd = app.get_subcommands().front();
        Session s(g, cmd->get_name(), out);
        if (cmd == c_topo) {
            cmd_topo_stats(s, topo);
        } else if (cmd == c_traffic) {
            if (!rates.empty()) {
                traffic.rates = rates;
            } else if (rate != -1) {
                traffic.rates = {rate};
            }
            cmd_traffic(s, traffic, g.seed);
        } else if (cmd == c_sweep) {
            cmd_sweep(s, step, sweep_out, g.seed);
        } else if (cmd == c_quant) {
            cmd_quantize(s, q_in, q_n, q_w, q_out, q_assign);
        } else if (cmd == c_comp) {
            cmd_compile(s, comp);
        } else if (cmd == c_run) {
            cmd_run(s, run_args);
        } else if (cmd == c_golden) {
            cmd_golden(s, golden_args);
        } else if (cmd == c_host) {
            cmd_host(s, host_args, program);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace nmsoc::cli
