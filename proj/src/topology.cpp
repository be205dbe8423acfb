#include "nmsoc/topology.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace nmsoc::topology {
namespace {

constexpr std::size_t kDomainRouters = 12;
constexpr std::size_t kDomainCores = 20;
constexpr std::size_t kDomainNodesWithL2 = kDomainRouters + kDomainCores + 1;

// Icosahedron faces over vertices: 0 apex, 1..5 upper ring, 6..10 lower
// ring (lower vertex 6+k sits between upper 1+k and 1+(k+1)%5), 11 nadir.
std::vector<std::array<NodeId, 3>> icosahedron_faces()
{
    std::vector<std::array<NodeId, 3>> faces;
    auto upper = [](int k) { return static_cast<NodeId>(1 + (k % 5)); };
    auto lower = [](int k) { return static_cast<NodeId>(6 + (k % 5)); };
    for (int k = 0; k < 5; ++k) {
        faces.push_back({0, upper(k), upper(k + 1)});
    }
    for (int k = 0; k < 5; ++k) {
        faces.push_back({upper(k), upper(k + 1), lower(k)});
        faces.push_back({upper(k + 1), lower(k), lower(k + 1)});
    }
    for (int k = 0; k < 5; ++k) {
        faces.push_back({11, lower(k), lower(k + 1)});
    }
    return faces;
}

void require(bool condition, const char* message)
{
    if (!condition) {
        throw std::invalid_argument(message);
    }
}

} // namespace

std::string_view to_string(NodeKind kind)
{
    switch (kind) {
    case NodeKind::Core:
        return "core";
    case NodeKind::RouterL1:
        return "router_l1";
    case NodeKind::RouterL2:
        return "router_l2";
    }
    return "?";
}

NodeKind parse_node_kind(std::string_view text)
{
    if (text == "core") {
        return NodeKind::Core;
    }
    if (text == "router_l1") {
        return NodeKind::RouterL1;
    }
    if (text == "router_l2") {
        return NodeKind::RouterL2;
    }
    throw std::invalid_argument("unknown node kind '" + std::string(text) + "'");
}

TopologyGraph::TopologyGraph(std::string name, std::vector<NodeKind> kinds, std::vector<Edge> edges)
    : name_(std::move(name)), kinds_(std::move(kinds)), edges_(std::move(edges))
{
    const auto n = kinds_.size();
    for (auto& e : edges_) {
        if (e.u == e.v) {
            throw std::invalid_argument("self-loop on node " + std::to_string(e.u));
        }
        if (e.u >= n || e.v >= n) {
            throw std::invalid_argument("edge references a node outside 0.." + std::to_string(n));
        }
        if (e.u > e.v) {
            std::swap(e.u, e.v);
        }
    }
    std::sort(edges_.begin(), edges_.end());
    if (auto dup = std::adjacent_find(edges_.begin(), edges_.end()); dup != edges_.end()) {
        throw std::invalid_argument(
            "duplicate edge " + std::to_string(dup->u) + "-" + std::to_string(dup->v));
    }

    adjacency_.resize(n);
    for (const auto& e : edges_) {
        adjacency_[e.u].push_back(e.v);
        adjacency_[e.v].push_back(e.u);
    }
    for (auto& list : adjacency_) {
        std::sort(list.begin(), list.end());
    }

    if (n > 0) {
        const auto dist = bfs_distances(*this, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (dist[i] == kUnreachable) {
                throw std::invalid_argument(
                    "graph '" + name_ + "' is disconnected: node " + std::to_string(i) + " unreachable");
            }
        }
    }
}

bool TopologyGraph::adjacent(NodeId a, NodeId b) const
{
    const auto& list = adjacency_.at(a);
    return std::binary_search(list.begin(), list.end(), b);
}

std::vector<NodeId> TopologyGraph::nodes_of_kind(NodeKind kind) const
{
    std::vector<NodeId> out;
    for (NodeId i = 0; i < kinds_.size(); ++i) {
        if (kinds_[i] == kind) {
            out.push_back(i);
        }
    }
    return out;
}

std::size_t TopologyGraph::count_of_kind(NodeKind kind) const
{
    return static_cast<std::size_t>(std::count(kinds_.begin(), kinds_.end(), kind));
}

TopologyGraph build_fullerene_domain()
{
    std::vector<NodeKind> kinds(kDomainRouters, NodeKind::RouterL1);
    kinds.resize(kDomainRouters + kDomainCores, NodeKind::Core);
    std::vector<Edge> edges;
    const auto faces = icosahedron_faces();
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto core = static_cast<NodeId>(kDomainRouters + f);
        for (NodeId vertex : faces[f]) {
            edges.push_back({vertex, core});
        }
    }
    return TopologyGraph("fullerene", std::move(kinds), std::move(edges));
}

TopologyGraph build_mesh(int width, int height)
{
    require(width >= 1 && height >= 1, "mesh dimensions must be >= 1");
    const auto w = static_cast<NodeId>(width);
    const auto h = static_cast<NodeId>(height);
    std::vector<Edge> edges;
    for (NodeId y = 0; y < h; ++y) {
        for (NodeId x = 0; x < w; ++x) {
            const NodeId id = y * w + x;
            if (x + 1 < w) {
                edges.push_back({id, id + 1});
            }
            if (y + 1 < h) {
                edges.push_back({id, id + w});
            }
        }
    }
    return TopologyGraph("mesh-" + std::to_string(width) + "x" + std::to_string(height),
        std::vector<NodeKind>(w * h, NodeKind::Core), std::move(edges));
}

TopologyGraph build_mesh_noc(int width, int height)
{
    const auto grid = build_mesh(width, height);
    const auto n = static_cast<NodeId>(grid.node_count());
    std::vector<NodeKind> kinds(n, NodeKind::RouterL1);
    kinds.resize(2 * n, NodeKind::Core);
    std::vector<Edge> edges = grid.edges();
    for (NodeId r = 0; r < n; ++r) {
        edges.push_back({r, n + r});
    }
    return TopologyGraph("mesh-noc-" + std::to_string(width) + "x" + std::to_string(height),
        std::move(kinds), std::move(edges));
}

TopologyGraph build_tree(int fanout, int depth)
{
    require(fanout >= 2 && depth >= 1, "tree requires fanout >= 2 and depth >= 1");
    std::vector<NodeKind> kinds{NodeKind::RouterL1};
    std::vector<Edge> edges;
    std::vector<NodeId> level{0};
    for (int d = 1; d <= depth; ++d) {
        std::vector<NodeId> next;
        const auto kind = d == depth ? NodeKind::Core : NodeKind::RouterL1;
        for (NodeId parent : level) {
            for (int c = 0; c < fanout; ++c) {
                const auto child = static_cast<NodeId>(kinds.size());
                kinds.push_back(kind);
                edges.push_back({parent, child});
                next.push_back(child);
            }
        }
        level = std::move(next);
    }
    return TopologyGraph("tree-" + std::to_string(fanout) + "x" + std::to_string(depth),
        std::move(kinds), std::move(edges));
}

TopologyGraph build_torus(int width, int height)
{
    require(width >= 3 && height >= 3, "torus dimensions must be >= 3");
    const auto w = static_cast<NodeId>(width);
    const auto h = static_cast<NodeId>(height);
    std::vector<Edge> edges;
    for (NodeId y = 0; y < h; ++y) {
        for (NodeId x = 0; x < w; ++x) {
            const NodeId id = y * w + x;
            edges.push_back({id, y * w + (x + 1) % w});
            edges.push_back({id, ((y + 1) % h) * w + x});
        }
    }
    return TopologyGraph("torus-" + std::to_string(width) + "x" + std::to_string(height),
        std::vector<NodeKind>(w * h, NodeKind::Core), std::move(edges));
}

TopologyGraph attach_level2(const TopologyGraph& domain)
{
    if (domain.count_of_kind(NodeKind::RouterL1) != kDomainRouters ||
        domain.count_of_kind(NodeKind::RouterL2) != 0) {
        throw std::invalid_argument(
            "attach_level2 needs a fullerene domain with 12 level-1 routers and no level-2 router");
    }
    auto kinds = domain.kinds();
    auto edges = domain.edges();
    const auto l2 = static_cast<NodeId>(kinds.size());
    kinds.push_back(NodeKind::RouterL2);
    for (NodeId r : domain.nodes_of_kind(NodeKind::RouterL1)) {
        edges.push_back({r, l2});
    }
    return TopologyGraph(domain.name() + "+l2", std::move(kinds), std::move(edges));
}

TopologyGraph compose_domains(int k, InterLink inter_link)
{
    require(k >= 1, "compose_domains requires k >= 1");
    const auto domain = attach_level2(build_fullerene_domain());
    if (k == 1) {
        return domain;
    }
    std::vector<NodeKind> kinds;
    std::vector<Edge> edges;
    std::vector<NodeId> level2;
    for (int d = 0; d < k; ++d) {
        const auto offset = static_cast<NodeId>(d * kDomainNodesWithL2);
        kinds.insert(kinds.end(), domain.kinds().begin(), domain.kinds().end());
        for (const auto& e : domain.edges()) {
            edges.push_back({e.u + offset, e.v + offset});
        }
        level2.push_back(offset + static_cast<NodeId>(kDomainNodesWithL2 - 1));
    }
    if (inter_link == InterLink::Chain) {
        for (std::size_t i = 0; i + 1 < level2.size(); ++i) {
            edges.push_back({level2[i], level2[i + 1]});
        }
    } else {
        for (std::size_t i = 0; i < level2.size(); ++i) {
            for (std::size_t j = i + 1; j < level2.size(); ++j) {
                edges.push_back({level2[i], level2[j]});
            }
        }
    }
    const char* link_name = inter_link == InterLink::Chain ? "chain" : "fullmesh";
    return TopologyGraph("fullerene-x" + std::to_string(k) + "-" + link_name, std::move(kinds),
        std::move(edges));
}

DegreeStats degree_stats(const TopologyGraph& g)
{
    if (g.node_count() == 0) {
        throw std::invalid_argument("degree_stats of an empty graph");
    }
    DegreeStats stats;
    std::int64_t sum = 0;
    std::int64_t sum_sq = 0;
    for (NodeId i = 0; i < g.node_count(); ++i) {
        const auto d = static_cast<std::int64_t>(g.degree(i));
        sum += d;
        sum_sq += d * d;
        ++stats.degree_histogram[g.degree(i)];
    }
    const auto n = static_cast<std::int64_t>(g.node_count());
    stats.mean_degree = Rational(sum, n);
    stats.degree_variance = Rational(sum_sq, n) - stats.mean_degree * stats.mean_degree;
    return stats;
}

std::vector<std::uint32_t> bfs_distances(const TopologyGraph& g, NodeId source)
{
    std::vector<std::uint32_t> dist(g.node_count(), kUnreachable);
    std::deque<NodeId> queue{source};
    dist.at(source) = 0;
    while (!queue.empty()) {
        const NodeId u = queue.front();
        queue.pop_front();
        for (NodeId v : g.neighbors(u)) {
            if (dist[v] == kUnreachable) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

LatencyStats latency_stats(const TopologyGraph& g)
{
    const auto cores = g.nodes_of_kind(NodeKind::Core);
    if (cores.size() < 2) {
        throw std::invalid_argument("latency_stats needs at least two core nodes");
    }
    LatencyStats stats;
    std::int64_t total = 0;
    for (std::size_t i = 0; i < cores.size(); ++i) {
        const auto dist = bfs_distances(g, cores[i]);
        for (std::size_t j = i + 1; j < cores.size(); ++j) {
            const auto d = dist[cores[j]];
            if (d == kUnreachable) {
                throw std::invalid_argument("cores " + std::to_string(cores[i]) + " and " +
                    std::to_string(cores[j]) + " are not connected");
            }
            total += d;
            stats.diameter_hops = std::max(stats.diameter_hops, d);
            ++stats.histogram[d];
            ++stats.core_pairs;
        }
    }
    stats.mean_core_pair_hops = Rational(total, static_cast<std::int64_t>(stats.core_pairs));
    return stats;
}

void write_edge_list(std::ostream& out, const TopologyGraph& g)
{
    out << "# " << g.name() << ' ' << g.node_count() << ' ' << g.edge_count() << '\n';
    for (const auto& e : g.edges()) {
        out << e.u << ' ' << e.v << '\n';
    }
}

void write_node_kinds(std::ostream& out, const TopologyGraph& g)
{
    for (NodeId i = 0; i < g.node_count(); ++i) {
        out << i << ' ' << to_string(g.kind(i)) << '\n';
    }
}

TopologyGraph read_topology(std::istream& edge_list, std::istream& node_kinds)
{
    std::string line;
    if (!std::getline(edge_list, line) || line.rfind("# ", 0) != 0) {
        throw ParseError("<edge list>", 1, "expected header '# name |V| |E|'");
    }
    std::istringstream header(line.substr(2));
    std::string name;
    std::size_t n = 0;
    std::size_t m = 0;
    if (!(header >> name >> n >> m)) {
        throw ParseError("<edge list>", 1, "malformed header");
    }
    std::vector<Edge> edges;
    std::size_t line_no = 1;
    while (std::getline(edge_list, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        Edge e;
        if (!(row >> e.u >> e.v)) {
            throw ParseError("<edge list>", line_no, "expected 'u v'");
        }
        edges.push_back(e);
    }
    if (edges.size() != m) {
        throw ParseError("<edge list>", line_no, "edge count does not match header");
    }
    std::vector<NodeKind> kinds(n, NodeKind::Core);
    std::vector<bool> seen(n, false);
    line_no = 0;
    while (std::getline(node_kinds, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::size_t id = 0;
        std::string kind;
        if (!(row >> id >> kind) || id >= n) {
            throw ParseError("<node kinds>", line_no, "expected 'id kind' with id < |V|");
        }
        kinds[id] = parse_node_kind(kind);
        seen[id] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw ParseError("<node kinds>", line_no, "missing node kind entries");
    }
    return TopologyGraph(name, std::move(kinds), std::move(edges));
}

double to_double(const Rational& r)
{
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

} // namespace nmsoc::topology
