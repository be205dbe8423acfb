#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

#include "nmsoc/common.hpp"

namespace nmsoc::topology {

using Rational = boost::rational<std::int64_t>;

enum class NodeKind { Core, RouterL1, RouterL2 };

std::string_view to_string(NodeKind kind);
NodeKind parse_node_kind(std::string_view text);

struct Edge {
    NodeId u = 0;
    NodeId v = 0;

    auto operator<=>(const Edge&) const = default;
};

/// Undirected simple graph with typed nodes. Construction normalizes edges
/// to u < v, sorts them, and rejects self-loops, duplicates and
/// disconnected graphs.
class TopologyGraph {
public:
    TopologyGraph(std::string name, std::vector<NodeKind> kinds, std::vector<Edge> edges);

    const std::string& name() const { return name_; }
    std::size_t node_count() const { return kinds_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    NodeKind kind(NodeId id) const { return kinds_.at(id); }
    const std::vector<NodeKind>& kinds() const { return kinds_; }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Neighbors in ascending id order.
    const std::vector<NodeId>& neighbors(NodeId id) const { return adjacency_.at(id); }
    std::size_t degree(NodeId id) const { return adjacency_.at(id).size(); }
    bool adjacent(NodeId a, NodeId b) const;

    std::vector<NodeId> nodes_of_kind(NodeKind kind) const;
    std::size_t count_of_kind(NodeKind kind) const;

    /// Structural equality (kinds and edges); the name is a label only.
    bool same_structure(const TopologyGraph& other) const
    {
        return kinds_ == other.kinds_ && edges_ == other.edges_;
    }

private:
    std::string name_;
    std::vector<NodeKind> kinds_;
    std::vector<Edge> edges_;
    std::vector<std::vector<NodeId>> adjacency_;
};

/// Icosahedron vertex-face incidence graph: routers 0..11 are the vertices,
/// cores 12..31 the faces. Every router has degree 5 and every core degree 3.
TopologyGraph build_fullerene_domain();

/// Core-only width x height grid with 4-neighbor links.
TopologyGraph build_mesh(int width, int height);

/// Router grid with one core attached to every router: the usual 2D-mesh NoC,
/// where a core reaches the fabric through its local router.
TopologyGraph build_mesh_noc(int width, int height);

/// Complete fanout-ary tree; internal nodes are routers, leaves are cores.
TopologyGraph build_tree(int fanout, int depth);

/// Core-only 2D torus with wraparound links.
TopologyGraph build_torus(int width, int height);

/// Adds one level-2 router adjacent to all 12 level-1 routers of a domain.
TopologyGraph attach_level2(const TopologyGraph& domain);

enum class InterLink { Chain, FullMesh };

/// k fullerene domains with level-2 routers, joined at the level-2 routers.
/// Domain d occupies node ids [33d, 33d + 33).
TopologyGraph compose_domains(int k, InterLink inter_link);

struct DegreeStats {
    Rational mean_degree;
    Rational degree_variance; // population variance
    std::map<std::size_t, std::size_t> degree_histogram;
};

struct LatencyStats {
    Rational mean_core_pair_hops;
    std::uint32_t diameter_hops = 0; // largest core-pair distance
    std::map<std::uint32_t, std::size_t> histogram;
    std::size_t core_pairs = 0;
};

DegreeStats degree_stats(const TopologyGraph& g);

/// Shortest-path hop statistics over all unordered pairs of distinct cores.
LatencyStats latency_stats(const TopologyGraph& g);

inline constexpr std::uint32_t kUnreachable = UINT32_MAX;

/// Breadth-first hop distances from `source` to every node.
std::vector<std::uint32_t> bfs_distances(const TopologyGraph& g, NodeId source);

/// Edge list: header `# name |V| |E|`, then one `u v` pair per line.
void write_edge_list(std::ostream& out, const TopologyGraph& g);
/// Node kinds: one `id kind` pair per line.
void write_node_kinds(std::ostream& out, const TopologyGraph& g);
TopologyGraph read_topology(std::istream& edge_list, std::istream& node_kinds);

double to_double(const Rational& r);

} // namespace nmsoc::topology
