#ifndef PATHOED_NAVMESH_HPP
#define PATHOED_NAVMESH_HPP

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace pathoed {

using Arc = std::pair<int, int>;

// Inclusive cell rectangle [row0, row1] x [col0, col1] removed from a grid.
struct CellRect {
    int row0 = 0;
    int col0 = 0;
    int row1 = 0;
    int col1 = 0;
};

// Directed navigation mesh: candidate sensor locations plus admissible
// one-step moves. Immutable after construction; safe for concurrent reads.
class NavMesh {
public:
    // Arcs are deduplicated and sorted lexicographically. Throws
    // InvalidMeshError on out-of-range endpoints or self-loops.
    NavMesh(int num_vertices, std::vector<Arc> arcs,
            std::vector<std::array<double, 2>> coordinates = {});

    int num_vertices() const { return num_vertices_; }
    std::size_t num_arcs() const { return arcs_.size(); }
    const std::vector<Arc>& arcs() const { return arcs_; }
    const std::vector<int>& out_neighbors(int v) const { return out_neighbors_[v]; }

    bool has_arc(int from, int to) const { return arc_index(from, to) >= 0; }

    // Index of (from, to) in arcs(), or -1 when absent. Arcs of a vertex are
    // contiguous, so this doubles as the connectivity index for sparse
    // per-arc parameter storage.
    int arc_index(int from, int to) const;

    // First arc index of a vertex; arcs of vertex v live in
    // [arc_offset(v), arc_offset(v+1)).
    int arc_offset(int v) const { return arc_offsets_[v]; }

    bool has_coordinates() const { return !coordinates_.empty(); }
    const std::vector<std::array<double, 2>>& coordinates() const { return coordinates_; }

private:
    int num_vertices_;
    std::vector<Arc> arcs_;
    std::vector<int> arc_offsets_;
    std::vector<std::vector<int>> out_neighbors_;
    std::vector<std::array<double, 2>> coordinates_;
};

// 4-connected grid graph on rows x cols cells with bidirectional arcs,
// excluding cells covered by holes. Coordinates are cell centers on the unit
// square. Throws InvalidMeshError if no cell survives hole removal.
NavMesh build_grid_mesh(int rows, int cols, const std::vector<CellRect>& holes = {});

// Parse the edge-list format: first non-comment line is the vertex count,
// each following non-comment line is "i j" (1-based) for a directed arc.
// Lines starting with '#' are ignored. Throws ParseError with line numbers.
NavMesh load_mesh(const std::string& edge_list_text);

// Emit the same format, arcs sorted lexicographically.
std::string serialize_mesh(const NavMesh& mesh);

// Exact multi-step connectivity: for each r in 1..order and each source
// vertex, every walk of exactly r arcs, grouped by target. Walks store the
// full vertex sequence (r + 1 nodes) because lag-r transition probabilities
// and their gradients expand over realized walks.
class ReachabilityIndex {
public:
    ReachabilityIndex(const NavMesh& mesh, int order);

    int order() const { return order_; }
    int num_vertices() const { return static_cast<int>(levels_[0].size()); }

    // Sorted targets reachable from `from` by a walk of exactly r arcs.
    const std::vector<int>& targets(int r, int from) const;

    // All walks of exactly r arcs from `from` to `to`; empty if unreachable.
    // Each walk is the full node sequence starting at `from`.
    const std::vector<std::vector<int>>& walks(int r, int from, int to) const;

    bool reachable(int r, int from, int to) const;

private:
    struct Group {
        int target;
        std::vector<std::vector<int>> walks;
    };

    const Group* find_group(int r, int from, int to) const;

    int order_;
    // levels_[r-1][from] = groups sorted by target
    std::vector<std::vector<std::vector<Group>>> levels_;
    std::vector<std::vector<std::vector<int>>> targets_;
};

ReachabilityIndex build_reachability(const NavMesh& mesh, int order);

}  // namespace pathoed

#endif
