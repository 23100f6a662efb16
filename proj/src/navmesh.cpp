#include "pathoed/navmesh.hpp"

#include <algorithm>
#include <sstream>

#include "pathoed/errors.hpp"

namespace pathoed {

NavMesh::NavMesh(int num_vertices, std::vector<Arc> arcs,
                 std::vector<std::array<double, 2>> coordinates)
    : num_vertices_(num_vertices), coordinates_(std::move(coordinates)) {
    if (num_vertices <= 0) {
        throw InvalidMeshError("mesh must have at least one vertex");
    }
    if (!coordinates_.empty() && static_cast<int>(coordinates_.size()) != num_vertices) {
        throw InvalidMeshError("coordinate count does not match vertex count");
    }
    for (const auto& [i, j] : arcs) {
        if (i < 0 || i >= num_vertices || j < 0 || j >= num_vertices) {
            throw InvalidMeshError("arc endpoint out of range: (" + std::to_string(i + 1) +
                                   ", " + std::to_string(j + 1) + ")");
        }
        if (i == j) {
            throw InvalidMeshError("self-loop arc at vertex " + std::to_string(i + 1));
        }
    }
    std::sort(arcs.begin(), arcs.end());
    arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
    arcs_ = std::move(arcs);

    arc_offsets_.assign(num_vertices_ + 1, 0);
    out_neighbors_.assign(num_vertices_, {});
    for (const auto& [i, j] : arcs_) {
        out_neighbors_[i].push_back(j);
    }
    for (int v = 0; v < num_vertices_; ++v) {
        arc_offsets_[v + 1] = arc_offsets_[v] + static_cast<int>(out_neighbors_[v].size());
    }
}

int NavMesh::arc_index(int from, int to) const {
    const auto& nbrs = out_neighbors_[from];
    auto it = std::lower_bound(nbrs.begin(), nbrs.end(), to);
    if (it == nbrs.end() || *it != to) {
        return -1;
    }
    return arc_offsets_[from] + static_cast<int>(it - nbrs.begin());
}

NavMesh build_grid_mesh(int rows, int cols, const std::vector<CellRect>& holes) {
    if (rows < 1 || cols < 1) {
        throw InvalidMeshError("grid dimensions must be positive");
    }
    for (const auto& h : holes) {
        if (h.row0 > h.row1 || h.col0 > h.col1 || h.row0 < 0 || h.col0 < 0 ||
            h.row1 >= rows || h.col1 >= cols) {
            throw InvalidMeshError("hole rectangle outside the grid");
        }
    }
    std::vector<bool> blocked(static_cast<std::size_t>(rows) * cols, false);
    for (const auto& h : holes) {
        for (int r = h.row0; r <= h.row1; ++r) {
            for (int c = h.col0; c <= h.col1; ++c) {
                blocked[static_cast<std::size_t>(r) * cols + c] = true;
            }
        }
    }

    std::vector<int> vertex_of(static_cast<std::size_t>(rows) * cols, -1);
    std::vector<std::array<double, 2>> coords;
    int n = 0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const std::size_t cell = static_cast<std::size_t>(r) * cols + c;
            if (!blocked[cell]) {
                vertex_of[cell] = n++;
                coords.push_back({(c + 0.5) / cols, (r + 0.5) / rows});
            }
        }
    }
    if (n == 0) {
        throw InvalidMeshError("grid is empty after hole removal");
    }

    std::vector<Arc> arcs;
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int u = vertex_of[static_cast<std::size_t>(r) * cols + c];
            if (u < 0) continue;
            for (int d = 0; d < 4; ++d) {
                const int rr = r + dr[d];
                const int cc = c + dc[d];
                if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
                const int v = vertex_of[static_cast<std::size_t>(rr) * cols + cc];
                if (v >= 0) {
                    arcs.emplace_back(u, v);
                }
            }
        }
    }
    return NavMesh(n, std::move(arcs), std::move(coords));
}

NavMesh load_mesh(const std::string& edge_list_text) {
    std::istringstream in(edge_list_text);
    std::string line;
    long line_no = 0;
    int num_vertices = -1;
    std::vector<Arc> arcs;

    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;

        std::istringstream fields(line);
        if (num_vertices < 0) {
            if (!(fields >> num_vertices) || num_vertices <= 0) {
                throw ParseError("expected positive vertex count", line_no);
            }
            std::string extra;
            if (fields >> extra) {
                throw ParseError("unexpected token after vertex count", line_no);
            }
            continue;
        }
        int i = 0, j = 0;
        if (!(fields >> i >> j)) {
            throw ParseError("expected arc line \"i j\"", line_no);
        }
        std::string extra;
        if (fields >> extra) {
            throw ParseError("unexpected token after arc", line_no);
        }
        if (i < 1 || i > num_vertices || j < 1 || j > num_vertices) {
            throw ParseError("arc endpoint out of range", line_no);
        }
        if (i == j) {
            throw ParseError("self-loops are not allowed", line_no);
        }
        arcs.emplace_back(i - 1, j - 1);
    }
    if (num_vertices < 0) {
        throw ParseError("empty edge-list input");
    }
    return NavMesh(num_vertices, std::move(arcs));
}

std::string serialize_mesh(const NavMesh& mesh) {
    std::ostringstream out;
    out << mesh.num_vertices() << "\n";
    for (const auto& [i, j] : mesh.arcs()) {
        out << (i + 1) << " " << (j + 1) << "\n";
    }
    return out.str();
}

ReachabilityIndex::ReachabilityIndex(const NavMesh& mesh, int order) : order_(order) {
    if (order < 1) {
        throw ContractError("reachability order must be positive");
    }
    const int n = mesh.num_vertices();
    levels_.resize(order);
    targets_.resize(order);

    levels_[0].resize(n);
    for (int v = 0; v < n; ++v) {
        for (int w : mesh.out_neighbors(v)) {
            levels_[0][v].push_back(Group{w, {{v, w}}});
        }
    }
    for (int r = 2; r <= order; ++r) {
        auto& level = levels_[r - 1];
        level.resize(n);
        for (int v = 0; v < n; ++v) {
            // Extend each (r-1)-walk by one arc; grouping stays sorted because
            // extension preserves no order, so collect then sort by target.
            std::vector<std::pair<int, std::vector<int>>> extended;
            for (const Group& g : levels_[r - 2][v]) {
                for (const auto& walk : g.walks) {
                    for (int w : mesh.out_neighbors(walk.back())) {
                        auto longer = walk;
                        longer.push_back(w);
                        extended.emplace_back(w, std::move(longer));
                    }
                }
            }
            std::sort(extended.begin(), extended.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            for (auto& [target, walk] : extended) {
                if (level[v].empty() || level[v].back().target != target) {
                    level[v].push_back(Group{target, {}});
                }
                level[v].back().walks.push_back(std::move(walk));
            }
        }
    }
    for (int r = 1; r <= order; ++r) {
        targets_[r - 1].resize(n);
        for (int v = 0; v < n; ++v) {
            for (const Group& g : levels_[r - 1][v]) {
                targets_[r - 1][v].push_back(g.target);
            }
        }
    }
}

const ReachabilityIndex::Group* ReachabilityIndex::find_group(int r, int from, int to) const {
    if (r < 1 || r > order_) {
        throw ContractError("reachability query order out of range");
    }
    const auto& groups = levels_[r - 1][from];
    auto it = std::lower_bound(groups.begin(), groups.end(), to,
                               [](const Group& g, int t) { return g.target < t; });
    if (it == groups.end() || it->target != to) {
        return nullptr;
    }
    return &*it;
}

const std::vector<int>& ReachabilityIndex::targets(int r, int from) const {
    if (r < 1 || r > order_) {
        throw ContractError("reachability query order out of range");
    }
    return targets_[r - 1][from];
}

const std::vector<std::vector<int>>& ReachabilityIndex::walks(int r, int from, int to) const {
    static const std::vector<std::vector<int>> empty;
    const Group* g = find_group(r, from, to);
    return g ? g->walks : empty;
}

bool ReachabilityIndex::reachable(int r, int from, int to) const {
    return find_group(r, from, to) != nullptr;
}

ReachabilityIndex build_reachability(const NavMesh& mesh, int order) {
    return ReachabilityIndex(mesh, order);
}

}  // namespace pathoed
