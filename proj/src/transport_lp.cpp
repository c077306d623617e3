#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "isolandau/errors.hpp"
#include "isolandau/geometry.hpp"

// Exact transportation simplex (MODI) with spanning-tree basis, block
// pricing, and epsilon-perturbed supplies against degeneracy. The optimal
// basis is re-solved with the unperturbed masses at the end, so the returned
// value is exact for the stated problem.

namespace isolandau {

namespace {

struct Arc {
    int src = -1;   // source index
    int dst = -1;   // sink index
    double flow = 0.0;
    bool active = false;
};

double dist(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

} // namespace

double solve_transport_min_cost(const TransportProblem& problem) {
    const int m = static_cast<int>(problem.supply.size());
    const int n = static_cast<int>(problem.demand.size());
    if (m == 0 || n == 0) throw UsageError("transport: empty marginals");
    if (problem.src.size() != problem.supply.size()
        || problem.dst.size() != problem.demand.size())
        throw UsageError("transport: point/mass size mismatch");

    double total_a = 0.0, total_b = 0.0;
    for (double a : problem.supply) {
        if (!(a > 0.0)) throw UsageError("transport: nonpositive supply");
        total_a += a;
    }
    for (double b : problem.demand) {
        if (!(b > 0.0)) throw UsageError("transport: nonpositive demand");
        total_b += b;
    }
    if (std::fabs(total_a - total_b) > 1e-9 * std::max(total_a, total_b))
        throw UsageError("transport: unbalanced marginals");

    const std::size_t cells = static_cast<std::size_t>(m) * static_cast<std::size_t>(n);
    std::vector<double> cmat;
    const bool cache_costs = cells <= (std::size_t{6} << 20);
    if (cache_costs) {
        cmat.resize(cells);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
                cmat[static_cast<std::size_t>(i) * n + j] = dist(problem.src[static_cast<std::size_t>(i)],
                                                                 problem.dst[static_cast<std::size_t>(j)]);
    }
    auto cost = [&](int i, int j) {
        return cache_costs ? cmat[static_cast<std::size_t>(i) * n + j]
                           : dist(problem.src[static_cast<std::size_t>(i)],
                                  problem.dst[static_cast<std::size_t>(j)]);
    };

    // perturbed working masses (rebalanced on the last sink)
    const double eps = 1e-11 * total_a / static_cast<double>(m + n);
    std::vector<double> a(problem.supply), b(problem.demand);
    for (double& x : a) x += eps;
    b[static_cast<std::size_t>(n - 1)] += eps * static_cast<double>(m);

    // --- row-greedy basic feasible start -------------------------------------
    std::vector<Arc> arcs;
    arcs.reserve(static_cast<std::size_t>(m + n));
    {
        std::vector<double> rem_b = b;
        std::vector<char> open_b(static_cast<std::size_t>(n), 1);
        int open_sinks = n;
        for (int i = 0; i < m; ++i) {
            double rem_a = a[static_cast<std::size_t>(i)];
            while (rem_a > 0.0 && open_sinks > 0) {
                int best = -1;
                double best_c = HUGE_VAL;
                for (int j = 0; j < n; ++j) {
                    if (!open_b[static_cast<std::size_t>(j)]) continue;
                    const double c = cost(i, j);
                    if (c < best_c) {
                        best_c = c;
                        best = j;
                    }
                }
                const double q = std::min(rem_a, rem_b[static_cast<std::size_t>(best)]);
                arcs.push_back({i, best, q, true});
                rem_a -= q;
                rem_b[static_cast<std::size_t>(best)] -= q;
                if (rem_b[static_cast<std::size_t>(best)] <= 0.0) {
                    open_b[static_cast<std::size_t>(best)] = 0;
                    --open_sinks;
                }
                if (rem_a <= 0.0) break;
            }
        }
    }

    const int nodes = m + n; // 0..m-1 sources, m..m+n-1 sinks
    auto src_node = [&](int i) { return i; };
    auto dst_node = [&](int j) { return m + j; };

    std::vector<std::vector<int>> adj(static_cast<std::size_t>(nodes));
    auto attach = [&](int arc_id) {
        adj[static_cast<std::size_t>(src_node(arcs[static_cast<std::size_t>(arc_id)].src))].push_back(arc_id);
        adj[static_cast<std::size_t>(dst_node(arcs[static_cast<std::size_t>(arc_id)].dst))].push_back(arc_id);
    };
    auto detach = [&](int arc_id) {
        auto remove_from = [&](int node) {
            auto& lst = adj[static_cast<std::size_t>(node)];
            lst.erase(std::find(lst.begin(), lst.end(), arc_id));
        };
        remove_from(src_node(arcs[static_cast<std::size_t>(arc_id)].src));
        remove_from(dst_node(arcs[static_cast<std::size_t>(arc_id)].dst));
    };
    for (int id = 0; id < static_cast<int>(arcs.size()); ++id) attach(id);

    std::vector<int> parent(static_cast<std::size_t>(nodes)),
        parent_arc(static_cast<std::size_t>(nodes)), order;
    std::vector<double> u(static_cast<std::size_t>(m)), v(static_cast<std::size_t>(n));
    order.reserve(static_cast<std::size_t>(nodes));

    auto rebuild_tree = [&]() {
        std::fill(parent.begin(), parent.end(), -2);
        order.clear();
        order.push_back(0);
        parent[0] = -1;
        parent_arc[0] = -1;
        for (std::size_t head = 0; head < order.size(); ++head) {
            const int node = order[head];
            for (int arc_id : adj[static_cast<std::size_t>(node)]) {
                const Arc& arc = arcs[static_cast<std::size_t>(arc_id)];
                const int other =
                    node == src_node(arc.src) ? dst_node(arc.dst) : src_node(arc.src);
                if (parent[static_cast<std::size_t>(other)] != -2) continue;
                parent[static_cast<std::size_t>(other)] = node;
                parent_arc[static_cast<std::size_t>(other)] = arc_id;
                order.push_back(other);
            }
        }
        if (static_cast<int>(order.size()) != nodes)
            throw NumericalError("transport: basis lost spanning-tree structure");
        // duals from u_0 = 0 along the tree
        u[0] = 0.0;
        for (std::size_t k = 1; k < order.size(); ++k) {
            const int node = order[k];
            const Arc& arc = arcs[static_cast<std::size_t>(parent_arc[static_cast<std::size_t>(node)])];
            const double c = cost(arc.src, arc.dst);
            if (node >= m)
                v[static_cast<std::size_t>(node - m)] = c - u[static_cast<std::size_t>(arc.src)];
            else
                u[static_cast<std::size_t>(node)] = c - v[static_cast<std::size_t>(arc.dst)];
        }
    };

    // patch disconnected (fully degenerate) starts with zero-flow arcs
    while (true) {
        std::vector<char> reached(static_cast<std::size_t>(nodes), 0);
        std::vector<int> queue{0};
        reached[0] = 1;
        int reached_sink = -1;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const int node = queue[head];
            if (node >= m && reached_sink < 0) reached_sink = node - m;
            for (int arc_id : adj[static_cast<std::size_t>(node)]) {
                const Arc& arc = arcs[static_cast<std::size_t>(arc_id)];
                const int other =
                    node == src_node(arc.src) ? dst_node(arc.dst) : src_node(arc.src);
                if (reached[static_cast<std::size_t>(other)]) continue;
                reached[static_cast<std::size_t>(other)] = 1;
                queue.push_back(other);
            }
        }
        int missing = -1;
        for (int node = 0; node < nodes; ++node)
            if (!reached[static_cast<std::size_t>(node)]) {
                missing = node;
                break;
            }
        if (missing < 0) break;
        const int arc_id = static_cast<int>(arcs.size());
        if (missing >= m)
            arcs.push_back({0, missing - m, 0.0, true}); // reached source 0 <-> sink
        else if (reached_sink >= 0)
            arcs.push_back({missing, reached_sink, 0.0, true});
        else
            throw NumericalError("transport: cannot connect degenerate basis");
        attach(arc_id);
    }

    rebuild_tree();

    double cost_scale = 1.0;
    for (int j = 0; j < n; ++j) cost_scale = std::max(cost_scale, cost(0, j));
    const double opt_tol = 1e-12 * cost_scale;

    const std::size_t block = 16384;
    std::size_t cursor = 0;
    std::vector<int> path_nodes;
    long pivots = 0;
    const long pivot_limit = 400000;

    while (true) {
        // block pricing over the flattened cost array
        int ei = -1, ej = -1;
        double best_red = -opt_tol;
        std::size_t scanned = 0;
        while (scanned < cells) {
            const std::size_t chunk = std::min(block, cells - scanned);
            for (std::size_t k = 0; k < chunk; ++k) {
                const std::size_t cell = (cursor + k) % cells;
                const int i = static_cast<int>(cell / static_cast<std::size_t>(n));
                const int j = static_cast<int>(cell % static_cast<std::size_t>(n));
                const double red =
                    cost(i, j) - u[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(j)];
                if (red < best_red) {
                    best_red = red;
                    ei = i;
                    ej = j;
                }
            }
            scanned += chunk;
            cursor = (cursor + chunk) % cells;
            if (ei >= 0) break;
        }
        if (ei < 0) break; // optimal

        if (++pivots > pivot_limit)
            throw ResourceError("transport: pivot limit exceeded");

        // cycle: entering arc + tree path from sink ej back to source ei
        path_nodes.clear();
        {
            std::vector<int> up_a, up_b;
            for (int x = dst_node(ej); x != -1; x = parent[static_cast<std::size_t>(x)])
                up_a.push_back(x);
            for (int x = src_node(ei); x != -1; x = parent[static_cast<std::size_t>(x)])
                up_b.push_back(x);
            // trim common tail (above the LCA)
            std::size_t ia = up_a.size(), ib = up_b.size();
            while (ia > 1 && ib > 1 && up_a[ia - 2] == up_b[ib - 2]) {
                --ia;
                --ib;
            }
            // ensure the two climbs actually meet
            if (up_a[ia - 1] != up_b[ib - 1])
                throw NumericalError("transport: cycle construction failed");
            path_nodes.assign(up_a.begin(), up_a.begin() + static_cast<long>(ia));
            for (std::size_t k = ib - 1; k-- > 0;) path_nodes.push_back(up_b[k]);
        }

        // signs alternate starting with -theta on the arc incident to sink ej
        double theta = HUGE_VAL;
        int leaving = -1;
        for (std::size_t t = 0; t + 1 < path_nodes.size(); ++t) {
            if (t % 2 == 1) continue; // these arcs gain flow
            const int child = parent[static_cast<std::size_t>(path_nodes[t])] == path_nodes[t + 1]
                                  ? path_nodes[t]
                                  : path_nodes[t + 1];
            const int arc_id = parent_arc[static_cast<std::size_t>(child)];
            const double f = arcs[static_cast<std::size_t>(arc_id)].flow;
            if (f < theta) {
                theta = f;
                leaving = arc_id;
            }
        }
        if (leaving < 0) throw NumericalError("transport: no leaving arc");

        for (std::size_t t = 0; t + 1 < path_nodes.size(); ++t) {
            const int child = parent[static_cast<std::size_t>(path_nodes[t])] == path_nodes[t + 1]
                                  ? path_nodes[t]
                                  : path_nodes[t + 1];
            const int arc_id = parent_arc[static_cast<std::size_t>(child)];
            arcs[static_cast<std::size_t>(arc_id)].flow += (t % 2 == 0) ? -theta : theta;
        }
        detach(leaving);
        arcs[static_cast<std::size_t>(leaving)].active = false;
        const int entering_id = static_cast<int>(arcs.size());
        arcs.push_back({ei, ej, theta, true});
        attach(entering_id);
        rebuild_tree();
    }

    // resolve exact flows on the optimal tree with the unperturbed masses
    {
        std::vector<double> residual(static_cast<std::size_t>(nodes));
        for (int i = 0; i < m; ++i)
            residual[static_cast<std::size_t>(i)] = problem.supply[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j)
            residual[static_cast<std::size_t>(m + j)] = problem.demand[static_cast<std::size_t>(j)];
        // peel leaves in reverse BFS order
        for (std::size_t k = order.size(); k-- > 1;) {
            const int node = order[k];
            const int arc_id = parent_arc[static_cast<std::size_t>(node)];
            Arc& arc = arcs[static_cast<std::size_t>(arc_id)];
            arc.flow = residual[static_cast<std::size_t>(node)];
            residual[static_cast<std::size_t>(parent[static_cast<std::size_t>(node)])] -=
                arc.flow;
        }
    }

    double value = 0.0;
    for (const Arc& arc : arcs) {
        if (!arc.active) continue;
        if (arc.flow < -1e-9 * total_a)
            throw NumericalError("transport: negative flow on optimal tree");
        if (arc.flow > 0.0) value += arc.flow * cost(arc.src, arc.dst);
    }
    return value;
}

} // namespace isolandau
