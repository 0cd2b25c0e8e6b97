// K-nearest-neighbor patch graph: overlapping l x l patches around every
// pixel, exact and approximate neighbor search, Gaussian edge weights with
// the mean-distance bandwidth rule, and the graph calculus (gradient,
// divergence, Laplacian, operator norm) the solvers run on.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "agtv/image.hpp"
#include "agtv/sparse.hpp"

namespace agtv {

struct PatchSet {
    int count = 0;       // n*n, one patch per pixel
    int patch_side = 0;  // l
    int image_side = 0;  // n
    Vec vectors;         // count * l*l, row-major per patch

    const double* patch(int i) const { return &vectors[static_cast<std::size_t>(i) * patch_side * patch_side]; }
    int dim() const { return patch_side * patch_side; }
};

// Patches are centered on their pixel; out-of-image samples mirror across
// the image edge (the boundary pixel itself is repeated).
inline PatchSet extract_patches(const Image& img, int patch_side) {
    if (patch_side < 1 || patch_side % 2 == 0)
        throw std::invalid_argument("extract_patches: patch side must be odd and >= 1");
    const int n = img.n;
    const int half = patch_side / 2;
    auto mirror = [n](int i) {
        while (i < 0 || i >= n) {
            if (i < 0) i = -i - 1;
            if (i >= n) i = 2 * n - 1 - i;
        }
        return i;
    };
    PatchSet ps;
    ps.count = n * n;
    ps.patch_side = patch_side;
    ps.image_side = n;
    ps.vectors.resize(static_cast<std::size_t>(ps.count) * patch_side * patch_side);
    std::size_t out = 0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            for (int dr = -half; dr <= half; ++dr)
                for (int dc = -half; dc <= half; ++dc) ps.vectors[out++] = img.at(mirror(r + dr), mirror(c + dc));
    return ps;
}

// K candidate neighbors per node with Euclidean distances, each node's list
// sorted ascending by (distance, index).
struct KnnResult {
    int count = 0;
    int k = 0;
    std::vector<std::int32_t> idx;  // count * k
    Vec dist;                       // count * k
};

namespace detail {

inline double patch_dist2(const double* a, const double* b, int d) {
    double s = 0.0;
    for (int t = 0; t < d; ++t) {
        const double diff = a[t] - b[t];
        s += diff * diff;
    }
    return s;
}

// Bounded max-heap of the current K best (squared distance, index) pairs.
// Ties prefer the smaller index, which makes every search deterministic.
struct KBest {
    int k;
    std::vector<std::pair<double, std::int32_t>> heap;  // worst on top

    explicit KBest(int kk) : k(kk) { heap.reserve(kk); }

    static bool worse(const std::pair<double, std::int32_t>& a, const std::pair<double, std::int32_t>& b) {
        return a.first != b.first ? a.first < b.first : a.second < b.second;
    }

    bool full() const { return static_cast<int>(heap.size()) == k; }
    double worst_d2() const { return heap.front().first; }

    void offer(double d2, std::int32_t j) {
        if (!full()) {
            heap.emplace_back(d2, j);
            std::push_heap(heap.begin(), heap.end(), worse);
        } else if (d2 < heap.front().first || (d2 == heap.front().first && j < heap.front().second)) {
            std::pop_heap(heap.begin(), heap.end(), worse);
            heap.back() = {d2, j};
            std::push_heap(heap.begin(), heap.end(), worse);
        }
    }

    // Ascending (distance, index) order.
    void extract_sorted(std::vector<std::pair<double, std::int32_t>>& out) {
        out.assign(heap.begin(), heap.end());
        std::sort(out.begin(), out.end());
    }
};

}  // namespace detail

inline KnnResult knn_exact(const PatchSet& ps, int K) {
    if (K < 1 || K >= ps.count) throw std::invalid_argument("knn_exact: need 1 <= K < node count");
    KnnResult res;
    res.count = ps.count;
    res.k = K;
    res.idx.resize(static_cast<std::size_t>(ps.count) * K);
    res.dist.resize(static_cast<std::size_t>(ps.count) * K);
    const int d = ps.dim();
    std::vector<std::pair<double, std::int32_t>> sorted;
    for (int i = 0; i < ps.count; ++i) {
        detail::KBest best(K);
        const double* pi = ps.patch(i);
        for (int j = 0; j < ps.count; ++j) {
            if (j == i) continue;
            best.offer(detail::patch_dist2(pi, ps.patch(j), d), j);
        }
        best.extract_sorted(sorted);
        for (int t = 0; t < K; ++t) {
            res.idx[static_cast<std::size_t>(i) * K + t] = sorted[t].second;
            res.dist[static_cast<std::size_t>(i) * K + t] = std::sqrt(sorted[t].first);
        }
    }
    return res;
}

struct KnnApproxParams {
    int trees = 8;
    int leaf_size = 32;
    int probes = 32;  // max leaf visits across the forest; <= 0 means unlimited
    std::uint64_t seed = 0;
};

namespace detail {

struct KdNode {
    int split_dim = -1;
    double split_val = 0.0;
    int left = -1, right = -1;  // children, or leaf range below
    int begin = 0, end = 0;
};

struct KdForest {
    int dim = 0;
    std::vector<std::vector<KdNode>> trees;
    std::vector<std::vector<std::int32_t>> perms;
};

inline int build_kd(const PatchSet& ps, std::vector<KdNode>& nodes, std::vector<std::int32_t>& perm, int begin,
                    int end, int leaf_size, std::mt19937_64& rng) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (end - begin <= leaf_size) {
        nodes[id].begin = begin;
        nodes[id].end = end;
        return id;
    }
    const int d = ps.dim();
    // Split on a random pick among the highest-variance coordinates, at the mean.
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    for (int t = begin; t < end; ++t) {
        const double* v = ps.patch(perm[t]);
        for (int c = 0; c < d; ++c) mean[c] += v[c];
    }
    const double inv = 1.0 / (end - begin);
    for (int c = 0; c < d; ++c) mean[c] *= inv;
    for (int t = begin; t < end; ++t) {
        const double* v = ps.patch(perm[t]);
        for (int c = 0; c < d; ++c) {
            const double dd = v[c] - mean[c];
            var[c] += dd * dd;
        }
    }
    std::vector<int> dims(d);
    for (int c = 0; c < d; ++c) dims[c] = c;
    const int top = std::min(5, d);
    std::partial_sort(dims.begin(), dims.begin() + top, dims.end(), [&](int a, int b) { return var[a] > var[b]; });
    if (var[dims[0]] == 0.0) {  // all remaining points identical: keep as leaf
        nodes[id].begin = begin;
        nodes[id].end = end;
        return id;
    }
    int pick = dims[std::uniform_int_distribution<int>(0, top - 1)(rng)];
    if (var[pick] == 0.0) pick = dims[0];
    double split = mean[pick];
    auto mid_it = std::partition(perm.begin() + begin, perm.begin() + end,
                                 [&](std::int32_t p) { return ps.patch(p)[pick] < split; });
    int mid = static_cast<int>(mid_it - perm.begin());
    if (mid == begin || mid == end) {
        // Degenerate mean split: fall back to the median position and move
        // split_val onto the boundary value so branch bounds stay admissible.
        mid = begin + (end - begin) / 2;
        std::nth_element(perm.begin() + begin, perm.begin() + mid, perm.begin() + end,
                         [&](std::int32_t a, std::int32_t b) { return ps.patch(a)[pick] < ps.patch(b)[pick]; });
        split = ps.patch(perm[mid])[pick];
    }
    nodes[id].split_dim = pick;
    nodes[id].split_val = split;
    const int l = build_kd(ps, nodes, perm, begin, mid, leaf_size, rng);
    const int r = build_kd(ps, nodes, perm, mid, end, leaf_size, rng);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
}

inline KdForest build_forest(const PatchSet& ps, const KnnApproxParams& par) {
    KdForest f;
    f.dim = ps.dim();
    f.trees.resize(par.trees);
    f.perms.resize(par.trees);
    for (int t = 0; t < par.trees; ++t) {
        std::mt19937_64 rng(par.seed + 0x9e3779b97f4a7c15ULL * (t + 1));
        auto& perm = f.perms[t];
        perm.resize(ps.count);
        for (int i = 0; i < ps.count; ++i) perm[i] = i;
        f.trees[t].reserve(2 * ps.count / std::max(1, par.leaf_size) + 8);
        build_kd(ps, f.trees[t], perm, 0, ps.count, std::max(1, par.leaf_size), rng);
    }
    return f;
}

}  // namespace detail

// Randomized kd-tree forest with a shared best-bin-first queue. `probes`
// bounds the number of leaves visited per query; with an unlimited budget the
// search degenerates to an exhaustive scan and returns exactly knn_exact's
// answer (same distances, same tie-breaking).
inline KnnResult knn_approx(const PatchSet& ps, int K, const KnnApproxParams& params = {}) {
    if (K < 1 || K >= ps.count) throw std::invalid_argument("knn_approx: need 1 <= K < node count");
    if (params.trees < 1 || params.leaf_size < 1) throw std::invalid_argument("knn_approx: bad forest parameters");
    const detail::KdForest forest = detail::build_forest(ps, params);
    const int d = ps.dim();
    const bool unlimited = params.probes <= 0;

    KnnResult res;
    res.count = ps.count;
    res.k = K;
    res.idx.resize(static_cast<std::size_t>(ps.count) * K);
    res.dist.resize(static_cast<std::size_t>(ps.count) * K);

    struct Branch {
        double bound;  // lower bound on distance to any point in the subtree
        int tree;
        int node;
        bool operator>(const Branch& o) const { return bound > o.bound; }
    };
    std::vector<Branch> queue;
    std::vector<int> stamp(ps.count, -1);
    std::vector<std::pair<double, std::int32_t>> sorted;

    for (int qi = 0; qi < ps.count; ++qi) {
        const double* qv = ps.patch(qi);
        detail::KBest best(K);
        queue.clear();
        int leaves_visited = 0;

        auto scan_leaf = [&](int tree, int node) {
            const auto& nd = forest.trees[tree][node];
            const auto& perm = forest.perms[tree];
            for (int t = nd.begin; t < nd.end; ++t) {
                const std::int32_t j = perm[t];
                if (j == qi || stamp[j] == qi) continue;
                stamp[j] = qi;
                best.offer(detail::patch_dist2(qv, ps.patch(j), d), j);
            }
            ++leaves_visited;
        };

        // Descend to the near leaf, queueing every far sibling with an
        // admissible single-axis bound.
        auto descend = [&](int tree, int node, double bound) {
            while (forest.trees[tree][node].split_dim >= 0) {
                const auto& nd = forest.trees[tree][node];
                const double diff = qv[nd.split_dim] - nd.split_val;
                const int near = diff < 0.0 ? nd.left : nd.right;
                const int far = diff < 0.0 ? nd.right : nd.left;
                queue.push_back({std::max(bound, std::fabs(diff)), tree, far});
                std::push_heap(queue.begin(), queue.end(), std::greater<>());
                node = near;
            }
            scan_leaf(tree, node);
        };

        for (int t = 0; t < params.trees; ++t) descend(t, 0, 0.0);
        while (!queue.empty()) {
            if (!unlimited && best.full() && leaves_visited >= params.probes) break;
            std::pop_heap(queue.begin(), queue.end(), std::greater<>());
            const Branch br = queue.back();
            queue.pop_back();
            // The queue is ordered by lower bound, so once the best bound
            // cannot beat the current worst kept distance nothing can.
            // Strict inequality: an equal-distance region may still hold a
            // smaller-index tie, which the exact search would prefer.
            if (best.full() && br.bound * br.bound > best.worst_d2()) break;
            descend(br.tree, br.node, br.bound);
        }

        best.extract_sorted(sorted);
        for (int t = 0; t < K; ++t) {
            res.idx[static_cast<std::size_t>(qi) * K + t] = sorted[t].second;
            res.dist[static_cast<std::size_t>(qi) * K + t] = std::sqrt(sorted[t].first);
        }
    }
    return res;
}

enum class SigmaRule { kMeanConnectedDistance };

// Undirected weighted patch graph. Edges are stored once with i < j; the
// weight arrays are indexed like `edge_i`/`edge_j`.
struct PatchGraph {
    int node_count = 0;
    double sigma = 0.0;
    std::vector<std::int32_t> edge_i;
    std::vector<std::int32_t> edge_j;
    Vec weight;
    Vec sqrt_weight;

    std::size_t edge_count() const { return weight.size(); }
};

// Gaussian weights W_ij = exp(-d_ij^2 / sigma^2) with sigma the arithmetic
// mean of the retained directed candidate distances; candidate selections
// are symmetrized by union. An all-zero candidate set (exact duplicates
// everywhere) degenerates to unit weights.
inline PatchGraph build_graph(const KnnResult& knn, SigmaRule rule = SigmaRule::kMeanConnectedDistance) {
    (void)rule;
    if (knn.count <= 0 || knn.k <= 0) throw std::invalid_argument("build_graph: empty candidate set");
    double sigma = 0.0;
    for (double v : knn.dist) sigma += v;
    sigma /= static_cast<double>(knn.dist.size());

    struct DirEdge {
        std::int32_t i, j;
        double d;
    };
    std::vector<DirEdge> dir;
    dir.reserve(knn.dist.size());
    for (int i = 0; i < knn.count; ++i) {
        for (int t = 0; t < knn.k; ++t) {
            const std::int32_t j = knn.idx[static_cast<std::size_t>(i) * knn.k + t];
            const double dd = knn.dist[static_cast<std::size_t>(i) * knn.k + t];
            dir.push_back({std::min<std::int32_t>(i, j), std::max<std::int32_t>(i, j), dd});
        }
    }
    std::sort(dir.begin(), dir.end(), [](const DirEdge& a, const DirEdge& b) {
        return a.i != b.i ? a.i < b.i : (a.j != b.j ? a.j < b.j : a.d < b.d);
    });

    PatchGraph g;
    g.node_count = knn.count;
    g.sigma = sigma;
    for (std::size_t e = 0; e < dir.size();) {
        std::size_t f = e;
        while (f < dir.size() && dir[f].i == dir[e].i && dir[f].j == dir[e].j) ++f;
        const double dd = dir[e].d;
        const double w = sigma > 0.0 ? std::exp(-(dd * dd) / (sigma * sigma)) : 1.0;
        g.edge_i.push_back(dir[e].i);
        g.edge_j.push_back(dir[e].j);
        g.weight.push_back(w);
        g.sqrt_weight.push_back(std::sqrt(w));
        e = f;
    }
    return g;
}

// 4-neighborhood lattice with unit weights; GTV on this graph is standard
// anisotropic TV. |E| = 2 n (n-1).
inline PatchGraph grid_graph(int n) {
    if (n < 1) throw std::invalid_argument("grid_graph: n must be >= 1");
    PatchGraph g;
    g.node_count = n * n;
    g.sigma = 0.0;
    g.edge_i.reserve(2 * static_cast<std::size_t>(n) * (n - 1));
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            const std::int32_t i = r * n + c;
            if (c + 1 < n) {
                g.edge_i.push_back(i);
                g.edge_j.push_back(i + 1);
            }
            if (r + 1 < n) {
                g.edge_i.push_back(i);
                g.edge_j.push_back(i + n);
            }
        }
    }
    g.weight.assign(g.edge_i.size(), 1.0);
    g.sqrt_weight.assign(g.edge_i.size(), 1.0);
    return g;
}

// Edge-difference vector: per oriented edge (i < j), sqrt(w_ij) (x_i - x_j).
inline Vec gradient(const PatchGraph& g, const Vec& x) {
    if (x.size() != static_cast<std::size_t>(g.node_count)) throw std::invalid_argument("gradient: length mismatch");
    Vec out(g.edge_count());
    for (std::size_t e = 0; e < g.edge_count(); ++e) out[e] = g.sqrt_weight[e] * (x[g.edge_i[e]] - x[g.edge_j[e]]);
    return out;
}

// Exact adjoint of `gradient` under the standard inner products.
inline Vec divergence(const PatchGraph& g, const Vec& d) {
    if (d.size() != g.edge_count()) throw std::invalid_argument("divergence: length mismatch");
    Vec out(static_cast<std::size_t>(g.node_count), 0.0);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const double v = g.sqrt_weight[e] * d[e];
        out[g.edge_i[e]] += v;
        out[g.edge_j[e]] -= v;
    }
    return out;
}

// out = L x without materializing L.
inline void apply_laplacian(const PatchGraph& g, const Vec& x, Vec& out) {
    out.assign(x.size(), 0.0);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const double v = g.weight[e] * (x[g.edge_i[e]] - x[g.edge_j[e]]);
        out[g.edge_i[e]] += v;
        out[g.edge_j[e]] -= v;
    }
}

// Combinatorial Laplacian L = D - W as an explicit sparse matrix.
inline CsrMatrix laplacian(const PatchGraph& g) {
    std::vector<Triplet> trip;
    trip.reserve(3 * g.edge_count() + g.node_count);
    Vec degree(static_cast<std::size_t>(g.node_count), 0.0);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const std::uint32_t i = g.edge_i[e], j = g.edge_j[e];
        degree[i] += g.weight[e];
        degree[j] += g.weight[e];
        trip.push_back({i, j, -g.weight[e]});
        trip.push_back({j, i, -g.weight[e]});
    }
    for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(g.node_count); ++i)
        if (degree[i] != 0.0) trip.push_back({i, i, degree[i]});
    return csr_from_triplets(g.node_count, g.node_count, std::move(trip));
}

struct OperatorNormEstimate {
    double value = 0.0;  // ||grad_G||_2 = sqrt(lambda_max(L))
    int iterations = 0;
    bool converged = false;
};

// Power iteration on L; the graph gradient norm is sqrt of its top eigenvalue.
inline OperatorNormEstimate operator_norm(const PatchGraph& g, int max_iterations = 500, double tol = 1e-9) {
    OperatorNormEstimate est;
    if (g.edge_count() == 0) {
        est.converged = true;
        return est;
    }
    std::mt19937_64 rng(0x5eedf00dULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec v(static_cast<std::size_t>(g.node_count));
    for (double& x : v) x = u(rng);
    scale(v, 1.0 / norm2(v));
    Vec w;
    double lambda_prev = 0.0, lambda = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        apply_laplacian(g, v, w);
        lambda = dot(v, w);
        est.iterations = it + 1;
        const double nw = norm2(w);
        if (nw == 0.0) {
            lambda = 0.0;
            est.converged = true;
            break;
        }
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / nw;
        if (it > 0 && std::fabs(lambda - lambda_prev) <= tol * std::fabs(lambda)) {
            est.converged = true;
            break;
        }
        lambda_prev = lambda;
    }
    est.value = std::sqrt(std::max(lambda, 0.0));
    return est;
}

}  // namespace agtv
