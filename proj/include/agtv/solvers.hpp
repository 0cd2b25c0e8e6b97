// Reconstruction solvers.
//
// gtv_solve runs the forward-backward primal-dual inner loop on a fixed
// patch graph: the smooth data term f(x) = ||Ax-b||^2 enters by gradient
// steps, the wavelet sparsity term by its prox (soft-thresholding in
// coefficient space), and the graph-TV term through the dual variable living
// on graph edges. agtv_solve wraps it in an outer loop that rebuilds the
// patch graph from the current iterate. cs/cstv are the corresponding
// special cases, and art/sirt are the classic row-action baselines.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "agtv/errors.hpp"
#include "agtv/image.hpp"
#include "agtv/patch_graph.hpp"
#include "agtv/projector.hpp"
#include "agtv/sparse.hpp"
#include "agtv/wavelet.hpp"

namespace agtv {

struct SolverConfig {
    double lambda = 0.5;  // wavelet-sparsity weight
    double gamma = 0.2;   // graph-TV weight
    // Step sizes; non-positive values are derived automatically so that
    // tau1 * (beta/2 + tau2 * ||grad_G||^2) <= 3/4 (see resolve_step_sizes).
    double tau1 = 0.0;
    double tau2 = 0.0;
    double tau3 = 1.0;
    double epsilon = 1e-4;  // stopping tolerance on relative squared change
    double delta = 1e-10;   // division guard in the stopping tests
    int inner_iters = 100;  // J
    int outer_iters = 30;   // I (agtv only)
    int K = 15;             // patch-graph neighbors
    int patch_side = 3;     // l
    int wavelet_levels = 0;  // 0: depth that leaves a 4x4 approximation band
    double eta = 0.25;      // ART/SIRT relaxation
    std::uint64_t seed = 0;
    // Patch-graph construction (agtv outer loop).
    KnnApproxParams knn;
    bool knn_use_exact = false;
    // Spectral estimation.
    int power_iterations = 300;
    double power_tol = 1e-7;
    // Reproduces the looser literal reading beta = 2 sigma_max(A) instead of
    // the Lipschitz constant 2 sigma_max(A)^2 of grad f.
    bool lipschitz_literal = false;
    bool log_objective = true;
    // Optional per-inner-iteration observer (iterate inspection in tests).
    std::function<void(int, const Vec&)> iterate_observer;
};

struct ReconResult {
    Image image;
    std::vector<double> objective_trace;   // per inner iteration
    std::vector<double> residual_trace;    // relative squared change of the primal iterate
    std::vector<double> residual_trace_v;  // dual analogue (empty for methods without a dual)
    int outer_iterations_used = 0;
    std::vector<int> inner_iterations_used;  // one entry per outer pass
    double wall_time_ms = 0.0;
};

struct LipschitzEstimate {
    double spectral_norm_A = 0.0;  // sigma_max(A)
    double beta = 0.0;             // Lipschitz constant of grad f
    int iterations = 0;
    bool converged = false;
};

// grad f(x) = 2 A^T (A x - b).
inline Vec grad_f(const CsrMatrix& A, const Vec& x, const Vec& b) {
    if (b.size() != A.rows) throw std::invalid_argument("grad_f: rhs size mismatch");
    Vec r = A.multiply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    Vec g = A.multiply_transpose(r);
    scale(g, 2.0);
    return g;
}

// Elementwise soft-thresholding, the prox of t * ||.||_1.
inline Vec prox_l1(const Vec& v, double threshold) {
    if (threshold < 0.0) throw std::invalid_argument("prox_l1: negative threshold");
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double a = std::fabs(v[i]) - threshold;
        out[i] = a > 0.0 ? (v[i] > 0.0 ? a : -a) : 0.0;
    }
    return out;
}

inline void prox_l1_inplace(Vec& v, double threshold) {
    for (double& x : v) {
        const double a = std::fabs(x) - threshold;
        x = a > 0.0 ? (x > 0.0 ? a : -a) : 0.0;
    }
}

// Power iteration on A^T A; beta = 2 sigma_max(A)^2 (the Lipschitz constant
// of grad f) unless the literal 2 sigma_max(A) compatibility reading is
// requested.
inline LipschitzEstimate estimate_beta(const CsrMatrix& A, int max_iterations = 300, double tol = 1e-7,
                                       bool literal = false) {
    LipschitzEstimate est;
    std::mt19937_64 rng(0xbe7aULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec v(A.cols);
    for (double& x : v) x = u(rng);
    scale(v, 1.0 / norm2(v));
    Vec w, z;
    double lambda = 0.0, lambda_prev = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        A.multiply(v, w);
        A.multiply_transpose(w, z);
        lambda = dot(v, z);
        est.iterations = it + 1;
        const double nz = norm2(z);
        if (nz == 0.0) {
            lambda = 0.0;
            est.converged = true;
            break;
        }
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = z[i] / nz;
        if (it > 0 && std::fabs(lambda - lambda_prev) <= tol * std::fabs(lambda)) {
            est.converged = true;
            break;
        }
        lambda_prev = lambda;
    }
    lambda = std::max(lambda, 0.0);
    est.spectral_norm_A = std::sqrt(lambda);
    est.beta = literal ? 2.0 * est.spectral_norm_A : 2.0 * lambda;
    return est;
}

namespace detail {

struct StepSizes {
    double tau1, tau2, tau3;
};

// tau1 = 1/beta, tau2 = 1/(4 tau1 ||grad_G||^2): then
// tau1*(beta/2 + tau2*||grad_G||^2) = 3/4, inside the primal-dual stability
// region with margin.
inline StepSizes resolve_step_sizes(const SolverConfig& cfg, const CsrMatrix& A, const PatchGraph& g) {
    StepSizes s{cfg.tau1, cfg.tau2, cfg.tau3 > 0.0 ? cfg.tau3 : 1.0};
    if (s.tau1 <= 0.0 || s.tau2 <= 0.0) {
        const double gnorm_sq = [&] {
            const auto est = operator_norm(g);
            return est.value * est.value;
        }();
        if (s.tau1 <= 0.0) {
            const LipschitzEstimate lip =
                estimate_beta(A, cfg.power_iterations, cfg.power_tol, cfg.lipschitz_literal);
            if (!(lip.beta > 0.0)) throw numerical_error("resolve_step_sizes: zero operator, cannot derive tau1");
            s.tau1 = 1.0 / lip.beta;
        }
        if (s.tau2 <= 0.0) s.tau2 = gnorm_sq > 0.0 ? 1.0 / (4.0 * s.tau1 * gnorm_sq) : 1.0;
    }
    return s;
}

inline int resolve_levels(const SolverConfig& cfg, int n) {
    return cfg.wavelet_levels > 0 ? cfg.wavelet_levels : wavelet_default_levels(n);
}

// Eq-style objective ||Ax-b||^2 + lambda ||Phi* x||_1 + gamma ||grad_G x||_1.
inline double objective_value(const CsrMatrix& A, const Vec& b, const Vec& x, double lambda, double gamma,
                              const PatchGraph& g, int n, int levels) {
    Vec r = A.multiply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    double obj = norm2_sq(r);
    if (lambda != 0.0) obj += lambda * norm1(analyze_vec(x, n, levels));
    if (gamma != 0.0) obj += gamma * norm1(gradient(g, x));
    return obj;
}

class Stopwatch {
  public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

// Inner loop of the primal-dual scheme on a fixed graph. One outer pass of
// the adaptive method; also the GTV and (with the grid graph) CSTV methods.
inline ReconResult gtv_solve(const ProjectionMatrix& pm, const Vec& b, const PatchGraph& g,
                             const SolverConfig& cfg, const Image& x0) {
    const CsrMatrix& A = pm.A;
    if (b.size() != A.rows) throw std::invalid_argument("gtv_solve: sinogram size mismatch");
    if (x0.n != pm.n) throw std::invalid_argument("gtv_solve: prior size mismatch");
    if (static_cast<std::size_t>(g.node_count) != x0.size())
        throw std::invalid_argument("gtv_solve: graph node count mismatch");

    const detail::Stopwatch clock;
    const int n = pm.n;
    const int levels = detail::resolve_levels(cfg, n);
    const detail::StepSizes tau = detail::resolve_step_sizes(cfg, A, g);

    ReconResult res;
    Vec U = x0.data;
    Vec V = gradient(g, U);

    Vec P, T, Q, U_next, V_next;
    int used = 0;
    for (int j = 0; j < cfg.inner_iters; ++j) {
        // a. P = Phi( prox_{tau1 g}( Phi*(U) - tau1 Phi*(grad f(U) + div V) ) )
        Vec step = grad_f(A, U, b);
        {
            const Vec div_v = divergence(g, V);
            axpy(1.0, div_v, step);
        }
        Vec coeff = analyze_vec(U, n, levels);
        {
            const Vec coeff_step = analyze_vec(step, n, levels);
            axpy(-tau.tau1, coeff_step, coeff);
        }
        prox_l1_inplace(coeff, tau.tau1 * cfg.lambda);
        P = synthesize_vec(coeff, n, levels);

        // b. T = V + tau2 * grad(2P - U)
        Vec relaxed = P;
        scale(relaxed, 2.0);
        axpy(-1.0, U, relaxed);
        T = gradient(g, relaxed);
        scale(T, tau.tau2);
        axpy(1.0, V, T);

        // c. Q = T - tau2 * prox_{h/tau2}(T / tau2)
        Q = T;
        scale(Q, 1.0 / tau.tau2);
        prox_l1_inplace(Q, cfg.gamma / tau.tau2);
        scale(Q, -tau.tau2);
        axpy(1.0, T, Q);

        // d. relaxation
        U_next = U;
        V_next = V;
        for (std::size_t i = 0; i < U.size(); ++i) U_next[i] += tau.tau3 * (P[i] - U[i]);
        for (std::size_t i = 0; i < V.size(); ++i) V_next[i] += tau.tau3 * (Q[i] - V[i]);

        if (!all_finite(U_next) || !all_finite(V_next))
            throw numerical_error("gtv_solve: non-finite iterate (step sizes too large?)");

        const double resid_u = rel_change_sq(U_next, U, cfg.delta);
        const double resid_v = rel_change_sq(V_next, V, cfg.delta);
        U.swap(U_next);
        V.swap(V_next);
        used = j + 1;

        res.residual_trace.push_back(resid_u);
        res.residual_trace_v.push_back(resid_v);
        if (cfg.log_objective)
            res.objective_trace.push_back(detail::objective_value(A, b, U, cfg.lambda, cfg.gamma, g, n, levels));
        if (cfg.iterate_observer) cfg.iterate_observer(j, U);

        if (resid_u < cfg.epsilon && resid_v < cfg.epsilon) break;
    }

    res.image = Image(n, std::move(U));
    res.outer_iterations_used = 1;
    res.inner_iterations_used.push_back(used);
    res.wall_time_ms = clock.ms();
    return res;
}

// Builds the K-NN patch graph of an iterate with the configured search.
inline PatchGraph build_patch_graph(const Image& img, const SolverConfig& cfg, std::uint64_t knn_seed) {
    const PatchSet patches = extract_patches(img, cfg.patch_side);
    KnnResult knn;
    if (cfg.knn_use_exact) {
        knn = knn_exact(patches, cfg.K);
    } else {
        KnnApproxParams par = cfg.knn;
        par.seed = knn_seed;
        knn = knn_approx(patches, cfg.K, par);
    }
    return build_graph(knn);
}

// Adaptive outer loop: rebuild the patch graph from the current iterate,
// re-solve, stop when the outer relative change drops below epsilon.
inline ReconResult agtv_solve(const ProjectionMatrix& pm, const Vec& b, const SolverConfig& cfg, const Image& x0) {
    const detail::Stopwatch clock;
    SolverConfig inner_cfg = cfg;
    if (inner_cfg.tau1 <= 0.0) {
        const LipschitzEstimate lip =
            estimate_beta(pm.A, cfg.power_iterations, cfg.power_tol, cfg.lipschitz_literal);
        if (!(lip.beta > 0.0)) throw numerical_error("agtv_solve: zero operator");
        inner_cfg.tau1 = 1.0 / lip.beta;  // A is fixed across passes; estimate once
    }

    ReconResult res;
    Image x = x0;
    for (int i = 0; i < cfg.outer_iters; ++i) {
        const PatchGraph g = build_patch_graph(x, cfg, cfg.seed + static_cast<std::uint64_t>(i));
        ReconResult pass = gtv_solve(pm, b, g, inner_cfg, x);
        res.objective_trace.insert(res.objective_trace.end(), pass.objective_trace.begin(),
                                   pass.objective_trace.end());
        res.residual_trace.insert(res.residual_trace.end(), pass.residual_trace.begin(), pass.residual_trace.end());
        res.residual_trace_v.insert(res.residual_trace_v.end(), pass.residual_trace_v.begin(),
                                    pass.residual_trace_v.end());
        res.inner_iterations_used.push_back(pass.inner_iterations_used.front());
        res.outer_iterations_used = i + 1;

        const double outer_change = rel_change_sq(pass.image.data, x.data, cfg.delta);
        x = std::move(pass.image);
        if (outer_change < cfg.epsilon) break;
    }
    res.image = std::move(x);
    res.wall_time_ms = clock.ms();
    return res;
}

// Standard TV as the grid-graph special case; the graph is fixed, so this is
// exactly one gtv_solve call.
inline ReconResult cstv_solve(const ProjectionMatrix& pm, const Vec& b, const SolverConfig& cfg, const Image& x0) {
    return gtv_solve(pm, b, grid_graph(pm.n), cfg, x0);
}

// Plain compressed sensing: Eq-style objective with gamma = 0 by
// forward-backward proximal gradient.
inline ReconResult cs_solve(const ProjectionMatrix& pm, const Vec& b, const SolverConfig& cfg, const Image& x0) {
    const CsrMatrix& A = pm.A;
    if (b.size() != A.rows) throw std::invalid_argument("cs_solve: sinogram size mismatch");
    if (x0.n != pm.n) throw std::invalid_argument("cs_solve: prior size mismatch");

    const detail::Stopwatch clock;
    const int n = pm.n;
    const int levels = detail::resolve_levels(cfg, n);
    double tau1 = cfg.tau1;
    if (tau1 <= 0.0) {
        const LipschitzEstimate lip =
            estimate_beta(A, cfg.power_iterations, cfg.power_tol, cfg.lipschitz_literal);
        if (!(lip.beta > 0.0)) throw numerical_error("cs_solve: zero operator");
        tau1 = 1.0 / lip.beta;
    }

    ReconResult res;
    Vec x = x0.data;
    for (int j = 0; j < cfg.inner_iters; ++j) {
        Vec step = grad_f(A, x, b);
        scale(step, -tau1);
        axpy(1.0, x, step);
        Vec coeff = analyze_vec(step, n, levels);
        prox_l1_inplace(coeff, tau1 * cfg.lambda);
        Vec x_next = synthesize_vec(coeff, n, levels);
        if (!all_finite(x_next)) throw numerical_error("cs_solve: non-finite iterate");

        const double resid = rel_change_sq(x_next, x, cfg.delta);
        x.swap(x_next);
        res.residual_trace.push_back(resid);
        if (cfg.log_objective) {
            Vec r = A.multiply(x);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
            res.objective_trace.push_back(norm2_sq(r) + cfg.lambda * norm1(analyze_vec(x, n, levels)));
        }
        if (cfg.iterate_observer) cfg.iterate_observer(j, x);
        res.inner_iterations_used.assign(1, j + 1);
    }
    res.image = Image(n, std::move(x));
    res.outer_iterations_used = 1;
    res.wall_time_ms = clock.ms();
    return res;
}

enum class ArtMode { kCyclic, kRandomized };

// Kaczmarz sweeps with relaxation eta; one "iteration" is a full sweep of
// p*q row updates.
inline ReconResult art_solve(const ProjectionMatrix& pm, const Vec& b, const SolverConfig& cfg, const Image& x0,
                             ArtMode mode = ArtMode::kCyclic) {
    const CsrMatrix& A = pm.A;
    if (b.size() != A.rows) throw std::invalid_argument("art_solve: sinogram size mismatch");
    if (x0.n != pm.n) throw std::invalid_argument("art_solve: prior size mismatch");
    if (!(cfg.eta > 0.0 && cfg.eta < 2.0)) throw std::invalid_argument("art_solve: eta must be in (0,2)");

    const detail::Stopwatch clock;
    Vec row_sq(A.rows);
    for (std::uint32_t r = 0; r < A.rows; ++r) row_sq[r] = A.row_norm_sq(r);

    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::uint32_t> pick(0, A.rows - 1);

    ReconResult res;
    Vec x = x0.data;
    Vec x_prev;
    for (int sweep = 0; sweep < cfg.inner_iters; ++sweep) {
        x_prev = x;
        for (std::uint32_t s = 0; s < A.rows; ++s) {
            const std::uint32_t r = (mode == ArtMode::kCyclic) ? s : pick(rng);
            if (row_sq[r] == 0.0) continue;  // ray missed the grid entirely
            const double upd = cfg.eta * (b[r] - A.row_dot(r, x)) / row_sq[r];
            A.row_axpy(r, upd, x);
        }
        if (!all_finite(x)) throw numerical_error("art_solve: non-finite iterate");
        res.residual_trace.push_back(rel_change_sq(x, x_prev, cfg.delta));
        if (cfg.log_objective) {
            Vec r = A.multiply(x);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
            res.objective_trace.push_back(norm2_sq(r));
        }
        res.inner_iterations_used.assign(1, sweep + 1);
    }
    res.image = Image(pm.n, std::move(x));
    res.outer_iterations_used = 1;
    res.wall_time_ms = clock.ms();
    return res;
}

enum class SirtMode { kCimmino, kSart };

// Simultaneous update x <- x + eta * C A^T R (b - A x) with the standard
// diagonal scalings: Cimmino uses R = diag(1/||a_r||^2)/m and C = I, SART
// uses R = diag(1/rowsum) and C = diag(1/colsum). Zero rows or columns get a
// zero scaling and are left untouched.
inline ReconResult sirt_solve(const ProjectionMatrix& pm, const Vec& b, const SolverConfig& cfg, const Image& x0,
                              SirtMode mode = SirtMode::kCimmino) {
    const CsrMatrix& A = pm.A;
    if (b.size() != A.rows) throw std::invalid_argument("sirt_solve: sinogram size mismatch");
    if (x0.n != pm.n) throw std::invalid_argument("sirt_solve: prior size mismatch");
    if (!(cfg.eta > 0.0 && cfg.eta < 2.0)) throw std::invalid_argument("sirt_solve: eta must be in (0,2)");

    const detail::Stopwatch clock;
    Vec row_scale(A.rows, 0.0), col_scale(A.cols, 1.0);
    if (mode == SirtMode::kCimmino) {
        for (std::uint32_t r = 0; r < A.rows; ++r) {
            const double nsq = A.row_norm_sq(r);
            row_scale[r] = nsq > 0.0 ? 1.0 / (nsq * A.rows) : 0.0;
        }
    } else {
        Vec col_sum(A.cols, 0.0);
        for (std::uint32_t r = 0; r < A.rows; ++r) {
            double rs = 0.0;
            for (std::uint64_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) {
                rs += A.values[k];
                col_sum[A.col_idx[k]] += A.values[k];
            }
            row_scale[r] = rs > 0.0 ? 1.0 / rs : 0.0;
        }
        for (std::uint32_t c = 0; c < A.cols; ++c) col_scale[c] = col_sum[c] > 0.0 ? 1.0 / col_sum[c] : 0.0;
    }

    ReconResult res;
    Vec x = x0.data;
    Vec resid, back;
    for (int it = 0; it < cfg.inner_iters; ++it) {
        A.multiply(x, resid);
        for (std::size_t i = 0; i < resid.size(); ++i) resid[i] = (b[i] - resid[i]) * row_scale[i];
        A.multiply_transpose(resid, back);
        double change_num = 0.0, change_den = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double upd = cfg.eta * col_scale[i] * back[i];
            change_num += upd * upd;
            change_den += x[i] * x[i];
            x[i] += upd;
        }
        if (!all_finite(x)) throw numerical_error("sirt_solve: non-finite iterate");
        res.residual_trace.push_back(change_num / (change_den + cfg.delta));
        if (cfg.log_objective) {
            Vec r = A.multiply(x);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
            res.objective_trace.push_back(norm2_sq(r));
        }
        res.inner_iterations_used.assign(1, it + 1);
    }
    res.image = Image(pm.n, std::move(x));
    res.outer_iterations_used = 1;
    res.wall_time_ms = clock.ms();
    return res;
}

}  // namespace agtv
