#include "qbcast/nutsearch.hpp"

#include "qbcast/fidelity.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace qbcast {

namespace {

using EigenRowMajor =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

// splitmix64: tiny, portable, bit-stable across standard libraries
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

// Precomputed linear map from input entries to one clone marginal:
//   rho_A[a][a'] = sum_{i,i'} rho_s[i][i'] p[i][i'][a][a']
// with p[i][i'] = sum_k c_k Tr_rest(col_{i,k} col_{i',k}^dag). Makes the
// search objective independent of the joint-state simulation cost.
struct CloneExtractor {
    cplx p[2][2][2][2];
};

std::vector<CloneExtractor> build_extractors(const BroadcastChannel& ch) {
    const std::size_t n = ch.total_dim();
    const std::size_t blk = ch.block_dim();
    std::vector<CloneExtractor> ex(ch.M, CloneExtractor{});
    for (std::size_t k = 0; k < ch.d; ++k) {
        const double c = ch.ancilla_spectrum[k];
        if (c == 0.0) continue;
        for (std::size_t m = 0; m < ch.M; ++m) {
            const std::size_t bit = ch.M - 1 - m;
            const std::size_t stride = blk << bit;
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t i2 = 0; i2 < 2; ++i2) {
                    auto& acc = ex[m].p[i][i2];
                    for (std::size_t o = 0; o < n; ++o) {
                        if ((o / blk >> bit) & 1u) continue;
                        for (std::size_t a = 0; a < 2; ++a)
                            for (std::size_t a2 = 0; a2 < 2; ++a2)
                                acc[a][a2] += c * ch.U(o + a * stride, i * ch.d + k) *
                                              std::conj(ch.U(o + a2 * stride, i2 * ch.d + k));
                    }
                }
        }
    }
    return ex;
}

struct Qubit2 {
    cplx m00, m01, m11;  // Hermitian 2x2, lower triangle implied
};

Qubit2 state_entries(const QubitParams& p) {
    const double c2 = std::cos(2.0 * p.theta), s2 = std::sin(2.0 * p.theta);
    const double bloch = 2.0 * p.lambda - 1.0;
    Qubit2 q;
    q.m00 = 0.5 * (1.0 + bloch * c2);
    q.m11 = 0.5 * (1.0 - bloch * c2);
    q.m01 = 0.5 * bloch * s2 * std::polar(1.0, -p.omega);
    return q;
}

Qubit2 extract_marginal(const CloneExtractor& e, const Qubit2& s) {
    Qubit2 out;
    const cplx m10 = std::conj(s.m01);
    out.m00 = s.m00 * e.p[0][0][0][0] + s.m01 * e.p[0][1][0][0] +
              m10 * e.p[1][0][0][0] + s.m11 * e.p[1][1][0][0];
    out.m01 = s.m00 * e.p[0][0][0][1] + s.m01 * e.p[0][1][0][1] +
              m10 * e.p[1][0][0][1] + s.m11 * e.p[1][1][0][1];
    out.m11 = s.m00 * e.p[0][0][1][1] + s.m01 * e.p[0][1][1][1] +
              m10 * e.p[1][0][1][1] + s.m11 * e.p[1][1][1][1];
    return out;
}

// tr(r1 r2) + 2 sqrt(det r1 det r2), the qubit Uhlmann fidelity; determinants
// at the rounding floor belong to pure states and are clamped before the
// sqrt can amplify their noise
double fid2(const Qubit2& a, const Qubit2& b) {
    const double tr = a.m00.real() * b.m00.real() + a.m11.real() * b.m11.real() +
                      2.0 * (a.m01 * std::conj(b.m01)).real();
    double da = a.m00.real() * a.m11.real() - std::norm(a.m01);
    double db = b.m00.real() * b.m11.real() - std::norm(b.m01);
    if (da < 1e-14) da = 0.0;
    if (db < 1e-14) db = 0.0;
    return tr + 2.0 * std::sqrt(da * db);
}

std::vector<double> softmax_spectrum(std::span<const double> logits) {
    const std::size_t d = logits.size() + 1;
    double top = 0.0;  // the fixed trailing logit
    for (double v : logits) top = std::max(top, v);
    std::vector<double> c(d);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < d; ++i) sum += c[i] = std::exp(logits[i] - top);
    sum += c[d - 1] = std::exp(-top);
    for (double& v : c) v /= sum;
    return c;
}

}  // namespace

BroadcastChannel decode(const ChannelParameterization& cp, std::size_t M) {
    const std::size_t n = cp.dim_total;
    if (n == 0 || n % 2 != 0)
        throw std::invalid_argument("decode: dim_total must be a positive even number");
    if (cp.hermitian_params.size() != n * n)
        throw std::invalid_argument("decode: hermitian_params must have (2d)^2 entries");
    if (cp.simplex_params.size() != n / 2 - 1)
        throw std::invalid_argument("decode: simplex_params must have d-1 entries");

    ComplexMatrix h(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        h(i, i) = cp.hermitian_params[i * n + i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const cplx v{cp.hermitian_params[i * n + j], cp.hermitian_params[j * n + i]};
            h(i, j) = v;
            h(j, i) = std::conj(v);
        }
    }
    const EighResult e = eigh(h);
    ComplexMatrix u(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx phase = std::polar(1.0, e.eigenvalues[k]);
        for (std::size_t i = 0; i < n; ++i) {
            const cplx vik = e.eigenvectors(i, k) * phase;
            for (std::size_t j = 0; j < n; ++j)
                u(i, j) += vik * std::conj(e.eigenvectors(j, k));
        }
    }
    return BroadcastChannel(n / 2, M, std::move(u), softmax_spectrum(cp.simplex_params));
}

ChannelParameterization encode(const BroadcastChannel& ch) {
    const std::size_t n = ch.total_dim();
    Eigen::Map<const EigenRowMajor> u(ch.U.data().data(), n, n);
    // Schur of a unitary is diagonal up to rounding, with a unitary Q
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(u);
    if (schur.info() != Eigen::Success)
        throw std::runtime_error("encode: Schur decomposition failed");

    ChannelParameterization cp;
    cp.dim_total = n;
    cp.hermitian_params.assign(n * n, 0.0);
    const auto& q = schur.matrixU();
    const auto& t = schur.matrixT();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double angle = std::arg(t(k, k));
        h += angle * q.col(k) * q.col(k).adjoint();
    }
    for (std::size_t i = 0; i < n; ++i) {
        cp.hermitian_params[i * n + i] = h(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const cplx v = 0.5 * (h(i, j) + std::conj(h(j, i)));
            cp.hermitian_params[i * n + j] = v.real();
            cp.hermitian_params[j * n + i] = v.imag();
        }
    }

    const std::size_t d = ch.d;
    cp.simplex_params.assign(d - 1, 0.0);
    const double floor = 1e-18;  // softmax cannot reach the simplex boundary
    const double last = std::log(std::max(ch.ancilla_spectrum[d - 1], floor));
    for (std::size_t i = 0; i + 1 < d; ++i)
        cp.simplex_params[i] = std::log(std::max(ch.ancilla_spectrum[i], floor)) - last;
    return cp;
}

StateSample make_state_sample(std::size_t count, std::uint64_t seed) {
    const double pi = std::numbers::pi;
    StateSample s;
    s.seed = seed;
    for (double lambda : {0.0, 0.5, 1.0})
        for (double theta : {0.0, pi / 4.0, pi / 2.0})
            for (double omega : {0.0, pi / 2.0})
                s.states.push_back({theta, omega, lambda});
    if (count < s.states.size())
        throw std::invalid_argument("make_state_sample: count below the fixed probe set");
    Rng rng(mix_seed(seed, 0x5a5a));
    while (s.states.size() < count)
        s.states.push_back({rng.uniform(0.0, pi / 2.0), rng.uniform(0.0, 2.0 * pi),
                            rng.uniform()});
    return s;
}

StateSample make_fixed_omega_sample(double omega, std::size_t count, std::uint64_t seed) {
    const double pi = std::numbers::pi;
    StateSample s;
    s.seed = seed;
    for (double lambda : {0.0, 0.5, 1.0})
        for (double theta : {0.0, pi / 4.0, pi / 2.0})
            s.states.push_back({theta, omega, lambda});
    if (count < s.states.size())
        throw std::invalid_argument("make_fixed_omega_sample: count below the fixed probe set");
    Rng rng(mix_seed(seed, 0xa5a5));
    while (s.states.size() < count)
        s.states.push_back({rng.uniform(0.0, pi / 2.0), omega, rng.uniform()});
    return s;
}

ConstancyScore constancy_objective(const BroadcastChannel& ch, const StateSample& sample) {
    if (sample.states.empty())
        throw std::invalid_argument("constancy_objective: empty sample");
    const std::vector<CloneExtractor> extractors = build_extractors(ch);
    ConstancyScore score;
    score.mean = 1.0;
    for (const auto& e : extractors) {
        double lo = 1.0, hi = 0.0, sum = 0.0;
        for (const QubitParams& p : sample.states) {
            const Qubit2 in = state_entries(p);
            const double f = fid2(extract_marginal(e, in), in);
            lo = std::min(lo, f);
            hi = std::max(hi, f);
            sum += f;
        }
        score.spread = std::max(score.spread, hi - lo);
        score.mean = std::min(score.mean, sum / static_cast<double>(sample.states.size()));
    }
    return score;
}

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x0, double step,
                             std::uint64_t max_evals) {
    const std::size_t n = x0.size();
    NelderMeadResult res;
    res.x.assign(x0.begin(), x0.end());
    res.value = std::numeric_limits<double>::infinity();
    auto eval = [&](const std::vector<double>& x) {
        const double v = f(x);
        ++res.evaluations;
        if (v < res.value) {
            res.value = v;
            res.x = x;
        }
        return v;
    };

    std::vector<std::vector<double>> verts(n + 1, std::vector<double>(x0.begin(), x0.end()));
    std::vector<double> vals(n + 1, std::numeric_limits<double>::infinity());
    for (std::size_t i = 1; i <= n; ++i) verts[i][i - 1] += step;
    for (std::size_t i = 0; i <= n && res.evaluations < max_evals; ++i)
        vals[i] = eval(verts[i]);

    std::vector<std::size_t> order(n + 1);
    auto sort_order = [&] {
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    };

    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    while (res.evaluations + 2 <= max_evals) {
        sort_order();
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];
        if (vals[worst] - vals[best] <= 1e-16 * (1.0 + std::abs(vals[best]))) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += verts[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        for (std::size_t j = 0; j < n; ++j) xr[j] = 2.0 * centroid[j] - verts[worst][j];
        const double fr = eval(xr);
        if (fr < vals[best]) {
            for (std::size_t j = 0; j < n; ++j) xe[j] = 3.0 * centroid[j] - 2.0 * verts[worst][j];
            const double fe = eval(xe);
            if (fe < fr) {
                verts[worst] = xe;
                vals[worst] = fe;
            } else {
                verts[worst] = xr;
                vals[worst] = fr;
            }
        } else if (fr < vals[second]) {
            verts[worst] = xr;
            vals[worst] = fr;
        } else {
            const bool outside = fr < vals[worst];
            const std::vector<double>& toward = outside ? xr : verts[worst];
            for (std::size_t j = 0; j < n; ++j) xc[j] = 0.5 * (centroid[j] + toward[j]);
            const double fc = eval(xc);
            if (fc < (outside ? fr : vals[worst])) {
                verts[worst] = xc;
                vals[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n && res.evaluations < max_evals; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < n; ++j)
                        verts[i][j] = 0.5 * (verts[best][j] + verts[i][j]);
                    vals[i] = eval(verts[i]);
                }
            }
        }
    }
    return res;
}

TradeoffPoint minimize_spread_at_level(std::size_t M, std::size_t d, double target_level,
                                       const StateSample& sample,
                                       const SearchOptions& opts) {
    if (!(target_level > 0.0 && target_level <= 1.0))
        throw std::invalid_argument("minimize_spread_at_level: target level outside (0,1]");
    if (opts.budget < 1)
        throw std::invalid_argument("minimize_spread_at_level: budget must be >= 1");

    const std::size_t n = 2 * d;
    const std::size_t nparams = n * n + d - 1;
    auto unpack = [&](std::span<const double> x) {
        ChannelParameterization cp;
        cp.dim_total = n;
        cp.hermitian_params.assign(x.begin(), x.begin() + n * n);
        cp.simplex_params.assign(x.begin() + n * n, x.end());
        return cp;
    };
    auto objective = [&](std::span<const double> x) {
        const ConstancyScore s = constancy_objective(decode(unpack(x), M), sample);
        const double gap = s.mean - target_level;
        return s.spread + opts.penalty_weight * gap * gap;
    };

    std::vector<double> base(nparams, 0.0);
    if (opts.initial) {
        if (opts.initial->dim_total != n ||
            opts.initial->parameter_count() != nparams)
            throw std::invalid_argument("minimize_spread_at_level: initial point shape mismatch");
        std::copy(opts.initial->hermitian_params.begin(), opts.initial->hermitian_params.end(),
                  base.begin());
        std::copy(opts.initial->simplex_params.begin(), opts.initial->simplex_params.end(),
                  base.begin() + n * n);
    }

    const std::size_t restarts = std::max<std::size_t>(opts.restarts, 1);
    std::vector<NelderMeadResult> results(restarts);
    auto run_restart = [&](std::size_t r) {
        std::vector<double> x0 = base;
        if (r > 0) {
            Rng rng(mix_seed(opts.seed, r));
            for (double& v : x0) v = rng.uniform(-2.0, 2.0);
        }
        results[r] = nelder_mead(objective, x0, 0.25, opts.budget);
    };

    std::size_t threads = opts.threads == 0
                              ? std::max(1u, std::thread::hardware_concurrency())
                              : opts.threads;
    threads = std::min(threads, restarts);
    if (threads <= 1) {
        for (std::size_t r = 0; r < restarts; ++r) run_restart(r);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t r = next.fetch_add(1); r < restarts; r = next.fetch_add(1))
                    run_restart(r);
            });
        for (auto& th : pool) th.join();
    }

    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r)
        if (results[r].value < results[best].value) best = r;

    TradeoffPoint pt;
    pt.target_level = target_level;
    pt.params = unpack(results[best].x);
    const ConstancyScore s = constancy_objective(decode(pt.params, M), sample);
    pt.achieved_spread = s.spread;
    pt.achieved_mean = s.mean;
    for (const auto& r : results) pt.evaluations_used += r.evaluations;
    return pt;
}

TradeoffCurve tradeoff_sweep(std::size_t M, std::size_t d,
                             std::span<const double> levels, const StateSample& sample,
                             const SearchOptions& opts) {
    TradeoffCurve curve;
    for (double level : levels)
        curve.points.push_back(minimize_spread_at_level(M, d, level, sample, opts));
    std::stable_sort(curve.points.begin(), curve.points.end(),
                     [](const TradeoffPoint& a, const TradeoffPoint& b) {
                         return a.target_level < b.target_level;
                     });
    return curve;
}

}  // namespace qbcast
