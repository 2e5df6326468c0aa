#include "pat/cq.hpp"
#include "pat/bessel.hpp"
#include "pat/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <thread>

namespace pat {

namespace {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// 6-point Gauss-Legendre on [0,1].
constexpr double kG6X[6] = {0.033765242898423986094, 0.169395306766867743169,
                            0.380690406958401545685, 0.619309593041598454315,
                            0.830604693233132256831, 0.966234757101576013906};
constexpr double kG6W[6] = {0.085662246189585172520, 0.180380786524069303784,
                            0.233956967286345523695, 0.233956967286345523695,
                            0.180380786524069303784, 0.085662246189585172520};

// 8-point Gauss rule for the weight -ln(x) on (0,1); exact through degree 15.
constexpr double kLogX[8] = {0.01332024416089246501225, 0.07975042901389493840983,
                             0.1978710293261880537945, 0.3541539943519094196715,
                             0.5294585752349172777061, 0.7018145299390999638372,
                             0.8493793204411066760483, 0.9533264500563597887674};
constexpr double kLogW[8] = {0.1644166047280028868315, 0.2375256100233060205013,
                             0.2268419844319191263688, 0.1757540790060702449881,
                             0.112924030246759051855, 0.05787221071778207239853,
                             0.02097907374213297804346, 0.003686407104027619013352};

// Once the exponential damping of the kernel exceeds e^-40 the contribution
// is below any tolerance used here.
constexpr double kDecayCutoff = 40.0;

// Ascending-series pieces used by the near-field log split:
//   K0(z) = -(ln(z/2)+gamma) I0(z) + P0(z)
//   K1(z) = 1/z + ln(z/2) I1(z) + E1(z)
// Stable for |z| <= ~8.
struct SeriesParts {
    cplx i0, i1, p0, e1;
};

SeriesParts series_parts(cplx z) {
    const cplx z2q = 0.25 * z * z;
    SeriesParts out;
    out.i0 = cplx(1.0, 0.0);
    out.p0 = cplx(0.0, 0.0);
    cplx i1s(1.0, 0.0);
    cplx e1s(0.0, 0.0);

    cplx term0(1.0, 0.0), term1(1.0, 0.0);
    double hk = 0.0;
    double psi_a = -kEulerGamma, psi_b = 1.0 - kEulerGamma;
    e1s += (psi_a + psi_b) * term1;
    for (int k = 1; k <= 34; ++k) {
        term0 *= z2q / static_cast<double>(k * k);
        term1 *= z2q / static_cast<double>(k * (k + 1));
        hk += 1.0 / k;
        out.i0 += term0;
        out.p0 += term0 * hk;
        i1s += term1;
        psi_a = -kEulerGamma + hk;
        psi_b = psi_a + 1.0 / (k + 1);
        e1s += (psi_a + psi_b) * term1;
        if (std::abs(term0) < 1e-18 * std::abs(out.i0) && k > 3) break;
    }
    out.i1 = 0.5 * z * i1s;
    out.e1 = -0.25 * z * e1s;
    return out;
}

struct PairBlock {
    cplx V[2][2] = {{{0, 0}, {0, 0}}, {{0, 0}, {0, 0}}};
    cplx K[2][2] = {{{0, 0}, {0, 0}}, {{0, 0}, {0, 0}}};
};

// Geometry of one boundary segment in angle space.
struct Seg {
    double a0;  // start angle
    double da;  // angular span (positive)
};

double wrap_angle(double a) {
    while (a < 0.0) a += 2.0 * kPi;
    while (a >= 2.0 * kPi) a -= 2.0 * kPi;
    return a;
}

// Chord distance between circle points given their angular difference.
inline double chord(double R, double dtheta) {
    return 2.0 * R * std::abs(std::sin(0.5 * dtheta));
}

class PairAssembler {
public:
    PairAssembler(const BoundaryGrid& g, cplx s) : g_(g), s_(s), R_(g.radius) {
        abs_s_ = std::abs(s);
        re_s_ = s.real();
        inv2pi_ = 1.0 / (2.0 * kPi);
        inv4piR_ = 1.0 / (4.0 * kPi * R_);
    }

    // Block of the pair (segment e, segment f): outer integral over e in u,
    // inner over f in v, both hat bases, exact arc Jacobians.
    PairBlock assemble(int e, int f) const {
        const int n = g_.size();
        const Seg se = seg(e), sf = seg(f);
        PairBlock out;

        // Relation of f to e decides the inner treatment.
        enum class Rel { Self, SharedAtV0, SharedAtV1, Regular };
        Rel rel = Rel::Regular;
        if (f == e) rel = Rel::Self;
        else if (f == (e + 1) % n) rel = Rel::SharedAtV0;
        else if (f == (e - 1 + n) % n) rel = Rel::SharedAtV1;

        if (rel == Rel::Regular) {
            // Whole-pair decay skip: the chord minimum sits at a corner.
            double rmin = 1e300;
            for (double uu : {0.0, 1.0})
                for (double vv : {0.0, 1.0})
                    rmin = std::min(rmin, chord(R_, se.a0 + uu * se.da - sf.a0 - vv * sf.da));
            if (re_s_ * rmin > kDecayCutoff) return out;
        }

        // Outer subdivision resolves the kernel oscillation in u.
        const int p_out =
            std::clamp(static_cast<int>(std::ceil(abs_s_ * R_ * se.da / (2.0 * kPi))), 1, 8);
        const double jac_out = R_ * se.da;

        for (int p = 0; p < p_out; ++p) {
            for (int iq = 0; iq < 6; ++iq) {
                const double u = (p + kG6X[iq]) / p_out;
                const double w_out = kG6W[iq] / p_out * jac_out;
                const double theta_x = se.a0 + u * se.da;
                const double psi_out[2] = {1.0 - u, u};

                cplx innerV[2] = {{0, 0}, {0, 0}};
                cplx innerK[2] = {{0, 0}, {0, 0}};
                switch (rel) {
                    case Rel::Self:
                        inner_self(sf, u, innerV, innerK);
                        break;
                    case Rel::SharedAtV0:
                        inner_adjacent(sf, theta_x, 0.0, innerV, innerK);
                        break;
                    case Rel::SharedAtV1:
                        inner_adjacent(sf, theta_x, 1.0, innerV, innerK);
                        break;
                    case Rel::Regular:
                        inner_regular(sf, theta_x, innerV, innerK);
                        break;
                }
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        out.V[a][b] += w_out * psi_out[a] * innerV[b];
                        out.K[a][b] += w_out * psi_out[a] * innerK[b];
                    }
            }
        }
        return out;
    }

private:
    Seg seg(int k) const {
        const int n = g_.size();
        const double a0 = g_.angles[k];
        double a1 = g_.angles[(k + 1) % n];
        if (a1 <= a0) a1 += 2.0 * kPi;
        return {a0, a1 - a0};
    }

    void kernel_direct(double r, cplx& kv, cplx& kk) const {
        const BesselK01 b = bessel_k01(s_ * r);
        if (b.underflow) {
            kv = kk = cplx(0.0, 0.0);
            return;
        }
        kv = b.k0 * inv2pi_;
        kk = -s_ * b.k1 * (r * inv4piR_);
    }

    // Plain panelized Gauss along v, with per-panel decay skip. The chord is
    // unimodal along the segment, so its minimum over a panel is attained at
    // a panel endpoint.
    void inner_regular(const Seg& sf, double theta_x, cplx innerV[2], cplx innerK[2]) const {
        const double jac = R_ * sf.da;
        const int n_p = std::clamp(static_cast<int>(std::ceil(abs_s_ * R_ * sf.da / kPi)), 1, 64);
        for (int p = 0; p < n_p; ++p) {
            const double va = static_cast<double>(p) / n_p, vb = (p + 1.0) / n_p;
            const double ra = chord(R_, theta_x - sf.a0 - va * sf.da);
            const double rb = chord(R_, theta_x - sf.a0 - vb * sf.da);
            if (re_s_ * std::min(ra, rb) > kDecayCutoff) continue;
            for (int iq = 0; iq < 6; ++iq) {
                const double v = va + (vb - va) * kG6X[iq];
                const double w = (vb - va) * kG6W[iq] * jac;
                const double r = chord(R_, theta_x - sf.a0 - v * sf.da);
                cplx kv, kk;
                kernel_direct(r, kv, kk);
                innerV[0] += w * (1.0 - v) * kv;
                innerV[1] += w * v * kv;
                innerK[0] += w * (1.0 - v) * kk;
                innerK[1] += w * v * kk;
            }
        }
    }

    // Inner integral when x sits on the same segment: split at v0 = u and
    // handle each side with the log-split near region plus panelized far
    // region in the distance parameter t = |v - v0|.
    void inner_self(const Seg& sf, double v0, cplx innerV[2], cplx innerK[2]) const {
        for (int side = 0; side < 2; ++side) {
            const double sign = (side == 0) ? -1.0 : 1.0;
            const double d = (side == 0) ? v0 : 1.0 - v0;
            if (d <= 0.0) continue;
            integrate_from_singularity(sf, v0, sign, d, innerV, innerK);
        }
    }

    // Near region [0, t*]: kernels split as (-ln t) * g1(t) + g2(t) with the
    // series pieces, applying the log rule to g1 and plain Gauss to the rest.
    // Far region: geometric panels with direct kernel evaluation.
    void integrate_from_singularity(const Seg& sf, double v0, double sign, double d,
                                    cplx innerV[2], cplx innerK[2]) const {
        const double jac = R_ * sf.da;
        const double arc_per_t = R_ * sf.da;
        const double t_star = std::min(d, 6.0 / std::max(abs_s_ * arc_per_t, 1e-30));

        // basis at v = v0 + sign * t
        auto basis = [&](double t, double& b0, double& b1) {
            const double v = v0 + sign * t;
            b0 = 1.0 - v;
            b1 = v;
        };

        const double a = t_star;
        const double log_a = std::log(a);
        // log-weighted part
        for (int iq = 0; iq < 8; ++iq) {
            const double t = a * kLogX[iq];
            const double w = a * kLogW[iq] * jac;
            cplx g1v, g1k;
            log_factors(t, sf.da, g1v, g1k);
            double b0, b1;
            basis(t, b0, b1);
            innerV[0] += w * b0 * g1v;
            innerV[1] += w * b1 * g1v;
            innerK[0] += w * b0 * g1k;
            innerK[1] += w * b1 * g1k;
        }
        // smooth part, including the -ln(a) correction of the scaled log rule
        for (int iq = 0; iq < 6; ++iq) {
            const double t = a * kG6X[iq];
            const double w = a * kG6W[iq] * jac;
            cplx g1v, g1k, g2v, g2k;
            log_factors(t, sf.da, g1v, g1k);
            smooth_parts(t, sf.da, g2v, g2k);
            double b0, b1;
            basis(t, b0, b1);
            const cplx fv = (-log_a) * g1v + g2v;
            const cplx fk = (-log_a) * g1k + g2k;
            innerV[0] += w * b0 * fv;
            innerV[1] += w * b1 * fv;
            innerK[0] += w * b0 * fk;
            innerK[1] += w * b1 * fk;
        }

        // far panels on [t*, d]
        double cur = t_star;
        const double osc = kPi / std::max(abs_s_ * arc_per_t, 1e-30);
        while (cur < d) {
            const double next = std::min(d, cur + std::max(std::min(cur, osc), 1e-14));
            const double r_begin = chord(R_, cur * sf.da);
            if (re_s_ * r_begin > kDecayCutoff) break;
            for (int iq = 0; iq < 6; ++iq) {
                const double t = cur + (next - cur) * kG6X[iq];
                const double w = (next - cur) * kG6W[iq] * jac;
                const double r = chord(R_, t * sf.da);
                cplx kv, kk;
                kernel_direct(r, kv, kk);
                double b0, b1;
                basis(t, b0, b1);
                innerV[0] += w * b0 * kv;
                innerV[1] += w * b1 * kv;
                innerK[0] += w * b0 * kk;
                innerK[1] += w * b1 * kk;
            }
            cur = next;
        }
    }

    // Coefficient of (-ln t) in the split kernels at distance parameter t
    // along the same segment (r = 2R sin(t*da/2), q = r/t smooth).
    void log_factors(double t, double da, cplx& g1v, cplx& g1k) const {
        const double r = chord(R_, t * da);
        const cplx z = s_ * r;
        const SeriesParts sp = series_parts(z);
        g1v = sp.i0 * inv2pi_;
        g1k = s_ * r * sp.i1 * inv4piR_;
    }

    void smooth_parts(double t, double da, cplx& g2v, cplx& g2k) const {
        const double r = chord(R_, t * da);
        const double q = r / t;  // -> R*da as t -> 0
        const cplx z = s_ * r;
        const SeriesParts sp = series_parts(z);
        const cplx log_sq2 = std::log(0.5 * s_ * q);
        g2v = (-(log_sq2 + kEulerGamma) * sp.i0 + sp.p0) * inv2pi_;
        g2k = -inv4piR_ - (s_ * r * inv4piR_) * (log_sq2 * sp.i1 + sp.e1);
    }

    // Adjacent segments: singularity at the shared vertex (inner parameter
    // w0 = 0 or 1). The integrand is smooth but peaked at scale d0 = |x - V|;
    // graded panels from the vertex with the oscillation cap resolve it.
    void inner_adjacent(const Seg& sf, double theta_x, double w0, cplx innerV[2],
                        cplx innerK[2]) const {
        const double jac = R_ * sf.da;
        const double sign = (w0 == 0.0) ? 1.0 : -1.0;
        const double vertex_angle = (w0 == 0.0) ? sf.a0 : sf.a0 + sf.da;
        const double d0 = chord(R_, theta_x - vertex_angle);
        const double kappa0 = std::clamp(d0 / (R_ * sf.da), 1e-4, 0.5);
        const double osc = kPi / std::max(abs_s_ * R_ * sf.da, 1e-30);

        double cur = 0.0;
        double step = std::min(kappa0, osc);
        while (cur < 1.0) {
            const double next = std::min(1.0, cur + step);
            const double ra = chord(R_, theta_x - sf.a0 - (w0 + sign * cur) * sf.da);
            if (re_s_ * ra > kDecayCutoff) break;
            for (int iq = 0; iq < 6; ++iq) {
                const double w_par = cur + (next - cur) * kG6X[iq];
                const double wq = (next - cur) * kG6W[iq] * jac;
                const double v = w0 + sign * w_par;
                const double r = chord(R_, theta_x - sf.a0 - v * sf.da);
                cplx kv, kk;
                kernel_direct(r, kv, kk);
                innerV[0] += wq * (1.0 - v) * kv;
                innerV[1] += wq * v * kv;
                innerK[0] += wq * (1.0 - v) * kk;
                innerK[1] += wq * v * kk;
            }
            cur = next;
            step = std::min(2.0 * step, osc);
        }
    }

    const BoundaryGrid& g_;
    cplx s_;
    double R_, abs_s_, re_s_, inv2pi_, inv4piR_;
};

bool is_uniform(const BoundaryGrid& g) {
    const int n = g.size();
    const double da = 2.0 * kPi / n;
    for (int k = 0; k < n; ++k) {
        double d = g.angles[(k + 1) % n] - g.angles[k];
        if (d <= 0.0) d += 2.0 * kPi;
        if (std::abs(d - da) > 1e-12) return false;
    }
    return true;
}

// Node-level circulant rows: row(k) = A[0][k] for the hat basis, combined
// from the segment block-row B(d) = block(segment 0, segment d).
void rows_from_blocks(const std::vector<PairBlock>& B, Eigen::VectorXcd& rowV,
                      Eigen::VectorXcd& rowK) {
    const int n = static_cast<int>(B.size());
    rowV.resize(n);
    rowK.resize(n);
    for (int k = 0; k < n; ++k) {
        const int kp = (k + 1) % n, km = (k - 1 + n) % n;
        rowV[k] = B[k].V[1][1] + B[k].V[0][0] + B[kp].V[1][0] + B[km].V[0][1];
        rowK[k] = B[k].K[1][1] + B[k].K[0][0] + B[kp].K[1][0] + B[km].K[0][1];
    }
}

void parallel_for_index(int count, const std::function<void(int)>& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 2;
    const int n_threads = static_cast<int>(std::min<unsigned>(hw, 16));
    if (n_threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next(0);
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

uint64_t fnv1a(const void* data, size_t len, uint64_t h = 1469598103934665603ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::complex<double> gamma_bdf2(std::complex<double> z) {
    return 1.5 - 2.0 * z + 0.5 * z * z;
}

CQConfig CQConfig::make(int N, double dt) {
    if (N < 1) throw ConfigError("CQConfig: N must be >= 1");
    if (!(dt > 0.0)) throw ConfigError("CQConfig: dt must be positive");
    CQConfig c;
    c.N = N;
    c.L = 2 * N;
    c.machine_eps = std::pow(2.0, -52);
    c.beta = std::pow(c.machine_eps, 1.0 / (2.0 * N));
    c.dt = dt;
    return c;
}

std::complex<double> CQConfig::s(int l) const {
    const double phi = 2.0 * kPi * l / L;
    const cplx z = beta * cplx(std::cos(phi), std::sin(phi));
    return gamma_bdf2(z) / dt;
}

Eigen::MatrixXcd assemble_single_layer_matrix(const BoundaryGrid& boundary, cplx s) {
    const int n = boundary.size();
    PairAssembler pa(boundary, s);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    for (int e = 0; e < n; ++e) {
        for (int f = 0; f < n; ++f) {
            const PairBlock b = pa.assemble(e, f);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) A((e + i) % n, (f + j) % n) += b.V[i][j];
        }
    }
    // Quadrature symmetrization of the symmetric kernel.
    A = 0.5 * (A + A.transpose().eval());
    return A;
}

Eigen::MatrixXcd assemble_double_layer_matrix(const BoundaryGrid& boundary, cplx s) {
    const int n = boundary.size();
    PairAssembler pa(boundary, s);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    for (int e = 0; e < n; ++e) {
        for (int f = 0; f < n; ++f) {
            const PairBlock b = pa.assemble(e, f);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) A((e + i) % n, (f + j) % n) += b.K[i][j];
        }
    }
    return A;
}

CQWeightSet compute_cq_weights(const BoundaryGrid& boundary, int N, double dt,
                               bool exploit_symmetry, int n_store) {
    const CQConfig cfg = CQConfig::make(N, dt);
    const int n_b = boundary.size();
    const int L = cfg.L;
    const int half = L / 2;
    const int M = (n_store < 0) ? N : n_store;  // highest stored weight index
    if (M >= L) throw ConfigError("compute_cq_weights: n_store must be below L");

    CQWeightSet ws;
    ws.dt = dt;
    ws.N = M;
    ws.beta = cfg.beta;
    ws.L = L;
    ws.n_b = n_b;
    ws.radius = boundary.radius;

    if (!exploit_symmetry) {
        // Reference path: every frequency assembled independently, complex
        // DFT summed in full so the imaginary residue is measured honestly.
        if (static_cast<double>(L) * (M + 1) * n_b * n_b > 2e9)
            throw ConfigError("compute_cq_weights: full path is for small problems only");
        std::vector<Eigen::MatrixXcd> Av(L), Ak(L);
        parallel_for_index(L, [&](int l) {
            const cplx s = cfg.s(l);
            Av[l] = assemble_single_layer_matrix(boundary, s);
            Ak[l] = assemble_double_layer_matrix(boundary, s);
        });
        ws.Wv.resize(M + 1);
        ws.Wk.resize(M + 1);
        double max_im = 0.0, max_re = 0.0;
        for (int n = 0; n <= M; ++n) {
            Eigen::MatrixXcd wv = Eigen::MatrixXcd::Zero(n_b, n_b);
            Eigen::MatrixXcd wk = Eigen::MatrixXcd::Zero(n_b, n_b);
            const double scale = std::pow(cfg.beta, -n) / L;
            for (int l = 0; l < L; ++l) {
                const double phi = -2.0 * kPi * static_cast<double>(n) *
                                   static_cast<double>(l) / L;
                const cplx zeta(std::cos(phi), std::sin(phi));
                wv += zeta * Av[l];
                wk += zeta * Ak[l];
            }
            wv *= scale;
            wk *= scale;
            max_im = std::max({max_im, wv.imag().cwiseAbs().maxCoeff(),
                               wk.imag().cwiseAbs().maxCoeff()});
            max_re = std::max({max_re, wv.real().cwiseAbs().maxCoeff(),
                               wk.real().cwiseAbs().maxCoeff()});
            ws.Wv[n] = wv.real();
            ws.Wk[n] = wk.real();
        }
        ws.max_imag_residue = max_re > 0.0 ? max_im / max_re : 0.0;
    } else if (is_uniform(boundary)) {
        // Circulant fast path: one segment block-row per frequency.
        Eigen::MatrixXcd rowsV(half + 1, n_b), rowsK(half + 1, n_b);
        parallel_for_index(half + 1, [&](int l) {
            const cplx s = cfg.s(l);
            PairAssembler pa(boundary, s);
            std::vector<PairBlock> B(n_b);
            for (int d = 0; d < n_b; ++d) B[d] = pa.assemble(0, d);
            Eigen::VectorXcd rv, rk;
            rows_from_blocks(B, rv, rk);
            // reflection symmetrization of the single-layer row
            for (int k = 1; k < n_b; ++k) {
                const int mk = n_b - k;
                if (k < mk) {
                    const cplx avg = 0.5 * (rv[k] + rv[mk]);
                    rv[k] = avg;
                    rv[mk] = avg;
                }
            }
            rowsV.row(l) = rv.transpose();
            rowsK.row(l) = rk.transpose();
        });

        // Scaled inverse DFT of the mirrored spectrum, as two real products.
        Eigen::MatrixXd C(M + 1, half + 1), S(M + 1, half + 1);
        std::vector<double> ctab(L), stab(L);
        for (int p = 0; p < L; ++p) {
            ctab[p] = std::cos(2.0 * kPi * p / L);
            stab[p] = std::sin(2.0 * kPi * p / L);
        }
        for (int n = 0; n <= M; ++n) {
            const double bn = std::pow(cfg.beta, -n) / L;
            for (int l = 0; l <= half; ++l) {
                const int p = static_cast<int>((static_cast<long long>(n) * l) % L);
                const double m = (l == 0 || l == half) ? 1.0 : 2.0;
                C(n, l) = bn * m * ctab[p];
                S(n, l) = bn * m * stab[p];
            }
        }
        const Eigen::MatrixXd wvRows = C * rowsV.real() + S * rowsV.imag();
        const Eigen::MatrixXd wkRows = C * rowsK.real() + S * rowsK.imag();

        // Imaginary residue of the mirrored sum comes from the two real
        // frequencies only.
        double max_im = 0.0;
        for (int n = 0; n <= M; ++n) {
            const double bn = std::pow(cfg.beta, -n) / L;
            const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
            max_im = std::max(
                max_im, bn * (rowsV.row(0).imag() + sgn * rowsV.row(half).imag())
                                .cwiseAbs()
                                .maxCoeff());
            max_im = std::max(
                max_im, bn * (rowsK.row(0).imag() + sgn * rowsK.row(half).imag())
                                .cwiseAbs()
                                .maxCoeff());
        }
        const double max_re = std::max(wvRows.cwiseAbs().maxCoeff(), wkRows.cwiseAbs().maxCoeff());
        ws.max_imag_residue = max_re > 0.0 ? max_im / max_re : 0.0;

        ws.Wv.resize(M + 1);
        ws.Wk.resize(M + 1);
        for (int n = 0; n <= M; ++n) {
            ws.Wv[n].resize(n_b, n_b);
            ws.Wk[n].resize(n_b, n_b);
            for (int i = 0; i < n_b; ++i)
                for (int j = 0; j < n_b; ++j) {
                    const int k = (j - i + n_b) % n_b;
                    ws.Wv[n](i, j) = wvRows(n, k);
                    ws.Wk[n](i, j) = wkRows(n, k);
                }
        }
    } else {
        // General grid: dense assembly of the mirrored half-spectrum.
        if (static_cast<double>(half + 1) * n_b * n_b * 16 * 2 > 3e9)
            throw ConfigError("compute_cq_weights: dense path too large for this grid");
        std::vector<Eigen::MatrixXcd> Av(half + 1), Ak(half + 1);
        parallel_for_index(half + 1, [&](int l) {
            const cplx s = cfg.s(l);
            Av[l] = assemble_single_layer_matrix(boundary, s);
            Ak[l] = assemble_double_layer_matrix(boundary, s);
        });
        ws.Wv.assign(M + 1, Eigen::MatrixXd::Zero(n_b, n_b));
        ws.Wk.assign(M + 1, Eigen::MatrixXd::Zero(n_b, n_b));
        double max_im = 0.0;
        for (int n = 0; n <= M; ++n) {
            const double bn = std::pow(cfg.beta, -n) / L;
            Eigen::MatrixXd accV = Eigen::MatrixXd::Zero(n_b, n_b);
            Eigen::MatrixXd accK = Eigen::MatrixXd::Zero(n_b, n_b);
            for (int l = 0; l <= half; ++l) {
                const double phi = -2.0 * kPi * static_cast<double>(n) * l / L;
                const double c = std::cos(phi), si = std::sin(phi);
                const double m = (l == 0 || l == half) ? 1.0 : 2.0;
                accV += m * (c * Av[l].real() - si * Av[l].imag());
                accK += m * (c * Ak[l].real() - si * Ak[l].imag());
            }
            ws.Wv[n] = bn * accV;
            ws.Wk[n] = bn * accK;
            const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
            max_im = std::max(max_im, bn * (Av[0].imag() + sgn * Av[half].imag())
                                          .cwiseAbs()
                                          .maxCoeff());
        }
        double max_re = 0.0;
        for (int n = 0; n <= M; ++n)
            max_re = std::max({max_re, ws.Wv[n].cwiseAbs().maxCoeff(),
                               ws.Wk[n].cwiseAbs().maxCoeff()});
        ws.max_imag_residue = max_re > 0.0 ? max_im / max_re : 0.0;
    }

    for (int n = 0; n <= M; ++n) {
        if (!ws.Wv[n].allFinite() || !ws.Wk[n].allFinite())
            throw NumericError("compute_cq_weights: non-finite weight entries");
    }

    ws.w0_lu.compute(ws.Wv[0]);
    const Eigen::MatrixXd& lu = ws.w0_lu.matrixLU();
    double dmin = 1e300, dmax = 0.0;
    for (int i = 0; i < n_b; ++i) {
        dmin = std::min(dmin, std::abs(lu(i, i)));
        dmax = std::max(dmax, std::abs(lu(i, i)));
    }
    if (!(dmin > 1e-14 * dmax))
        throw NumericError("compute_cq_weights: Wv[0] is numerically singular");
    return ws;
}

Eigen::VectorXd retarded_convolve(const CQWeightSet& weights, char kind,
                                  const std::vector<Eigen::VectorXd>& history, int n) {
    if (kind != 'V' && kind != 'K')
        throw ConfigError("retarded_convolve: kind must be 'V' or 'K'");
    if (n < 0 || static_cast<int>(history.size()) != n + 1)
        throw ConfigError("retarded_convolve: history length must equal n+1");
    if (n > weights.N) throw ConfigError("retarded_convolve: step beyond weight range");
    const auto& W = (kind == 'V') ? weights.Wv : weights.Wk;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(weights.n_b);
    for (int j = 0; j <= n; ++j) {
        if (history[j].size() != weights.n_b)
            throw ConfigError("retarded_convolve: history vector size mismatch");
        out.noalias() += W[n - j] * history[j];
    }
    return out;
}

std::vector<std::complex<double>> scalar_cq_weights(
    const std::function<std::complex<double>(std::complex<double>)>& F, int N, double dt,
    int n_out) {
    const CQConfig cfg = CQConfig::make(N, dt);
    const int L = cfg.L;
    if (n_out < 0) n_out = N + 1;
    std::vector<cplx> samples(L);
    for (int l = 0; l < L; ++l) samples[l] = F(cfg.s(l));
    std::vector<cplx> w(n_out);
    for (int n = 0; n < n_out; ++n) {
        cplx acc(0.0, 0.0);
        for (int l = 0; l < L; ++l) {
            const double phi = -2.0 * kPi * static_cast<double>(n) * l / L;
            acc += samples[l] * cplx(std::cos(phi), std::sin(phi));
        }
        w[n] = acc * (std::pow(cfg.beta, -n) / L);
    }
    return w;
}

std::string weight_cache_key(const BoundaryGrid& boundary, int N, double dt) {
    uint64_t h = 1469598103934665603ull;
    const uint32_t nb = boundary.size();
    h = fnv1a(&nb, 4, h);
    const uint32_t nn = static_cast<uint32_t>(N);
    h = fnv1a(&nn, 4, h);
    h = fnv1a(&dt, 8, h);
    h = fnv1a(&boundary.radius, 8, h);
    h = fnv1a(boundary.angles.data(), boundary.angles.size() * 8, h);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void write_weight_cache(const CQWeightSet& w, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_weight_cache: cannot open " + path);
    out.write("PACQ1", 5);
    const uint32_t nb = static_cast<uint32_t>(w.n_b), N = static_cast<uint32_t>(w.N);
    out.write(reinterpret_cast<const char*>(&nb), 4);
    out.write(reinterpret_cast<const char*>(&N), 4);
    out.write(reinterpret_cast<const char*>(&w.dt), 8);
    out.write(reinterpret_cast<const char*>(&w.radius), 8);
    for (const auto& blocks : {&w.Wv, &w.Wk}) {
        for (const auto& M : *blocks) {
            // row-major on disk
            const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = M;
            out.write(reinterpret_cast<const char*>(rm.data()),
                      static_cast<std::streamsize>(8) * w.n_b * w.n_b);
        }
    }
    if (!out) throw IoError("write_weight_cache: write failed for " + path);
}

bool read_weight_cache(CQWeightSet& w, int n_b, int N, double dt, double radius,
                       const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, "PACQ1", 5) != 0) return false;
    uint32_t nb_file = 0, N_file = 0;
    double dt_file = 0.0, radius_file = 0.0;
    in.read(reinterpret_cast<char*>(&nb_file), 4);
    in.read(reinterpret_cast<char*>(&N_file), 4);
    in.read(reinterpret_cast<char*>(&dt_file), 8);
    in.read(reinterpret_cast<char*>(&radius_file), 8);
    if (!in || nb_file != static_cast<uint32_t>(n_b) || N_file != static_cast<uint32_t>(N) ||
        dt_file != dt || radius_file != radius)
        return false;

    const CQConfig cfg = CQConfig::make(N, dt);
    w.dt = dt;
    w.N = N;
    w.beta = cfg.beta;
    w.L = cfg.L;
    w.n_b = n_b;
    w.radius = radius;
    w.max_imag_residue = 0.0;
    w.Wv.resize(N + 1);
    w.Wk.resize(N + 1);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(n_b, n_b);
    for (auto* blocks : {&w.Wv, &w.Wk}) {
        for (int n = 0; n <= N; ++n) {
            in.read(reinterpret_cast<char*>(rm.data()),
                    static_cast<std::streamsize>(8) * n_b * n_b);
            if (!in) return false;
            (*blocks)[n] = rm;
        }
    }
    w.w0_lu.compute(w.Wv[0]);
    return true;
}

CQWeightSet load_or_compute_weights(const BoundaryGrid& boundary, int N, double dt) {
    const char* dir = std::getenv("PAT_CACHE_DIR");
    if (dir && *dir) {
        const std::string path =
            std::string(dir) + "/cq_" + weight_cache_key(boundary, N, dt) + ".bin";
        CQWeightSet w;
        if (read_weight_cache(w, boundary.size(), N, dt, boundary.radius, path)) return w;
        w = compute_cq_weights(boundary, N, dt);
        try {
            write_weight_cache(w, path);
        } catch (const IoError& e) {
            std::cerr << "weight cache write skipped: " << e.what() << "\n";
        }
        return w;
    }
    return compute_cq_weights(boundary, N, dt);
}

}  // namespace pat
