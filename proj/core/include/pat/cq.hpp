#pragma once

#include "pat/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/LU>

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace pat {

/// BDF2 characteristic quotient gamma(z) = 3/2 - 2z + z^2/2.
std::complex<double> gamma_bdf2(std::complex<double> z);

/// Contour parameters of the convolution quadrature: L = 2N frequency
/// samples on the circle of radius beta = eps^(1/(2N)), eps = 2^-52.
struct CQConfig {
    int N = 0;
    int L = 0;
    double beta = 0.0;
    double machine_eps = 0.0;
    double dt = 0.0;

    static CQConfig make(int N, double dt);
    /// Laplace-domain evaluation point for frequency index l.
    std::complex<double> s(int l) const;
};

/// Dense weight matrices W[n], n = 0..N, of the retarded single- and
/// double-layer potentials over the piecewise-linear boundary space.
struct CQWeightSet {
    double dt = 0.0;
    int N = 0;
    double beta = 0.0;
    int L = 0;
    int n_b = 0;
    double radius = 0.0;
    std::vector<Eigen::MatrixXd> Wv, Wk;
    /// Largest imaginary residue discarded when the weights were realized,
    /// relative to the largest weight entry.
    double max_imag_residue = 0.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> w0_lu;  // factorization of Wv[0]
};

/// Galerkin matrices of the Laplace-domain kernels K0(|x-y|s)/(2pi) and
/// -s K1(|x-y|s)/(2pi) * dr/dn_y over the boundary elements, with exact
/// circle geometry (arc parametrization, radial normals).
Eigen::MatrixXcd assemble_single_layer_matrix(const BoundaryGrid& boundary,
                                              std::complex<double> s);
Eigen::MatrixXcd assemble_double_layer_matrix(const BoundaryGrid& boundary,
                                              std::complex<double> s);

/// Computes the weight matrices by sampling the kernels at the contour
/// frequencies and applying the scaled inverse DFT. With exploit_symmetry the
/// kernels are assembled for l = 0..L/2 only and the conjugate half is
/// mirrored; the full path assembles every frequency independently and is
/// used by tests to measure the imaginary residue without the mirror
/// assumption. n_store extends the stored index range beyond N (at most
/// L - 1, same contour); the transform round-trip test needs all L of them.
CQWeightSet compute_cq_weights(const BoundaryGrid& boundary, int N, double dt,
                               bool exploit_symmetry = true, int n_store = -1);

/// Disk cache keyed by (boundary, N, dt) content hash; consults the
/// PAT_CACHE_DIR environment variable and falls back to computing.
CQWeightSet load_or_compute_weights(const BoundaryGrid& boundary, int N, double dt);

std::string weight_cache_key(const BoundaryGrid& boundary, int N, double dt);
void write_weight_cache(const CQWeightSet& w, const std::string& path);
bool read_weight_cache(CQWeightSet& w, int n_b, int N, double dt, double radius,
                       const std::string& path);

/// sum_{j=0}^{n} W[n-j] * history[j] for the selected kernel ('V' or 'K').
Eigen::VectorXd retarded_convolve(const CQWeightSet& weights, char kind,
                                  const std::vector<Eigen::VectorXd>& history, int n);

/// Convolution weights of a scalar transfer function on the same contour,
/// by the same scaled inverse DFT as the matrix path.
std::vector<std::complex<double>> scalar_cq_weights(
    const std::function<std::complex<double>(std::complex<double>)>& F, int N, double dt,
    int n_out = -1);

}  // namespace pat
