#include "l2sk/simd/kernels.hpp"

#if defined(L2SK_BUILD_AVX2)

#include <cmath>
#include <immintrin.h>

// AVX2 variants, four lanes per vector. Statement-for-statement mirror of
// kernels_scalar.cpp with the same expression trees (mul/add kept separate,
// no FMA) so per-lane results are bit-identical to the scalar reference.

namespace l2sk::simd {

namespace {

struct Deriv6v {
    __m256d kx, ky, kz, kvx, kvy, kvz;
};

inline Deriv6v fieldv(__m256d x, __m256d y, __m256d z, __m256d vx, __m256d vy,
                      __m256d vz, __m256d ux, __m256d uy, __m256d uz,
                      __m256d mu, __m256d omu, __m256d two) {
    const __m256d dx1 = _mm256_add_pd(x, mu);
    const __m256d dx2 = _mm256_sub_pd(x, omu);
    const __m256d yz2 = _mm256_add_pd(_mm256_mul_pd(y, y), _mm256_mul_pd(z, z));
    const __m256d r1s = _mm256_add_pd(_mm256_mul_pd(dx1, dx1), yz2);
    const __m256d r2s = _mm256_add_pd(_mm256_mul_pd(dx2, dx2), yz2);
    const __m256d i1 = _mm256_div_pd(omu, _mm256_mul_pd(r1s, _mm256_sqrt_pd(r1s)));
    const __m256d i2 = _mm256_div_pd(mu, _mm256_mul_pd(r2s, _mm256_sqrt_pd(r2s)));
    Deriv6v d;
    d.kx = vx;
    d.ky = vy;
    d.kz = vz;
    d.kvx = _mm256_add_pd(
        _mm256_sub_pd(_mm256_add_pd(x, _mm256_mul_pd(two, vy)),
                      _mm256_add_pd(_mm256_mul_pd(i1, dx1), _mm256_mul_pd(i2, dx2))),
        ux);
    d.kvy = _mm256_add_pd(
        _mm256_sub_pd(_mm256_sub_pd(y, _mm256_mul_pd(two, vx)),
                      _mm256_add_pd(_mm256_mul_pd(i1, y), _mm256_mul_pd(i2, y))),
        uy);
    d.kvz = _mm256_sub_pd(uz, _mm256_add_pd(_mm256_mul_pd(i1, z), _mm256_mul_pd(i2, z)));
    return d;
}

inline __m256d rk4_combine(__m256d v, __m256d h6, __m256d two, __m256d k1,
                           __m256d k2, __m256d k3, __m256d k4) {
    return _mm256_add_pd(
        v, _mm256_mul_pd(h6, _mm256_add_pd(_mm256_add_pd(k1, k4),
                                           _mm256_mul_pd(two, _mm256_add_pd(k2, k3)))));
}

} // namespace

void flow_batch_avx2(double* const q[6], const double* const u[3],
                     std::size_t n_padded, double mu, double h, int steps) {
    const __m256d muv = _mm256_set1_pd(mu);
    const __m256d omuv = _mm256_set1_pd(1.0 - mu);
    const __m256d hhv = _mm256_set1_pd(0.5 * h);
    const __m256d hv = _mm256_set1_pd(h);
    const __m256d h6v = _mm256_set1_pd(h / 6.0);
    const __m256d two = _mm256_set1_pd(2.0);
    for (std::size_t i = 0; i < n_padded; i += 4) {
        __m256d x = _mm256_loadu_pd(q[0] + i);
        __m256d y = _mm256_loadu_pd(q[1] + i);
        __m256d z = _mm256_loadu_pd(q[2] + i);
        __m256d vx = _mm256_loadu_pd(q[3] + i);
        __m256d vy = _mm256_loadu_pd(q[4] + i);
        __m256d vz = _mm256_loadu_pd(q[5] + i);
        const __m256d ux = _mm256_loadu_pd(u[0] + i);
        const __m256d uy = _mm256_loadu_pd(u[1] + i);
        const __m256d uz = _mm256_loadu_pd(u[2] + i);
        for (int s = 0; s < steps; ++s) {
            const Deriv6v k1 = fieldv(x, y, z, vx, vy, vz, ux, uy, uz, muv, omuv, two);
            const Deriv6v k2 = fieldv(
                _mm256_add_pd(x, _mm256_mul_pd(hhv, k1.kx)),
                _mm256_add_pd(y, _mm256_mul_pd(hhv, k1.ky)),
                _mm256_add_pd(z, _mm256_mul_pd(hhv, k1.kz)),
                _mm256_add_pd(vx, _mm256_mul_pd(hhv, k1.kvx)),
                _mm256_add_pd(vy, _mm256_mul_pd(hhv, k1.kvy)),
                _mm256_add_pd(vz, _mm256_mul_pd(hhv, k1.kvz)),
                ux, uy, uz, muv, omuv, two);
            const Deriv6v k3 = fieldv(
                _mm256_add_pd(x, _mm256_mul_pd(hhv, k2.kx)),
                _mm256_add_pd(y, _mm256_mul_pd(hhv, k2.ky)),
                _mm256_add_pd(z, _mm256_mul_pd(hhv, k2.kz)),
                _mm256_add_pd(vx, _mm256_mul_pd(hhv, k2.kvx)),
                _mm256_add_pd(vy, _mm256_mul_pd(hhv, k2.kvy)),
                _mm256_add_pd(vz, _mm256_mul_pd(hhv, k2.kvz)),
                ux, uy, uz, muv, omuv, two);
            const Deriv6v k4 = fieldv(
                _mm256_add_pd(x, _mm256_mul_pd(hv, k3.kx)),
                _mm256_add_pd(y, _mm256_mul_pd(hv, k3.ky)),
                _mm256_add_pd(z, _mm256_mul_pd(hv, k3.kz)),
                _mm256_add_pd(vx, _mm256_mul_pd(hv, k3.kvx)),
                _mm256_add_pd(vy, _mm256_mul_pd(hv, k3.kvy)),
                _mm256_add_pd(vz, _mm256_mul_pd(hv, k3.kvz)),
                ux, uy, uz, muv, omuv, two);
            x = rk4_combine(x, h6v, two, k1.kx, k2.kx, k3.kx, k4.kx);
            y = rk4_combine(y, h6v, two, k1.ky, k2.ky, k3.ky, k4.ky);
            z = rk4_combine(z, h6v, two, k1.kz, k2.kz, k3.kz, k4.kz);
            vx = rk4_combine(vx, h6v, two, k1.kvx, k2.kvx, k3.kvx, k4.kvx);
            vy = rk4_combine(vy, h6v, two, k1.kvy, k2.kvy, k3.kvy, k4.kvy);
            vz = rk4_combine(vz, h6v, two, k1.kvz, k2.kvz, k3.kvz, k4.kvz);
        }
        _mm256_storeu_pd(q[0] + i, x);
        _mm256_storeu_pd(q[1] + i, y);
        _mm256_storeu_pd(q[2] + i, z);
        _mm256_storeu_pd(q[3] + i, vx);
        _mm256_storeu_pd(q[4] + i, vy);
        _mm256_storeu_pd(q[5] + i, vz);
    }
}

namespace {

// Scalar pieces for the tangent kernel: identical arithmetic to the scalar
// reference (the nominal state is a single lane either way).
struct Deriv6 {
    double kx, ky, kz, kvx, kvy, kvz;
};

inline Deriv6 field1(double x, double y, double z, double vx, double vy, double vz,
                     double ux, double uy, double uz, double mu, double omu) {
    const double dx1 = x + mu;
    const double dx2 = x - omu;
    const double yz2 = y * y + z * z;
    const double r1s = dx1 * dx1 + yz2;
    const double r2s = dx2 * dx2 + yz2;
    const double i1 = omu / (r1s * std::sqrt(r1s));
    const double i2 = mu / (r2s * std::sqrt(r2s));
    Deriv6 d;
    d.kx = vx;
    d.ky = vy;
    d.kz = vz;
    d.kvx = ((x + 2.0 * vy) - (i1 * dx1 + i2 * dx2)) + ux;
    d.kvy = ((y - 2.0 * vx) - (i1 * y + i2 * y)) + uy;
    d.kvz = uz - (i1 * z + i2 * z);
    return d;
}

struct JacCoeffs {
    double gxx, gxy, gxz, gyy, gyz, gzz;
};

inline JacCoeffs jac_coeffs1(double x, double y, double z, double mu, double omu) {
    const double dx1 = x + mu;
    const double dx2 = x - omu;
    const double yz2 = y * y + z * z;
    const double r1s = dx1 * dx1 + yz2;
    const double r2s = dx2 * dx2 + yz2;
    const double i13 = 1.0 / (r1s * std::sqrt(r1s));
    const double i23 = 1.0 / (r2s * std::sqrt(r2s));
    const double c1 = omu * i13;
    const double c2 = mu * i23;
    const double c1p = 3.0 * (c1 / r1s);
    const double c2p = 3.0 * (c2 / r2s);
    JacCoeffs g;
    const double diag = c1 + c2;
    g.gxx = (1.0 - diag) + (c1p * (dx1 * dx1) + c2p * (dx2 * dx2));
    g.gxy = c1p * (dx1 * y) + c2p * (dx2 * y);
    g.gxz = c1p * (dx1 * z) + c2p * (dx2 * z);
    g.gyy = (1.0 - diag) + (c1p * (y * y) + c2p * (y * y));
    g.gyz = c1p * (y * z) + c2p * (y * z);
    g.gzz = (0.0 - diag) + (c1p * (z * z) + c2p * (z * z));
    return g;
}

inline void tangent_rhs_avx2(const JacCoeffs& g, const double* m, double* dm) {
    constexpr int c = kTangentCols;
    const __m256d gxx = _mm256_set1_pd(g.gxx);
    const __m256d gxy = _mm256_set1_pd(g.gxy);
    const __m256d gxz = _mm256_set1_pd(g.gxz);
    const __m256d gyy = _mm256_set1_pd(g.gyy);
    const __m256d gyz = _mm256_set1_pd(g.gyz);
    const __m256d gzz = _mm256_set1_pd(g.gzz);
    const __m256d two = _mm256_set1_pd(2.0);
    for (int b = 0; b < c; b += 4) {
        const __m256d m0 = _mm256_loadu_pd(m + 0 * c + b);
        const __m256d m1 = _mm256_loadu_pd(m + 1 * c + b);
        const __m256d m2 = _mm256_loadu_pd(m + 2 * c + b);
        const __m256d m3 = _mm256_loadu_pd(m + 3 * c + b);
        const __m256d m4 = _mm256_loadu_pd(m + 4 * c + b);
        const __m256d m5 = _mm256_loadu_pd(m + 5 * c + b);
        _mm256_storeu_pd(dm + 0 * c + b, m3);
        _mm256_storeu_pd(dm + 1 * c + b, m4);
        _mm256_storeu_pd(dm + 2 * c + b, m5);
        _mm256_storeu_pd(
            dm + 3 * c + b,
            _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(gxx, m0), _mm256_mul_pd(gxy, m1)),
                          _mm256_add_pd(_mm256_mul_pd(gxz, m2), _mm256_mul_pd(two, m4))));
        _mm256_storeu_pd(
            dm + 4 * c + b,
            _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(gxy, m0), _mm256_mul_pd(gyy, m1)),
                          _mm256_sub_pd(_mm256_mul_pd(gyz, m2), _mm256_mul_pd(two, m3))));
        _mm256_storeu_pd(
            dm + 5 * c + b,
            _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(gxz, m0), _mm256_mul_pd(gyz, m1)),
                          _mm256_mul_pd(gzz, m2)));
    }
    dm[3 * c + 6] += 1.0;
    dm[4 * c + 7] += 1.0;
    dm[5 * c + 8] += 1.0;
}

inline void axpy_avx2(int n, double* out, const double* a, double s, const double* b) {
    const __m256d sv = _mm256_set1_pd(s);
    for (int j = 0; j < n; j += 4)
        _mm256_storeu_pd(out + j,
                         _mm256_add_pd(_mm256_loadu_pd(a + j),
                                       _mm256_mul_pd(sv, _mm256_loadu_pd(b + j))));
}

} // namespace

void flow_tangent_avx2(double* q, double* m, const double* u,
                       double mu, double h, int steps) {
    const double omu = 1.0 - mu;
    const double hh = 0.5 * h;
    const double h6 = h / 6.0;
    constexpr int n = 6 * kTangentCols;
    double q2[6], q3[6], q4[6];
    double m2[n], m3[n], m4[n];
    double km1[n], km2[n], km3[n], km4[n];
    const __m256d h6v = _mm256_set1_pd(h6);
    const __m256d two = _mm256_set1_pd(2.0);

    for (int s = 0; s < steps; ++s) {
        const Deriv6 k1 = field1(q[0], q[1], q[2], q[3], q[4], q[5],
                                 u[0], u[1], u[2], mu, omu);
        tangent_rhs_avx2(jac_coeffs1(q[0], q[1], q[2], mu, omu), m, km1);
        const double kq1[6] = {k1.kx, k1.ky, k1.kz, k1.kvx, k1.kvy, k1.kvz};

        for (int i = 0; i < 6; ++i) q2[i] = q[i] + hh * kq1[i];
        axpy_avx2(n, m2, m, hh, km1);
        const Deriv6 k2 = field1(q2[0], q2[1], q2[2], q2[3], q2[4], q2[5],
                                 u[0], u[1], u[2], mu, omu);
        tangent_rhs_avx2(jac_coeffs1(q2[0], q2[1], q2[2], mu, omu), m2, km2);
        const double kq2[6] = {k2.kx, k2.ky, k2.kz, k2.kvx, k2.kvy, k2.kvz};

        for (int i = 0; i < 6; ++i) q3[i] = q[i] + hh * kq2[i];
        axpy_avx2(n, m3, m, hh, km2);
        const Deriv6 k3 = field1(q3[0], q3[1], q3[2], q3[3], q3[4], q3[5],
                                 u[0], u[1], u[2], mu, omu);
        tangent_rhs_avx2(jac_coeffs1(q3[0], q3[1], q3[2], mu, omu), m3, km3);
        const double kq3[6] = {k3.kx, k3.ky, k3.kz, k3.kvx, k3.kvy, k3.kvz};

        for (int i = 0; i < 6; ++i) q4[i] = q[i] + h * kq3[i];
        axpy_avx2(n, m4, m, h, km3);
        const Deriv6 k4 = field1(q4[0], q4[1], q4[2], q4[3], q4[4], q4[5],
                                 u[0], u[1], u[2], mu, omu);
        tangent_rhs_avx2(jac_coeffs1(q4[0], q4[1], q4[2], mu, omu), m4, km4);
        const double kq4[6] = {k4.kx, k4.ky, k4.kz, k4.kvx, k4.kvy, k4.kvz};

        for (int i = 0; i < 6; ++i)
            q[i] = q[i] + h6 * ((kq1[i] + kq4[i]) + 2.0 * (kq2[i] + kq3[i]));
        for (int j = 0; j < n; j += 4) {
            const __m256d a = _mm256_loadu_pd(km1 + j);
            const __m256d b = _mm256_loadu_pd(km2 + j);
            const __m256d cc = _mm256_loadu_pd(km3 + j);
            const __m256d d = _mm256_loadu_pd(km4 + j);
            _mm256_storeu_pd(
                m + j,
                _mm256_add_pd(_mm256_loadu_pd(m + j),
                              _mm256_mul_pd(h6v, _mm256_add_pd(_mm256_add_pd(a, d),
                                                               _mm256_mul_pd(two, _mm256_add_pd(b, cc))))));
        }
    }
}

} // namespace l2sk::simd

#endif // L2SK_BUILD_AVX2
