#include "l2sk/simd/kernels.hpp"

#if defined(L2SK_BUILD_NEON)

#include <arm_neon.h>
#include <cmath>

// NEON variants, two lanes per vector. Statement-for-statement mirror of
// kernels_scalar.cpp (mul/add kept separate, no fused ops) so per-lane
// results are bit-identical to the scalar reference.

namespace l2sk::simd {

namespace {

struct Deriv6v {
    float64x2_t kx, ky, kz, kvx, kvy, kvz;
};

inline Deriv6v fieldv(float64x2_t x, float64x2_t y, float64x2_t z, float64x2_t vx,
                      float64x2_t vy, float64x2_t vz, float64x2_t ux, float64x2_t uy,
                      float64x2_t uz, float64x2_t mu, float64x2_t omu, float64x2_t two) {
    const float64x2_t dx1 = vaddq_f64(x, mu);
    const float64x2_t dx2 = vsubq_f64(x, omu);
    const float64x2_t yz2 = vaddq_f64(vmulq_f64(y, y), vmulq_f64(z, z));
    const float64x2_t r1s = vaddq_f64(vmulq_f64(dx1, dx1), yz2);
    const float64x2_t r2s = vaddq_f64(vmulq_f64(dx2, dx2), yz2);
    const float64x2_t i1 = vdivq_f64(omu, vmulq_f64(r1s, vsqrtq_f64(r1s)));
    const float64x2_t i2 = vdivq_f64(mu, vmulq_f64(r2s, vsqrtq_f64(r2s)));
    Deriv6v d;
    d.kx = vx;
    d.ky = vy;
    d.kz = vz;
    d.kvx = vaddq_f64(
        vsubq_f64(vaddq_f64(x, vmulq_f64(two, vy)),
                  vaddq_f64(vmulq_f64(i1, dx1), vmulq_f64(i2, dx2))),
        ux);
    d.kvy = vaddq_f64(
        vsubq_f64(vsubq_f64(y, vmulq_f64(two, vx)),
                  vaddq_f64(vmulq_f64(i1, y), vmulq_f64(i2, y))),
        uy);
    d.kvz = vsubq_f64(uz, vaddq_f64(vmulq_f64(i1, z), vmulq_f64(i2, z)));
    return d;
}

inline float64x2_t rk4_combine(float64x2_t v, float64x2_t h6, float64x2_t two,
                               float64x2_t k1, float64x2_t k2, float64x2_t k3,
                               float64x2_t k4) {
    return vaddq_f64(
        v, vmulq_f64(h6, vaddq_f64(vaddq_f64(k1, k4),
                                   vmulq_f64(two, vaddq_f64(k2, k3)))));
}

} // namespace

void flow_batch_neon(double* const q[6], const double* const u[3],
                     std::size_t n_padded, double mu, double h, int steps) {
    const float64x2_t muv = vdupq_n_f64(mu);
    const float64x2_t omuv = vdupq_n_f64(1.0 - mu);
    const float64x2_t hhv = vdupq_n_f64(0.5 * h);
    const float64x2_t hv = vdupq_n_f64(h);
    const float64x2_t h6v = vdupq_n_f64(h / 6.0);
    const float64x2_t two = vdupq_n_f64(2.0);
    for (std::size_t i = 0; i < n_padded; i += 2) {
        float64x2_t x = vld1q_f64(q[0] + i);
        float64x2_t y = vld1q_f64(q[1] + i);
        float64x2_t z = vld1q_f64(q[2] + i);
        float64x2_t vx = vld1q_f64(q[3] + i);
        float64x2_t vy = vld1q_f64(q[4] + i);
        float64x2_t vz = vld1q_f64(q[5] + i);
        const float64x2_t ux = vld1q_f64(u[0] + i);
        const float64x2_t uy = vld1q_f64(u[1] + i);
        const float64x2_t uz = vld1q_f64(u[2] + i);
        for (int s = 0; s < steps; ++s) {
            const Deriv6v k1 = fieldv(x, y, z, vx, vy, vz, ux, uy, uz, muv, omuv, two);
            const Deriv6v k2 = fieldv(
                vaddq_f64(x, vmulq_f64(hhv, k1.kx)), vaddq_f64(y, vmulq_f64(hhv, k1.ky)),
                vaddq_f64(z, vmulq_f64(hhv, k1.kz)), vaddq_f64(vx, vmulq_f64(hhv, k1.kvx)),
                vaddq_f64(vy, vmulq_f64(hhv, k1.kvy)), vaddq_f64(vz, vmulq_f64(hhv, k1.kvz)),
                ux, uy, uz, muv, omuv, two);
            const Deriv6v k3 = fieldv(
                vaddq_f64(x, vmulq_f64(hhv, k2.kx)), vaddq_f64(y, vmulq_f64(hhv, k2.ky)),
                vaddq_f64(z, vmulq_f64(hhv, k2.kz)), vaddq_f64(vx, vmulq_f64(hhv, k2.kvx)),
                vaddq_f64(vy, vmulq_f64(hhv, k2.kvy)), vaddq_f64(vz, vmulq_f64(hhv, k2.kvz)),
                ux, uy, uz, muv, omuv, two);
            const Deriv6v k4 = fieldv(
                vaddq_f64(x, vmulq_f64(hv, k3.kx)), vaddq_f64(y, vmulq_f64(hv, k3.ky)),
                vaddq_f64(z, vmulq_f64(hv, k3.kz)), vaddq_f64(vx, vmulq_f64(hv, k3.kvx)),
                vaddq_f64(vy, vmulq_f64(hv, k3.kvy)), vaddq_f64(vz, vmulq_f64(hv, k3.kvz)),
                ux, uy, uz, muv, omuv, two);
            x = rk4_combine(x, h6v, two, k1.kx, k2.kx, k3.kx, k4.kx);
            y = rk4_combine(y, h6v, two, k1.ky, k2.ky, k3.ky, k4.ky);
            z = rk4_combine(z, h6v, two, k1.kz, k2.kz, k3.kz, k4.kz);
            vx = rk4_combine(vx, h6v, two, k1.kvx, k2.kvx, k3.kvx, k4.kvx);
            vy = rk4_combine(vy, h6v, two, k1.kvy, k2.kvy, k3.kvy, k4.kvy);
            vz = rk4_combine(vz, h6v, two, k1.kvz, k2.kvz, k3.kvz, k4.kvz);
        }
        vst1q_f64(q[0] + i, x);
        vst1q_f64(q[1] + i, y);
        vst1q_f64(q[2] + i, z);
        vst1q_f64(q[3] + i, vx);
        vst1q_f64(q[4] + i, vy);
        vst1q_f64(q[5] + i, vz);
    }
}

namespace {

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

inline void tangent_rhs_neon(const JacCoeffs& g, const double* m, double* dm) {
    constexpr int c = kTangentCols;
    const float64x2_t gxx = vdupq_n_f64(g.gxx);
    const float64x2_t gxy = vdupq_n_f64(g.gxy);
    const float64x2_t gxz = vdupq_n_f64(g.gxz);
    const float64x2_t gyy = vdupq_n_f64(g.gyy);
    const float64x2_t gyz = vdupq_n_f64(g.gyz);
    const float64x2_t gzz = vdupq_n_f64(g.gzz);
    const float64x2_t two = vdupq_n_f64(2.0);
    for (int b = 0; b < c; b += 2) {
        const float64x2_t m0 = vld1q_f64(m + 0 * c + b);
        const float64x2_t m1 = vld1q_f64(m + 1 * c + b);
        const float64x2_t m2 = vld1q_f64(m + 2 * c + b);
        const float64x2_t m3 = vld1q_f64(m + 3 * c + b);
        const float64x2_t m4 = vld1q_f64(m + 4 * c + b);
        const float64x2_t m5 = vld1q_f64(m + 5 * c + b);
        vst1q_f64(dm + 0 * c + b, m3);
        vst1q_f64(dm + 1 * c + b, m4);
        vst1q_f64(dm + 2 * c + b, m5);
        vst1q_f64(dm + 3 * c + b,
                  vaddq_f64(vaddq_f64(vmulq_f64(gxx, m0), vmulq_f64(gxy, m1)),
                            vaddq_f64(vmulq_f64(gxz, m2), vmulq_f64(two, m4))));
        vst1q_f64(dm + 4 * c + b,
                  vaddq_f64(vaddq_f64(vmulq_f64(gxy, m0), vmulq_f64(gyy, m1)),
                            vsubq_f64(vmulq_f64(gyz, m2), vmulq_f64(two, m3))));
        vst1q_f64(dm + 5 * c + b,
                  vaddq_f64(vaddq_f64(vmulq_f64(gxz, m0), vmulq_f64(gyz, m1)),
                            vmulq_f64(gzz, m2)));
    }
    dm[3 * c + 6] += 1.0;
    dm[4 * c + 7] += 1.0;
    dm[5 * c + 8] += 1.0;
}

inline void axpy_neon(int n, double* out, const double* a, double s, const double* b) {
    const float64x2_t sv = vdupq_n_f64(s);
    for (int j = 0; j < n; j += 2)
        vst1q_f64(out + j, vaddq_f64(vld1q_f64(a + j), vmulq_f64(sv, vld1q_f64(b + j))));
}

} // namespace

void flow_tangent_neon(double* q, double* m, const double* u,
                       double mu, double h, int steps) {
    const double omu = 1.0 - mu;
    const double hh = 0.5 * h;
    const double h6 = h / 6.0;
    constexpr int n = 6 * kTangentCols;
    double q2[6], q3[6], q4[6];
    double m2[n], m3[n], m4[n];
    double km1[n], km2[n], km3[n], km4[n];
    const float64x2_t h6v = vdupq_n_f64(h6);
    const float64x2_t two = vdupq_n_f64(2.0);

    for (int s = 0; s < steps; ++s) {
        const Deriv6 k1 = field1(q[0], q[1], q[2], q[3], q[4], q[5],
                                 u[0], u[1], u[2], mu, omu);
        tangent_rhs_neon(jac_coeffs1(q[0], q[1], q[2], mu, omu), m, km1);
        const double kq1[6] = {k1.kx, k1.ky, k1.kz, k1.kvx, k1.kvy, k1.kvz};

        for (int i = 0; i < 6; ++i) q2[i] = q[i] + hh * kq1[i];
        axpy_neon(n, m2, m, hh, km1);
        const Deriv6 k2 = field1(q2[0], q2[1], q2[2], q2[3], q2[4], q2[5],
                                 u[0], u[1], u[2], mu, omu);
        tangent_rhs_neon(jac_coeffs1(q2[0], q2[1], q2[2], mu, omu), m2, km2);
        const double kq2[6] = {k2.kx, k2.ky, k2.kz, k2.kvx, k2.kvy, k2.kvz};

        for (int i = 0; i < 6; ++i) q3[i] = q[i] + hh * kq2[i];
        axpy_neon(n, m3, m, hh, km2);
        const Deriv6 k3 = field1(q3[0], q3[1], q3[2], q3[3], q3[4], q3[5],
                                 u[0], u[1], u[2], mu, omu);
        tangent_rhs_neon(jac_coeffs1(q3[0], q3[1], q3[2], mu, omu), m3, km3);
        const double kq3[6] = {k3.kx, k3.ky, k3.kz, k3.kvx, k3.kvy, k3.kvz};

        for (int i = 0; i < 6; ++i) q4[i] = q[i] + h * kq3[i];
        axpy_neon(n, m4, m, h, km3);
        const Deriv6 k4 = field1(q4[0], q4[1], q4[2], q4[3], q4[4], q4[5],
                                 u[0], u[1], u[2], mu, omu);
        tangent_rhs_neon(jac_coeffs1(q4[0], q4[1], q4[2], mu, omu), m4, km4);
        const double kq4[6] = {k4.kx, k4.ky, k4.kz, k4.kvx, k4.kvy, k4.kvz};

        for (int i = 0; i < 6; ++i)
            q[i] = q[i] + h6 * ((kq1[i] + kq4[i]) + 2.0 * (kq2[i] + kq3[i]));
        for (int j = 0; j < n; j += 2) {
            const float64x2_t a = vld1q_f64(km1 + j);
            const float64x2_t b = vld1q_f64(km2 + j);
            const float64x2_t cc = vld1q_f64(km3 + j);
            const float64x2_t d = vld1q_f64(km4 + j);
            vst1q_f64(m + j,
                      vaddq_f64(vld1q_f64(m + j),
                                vmulq_f64(h6v, vaddq_f64(vaddq_f64(a, d),
                                                         vmulq_f64(two, vaddq_f64(b, cc))))));
        }
    }
}

} // namespace l2sk::simd

#endif // L2SK_BUILD_NEON
