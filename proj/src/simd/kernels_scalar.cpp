#include "l2sk/simd/kernels.hpp"

#include <cmath>

// Scalar reference kernels. The SIMD variants mirror these statement by
// statement; any change here must be replicated there to keep the
// bit-equivalence contract.

namespace l2sk::simd {

namespace {

struct Deriv6 {
    double kx, ky, kz, kvx, kvy, kvz;
};

// Circular-model field for one lane. omu = 1 - mu.
inline Deriv6 field(double x, double y, double z, double vx, double vy, double vz,
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

} // namespace

void flow_batch_scalar(double* const q[6], const double* const u[3],
                       std::size_t n_padded, double mu, double h, int steps) {
    const double omu = 1.0 - mu;
    const double hh = 0.5 * h;
    const double h6 = h / 6.0;
    double* px = q[0];
    double* py = q[1];
    double* pz = q[2];
    double* pvx = q[3];
    double* pvy = q[4];
    double* pvz = q[5];
    for (std::size_t i = 0; i < n_padded; ++i) {
        double x = px[i], y = py[i], z = pz[i];
        double vx = pvx[i], vy = pvy[i], vz = pvz[i];
        const double ux = u[0][i], uy = u[1][i], uz = u[2][i];
        for (int s = 0; s < steps; ++s) {
            const Deriv6 k1 = field(x, y, z, vx, vy, vz, ux, uy, uz, mu, omu);
            const Deriv6 k2 = field(x + hh * k1.kx, y + hh * k1.ky, z + hh * k1.kz,
                                    vx + hh * k1.kvx, vy + hh * k1.kvy, vz + hh * k1.kvz,
                                    ux, uy, uz, mu, omu);
            const Deriv6 k3 = field(x + hh * k2.kx, y + hh * k2.ky, z + hh * k2.kz,
                                    vx + hh * k2.kvx, vy + hh * k2.kvy, vz + hh * k2.kvz,
                                    ux, uy, uz, mu, omu);
            const Deriv6 k4 = field(x + h * k3.kx, y + h * k3.ky, z + h * k3.kz,
                                    vx + h * k3.kvx, vy + h * k3.kvy, vz + h * k3.kvz,
                                    ux, uy, uz, mu, omu);
            x = x + h6 * ((k1.kx + k4.kx) + 2.0 * (k2.kx + k3.kx));
            y = y + h6 * ((k1.ky + k4.ky) + 2.0 * (k2.ky + k3.ky));
            z = z + h6 * ((k1.kz + k4.kz) + 2.0 * (k2.kz + k3.kz));
            vx = vx + h6 * ((k1.kvx + k4.kvx) + 2.0 * (k2.kvx + k3.kvx));
            vy = vy + h6 * ((k1.kvy + k4.kvy) + 2.0 * (k2.kvy + k3.kvy));
            vz = vz + h6 * ((k1.kvz + k4.kvz) + 2.0 * (k2.kvz + k3.kvz));
        }
        px[i] = x;
        py[i] = y;
        pz[i] = z;
        pvx[i] = vx;
        pvy[i] = vy;
        pvz[i] = vz;
    }
}

namespace {

// Gravity-gradient coefficients shared by all tangent columns of one stage.
struct JacCoeffs {
    double gxx, gxy, gxz, gyy, gyz, gzz;
};

inline JacCoeffs jac_coeffs(double x, double y, double z, double mu, double omu) {
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

// dM = J(q_stage) * M_stage plus the control feedthrough on columns 6..8.
inline void tangent_rhs(const JacCoeffs& g, const double* m, double* dm) {
    constexpr int c = kTangentCols;
    const double* m0 = m;
    const double* m1 = m + c;
    const double* m2 = m + 2 * c;
    const double* m3 = m + 3 * c;
    const double* m4 = m + 4 * c;
    const double* m5 = m + 5 * c;
    double* d0 = dm;
    double* d1 = dm + c;
    double* d2 = dm + 2 * c;
    double* d3 = dm + 3 * c;
    double* d4 = dm + 4 * c;
    double* d5 = dm + 5 * c;
    for (int j = 0; j < c; ++j) {
        d0[j] = m3[j];
        d1[j] = m4[j];
        d2[j] = m5[j];
        d3[j] = (g.gxx * m0[j] + g.gxy * m1[j]) + (g.gxz * m2[j] + 2.0 * m4[j]);
        d4[j] = (g.gxy * m0[j] + g.gyy * m1[j]) + (g.gyz * m2[j] - 2.0 * m3[j]);
        d5[j] = (g.gxz * m0[j] + g.gyz * m1[j]) + g.gzz * m2[j];
    }
    d3[6] += 1.0;
    d4[7] += 1.0;
    d5[8] += 1.0;
}

} // namespace

void flow_tangent_scalar(double* q, double* m, const double* u,
                         double mu, double h, int steps) {
    const double omu = 1.0 - mu;
    const double hh = 0.5 * h;
    const double h6 = h / 6.0;
    constexpr int n = 6 * kTangentCols;
    double q1[6], q2[6], q3[6], q4[6];
    double m2[n], m3[n], m4[n];
    double km1[n], km2[n], km3[n], km4[n];

    for (int s = 0; s < steps; ++s) {
        for (int i = 0; i < 6; ++i) q1[i] = q[i];
        const Deriv6 k1 = field(q1[0], q1[1], q1[2], q1[3], q1[4], q1[5],
                                u[0], u[1], u[2], mu, omu);
        tangent_rhs(jac_coeffs(q1[0], q1[1], q1[2], mu, omu), m, km1);
        const double kq1[6] = {k1.kx, k1.ky, k1.kz, k1.kvx, k1.kvy, k1.kvz};

        for (int i = 0; i < 6; ++i) q2[i] = q[i] + hh * kq1[i];
        for (int j = 0; j < n; ++j) m2[j] = m[j] + hh * km1[j];
        const Deriv6 k2 = field(q2[0], q2[1], q2[2], q2[3], q2[4], q2[5],
                                u[0], u[1], u[2], mu, omu);
        tangent_rhs(jac_coeffs(q2[0], q2[1], q2[2], mu, omu), m2, km2);
        const double kq2[6] = {k2.kx, k2.ky, k2.kz, k2.kvx, k2.kvy, k2.kvz};

        for (int i = 0; i < 6; ++i) q3[i] = q[i] + hh * kq2[i];
        for (int j = 0; j < n; ++j) m3[j] = m[j] + hh * km2[j];
        const Deriv6 k3 = field(q3[0], q3[1], q3[2], q3[3], q3[4], q3[5],
                                u[0], u[1], u[2], mu, omu);
        tangent_rhs(jac_coeffs(q3[0], q3[1], q3[2], mu, omu), m3, km3);
        const double kq3[6] = {k3.kx, k3.ky, k3.kz, k3.kvx, k3.kvy, k3.kvz};

        for (int i = 0; i < 6; ++i) q4[i] = q[i] + h * kq3[i];
        for (int j = 0; j < n; ++j) m4[j] = m[j] + h * km3[j];
        const Deriv6 k4 = field(q4[0], q4[1], q4[2], q4[3], q4[4], q4[5],
                                u[0], u[1], u[2], mu, omu);
        tangent_rhs(jac_coeffs(q4[0], q4[1], q4[2], mu, omu), m4, km4);
        const double kq4[6] = {k4.kx, k4.ky, k4.kz, k4.kvx, k4.kvy, k4.kvz};

        for (int i = 0; i < 6; ++i)
            q[i] = q[i] + h6 * ((kq1[i] + kq4[i]) + 2.0 * (kq2[i] + kq3[i]));
        for (int j = 0; j < n; ++j)
            m[j] = m[j] + h6 * ((km1[j] + km4[j]) + 2.0 * (km2[j] + km3[j]));
    }
}

} // namespace l2sk::simd
