#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace displab {

using cplx = std::complex<double>;

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double c) const { return {c * x, c * y, c * z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec3 operator*(double c, const Vec3& v) { return v * c; }

enum class Side { physical, frequency };

// Uniform cubic grid centered at the origin: x_i = -L + i*h, h = 2L/n.
// Frequencies live on the dual lattice with spacing pi/L.
struct Grid3 {
    int n = 0;
    double extent = 0.0;  // half-width L

    double spacing() const { return 2.0 * extent / n; }
    double freq_spacing() const { return M_PI / extent; }
    double nyquist() const { return M_PI / spacing(); }
    std::size_t size() const {
        return static_cast<std::size_t>(n) * n * n;
    }

    double coord(int i) const { return -extent + i * spacing(); }
    int signed_index(int k) const { return k < n / 2 ? k : k - n; }
    double freq(int k) const { return freq_spacing() * signed_index(k); }

    Vec3 point(int ix, int iy, int iz) const {
        return {coord(ix), coord(iy), coord(iz)};
    }
    Vec3 freq_point(int kx, int ky, int kz) const {
        return {freq(kx), freq(ky), freq(kz)};
    }
    std::size_t index(int ix, int iy, int iz) const {
        return (static_cast<std::size_t>(ix) * n + iy) * n + iz;
    }

    bool operator==(const Grid3&) const = default;
};

// Validates the power-of-two/positivity contract.
Grid3 make_grid(int n, double extent);

struct Field3 {
    Grid3 grid;
    Side side = Side::physical;
    std::vector<cplx> v;

    Field3() = default;
    Field3(const Grid3& g, Side s) : grid(g), side(s), v(g.size()) {}

    static Field3 zeros(const Grid3& g, Side s = Side::physical) {
        return Field3(g, s);
    }

    double cell_measure() const {
        const double d = side == Side::physical ? grid.spacing() : grid.freq_spacing();
        return d * d * d;
    }

    cplx& at(int ix, int iy, int iz) { return v[grid.index(ix, iy, iz)]; }
    const cplx& at(int ix, int iy, int iz) const { return v[grid.index(ix, iy, iz)]; }

    double norm2() const;
    double sup_norm() const;
    bool finite() const;

    Field3& operator*=(cplx c);
    Field3& operator+=(const Field3& o);
    Field3& operator-=(const Field3& o);
};

Field3 operator+(Field3 a, const Field3& b);
Field3 operator-(Field3 a, const Field3& b);
Field3 operator*(cplx c, Field3 a);

// L2 pairing with the cell measure, conjugate-linear in the first slot.
cplx inner(const Field3& a, const Field3& b);

Field3 conjugate(Field3 f);

// Real potential sampled on the grid.
struct Potential {
    Grid3 grid;
    std::vector<double> v;

    Potential() = default;
    explicit Potential(const Grid3& g) : grid(g), v(g.size(), 0.0) {}

    double sup_norm() const;
    double& at(int ix, int iy, int iz) { return v[grid.index(ix, iy, iz)]; }
    const double& at(int ix, int iy, int iz) const { return v[grid.index(ix, iy, iz)]; }
};

void require_same_grid(const Grid3& a, const Grid3& b, const std::string& where);

}  // namespace displab
