#include "displab/field.hpp"

#include <algorithm>

namespace displab {

Grid3 make_grid(int n, double extent) {
    if (n < 8 || (n & (n - 1)) != 0)
        throw std::invalid_argument("make_grid: n must be a power of two >= 8, got " +
                                    std::to_string(n));
    if (!(extent > 0.0))
        throw std::invalid_argument("make_grid: extent must be positive, got " +
                                    std::to_string(extent));
    return Grid3{n, extent};
}

double Field3::norm2() const {
    double s = 0.0;
    for (const cplx& z : v) s += std::norm(z);
    return std::sqrt(cell_measure() * s);
}

double Field3::sup_norm() const {
    double s = 0.0;
    for (const cplx& z : v) s = std::max(s, std::abs(z));
    return s;
}

bool Field3::finite() const {
    for (const cplx& z : v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

Field3& Field3::operator*=(cplx c) {
    for (cplx& z : v) z *= c;
    return *this;
}

Field3& Field3::operator+=(const Field3& o) {
    require_same_grid(grid, o.grid, "Field3::operator+=");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
    return *this;
}

Field3& Field3::operator-=(const Field3& o) {
    require_same_grid(grid, o.grid, "Field3::operator-=");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
    return *this;
}

Field3 operator+(Field3 a, const Field3& b) { return a += b; }
Field3 operator-(Field3 a, const Field3& b) { return a -= b; }
Field3 operator*(cplx c, Field3 a) { return a *= c; }

cplx inner(const Field3& a, const Field3& b) {
    require_same_grid(a.grid, b.grid, "inner");
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) s += std::conj(a.v[i]) * b.v[i];
    return a.cell_measure() * s;
}

Field3 conjugate(Field3 f) {
    for (cplx& z : f.v) z = std::conj(z);
    return f;
}

double Potential::sup_norm() const {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

void require_same_grid(const Grid3& a, const Grid3& b, const std::string& where) {
    if (!(a == b))
        throw std::invalid_argument(where + ": grid mismatch (n=" + std::to_string(a.n) +
                                    ",L=" + std::to_string(a.extent) + " vs n=" +
                                    std::to_string(b.n) + ",L=" + std::to_string(b.extent) + ")");
}

}  // namespace displab
