#ifndef DEGENLAB_LINALG_HPP
#define DEGENLAB_LINALG_HPP

#include <array>
#include <cmath>
#include <cstdlib>

#include "degenlab/error.hpp"

namespace degenlab {

// Spatial vectors and symmetric matrices in dimension 1 or 2. Everything is
// stack-allocated; dimension is a runtime value checked on mixed operations.

class Vec {
public:
    explicit Vec(int dim) : dim_(dim), v_{0.0, 0.0} {
        if (dim < 1 || dim > 2) throw Error("Vec: dim must be 1 or 2");
    }
    Vec(double x, double y) : dim_(2), v_{x, y} {}
    static Vec zero(int dim) { return Vec(dim); }
    static Vec of(int dim, double x, double y = 0.0) {
        Vec q(dim);
        q.v_[0] = x;
        if (dim == 2) q.v_[1] = y;
        return q;
    }

    int dim() const { return dim_; }
    double operator[](int i) const { return v_[i]; }
    double& operator[](int i) { return v_[i]; }

    double dot(const Vec& o) const {
        double s = v_[0] * o.v_[0];
        if (dim_ == 2) s += v_[1] * o.v_[1];
        return s;
    }
    double norm_sq() const { return dot(*this); }
    double norm() const { return std::sqrt(norm_sq()); }

    Vec operator+(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < dim_; ++i) r.v_[i] += o.v_[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < dim_; ++i) r.v_[i] -= o.v_[i];
        return r;
    }
    Vec operator*(double c) const {
        Vec r = *this;
        for (int i = 0; i < dim_; ++i) r.v_[i] *= c;
        return r;
    }

private:
    int dim_;
    std::array<double, 2> v_;
};

inline Vec operator*(double c, const Vec& v) { return v * c; }

// Symmetric matrix stored as (xx, yy, xy); symmetry holds by construction.
class SymMat {
public:
    explicit SymMat(int dim) : dim_(dim), m_{0.0, 0.0, 0.0} {
        if (dim < 1 || dim > 2) throw Error("SymMat: dim must be 1 or 2");
    }
    static SymMat zero(int dim) { return SymMat(dim); }
    static SymMat identity(int dim) {
        SymMat m(dim);
        m.m_[0] = 1.0;
        if (dim == 2) m.m_[1] = 1.0;
        return m;
    }
    // Rank-one q qT.
    static SymMat outer(const Vec& q) {
        SymMat m(q.dim());
        m.m_[0] = q[0] * q[0];
        if (q.dim() == 2) {
            m.m_[1] = q[1] * q[1];
            m.m_[2] = q[0] * q[1];
        }
        return m;
    }

    int dim() const { return dim_; }
    double operator()(int i, int j) const {
        if (i == j) return m_[i];
        return m_[2];
    }
    void set(int i, int j, double v) {
        if (i == j)
            m_[i] = v;
        else
            m_[2] = v;
    }

    double trace() const { return dim_ == 1 ? m_[0] : m_[0] + m_[1]; }
    double frobenius() const {
        if (dim_ == 1) return std::abs(m_[0]);
        return std::sqrt(m_[0] * m_[0] + m_[1] * m_[1] + 2.0 * m_[2] * m_[2]);
    }

    Vec apply(const Vec& q) const {
        Vec r(dim_);
        if (dim_ == 1) {
            r[0] = m_[0] * q[0];
        } else {
            r[0] = m_[0] * q[0] + m_[2] * q[1];
            r[1] = m_[2] * q[0] + m_[1] * q[1];
        }
        return r;
    }

    double quad(const Vec& q) const { return q.dot(apply(q)); }

    // Frobenius inner product Sum_ij A_ij B_ij.
    double contract(const SymMat& o) const {
        if (dim_ == 1) return m_[0] * o.m_[0];
        return m_[0] * o.m_[0] + m_[1] * o.m_[1] + 2.0 * m_[2] * o.m_[2];
    }

    // Ascending eigenvalues; second entry unused in dimension 1.
    std::array<double, 2> eigenvalues() const {
        if (dim_ == 1) return {m_[0], 0.0};
        const double mean = 0.5 * (m_[0] + m_[1]);
        const double rad = std::hypot(0.5 * (m_[0] - m_[1]), m_[2]);
        return {mean - rad, mean + rad};
    }

    SymMat operator+(const SymMat& o) const {
        SymMat r = *this;
        for (int i = 0; i < 3; ++i) r.m_[i] += o.m_[i];
        return r;
    }
    SymMat operator-(const SymMat& o) const {
        SymMat r = *this;
        for (int i = 0; i < 3; ++i) r.m_[i] -= o.m_[i];
        return r;
    }
    SymMat operator*(double c) const {
        SymMat r = *this;
        for (int i = 0; i < 3; ++i) r.m_[i] *= c;
        return r;
    }

private:
    int dim_;
    std::array<double, 3> m_;  // xx, yy, xy
};

inline SymMat operator*(double c, const SymMat& m) { return m * c; }

}  // namespace degenlab

#endif
