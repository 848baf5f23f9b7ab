#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace aniso {

/// Largest spatial dimension supported by the fixed-capacity vector types.
inline constexpr int kMaxDim = 4;

using complex = std::complex<double>;

/// Fixed-capacity vector of runtime length n <= kMaxDim. Lives on the stack so
/// the quadrature inner loops never allocate.
template <class T>
class SmallVec {
public:
    SmallVec() = default;

    explicit SmallVec(int n, T fill = T{}) : size_(n) {
        if (n < 0 || n > kMaxDim) {
            throw std::invalid_argument("dimension " + std::to_string(n) + " outside [0, " +
                                        std::to_string(kMaxDim) + "]");
        }
        for (int i = 0; i < n; ++i) data_[i] = fill;
    }

    SmallVec(std::initializer_list<T> init) : SmallVec(static_cast<int>(init.size())) {
        int i = 0;
        for (const T& v : init) data_[i++] = v;
    }

    static SmallVec from(const std::vector<T>& v) {
        SmallVec out(static_cast<int>(v.size()));
        for (int i = 0; i < out.size(); ++i) out[i] = v[i];
        return out;
    }

    [[nodiscard]] int size() const { return size_; }
    T& operator[](int i) { return data_[i]; }
    const T& operator[](int i) const { return data_[i]; }
    T* begin() { return data_.data(); }
    T* end() { return data_.data() + size_; }
    const T* begin() const { return data_.data(); }
    const T* end() const { return data_.data() + size_; }

    [[nodiscard]] std::vector<T> to_vector() const { return std::vector<T>(begin(), end()); }

    SmallVec& operator+=(const SmallVec& o) {
        for (int i = 0; i < size_; ++i) data_[i] += o.data_[i];
        return *this;
    }
    SmallVec& operator-=(const SmallVec& o) {
        for (int i = 0; i < size_; ++i) data_[i] -= o.data_[i];
        return *this;
    }
    template <class S>
    SmallVec& operator*=(S s) {
        for (int i = 0; i < size_; ++i) data_[i] *= s;
        return *this;
    }

    friend SmallVec operator+(SmallVec a, const SmallVec& b) { return a += b; }
    friend SmallVec operator-(SmallVec a, const SmallVec& b) { return a -= b; }
    friend SmallVec operator-(SmallVec a) {
        for (int i = 0; i < a.size_; ++i) a.data_[i] = -a.data_[i];
        return a;
    }
    template <class S>
    friend SmallVec operator*(S s, SmallVec a) { return a *= s; }
    template <class S>
    friend SmallVec operator*(SmallVec a, S s) { return a *= s; }

    friend bool operator==(const SmallVec& a, const SmallVec& b) {
        if (a.size_ != b.size_) return false;
        for (int i = 0; i < a.size_; ++i)
            if (a.data_[i] != b.data_[i]) return false;
        return true;
    }

private:
    std::array<T, kMaxDim> data_{};
    int size_ = 0;
};

using RVec = SmallVec<double>;
using CVec = SmallVec<complex>;

inline void require_same_dim(int a, int b, const char* what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                                    " vs " + std::to_string(b) + ")");
    }
}

inline double dot(const RVec& a, const RVec& b) {
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline complex dot(const CVec& a, const RVec& b) {
    complex s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const RVec& a) { return std::sqrt(dot(a, a)); }

inline RVec real_part(const CVec& z) {
    RVec r(z.size());
    for (int i = 0; i < z.size(); ++i) r[i] = z[i].real();
    return r;
}

inline RVec imag_part(const CVec& z) {
    RVec r(z.size());
    for (int i = 0; i < z.size(); ++i) r[i] = z[i].imag();
    return r;
}

inline CVec to_complex(const RVec& re, const RVec& im) {
    CVec z(re.size());
    for (int i = 0; i < re.size(); ++i) z[i] = complex(re[i], im[i]);
    return z;
}

inline CVec to_complex(const RVec& re) { return to_complex(re, RVec(re.size())); }

inline RVec unit(int dim, int axis) {
    RVec e(dim);
    e[axis] = 1.0;
    return e;
}

/// Dense square matrix of order n <= kMaxDim.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(int n) : n_(n) {
        if (n < 1 || n > kMaxDim) throw std::invalid_argument("matrix order outside [1, kMaxDim]");
    }

    static Matrix identity(int n) {
        Matrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    [[nodiscard]] int order() const { return n_; }
    double& operator()(int i, int j) { return a_[i * kMaxDim + j]; }
    double operator()(int i, int j) const { return a_[i * kMaxDim + j]; }

    RVec operator*(const RVec& x) const {
        RVec y(n_);
        for (int i = 0; i < n_; ++i) {
            double s = 0.0;
            for (int j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    [[nodiscard]] Matrix transpose() const;
    [[nodiscard]] Matrix operator*(const Matrix& b) const;
    [[nodiscard]] double determinant() const;
    /// Solves A x = b by partial-pivot elimination; throws on a singular matrix.
    [[nodiscard]] RVec solve(const RVec& b) const;
    [[nodiscard]] bool is_symmetric(double tol = 1e-12) const;
    [[nodiscard]] std::vector<std::vector<double>> rows() const;

    /// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
    [[nodiscard]] std::vector<double> symmetric_eigenvalues() const;

private:
    std::array<double, kMaxDim * kMaxDim> a_{};
    int n_ = 0;
};

}  // namespace aniso
