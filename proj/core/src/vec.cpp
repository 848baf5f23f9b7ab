#include "aniso/vec.hpp"

#include <algorithm>

namespace aniso {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const int n = static_cast<int>(rows.size());
    Matrix m(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n) throw std::invalid_argument("matrix must be square");
        for (int j = 0; j < n; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) t(i, j) = (*this)(j, i);
    return t;
}

Matrix Matrix::operator*(const Matrix& b) const {
    Matrix c(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
            double s = 0.0;
            for (int k = 0; k < n_; ++k) s += (*this)(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

double Matrix::determinant() const {
    Matrix a = *this;
    double det = 1.0;
    for (int c = 0; c < n_; ++c) {
        int piv = c;
        for (int r = c + 1; r < n_; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        if (a(piv, c) == 0.0) return 0.0;
        if (piv != c) {
            for (int k = 0; k < n_; ++k) std::swap(a(c, k), a(piv, k));
            det = -det;
        }
        det *= a(c, c);
        for (int r = c + 1; r < n_; ++r) {
            const double f = a(r, c) / a(c, c);
            for (int k = c; k < n_; ++k) a(r, k) -= f * a(c, k);
        }
    }
    return det;
}

RVec Matrix::solve(const RVec& b) const {
    require_same_dim(n_, b.size(), "Matrix::solve");
    Matrix a = *this;
    RVec x = b;
    for (int c = 0; c < n_; ++c) {
        int piv = c;
        for (int r = c + 1; r < n_; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        if (std::abs(a(piv, c)) < 1e-300) throw std::domain_error("Matrix::solve: singular matrix");
        if (piv != c) {
            for (int k = 0; k < n_; ++k) std::swap(a(c, k), a(piv, k));
            std::swap(x[c], x[piv]);
        }
        for (int r = c + 1; r < n_; ++r) {
            const double f = a(r, c) / a(c, c);
            for (int k = c; k < n_; ++k) a(r, k) -= f * a(c, k);
            x[r] -= f * x[c];
        }
    }
    for (int r = n_ - 1; r >= 0; --r) {
        double s = x[r];
        for (int k = r + 1; k < n_; ++k) s -= a(r, k) * x[k];
        x[r] = s / a(r, r);
    }
    return x;
}

bool Matrix::is_symmetric(double tol) const {
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j)
            if (std::abs((*this)(i, j) - (*this)(j, i)) > tol * (1.0 + std::abs((*this)(i, j)))) return false;
    return true;
}

std::vector<std::vector<double>> Matrix::rows() const {
    std::vector<std::vector<double>> out(n_, std::vector<double>(n_));
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) out[i][j] = (*this)(i, j);
    return out;
}

std::vector<double> Matrix::symmetric_eigenvalues() const {
    Matrix a = *this;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-30) break;
        for (int p = 0; p < n_; ++p) {
            for (int q = p + 1; q < n_; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n_; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n_; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n_);
    for (int i = 0; i < n_; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

}  // namespace aniso
