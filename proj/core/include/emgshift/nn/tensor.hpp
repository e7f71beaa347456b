#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <cblas.h>

namespace emgshift::nn {

template <class T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> v;

  static Tensor zeros(std::vector<int> s) {
    Tensor t;
    t.shape = std::move(s);
    t.v.assign(t.count_from_shape(), T(0));
    return t;
  }

  std::size_t numel() const { return v.size(); }

  std::size_t count_from_shape() const {
    std::size_t n = 1;
    for (int d : shape) {
      if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  void fill(T x) { std::fill(v.begin(), v.end(), x); }
};

// Named learnable tensor with its gradient accumulator.
template <class T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  void init_shape(std::vector<int> s) {
    value = Tensor<T>::zeros(s);
    grad = Tensor<T>::zeros(std::move(s));
  }
};

// Row-major GEMM/GEMV wrappers so float and double share the layer code.
inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a,
                 int lda, const float* b, int ldb, float beta, float* c, int ldc) {
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha, const double* a,
                 int lda, const double* b, int ldb, double beta, double* c, int ldc) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

inline void gemv(bool trans, int m, int n, float alpha, const float* a, int lda, const float* x,
                 float beta, float* y) {
  cblas_sgemv(CblasRowMajor, trans ? CblasTrans : CblasNoTrans, m, n, alpha, a, lda, x, 1, beta,
              y, 1);
}

inline void gemv(bool trans, int m, int n, double alpha, const double* a, int lda, const double* x,
                 double beta, double* y) {
  cblas_dgemv(CblasRowMajor, trans ? CblasTrans : CblasNoTrans, m, n, alpha, a, lda, x, 1, beta,
              y, 1);
}

}  // namespace emgshift::nn
