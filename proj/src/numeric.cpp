#include "aoc/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace aoc {

namespace {

template <class Lu>
LogDet accumulate_diagonal(const Lu& lu, int permutation_sign, double scale) {
  const Eigen::MatrixXd& packed = lu.matrixLU();
  const Eigen::Index n = packed.rows();
  LogDet out;
  out.sign = permutation_sign;
  const double tiny = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = packed(i, i);
    if (!(std::abs(u) > tiny)) {
      throw NumericalError("log_determinant: matrix is singular to working precision (pivot " +
                           std::to_string(i) + ")");
    }
    out.log_abs += std::log(std::abs(u));
    if (u < 0.0) out.sign = -out.sign;
  }
  return out;
}

thread_local bool t_inside_parallel = false;

}  // namespace

LogDet log_determinant(const Eigen::MatrixXd& m, double growth_limit) {
  if (m.rows() != m.cols()) throw PreconditionError("log_determinant: matrix must be square");
  if (m.rows() == 0) return {};
  if (!m.allFinite()) throw NumericalError("log_determinant: non-finite entry");
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) throw NumericalError("log_determinant: zero matrix");

  Eigen::PartialPivLU<Eigen::MatrixXd> partial(m);
  const double growth = partial.matrixLU().triangularView<Eigen::Upper>().toDenseMatrix().cwiseAbs().maxCoeff() / scale;
  if (growth <= growth_limit) {
    const int sign = static_cast<int>(partial.permutationP().determinant());
    LogDet out = accumulate_diagonal(partial, sign, scale);
    out.growth = growth;
    return out;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> full(m);
  const int sign = static_cast<int>(full.permutationP().determinant() * full.permutationQ().determinant());
  LogDet out = accumulate_diagonal(full, sign, scale);
  out.full_pivoting = true;
  out.growth = growth;
  return out;
}

void LogOnePlusSum::add(double x) { add_log(std::log1p(x)); }

void LogOnePlusSum::add_log(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    compensation_ += (sum_ - t) + v;
  } else {
    compensation_ += (v - t) + sum_;
  }
  sum_ = t;
}

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

unsigned thread_count() {
  if (const char* env = std::getenv("AOC_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1 || t_inside_parallel) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    t_inside_parallel = true;
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
    t_inside_parallel = false;
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace aoc
