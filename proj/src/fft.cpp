#include "tilelab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace tilelab::fft {
namespace {

std::mutex plan_mutex;

fftw_plan plan_for(std::size_t n, int sign) {
  static std::map<std::pair<std::size_t, int>, fftw_plan> cache;
  std::lock_guard lock(plan_mutex);
  auto it = cache.find({n, sign});
  if (it != cache.end()) return it->second;
  fftw_complex* in = fftw_alloc_complex(n);
  fftw_complex* out = fftw_alloc_complex(n);
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  if (p == nullptr) throw std::runtime_error("FFTW planning failed");
  cache.emplace(std::pair{n, sign}, p);
  return p;
}

std::vector<std::complex<double>> run(const std::vector<std::complex<double>>& in, int sign) {
  std::vector<std::complex<double>> src(in);
  std::vector<std::complex<double>> out(in.size());
  if (in.empty()) return out;
  fftw_execute_dft(plan_for(in.size(), sign), reinterpret_cast<fftw_complex*>(src.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

std::vector<std::complex<double>> forward(const std::vector<std::complex<double>>& in) {
  return run(in, FFTW_FORWARD);
}

std::vector<std::complex<double>> backward(const std::vector<std::complex<double>>& in) {
  return run(in, FFTW_BACKWARD);
}

}  // namespace tilelab::fft
