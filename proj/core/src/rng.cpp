#include "grds/rng.hpp"

#include <cmath>

namespace grds {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Stream::Stream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

Stream Stream::substream(std::uint64_t id) const {
    return Stream(mix64(seed_ ^ mix64(id + 0x632be59bd9b4e019ULL)));
}

double Stream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Stream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Stream::normal() {
    return normal_(engine_);
}

cplx Stream::complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * M_SQRT1_2, im * M_SQRT1_2};
}

int Stream::rademacher() {
    return (engine_() >> 63) ? 1 : -1;
}

std::uint64_t Stream::bits() {
    return engine_();
}

cmat Stream::gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
    cmat g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = complex_normal();
    return g;
}

cvec Stream::random_unit_vector(Eigen::Index n) {
    cvec v = gaussian_matrix(n, 1).col(0);
    return v / v.norm();
}

cmat haar_unitary(Eigen::Index n, Stream& s) {
    return thin_qr(s.gaussian_matrix(n, n)).q;
}

cmat random_frame(Eigen::Index n, Eigen::Index k, Stream& s) {
    if (k == 0) return cmat(n, 0);
    return thin_qr(s.gaussian_matrix(n, k)).q;
}

}  // namespace grds
