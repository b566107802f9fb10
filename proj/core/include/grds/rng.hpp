#pragma once

#include "grds/linalg.hpp"

#include <cstdint>
#include <random>

namespace grds {

// splitmix64 finalizer; used to derive independent seeds for substreams.
std::uint64_t mix64(std::uint64_t x);

// A deterministic random stream. Substreams are derived from (seed, id) only,
// so trajectory k draws the same numbers no matter which worker runs it.
class Stream {
public:
    explicit Stream(std::uint64_t seed = 0);

    std::uint64_t seed() const { return seed_; }
    Stream substream(std::uint64_t id) const;

    double uniform();                   // [0, 1)
    double uniform(double lo, double hi);
    double normal();
    cplx complex_normal();              // E|z|^2 = 1
    int rademacher();
    std::uint64_t bits();

    cmat gaussian_matrix(Eigen::Index rows, Eigen::Index cols);
    cvec random_unit_vector(Eigen::Index n);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

// Haar-distributed unitary: complex Gaussian, thin QR, then diagonal phase fix.
cmat haar_unitary(Eigen::Index n, Stream& s);

// Uniformly distributed rank-k frame in C^n.
cmat random_frame(Eigen::Index n, Eigen::Index k, Stream& s);

}  // namespace grds
