#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace polydiag {

/// Mixes a master seed with a path of integer keys into a new 64-bit seed.
/// Used to derive independent streams for subjects, replicates and retries.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// A reproducible random stream identified by (seed, stream_id).
///
/// The generator is xoshiro256** whose state is expanded with splitmix64
/// from a hash of both identifiers, so streams with distinct ids are
/// statistically independent and do not depend on the order in which they
/// are created or consumed. A stream is a value: copying it forks the
/// sequence.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64();

    /// Uniform draw strictly inside (0, 1).
    double uniform();

    /// Standard normal draw by inversion.
    double normal();

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    /// Binomial(n, p) draw by inversion, splitting large n.
    int binomial(int n, double p);

private:
    int binomial_inversion(int n, double p);

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::array<std::uint64_t, 4> state_;
};

/// Next value of `stream` in (0, 1).
inline double uniform_draw(RngStream& stream) { return stream.uniform(); }

}  // namespace polydiag
