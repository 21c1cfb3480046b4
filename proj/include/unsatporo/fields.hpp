/// @file fields.hpp
/// @brief Seeded heterogeneity fields for permeability and dry Young's modulus.

#ifndef UNSATPORO_FIELDS_HPP
#define UNSATPORO_FIELDS_HPP

#include "unsatporo/mesh.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace unsatporo {

/// Counter-based generator: the k-th draw of stream s is SplitMix64 applied to
/// seed + golden * (s * 2^32 + k + 1). Floats use the top 53 bits.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint32_t stream) : seed_(seed), stream_(stream) {}

    static std::uint64_t mix(std::uint64_t z);
    std::uint64_t bits(std::uint64_t k) const;
    /// Uniform in [0, 1).
    double uniform(std::uint64_t k) const;

private:
    std::uint64_t seed_;
    std::uint32_t stream_;
};

struct HeterogeneityGenSpec {
    std::uint64_t seed = 42;
    double contrast = 2.0;  ///< orders of magnitude spanned by k_s
    double k_s0 = 1e-8;     ///< geometric-mean permeability, m^2
    double E_d0 = 3e6;      ///< mean dry Young's modulus, Pa
    double ed_amplitude = 0.3;
    double r_E = 2.0;       ///< E_d / E_w
    int n_modes = 24;
    double correlation_length = 2.0;  ///< m

    void validate() const;
};

struct HeterogeneityFields {
    std::vector<double> k_s;  ///< per triangle
    std::vector<double> E_d;
    std::vector<double> E_w;
};

/// Sum of random cosine modes at triangle centroids, min-max normalized to [-1, 1].
std::vector<double> random_cosine_field(const StructuredTriMesh& mesh, std::uint64_t seed,
                                        std::uint32_t stream, int n_modes,
                                        double correlation_length);

/// log10 k_s spans exactly contrast orders around log10 k_s0;
/// E_d = E_d0 (1 + ed_amplitude g) with an independent normalized field g.
HeterogeneityFields generate_fields(const StructuredTriMesh& mesh,
                                    const HeterogeneityGenSpec& spec);

/// CSV with header "cell,k_s,E_d,E_w".
void write_fields_csv(const HeterogeneityFields& f, const std::string& path);
HeterogeneityFields read_fields_csv(const std::string& path);

}  // namespace unsatporo

#endif  // UNSATPORO_FIELDS_HPP
