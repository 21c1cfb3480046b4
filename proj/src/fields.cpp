#include "unsatporo/fields.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace unsatporo {

std::uint64_t CounterRng::mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t k) const {
    const std::uint64_t counter = (static_cast<std::uint64_t>(stream_) << 32) + k + 1;
    return mix(seed_ + 0x9e3779b97f4a7c15ULL * counter);
}

double CounterRng::uniform(std::uint64_t k) const {
    return static_cast<double>(bits(k) >> 11) * 0x1.0p-53;
}

void HeterogeneityGenSpec::validate() const {
    if (contrast < 0.0) throw std::invalid_argument("fields: contrast must be >= 0");
    if (!(k_s0 > 0.0) || !(E_d0 > 0.0))
        throw std::invalid_argument("fields: base values must be positive");
    if (ed_amplitude < 0.0 || ed_amplitude >= 1.0)
        throw std::invalid_argument("fields: ed_amplitude must lie in [0, 1)");
    if (!(r_E >= 1.0)) throw std::invalid_argument("fields: r_E must be >= 1");
    if (n_modes < 1) throw std::invalid_argument("fields: n_modes must be >= 1");
    if (!(correlation_length > 0.0))
        throw std::invalid_argument("fields: correlation_length must be > 0");
}

std::vector<double> random_cosine_field(const StructuredTriMesh& mesh, std::uint64_t seed,
                                        std::uint32_t stream, int n_modes,
                                        double correlation_length) {
    const CounterRng rng(seed, stream);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    struct Mode {
        double kx, ky, phase, amp;
    };
    std::vector<Mode> modes(n_modes);
    for (int j = 0; j < n_modes; ++j) {
        const double angle = two_pi * rng.uniform(4 * j);
        const double wavenumber = two_pi * (0.25 + rng.uniform(4 * j + 1)) / correlation_length;
        modes[j] = {wavenumber * std::cos(angle), wavenumber * std::sin(angle),
                    two_pi * rng.uniform(4 * j + 2), 0.5 + rng.uniform(4 * j + 3)};
    }
    std::vector<double> g(mesh.n_triangles(), 0.0);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto c = mesh.centroid(t);
        double s = 0.0;
        for (const Mode& m : modes) s += m.amp * std::cos(m.kx * c[0] + m.ky * c[1] + m.phase);
        g[t] = s;
    }
    const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
    const double a = *lo;
    const double b = *hi;
    for (double& x : g) x = b > a ? 2.0 * (x - a) / (b - a) - 1.0 : 0.0;
    return g;
}

HeterogeneityFields generate_fields(const StructuredTriMesh& mesh,
                                    const HeterogeneityGenSpec& spec) {
    spec.validate();
    const int nt = mesh.n_triangles();
    HeterogeneityFields f;
    f.k_s.resize(nt);
    f.E_d.resize(nt);
    f.E_w.resize(nt);
    std::vector<double> gk(nt, 0.0);
    std::vector<double> ge(nt, 0.0);
    if (spec.contrast > 0.0) {
        gk = random_cosine_field(mesh, spec.seed, 1, spec.n_modes, spec.correlation_length);
        ge = random_cosine_field(mesh, spec.seed, 2, spec.n_modes, spec.correlation_length);
    }
    const double log_k0 = std::log10(spec.k_s0);
    for (int t = 0; t < nt; ++t) {
        f.k_s[t] = std::pow(10.0, log_k0 + 0.5 * spec.contrast * gk[t]);
        f.E_d[t] = spec.E_d0 * (1.0 + spec.ed_amplitude * ge[t]);
        f.E_w[t] = f.E_d[t] / spec.r_E;
    }
    return f;
}

void write_fields_csv(const HeterogeneityFields& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << "cell,k_s,E_d,E_w\n" << std::setprecision(17);
    for (std::size_t t = 0; t < f.k_s.size(); ++t)
        os << t << ',' << f.k_s[t] << ',' << f.E_d[t] << ',' << f.E_w[t] << '\n';
    if (!os) throw std::runtime_error("failed writing " + path);
}

HeterogeneityFields read_fields_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line != "cell,k_s,E_d,E_w")
        throw std::runtime_error(path + ": expected header cell,k_s,E_d,E_w");
    HeterogeneityFields f;
    std::size_t expected = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok[4];
        for (auto& t : tok)
            if (!std::getline(ss, t, ','))
                throw std::runtime_error(path + ": malformed row '" + line + "'");
        if (std::stoul(tok[0]) != expected++)
            throw std::runtime_error(path + ": cells must be listed in order");
        f.k_s.push_back(std::stod(tok[1]));
        f.E_d.push_back(std::stod(tok[2]));
        f.E_w.push_back(std::stod(tok[3]));
    }
    return f;
}

}  // namespace unsatporo
