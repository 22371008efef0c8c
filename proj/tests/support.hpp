#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fremond/grid.hpp"
#include "fremond/stepper.hpp"

namespace testing {

// Deterministic across platforms, unlike the std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(seed) {}
    std::uint64_t next()
    {
        std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t s_;
};

inline fremond::Field random_field(const fremond::Grid& g, Rng& rng, double lo, double hi)
{
    fremond::Field f(g);
    for (std::size_t k = 0; k < f.size(); ++k)
        f[k] = rng.uniform(lo, hi);
    return f;
}

/// Smooth random field: a few cosine modes with random amplitudes.
inline fremond::Field smooth_field(const fremond::Grid& g, Rng& rng, double amp)
{
    const double a1 = rng.uniform(-amp, amp), a2 = rng.uniform(-amp, amp) / 4, a3 = rng.uniform(-amp, amp) / 9;
    const double b1 = rng.uniform(-amp, amp) / 2;
    const double pi = 3.14159265358979323846;
    return fremond::Field::sample(g, [&](double x, double y) {
        return a1 * std::cos(pi * x) + a2 * std::cos(2 * pi * x) + a3 * std::cos(3 * pi * x) + b1 * std::cos(pi * y);
    });
}

inline fremond::State uniform_state(const fremond::Grid& g, double theta, double phi, double phi_t = 0.0)
{
    return fremond::State{0.0, fremond::Field(g, theta), fremond::Field(g, phi), fremond::Field(g, phi_t)};
}

inline std::filesystem::path scratch_dir(const std::string& tag)
{
    static std::atomic<int> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("fremond_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace testing
