#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <random>

namespace vsl {

// Deterministic random source. Gaussian and uniform draws are implemented
// directly on top of the raw engine output so that streams are identical
// across standard library implementations (std::normal_distribution is not
// pinned by the standard). Checkpoints persist the full state.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    // [0, 1)
    double uniform();
    double uniform(double lo, double hi);

    // inclusive bounds, rejection sampled to avoid modulo bias
    int uniform_int(int lo, int hi);

    // standard Gaussian via Box-Muller with a cached spare
    double normal();
    std::vector<double> normal_vec(int n);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            int j = uniform_int(0, i);
            std::swap(v[i], v[static_cast<size_t>(j)]);
        }
    }

    // Independent stream derived from the construction seed and a tag;
    // unaffected by draws already made on this generator.
    Rng child(uint64_t tag) const;

    std::string save_state() const;
    void load_state(const std::string& state);

private:
    uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

uint64_t splitmix64(uint64_t x);

}  // namespace vsl
