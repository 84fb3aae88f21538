#pragma once

#include <cmath>
#include <cstdint>

namespace ybl {

// Deterministic sampling streams.
//
// Substream rule: samples are processed in fixed blocks of kBlockSize. Block b
// of master seed s uses a SplitMix64 generator whose initial state is
// splitmix(s) xor (b+1) * 0xD1342543DE82EF95. Partial (sum, sumsq, count)
// reductions merged in block order reproduce the single-pass result bit for
// bit, so chunked execution is equivalent to one pass.

constexpr long kBlockSize = 4096;

inline std::uint64_t splitmix_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class BlockRng {
public:
    BlockRng(std::uint64_t seed, std::uint64_t block) {
        std::uint64_t s = seed;
        std::uint64_t h = splitmix_next(s);
        state_ = h ^ ((block + 1) * 0xD1342543DE82EF95ULL);
        splitmix_next(state_);
        splitmix_next(state_);
    }

    double uniform() {  // [0, 1)
        return (splitmix_next(state_) >> 11) * 0x1.0p-53;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

struct Moments {
    double sum = 0.0;
    double sumsq = 0.0;
    long count = 0;

    void add(double v) {
        sum += v;
        sumsq += v * v;
        ++count;
    }
    void merge(const Moments& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        count += o.count;
    }
    double mean() const { return count > 0 ? sum / count : 0.0; }
    double mean_std_err() const {
        if (count < 2) return 0.0;
        double var = (sumsq - sum * sum / count) / (count - 1);
        if (var < 0.0) var = 0.0;
        return std::sqrt(var / count);
    }
};

inline long num_blocks(long samples) {
    return (samples + kBlockSize - 1) / kBlockSize;
}

inline long block_sample_count(long samples, long block) {
    long lo = block * kBlockSize;
    long hi = lo + kBlockSize;
    if (hi > samples) hi = samples;
    return hi > lo ? hi - lo : 0;
}

// f(BlockRng&) -> double, called once per sample.
template <class F>
Moments run_blocks(std::uint64_t seed, long samples, long block_begin, long block_end, F&& f) {
    Moments m;
    for (long b = block_begin; b < block_end; ++b) {
        long cnt = block_sample_count(samples, b);
        if (cnt <= 0) continue;
        BlockRng rng(seed, static_cast<std::uint64_t>(b));
        Moments part;
        for (long i = 0; i < cnt; ++i) part.add(f(rng));
        m.merge(part);
    }
    return m;
}

template <class F>
Moments run_blocks(std::uint64_t seed, long samples, F&& f) {
    return run_blocks(seed, samples, 0, num_blocks(samples), std::forward<F>(f));
}

} // namespace ybl
