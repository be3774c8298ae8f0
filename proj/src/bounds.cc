#include "ddsim/bounds.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ddsim/errors.h"
#include "ddsim/parallel.h"
#include "ddsim/rng.h"

namespace ddsim {

namespace {

constexpr std::size_t kVolumeBlock = 65536;

void require_nonnegative(double x, const char* name) {
    if (!(x >= 0) || !std::isfinite(x)) {
        throw ConfigError(std::string(name) + " must be finite and >= 0");
    }
}

}  // namespace

double random_bound(double total_time, double delta_t, double k) {
    require_nonnegative(total_time, "T");
    require_nonnegative(delta_t, "delta_t");
    require_nonnegative(k, "k");
    double x = 4.0 * total_time * delta_t * k * k;
    if (x >= 1.0) {
        std::ostringstream msg;
        msg << "random bound needs 4 T dt k^2 < 1, got " << x;
        throw RegimeViolation(msg.str());
    }
    return x * (1.0 + 8.0 * delta_t * k + x) / ((1.0 - x) * (1.0 - x));
}

double hbar_norm_bound(double cycle_time, double k) {
    require_nonnegative(cycle_time, "T_c");
    require_nonnegative(k, "k");
    if (k * cycle_time >= 1.0) {
        std::ostringstream msg;
        msg << "Magnus convergence needs k T_c < 1, got " << k * cycle_time;
        throw RegimeViolation(msg.str());
    }
    return k * k * cycle_time / (1.0 - k * cycle_time);
}

double deterministic_bound(double total_time, double cycle_time, double k) {
    require_nonnegative(total_time, "T");
    double h = hbar_norm_bound(cycle_time, k);
    double ht = h * total_time;
    if (ht >= 1.0) {
        std::ostringstream msg;
        msg << "deterministic bound needs ||H_bar|| T < 1, got " << ht;
        throw RegimeViolation(msg.str());
    }
    return ht * ht / ((1.0 - ht) * (1.0 - ht));
}

BoundReport figure_of_merit(double total_time, double delta_t, double k, std::size_t group_order) {
    BoundReport rep;
    rep.total_time = total_time;
    rep.delta_t = delta_t;
    rep.k = k;
    rep.group_order = group_order;
    rep.r = total_time * delta_t * k * k;
    rep.random_regime = 4.0 * rep.r < 1.0;
    if (rep.random_regime) {
        rep.random_bound = random_bound(total_time, delta_t, k);
    }
    if (group_order > 0) {
        double g = static_cast<double>(group_order);
        rep.g2r = g * g * rep.r;
        double cycle = g * delta_t;
        rep.convergence_regime = k * cycle < 1.0;
        if (rep.convergence_regime) {
            rep.hbar_norm_bound = hbar_norm_bound(cycle, k);
            rep.short_time_regime = *rep.hbar_norm_bound * total_time < 1.0;
            if (rep.short_time_regime) {
                rep.deterministic_bound = deterministic_bound(total_time, cycle, k);
            }
        }
    }
    std::ostringstream rec;
    if (!rep.g2r) {
        rec << "continuous group: only the random protocol applies";
    } else if (*rep.g2r >= 10.0) {
        rec << "|G|^2 R = " << *rep.g2r << " >> 1: random decoupling expected to outperform cyclic decoupling";
    } else if (*rep.g2r <= 0.1) {
        rec << "|G|^2 R = " << *rep.g2r
            << " << 1: cyclic decoupling favored for drifts that vary slower than T_c; random decoupling favored "
               "when fluctuations are faster than T_c but slower than dt";
    } else {
        rec << "|G|^2 R = " << *rep.g2r << " ~ 1: no clear preference from the figure of merit";
    }
    rep.recommendation = rec.str();
    return rep;
}

Operator avg_hamiltonian_first_order(const Operator& h, const ControlGroup& group) {
    if (!group.is_finite()) {
        throw ConfigError("avg_hamiltonian_first_order needs a finite group");
    }
    require_hermitian(h, "Hamiltonian");
    return twirl(group, h);
}

bool in_w1(std::span<const double> u, std::span<const double> t, double delta_t) {
    if (!std::is_sorted(u.begin(), u.end()) || !std::is_sorted(t.begin(), t.end())) {
        return false;
    }
    std::vector<double> merged(u.begin(), u.end());
    merged.insert(merged.end(), t.begin(), t.end());
    if (merged.size() < 2) {
        return false;
    }
    std::sort(merged.begin(), merged.end());
    for (std::size_t i = 0; i < merged.size(); i++) {
        bool near_prev = i > 0 && merged[i] - merged[i - 1] <= delta_t;
        bool near_next = i + 1 < merged.size() && merged[i + 1] - merged[i] <= delta_t;
        if (!near_prev && !near_next) {
            return false;
        }
    }
    return true;
}

double w1_appendix_bound(int n, int m, double total_time, double delta_t) {
    int s = n + m;
    int hi = (s + 1) / 2;
    int lo = s / 2;
    return std::pow(2.0, hi) * std::pow(total_time, lo) * std::pow(2.0 * delta_t, hi);
}

VolumeEstimate w1_volume_estimate(int n, int m, double total_time, double delta_t, std::size_t n_samples,
                                  uint64_t seed, std::size_t workers) {
    if (n < 1 || m < 1) {
        throw ConfigError("w1_volume_estimate needs n, m >= 1");
    }
    if (!(total_time > 0) || !(delta_t > 0) || n_samples == 0) {
        throw ConfigError("w1_volume_estimate needs T > 0, dt > 0 and at least one sample");
    }
    std::size_t blocks = (n_samples + kVolumeBlock - 1) / kVolumeBlock;
    std::vector<std::size_t> hits(blocks, 0);
    parallel_for(blocks, workers, [&](std::size_t b) {
        Rng rng(stream_seed(seed, b));
        std::size_t count = std::min(kVolumeBlock, n_samples - b * kVolumeBlock);
        std::vector<double> u(static_cast<std::size_t>(n));
        std::vector<double> t(static_cast<std::size_t>(m));
        std::size_t h = 0;
        for (std::size_t i = 0; i < count; i++) {
            for (auto& x : u) {
                x = total_time * rng.uniform();
            }
            for (auto& x : t) {
                x = total_time * rng.uniform();
            }
            h += in_w1(u, t, delta_t) ? 1 : 0;
        }
        hits[b] = h;
    });
    VolumeEstimate est;
    est.n_samples = n_samples;
    for (std::size_t h : hits) {
        est.hits += h;
    }
    double cube = std::pow(total_time, n + m);
    double p = static_cast<double>(est.hits) / static_cast<double>(n_samples);
    est.estimate = p * cube;
    est.standard_error = cube * std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples));
    est.appendix_bound = w1_appendix_bound(n, m, total_time, delta_t);
    return est;
}

}  // namespace ddsim
