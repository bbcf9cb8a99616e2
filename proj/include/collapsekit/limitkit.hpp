#ifndef COLLAPSEKIT_LIMITKIT_HPP
#define COLLAPSEKIT_LIMITKIT_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "collapsekit/system.hpp"

namespace collapsekit {

class DepthMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Depth-N truncation (x_0, ..., x_N) of a point of the inverse limit.
struct Thread {
    std::vector<GeometricPoint> coords;

    int depth() const { return static_cast<int>(coords.size()) - 1; }
    /// First N+1 coordinates.
    Thread truncated(int depth) const;
    bool operator==(const Thread&) const = default;
};

/// Weighted product metric sum_i ratio^i * min(d_i, cap).
struct MetricConfig {
    double ratio = 0.5;
    double cap = 1.0;
};

double consistency_defect(const InverseSystem& sys, const Thread& t);
/// Smallest i with x_k = x_i for every k >= i (within tol), or nullopt when x_{N-1} != x_N.
std::optional<int> stabilization_index(const InverseSystem& sys, const Thread& t, double tol = 1e-9);
/// The top `window` coordinates agree within tol.
bool is_stable(const InverseSystem& sys, const Thread& t, int window, double tol = 1e-9);

/// The eventually constant thread (r_0k(x), ..., r_{k-1,k}(x), x, ..., x) of x in C_k.
Thread embed_e(const InverseSystem& sys, const GeometricPoint& x, int depth);
/// The thread of x in C_depth.
Thread thread_of(const InverseSystem& sys, const GeometricPoint& x, int depth);

double product_metric(const InverseSystem& sys, const Thread& a, const Thread& b, const MetricConfig& m = {});

struct ThreadCloud {
    int depth = 0;
    std::vector<Thread> threads;
    json labels;
};

struct RemainderReport {
    int window = 3;
    double eps = 0.05;
    std::vector<std::size_t> stable;
    std::vector<std::size_t> remainder;
    /// Max over threads of the distance to the nearest remainder candidate.
    double density_gap = 0.0;
    /// Max over threads of the distance to the nearest stable thread.
    double stable_gap = 0.0;
    /// eps-chain components of the remainder candidates.
    std::size_t remainder_components = 0;
    double remainder_diameter = 0.0;
    json to_json() const;
};

struct SampleOptions {
    double spacing = 0.01;
    int window = 3;
    double eps = 0.05;
    double tol = 1e-9;
    MetricConfig metric{};
};

/// Threads of the grid points of C_depth. Duplicate threads are dropped.
ThreadCloud sample_cloud(const InverseSystem& sys, int depth, double spacing);
RemainderReport classify(const InverseSystem& sys, const ThreadCloud& cloud, const SampleOptions& options = {});
std::pair<ThreadCloud, RemainderReport> sample_limit(const InverseSystem& sys, int depth,
                                                     const SampleOptions& options = {});

/// eps-chain components (single linkage at distance <= eps) of the selected threads.
std::vector<std::vector<std::size_t>> eps_components(const InverseSystem& sys, const std::vector<Thread>& threads,
                                                     const std::vector<std::size_t>& members, double eps,
                                                     const MetricConfig& m = {});

/// Truncates to a common depth, removes duplicate threads.
ThreadCloud truncate(const ThreadCloud& c, int depth);
/// Symmetric Hausdorff distance after truncating the deeper cloud.
double hausdorff(const InverseSystem& sys, const ThreadCloud& a, const ThreadCloud& b, const MetricConfig& m = {});

/// The deformation H of the inverse limit onto e(C_0) assembled from the bond tracks phi_i:
/// H_0 = id; H_i(x, t) = x for t <= 2^-i, phi_i(x, 2^i t - 1) for t <= 2^-(i-1), H_{i-1}(r_i x, t) above.
Thread homotopy_H(const InverseSystem& sys, const Thread& x, double t);

struct NegligibilityReport {
    bool stable_ok = true;
    bool commutes_ok = true;
    bool tracks_ok = true;
    double worst_defect = 0.0;
    double worst_track = 0.0;
    std::size_t threads = 0;
    std::size_t times = 0;
    std::optional<Thread> witness;
    /// Failing bond track, when (c) fails.
    std::optional<int> witness_bond;
    std::optional<GeometricPoint> witness_point;
    double witness_t = 0.0;
    bool passed() const { return stable_ok && commutes_ok && tracks_ok; }
    json to_json() const;
};

struct NegligibilityOptions {
    std::vector<double> ts;
    std::size_t sample_budget = 400;
    double spacing = 0.125;
    double tol = 1e-8;
    std::uint64_t seed = 1;
};

/// (a) H_t of every sampled thread stabilizes by index j(t) for grid t >= 2^-depth; (b) H_t(x) is a
/// consistent thread, i.e. the bonds commute with H; (c) every bond track is track-faithful.
NegligibilityReport homotopy_negligibility_check(const InverseSystem& sys, int depth,
                                                 const NegligibilityOptions& options = {});

/// CSV rows: thread index, stabilization index, class, then the flattened embedded coordinates.
std::string cloud_csv(const InverseSystem& sys, const ThreadCloud& cloud, const RemainderReport& rep);

} // namespace collapsekit

#endif
