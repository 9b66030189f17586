#pragma once

// Periodic curves traced from an optimal measure, and the alternating
// schedules that realize convex combinations of several of them.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "occm/domain.hpp"
#include "occm/measure.hpp"

namespace occm {

/// A closed trajectory sampled at uniform time steps, or a stationary point
/// (one sample, period 1).
struct PeriodicCurve {
  bool stationary = false;
  std::vector<Vec2> points;    // x(l dt), l = 0 .. L-1; x(L dt) returns to points[0] within closure_error
  std::vector<Vec2> controls;  // relaxed control at each sample
  double dt = 0.0;
  double period = 1.0;
  double closure_error = 0.0;
  bool jordan = true;
  double mean_p = 0.0;
  double mean_q = 0.0;
  std::vector<double> mean_constraints;

  double ratio() const { return mean_p / mean_q; }
  /// (1 / period) times the integral of g over one period (trapezoid rule,
  /// which on a closed curve is the plain sample mean).
  double cycle_average(const Integrand& g) const;
  /// Point at time t (periodic, linear between samples).
  Vec2 position(double t) const;
};

struct ExtractOptions {
  double close_tol = 0.0;         // 0: max(hx, hy)
  double dt = 0.0;                // 0: min(hx, hy) / 4
  std::size_t max_steps = 1'000'000;
  double stationary_speed = 1e-6;
  double exit_slack = 0.0;        // 0: half a cell
  std::optional<std::size_t> seed_cell;  // default: the heaviest support cell
  double absorb_cells = 3.0;             // decompose_support only
};

/// Integrates the relaxed field of the measure (bilinear over occupied
/// lattice points, inverse distance weighted elsewhere) with RK4. Steps that
/// graze the boundary are projected back onto K. Throws ExtractionError when
/// the trajectory leaves K by more than the slack, is pushed straight into
/// the boundary, or does not close.
PeriodicCurve extract_curve(const OptimalMeasure& m, const MeasureLP& lp, const ExtractOptions& options = {});

/// Support cells grouped into lattice-connected clusters (8-neighborhood).
struct SupportCluster {
  std::vector<std::size_t> cells;
  double mass = 0.0;
  std::size_t heaviest = 0;
};
std::vector<SupportCluster> support_clusters(const OptimalMeasure& m, const DiscretizedSystem& system);

/// Extracted pieces weighted by support mass (renormalized to sum 1),
/// heaviest first. Clusters are visited by decreasing mass; a cluster whose
/// heaviest cell lies within `absorb_cells` lattice steps of a piece already
/// extracted adds its mass to that piece instead of seeding a new one.
struct SupportDecomposition {
  std::vector<PeriodicCurve> pieces;
  std::vector<double> lambda;
};
SupportDecomposition decompose_support(const OptimalMeasure& m, const MeasureLP& lp, const ExtractOptions& options = {});

/// True when no two non-adjacent segments of the closed polyline cross.
bool is_jordan(std::span<const Vec2> closed);

/// Symmetric Hausdorff distance between two closed polylines, measured from
/// the vertices of each to the segments of the other.
double hausdorff_distance(std::span<const Vec2> a, std::span<const Vec2> b);

// ---------------------------------------------------------------------------

enum class SegmentKind : std::uint8_t { dwell, steer };

struct ItineraryEntry {
  std::size_t round = 0;  // 1-based
  SegmentKind kind = SegmentKind::dwell;
  std::size_t piece = 0;  // dwell: the piece; steer: the destination piece
  std::size_t from = 0;   // steer: the origin piece
  double start = 0.0;     // schedule time at entry start
  double duration = 0.0;
  double phase = 0.0;     // dwell: time offset into the piece's period
  std::vector<Vec2> path; // steer: unit-speed polyline
};

struct CumulativeSpec {
  Integrand g;             // g^1 with int_0^T g^1 <= 0 required for every T
  double bound = 0.0;  // M_g, max |g^1| over K x U
};

struct AlternatingSchedule {
  std::vector<PeriodicCurve> pieces;
  std::vector<double> lambda;
  double steering_bound = 0.0;  // T_K
  std::size_t rounds = 0;
  std::vector<ItineraryEntry> itinerary;
  std::optional<CumulativeSpec> cumulative;
  double tau = 0.0;    // phase shift of piece 0 (cumulative case)
  double alpha = 0.0;  // padding (cumulative case)
  double total_time() const;
};

/// max |g| over the system's state-control samples.
double sample_bound(const DiscretizedSystem& system, const Integrand& g);

/// Builds the round-by-round itinerary. Without `cumulative`, round n dwells
/// T_j ceil(n lambda_j / T_j) on each piece and steers to the next. With it
/// (two pieces, mean g^1 negative on piece 0 and positive on piece 1) round n
/// dwells T_0 ceil(alpha / T_0) + T_0 ceil(lambda n / T_0) on piece 0 from
/// phase tau, steers, dwells T_1 ceil((1 - lambda) n / T_1 - 1) on piece 1
/// and steers back. Steering is straight at unit speed, or a lattice
/// shortest path when the segment leaves K; T_K defaults to the diameter.
AlternatingSchedule synthesize_schedule(std::vector<PeriodicCurve> pieces, std::vector<double> lambda,
                                        const SpatialGrid& grid, std::optional<CumulativeSpec> cumulative,
                                        std::size_t rounds, double steering_bound = 0.0);

struct ScheduleReport {
  std::vector<double> target;                    // sum_j lambda_j mu_j(g_k)
  std::vector<double> round_end_time;            // per round
  std::vector<std::vector<double>> running;      // per round, per g: (1/T) int g
  std::vector<double> distance;                  // per round: max_k |running - target|
  double max_cumulative = 0.0;                   // max_T int_0^T g_0 over the sampled rounds
  double max_cumulative_boundaries = 0.0;        // the same at entry boundaries, all rounds
  std::size_t sampled_rounds = 0;
};

/// Integrates each g along the itinerary: exactly per entry for round-end
/// averages, and on a dt-spaced sampling of the first `sampled_rounds`
/// rounds for the running maximum of int_0^T g_0.
ScheduleReport verify_schedule(const AlternatingSchedule& s, std::span<const Integrand> g, std::size_t sampled_rounds = 50,
                               double dt = 0.01);

}  // namespace occm
