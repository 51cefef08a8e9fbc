#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "spopo/state.hpp"

namespace spopo {

/// Oscilloscope acquisition of one phase-scanned homodyne record.
struct AcquisitionSpec {
  double sample_rate = 20e6;         // Sa/s
  std::size_t n_samples = 2'000'000;
  double scan_span = 2.0 * std::numbers::pi;  // rad of LO phase over the record
  std::size_t window = 20'000;       // moving-variance window, samples
  std::size_t stride = 0;            // 0: non-overlapping windows (stride = window)
  std::uint64_t rng_seed = 1035;

  void validate() const;
  double duration() const noexcept { return static_cast<double>(n_samples) / sample_rate; }
  std::size_t effective_stride() const noexcept { return stride == 0 ? window : stride; }
};

struct HomodyneTrace {
  AcquisitionSpec spec;
  PhaseScanModel scan;  // theta0 and alpha used at synthesis; rate unused
  std::vector<double> samples;  // raw units, held at 32-bit float precision
  std::optional<double> shot_calibration;  // vacuum variance in raw units^2

  /// LO phase (before distortion) at sample index i.
  double scan_phase(double i) const noexcept {
    return spec.scan_span * i / static_cast<double>(spec.n_samples) + scan.theta0;
  }
};

using VarianceModel = std::function<double(double)>;

/// Samples drawn independently from N(0, model(theta + alpha theta^2)) with
/// theta the scan phase at each sample. Deterministic in spec.rng_seed,
/// independent of the number of worker threads.
HomodyneTrace synthesize_trace(const VarianceModel& model, const PhaseScanModel& scan, const AcquisitionSpec& spec,
                               unsigned threads = 0);

/// Unit-variance vacuum record on its own random stream; shot_calibration is
/// set to its whole-record variance.
HomodyneTrace shot_noise_trace(const AcquisitionSpec& spec, unsigned threads = 0);

struct MovingVarianceOptions {
  bool require_normalization = false;
  std::size_t stride = 0;  // overrides the trace's stride when non-zero
};

/// Variance over consecutive windows, divided by shot_calibration when
/// present; theta is the scan phase at each window center.
VarianceCurve moving_variance(const HomodyneTrace& trace, const MovingVarianceOptions& options = {});

/// One-pass (Welford) sample variance with 1/N normalization.
double sample_variance(std::span<const double> values);

struct Extrema {
  double squeezing_db = 0.0;
  double antisqueezing_db = 0.0;
  double theta_min = 0.0;
};

/// Minimum and maximum of the 3-point-median-smoothed curve, refined by a
/// parabola through the neighbours, in dB. Throws PreconditionError when the
/// curve spans less than pi.
Extrema extract_extrema(const VarianceCurve& curve);

}  // namespace spopo
