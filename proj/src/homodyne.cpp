#include "spopo/homodyne.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "spopo/errors.hpp"
#include "spopo/units.hpp"

namespace spopo {
namespace {

// Each chunk draws from its own generator, so output does not depend on how
// chunks are spread over threads.
constexpr std::size_t kChunk = 1 << 16;
constexpr std::uint32_t kSignalStream = 0;
constexpr std::uint32_t kVacuumStream = 1;

std::mt19937_64 chunk_engine(std::uint64_t seed, std::uint32_t stream, std::size_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream,
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(static_cast<std::uint64_t>(chunk) >> 32)};
  return std::mt19937_64(seq);
}

template <typename Fill>
void for_each_chunk(std::size_t n, unsigned threads, Fill fill) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(chunks, 1)));
  if (threads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fill(c, c * kChunk, std::min(n, (c + 1) * kChunk));
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([=] {
      for (std::size_t c = t; c < chunks; c += threads) fill(c, c * kChunk, std::min(n, (c + 1) * kChunk));
    });
  }
}

HomodyneTrace draw(const VarianceModel& model, const PhaseScanModel& scan, const AcquisitionSpec& spec,
                   std::uint32_t stream, unsigned threads) {
  spec.validate();
  HomodyneTrace trace{spec, scan, std::vector<double>(spec.n_samples), std::nullopt};
  for_each_chunk(spec.n_samples, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    auto engine = chunk_engine(spec.rng_seed, stream, chunk);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = begin; i < end; ++i) {
      const double theta = trace.scan_phase(static_cast<double>(i));
      const double variance = model(apply_phase_distortion(theta, scan));
      // Stored at the precision of the on-disk format.
      trace.samples[i] = static_cast<float>(std::sqrt(variance) * normal(engine));
    }
  });
  return trace;
}

}  // namespace

void AcquisitionSpec::validate() const {
  if (!(sample_rate > 0.0)) throw PreconditionError("acquisition: sample_rate must be positive");
  if (window < 2) throw PreconditionError("acquisition: window must be at least 2 samples");
  if (n_samples < window) {
    throw PreconditionError("acquisition: n_samples (" + std::to_string(n_samples) + ") smaller than window (" +
                            std::to_string(window) + ")");
  }
  if (!std::isfinite(scan_span)) throw PreconditionError("acquisition: scan_span must be finite");
}

HomodyneTrace synthesize_trace(const VarianceModel& model, const PhaseScanModel& scan, const AcquisitionSpec& spec,
                               unsigned threads) {
  return draw(model, scan, spec, kSignalStream, threads);
}

HomodyneTrace shot_noise_trace(const AcquisitionSpec& spec, unsigned threads) {
  auto trace = draw([](double) { return 1.0; }, PhaseScanModel{}, spec, kVacuumStream, threads);
  trace.shot_calibration = sample_variance(trace.samples);
  return trace;
}

double sample_variance(std::span<const double> values) {
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t count = 0;
  for (double x : values) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  return count == 0 ? 0.0 : m2 / static_cast<double>(count);
}

VarianceCurve moving_variance(const HomodyneTrace& trace, const MovingVarianceOptions& options) {
  const auto& spec = trace.spec;
  spec.validate();
  if (trace.samples.size() != spec.n_samples) {
    throw PreconditionError("moving_variance: trace holds " + std::to_string(trace.samples.size()) +
                            " samples, header says " + std::to_string(spec.n_samples));
  }
  if (options.require_normalization && !trace.shot_calibration) {
    throw PreconditionError("moving_variance: normalization requested but the trace has no shot-noise calibration");
  }
  double scale = 1.0;
  if (trace.shot_calibration) {
    if (!(*trace.shot_calibration > 0.0)) throw PreconditionError("moving_variance: shot calibration must be positive");
    scale = 1.0 / *trace.shot_calibration;
  }
  const std::size_t stride = options.stride != 0 ? options.stride : spec.effective_stride();
  const std::span<const double> samples(trace.samples);

  VarianceCurve curve;
  for (std::size_t start = 0; start + spec.window <= spec.n_samples; start += stride) {
    const double center = static_cast<double>(start) + 0.5 * static_cast<double>(spec.window - 1);
    curve.thetas.push_back(trace.scan_phase(center));
    curve.variances.push_back(sample_variance(samples.subspan(start, spec.window)) * scale);
  }
  return curve;
}

Extrema extract_extrema(const VarianceCurve& curve) {
  if (curve.variances.size() != curve.thetas.size()) throw PreconditionError("extract_extrema: length mismatch");
  const std::size_t n = curve.size();
  if (n < 3) throw PreconditionError("extract_extrema: need at least 3 points");
  const auto [tmin, tmax] = std::minmax_element(curve.thetas.begin(), curve.thetas.end());
  if (*tmax - *tmin < std::numbers::pi * (1.0 - 1e-9)) {
    throw PreconditionError("extract_extrema: curve spans less than one pi-period");
  }

  std::vector<double> smooth(curve.variances);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    std::array<double, 3> w{curve.variances[i - 1], curve.variances[i], curve.variances[i + 1]};
    std::sort(w.begin(), w.end());
    smooth[i] = w[1];
  }

  // Vertex of the parabola through (i-1, i, i+1); falls back to the sample
  // itself at the ends or when the three points are not curved the right way.
  auto refine = [&](std::size_t i, bool minimum) {
    if (i == 0 || i + 1 == n) return std::pair{smooth[i], curve.thetas[i]};
    const double y0 = smooth[i - 1], y1 = smooth[i], y2 = smooth[i + 1];
    const double curvature = y0 - 2.0 * y1 + y2;
    if ((minimum && !(curvature > 0.0)) || (!minimum && !(curvature < 0.0))) {
      return std::pair{y1, curve.thetas[i]};
    }
    const double offset = 0.5 * (y0 - y2) / curvature;
    const double value = y1 - 0.125 * (y0 - y2) * (y0 - y2) / curvature;
    const double theta = curve.thetas[i] + offset * 0.5 * (curve.thetas[i + 1] - curve.thetas[i - 1]);
    return std::pair{value, theta};
  };

  const auto imin = static_cast<std::size_t>(std::min_element(smooth.begin(), smooth.end()) - smooth.begin());
  const auto imax = static_cast<std::size_t>(std::max_element(smooth.begin(), smooth.end()) - smooth.begin());
  const auto [vmin, theta_min] = refine(imin, true);
  const auto [vmax, theta_max] = refine(imax, false);
  (void)theta_max;
  return {db(vmin), db(vmax), theta_min};
}

}  // namespace spopo
