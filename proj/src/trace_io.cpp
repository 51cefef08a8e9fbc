#include "spopo/trace_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "spopo/atomic_file.hpp"
#include "spopo/errors.hpp"

namespace spopo {
namespace {

static_assert(std::endian::native == std::endian::little, "trace I/O assumes a little-endian host");
static_assert(std::numeric_limits<float>::is_iec559 && std::numeric_limits<double>::is_iec559);

template <typename T>
void put(std::vector<char>& buf, std::size_t offset, T value) {
  std::memcpy(buf.data() + offset, &value, sizeof(T));
}

template <typename T>
T get(const std::array<char, kTraceHeaderSize>& buf, std::size_t offset) {
  T value;
  std::memcpy(&value, buf.data() + offset, sizeof(T));
  return value;
}

}  // namespace

void write_trace(const std::filesystem::path& path, const HomodyneTrace& trace) {
  if (trace.samples.size() != trace.spec.n_samples) {
    throw PreconditionError("write_trace: sample count does not match the acquisition spec");
  }
  if (trace.spec.window > std::numeric_limits<std::uint32_t>::max()) {
    throw PreconditionError("write_trace: window does not fit the header field");
  }
  std::vector<char> buf(kTraceHeaderSize + 4 * trace.samples.size());
  std::memcpy(buf.data(), kTraceMagic, sizeof(kTraceMagic));
  put<std::uint32_t>(buf, 8, kTraceVersion);
  put<std::uint32_t>(buf, 12, static_cast<std::uint32_t>(trace.spec.window));
  put<double>(buf, 16, trace.spec.sample_rate);
  put<std::uint64_t>(buf, 24, trace.spec.n_samples);
  put<std::uint64_t>(buf, 32, trace.spec.rng_seed);
  put<double>(buf, 40, trace.spec.scan_span);
  put<double>(buf, 48, trace.scan.alpha);
  put<double>(buf, 56, trace.scan.theta0);
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    put<float>(buf, kTraceHeaderSize + 4 * i, static_cast<float>(trace.samples[i]));
  }
  write_file_atomic(path, std::string_view(buf.data(), buf.size()));
}

HomodyneTrace read_trace(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(name, 0, "cannot open file");

  std::array<char, kTraceHeaderSize> header{};
  in.read(header.data(), header.size());
  if (static_cast<std::size_t>(in.gcount()) != header.size()) {
    throw FormatError(name, static_cast<std::uint64_t>(in.gcount()), "truncated header");
  }
  if (std::memcmp(header.data(), kTraceMagic, sizeof(kTraceMagic)) != 0) {
    throw FormatError(name, 0, "bad magic, expected SPOPOTRC");
  }
  const auto version = get<std::uint32_t>(header, 8);
  if (version != kTraceVersion) {
    throw FormatError(name, 8, "unsupported format version " + std::to_string(version));
  }

  HomodyneTrace trace;
  trace.spec.window = get<std::uint32_t>(header, 12);
  trace.spec.sample_rate = get<double>(header, 16);
  trace.spec.n_samples = get<std::uint64_t>(header, 24);
  trace.spec.rng_seed = get<std::uint64_t>(header, 32);
  trace.spec.scan_span = get<double>(header, 40);
  trace.scan.alpha = get<double>(header, 48);
  trace.scan.theta0 = get<double>(header, 56);
  if (!(trace.spec.sample_rate > 0.0)) throw FormatError(name, 16, "sample rate must be positive");
  if (!std::isfinite(trace.spec.scan_span)) throw FormatError(name, 40, "scan span is not finite");
  if (!std::isfinite(trace.scan.alpha)) throw FormatError(name, 48, "alpha is not finite");
  if (!std::isfinite(trace.scan.theta0)) throw FormatError(name, 56, "theta0 is not finite");

  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  const std::uint64_t expected = kTraceHeaderSize + 4 * trace.spec.n_samples;
  if (trace.spec.n_samples > (std::numeric_limits<std::uint64_t>::max() - kTraceHeaderSize) / 4 ||
      file_size != expected) {
    throw FormatError(name, std::min(file_size, expected),
                      "file size " + std::to_string(file_size) + " does not match header (" + std::to_string(expected) +
                          " bytes expected)");
  }
  in.seekg(static_cast<std::streamoff>(kTraceHeaderSize));
  std::vector<float> raw(trace.spec.n_samples);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(4 * raw.size()));
  if (!in) throw FormatError(name, kTraceHeaderSize, "failed reading samples");
  trace.samples.assign(raw.begin(), raw.end());
  return trace;
}

void write_trace_csv(const std::filesystem::path& path, const HomodyneTrace& trace) {
  std::ostringstream out;
  out.precision(9);
  out << "time_s,sample\n";
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    out << static_cast<double>(i) / trace.spec.sample_rate << ',' << trace.samples[i] << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace spopo
