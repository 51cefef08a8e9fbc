#include "spopo/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "spopo/errors.hpp"

namespace spopo {
namespace {

int line_of(const YAML::Node& node) { return node.Mark().is_null() ? 0 : node.Mark().line + 1; }

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  template <typename T>
  T as(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) fail(node, key + ": expected a scalar value");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, key + ": cannot convert '" + node.Scalar() + "'");
    }
  }

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    throw ConfigError(source_, line_of(node), msg);
  }

  using Handler = std::function<void(const YAML::Node&, const std::string&)>;

  void section(const YAML::Node& node, const std::string& name, const std::map<std::string, Handler>& handlers) const {
    if (!node.IsMap()) fail(node, "section [" + name + "] must be a mapping");
    for (const auto& item : node) {
      const auto key = item.first.as<std::string>();
      const auto it = handlers.find(key);
      if (it == handlers.end()) fail(item.first, "unknown key '" + key + "' in section [" + name + "]");
      it->second(item.second, name + "." + key);
    }
  }

  template <typename F>
  void checked(const YAML::Node& node, F&& check) const {
    try {
      check();
    } catch (const PreconditionError& e) {
      fail(node, e.what());
    }
  }

 private:
  std::string source_;
};

template <typename T>
Reader::Handler bind(const Reader& r, T& field) {
  return [&r, &field](const YAML::Node& n, const std::string& key) { field = r.as<T>(n, key); };
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  // Escape efficiency calibrated so the model reaches -5.7 dB at the output
  // for P = 0.3 and a 3.0 nm LO. The measured finesse of 24 corresponds to
  // intracavity_loss = 0.06 (CavityParams default).
  cavity.intracavity_loss = 0.02877053817;
}

void ExperimentConfig::validate() const {
  cavity.validate();
  detection.validate();
  pump.validate();
  acquisition.validate();
  grid.make();
  if (!(lo.fwhm_nm > 0.0)) throw PreconditionError("lo.fwhm_nm must be positive");
  for (double w : lo.projection_widths_nm) {
    if (!(w > 0.0)) throw PreconditionError("lo.projection_widths_nm entries must be positive");
  }
  if (!(model.analysis_freq_mhz >= 0.0)) throw PreconditionError("model.analysis_freq_mhz must be non-negative");
  if (model.k_max < 1) throw PreconditionError("model.k_max must be at least 1");
  if (model.k_max > grid.n_points) throw PreconditionError("model.k_max exceeds grid.n_points");
  if (!(model.gain_floor >= 0.0 && model.gain_floor < 1.0)) throw PreconditionError("model.gain_floor must lie in [0, 1)");
  if (!(model.pump_fwhm_nm > 0.0)) throw PreconditionError("model.pump_fwhm_nm must be positive");
  if (!(model.phasematch_fwhm_nm > 0.0)) throw PreconditionError("model.phasematch_fwhm_nm must be positive");
  if (!(state.n_th >= 0.0) || !(state.r >= 0.0)) throw PreconditionError("state: n_th and r must be non-negative");
}

ExperimentConfig parse_config(std::string_view text, const std::string& source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source_name, e.mark.line + 1, e.msg);
  }
  ExperimentConfig c;
  if (root.IsNull()) return c;
  const Reader r(source_name);
  if (!root.IsMap()) r.fail(root, "top level must be a mapping of sections");

  const std::map<std::string, Reader::Handler> sections{
      {"cavity",
       [&](const YAML::Node& n, const std::string& name) {
         r.section(n, name,
                   {{"length_m", bind(r, c.cavity.length_m)},
                    {"r_ic", bind(r, c.cavity.r_ic)},
                    {"r_oc", bind(r, c.cavity.r_oc)},
                    {"intracavity_loss", bind(r, c.cavity.intracavity_loss)},
                    {"gdd",
                     [&](const YAML::Node& list, const std::string& key) {
                       if (!list.IsSequence()) r.fail(list, key + ": expected a list");
                       c.cavity.gdd_contributions.clear();
                       for (const auto& entry : list) {
                         GddContribution g;
                         r.section(entry, key, {{"label", bind(r, g.label)}, {"fs2", bind(r, g.fs2)}});
                         c.cavity.gdd_contributions.push_back(g);
                       }
                     }}});
         r.checked(n, [&] { c.cavity.validate(); });
       }},
      {"detection",
       [&](const YAML::Node& n, const std::string& name) {
         r.section(n, name,
                   {{"eta_pd", bind(r, c.detection.eta_pd)},
                    {"eta_opt", bind(r, c.detection.eta_opt)},
                    {"visibility", bind(r, c.detection.visibility)},
                    {"eta_bkg", bind(r, c.detection.eta_bkg)}});
         r.checked(n, [&] { c.detection.validate(); });
       }},
      {"pump",
       [&](const YAML::Node& n, const std::string& name) {
         r.section(n, name, {{"power_mw", bind(r, c.pump.power_mw)}, {"threshold_mw", bind(r, c.pump.threshold_mw)}});
         r.checked(n, [&] { c.pump.validate(); });
       }},
      {"lo",
       [&](const YAML::Node& n, const std::string& name) {
         r.section(n, name,
                   {{"center_nm", bind(r, c.lo.center_nm)},
                    {"fwhm_nm", bind(r, c.lo.fwhm_nm)},
                    {"projection_widths_nm", [&](const YAML::Node& list, const std::string& key) {
                       if (!list.IsSequence()) r.fail(list, key + ": expected a list");
                       c.lo.projection_widths_nm.clear();
                       for (const auto& w : list) c.lo.projection_widths_nm.push_back(r.as<double>(w, key));
                     }}});
       }},
      {"grid",
       [&](const YAML::Node& n, const std::string& name) {
         r.section(n, name,
                   {{"center_nm", bind(r, c.grid.center_nm)},
                    {"span_nm", bind(r, c.grid.span_nm)},
                    {"n_points", bind(r, c.grid.n_points)}});
         r.checked(n, [&] { c.grid.make(); });
       }},
      {"model",
       [&](const YAML::Node& n, const std::string& name) {
         r.section(n, name,
                   {{"analysis_freq_mhz", bind(r, c.model.analysis_freq_mhz)},
                    {"k_max", bind(r, c.model.k_max)},
                    {"gain_floor", bind(r, c.model.gain_floor)},
                    {"pump_fwhm_nm", bind(r, c.model.pump_fwhm_nm)},
                    {"phasematch_fwhm_nm", bind(r, c.model.phasematch_fwhm_nm)},
                    {"report_modes", bind(r, c.model.report_modes)}});
       }},
      {"acquisition",
       [&](const YAML::Node& n, const std::string& name) {
         r.section(n, name,
                   {{"sample_rate", bind(r, c.acquisition.sample_rate)},
                    {"n_samples", bind(r, c.acquisition.n_samples)},
                    {"scan_span", bind(r, c.acquisition.scan_span)},
                    {"window", bind(r, c.acquisition.window)},
                    {"stride", bind(r, c.acquisition.stride)},
                    {"seed", bind(r, c.acquisition.rng_seed)}});
         r.checked(n, [&] { c.acquisition.validate(); });
       }},
      {"state",
       [&](const YAML::Node& n, const std::string& name) {
         r.section(n, name,
                   {{"n_th", bind(r, c.state.n_th)},
                    {"r", bind(r, c.state.r)},
                    {"alpha", bind(r, c.state.alpha)},
                    {"theta0", bind(r, c.state.theta0)}});
       }},
  };

  for (const auto& item : root) {
    const auto name = item.first.as<std::string>();
    const auto it = sections.find(name);
    if (it == sections.end()) r.fail(item.first, "unknown section '" + name + "'");
    it->second(item.second, name);
  }
  r.checked(root, [&] { c.validate(); });
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string serialize_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  out << YAML::Key << "cavity" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "length_m" << YAML::Value << c.cavity.length_m;
  out << YAML::Key << "r_ic" << YAML::Value << c.cavity.r_ic;
  out << YAML::Key << "r_oc" << YAML::Value << c.cavity.r_oc;
  out << YAML::Key << "intracavity_loss" << YAML::Value << c.cavity.intracavity_loss;
  out << YAML::Key << "gdd" << YAML::Value << YAML::BeginSeq;
  for (const auto& g : c.cavity.gdd_contributions) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "label" << YAML::Value << g.label << YAML::Key << "fs2"
        << YAML::Value << g.fs2 << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;

  out << YAML::Key << "detection" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "eta_pd" << YAML::Value << c.detection.eta_pd;
  out << YAML::Key << "eta_opt" << YAML::Value << c.detection.eta_opt;
  out << YAML::Key << "visibility" << YAML::Value << c.detection.visibility;
  out << YAML::Key << "eta_bkg" << YAML::Value << c.detection.eta_bkg;
  out << YAML::EndMap;

  out << YAML::Key << "pump" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "power_mw" << YAML::Value << c.pump.power_mw;
  out << YAML::Key << "threshold_mw" << YAML::Value << c.pump.threshold_mw;
  out << YAML::EndMap;

  out << YAML::Key << "lo" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "center_nm" << YAML::Value << c.lo.center_nm;
  out << YAML::Key << "fwhm_nm" << YAML::Value << c.lo.fwhm_nm;
  out << YAML::Key << "projection_widths_nm" << YAML::Value << YAML::Flow << c.lo.projection_widths_nm;
  out << YAML::EndMap;

  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "center_nm" << YAML::Value << c.grid.center_nm;
  out << YAML::Key << "span_nm" << YAML::Value << c.grid.span_nm;
  out << YAML::Key << "n_points" << YAML::Value << c.grid.n_points;
  out << YAML::EndMap;

  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "analysis_freq_mhz" << YAML::Value << c.model.analysis_freq_mhz;
  out << YAML::Key << "k_max" << YAML::Value << c.model.k_max;
  out << YAML::Key << "gain_floor" << YAML::Value << c.model.gain_floor;
  out << YAML::Key << "pump_fwhm_nm" << YAML::Value << c.model.pump_fwhm_nm;
  out << YAML::Key << "phasematch_fwhm_nm" << YAML::Value << c.model.phasematch_fwhm_nm;
  out << YAML::Key << "report_modes" << YAML::Value << c.model.report_modes;
  out << YAML::EndMap;

  out << YAML::Key << "acquisition" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "sample_rate" << YAML::Value << c.acquisition.sample_rate;
  out << YAML::Key << "n_samples" << YAML::Value << c.acquisition.n_samples;
  out << YAML::Key << "scan_span" << YAML::Value << c.acquisition.scan_span;
  out << YAML::Key << "window" << YAML::Value << c.acquisition.window;
  out << YAML::Key << "stride" << YAML::Value << c.acquisition.stride;
  out << YAML::Key << "seed" << YAML::Value << c.acquisition.rng_seed;
  out << YAML::EndMap;

  out << YAML::Key << "state" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_th" << YAML::Value << c.state.n_th;
  out << YAML::Key << "r" << YAML::Value << c.state.r;
  out << YAML::Key << "alpha" << YAML::Value << c.state.alpha;
  out << YAML::Key << "theta0" << YAML::Value << c.state.theta0;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::uint64_t config_hash(const ExperimentConfig& config) { return fnv1a(serialize_config(config)); }

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

}  // namespace spopo
