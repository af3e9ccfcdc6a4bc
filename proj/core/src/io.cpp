#include "nested/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "nested/version.hpp"

namespace nested {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string token;
  std::istringstream in(s);
  while (std::getline(in, token, sep)) parts.push_back(token);
  return parts;
}

std::int64_t parse_int(const std::string& text, const std::string& key) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(trim(text), &pos);
    if (pos != trim(text).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad integer for '" + key + "': " + text);
  }
}

std::uint64_t parse_u64(const std::string& text, const std::string& key) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(trim(text), &pos);
    if (pos != trim(text).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad unsigned integer for '" + key + "': " + text);
  }
}

double parse_real(const std::string& text, const std::string& key) {
  try {
    return parse_double(trim(text));
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad number for '" + key + "': " + text);
  }
}

SamplerKind parse_sampler_kind(const std::string& text) {
  if (text == "rejection") return SamplerKind::rejection;
  if (text == "ellipsoid") return SamplerKind::ellipsoid;
  if (text == "multi_ellipsoid") return SamplerKind::multi_ellipsoid;
  if (text == "random_walk") return SamplerKind::random_walk;
  if (text == "slice") return SamplerKind::slice;
  throw std::runtime_error("config: unknown sampler '" + text + "'");
}

std::map<std::string, std::string> parse_key_values(std::istream& in,
                                                    const std::string& what) {
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(what + ": line " + std::to_string(line_no) +
                               ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error(what + ": line " + std::to_string(line_no) +
                               ": empty key");
    }
    out[key] = value;
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

double parse_double(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || end != begin + text.size()) {
    throw std::invalid_argument("parse_double: bad number '" + text + "'");
  }
  return v;
}

RunSetup parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  auto kv = parse_key_values(in, "config '" + path + "'");

  static const std::set<std::string> known = {
      "problem", "a", "d", "levels", "sampler", "nlive", "tol", "seed",
      "workers", "output_dir", "steps", "step_scale", "target_accept",
      "enlargement", "max_clusters", "call_budget", "tune_warmup", "finalize",
      "plateau", "max_iterations", "dynamic_goal", "dynamic_budget",
      "dynamic_batch"};
  std::string unknown;
  for (const auto& [key, value] : kv) {
    if (!known.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) {
    throw std::runtime_error("config: unknown keys: " + unknown);
  }

  RunSetup setup;
  const auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  if (const auto* v = get("problem")) setup.problem_name = *v;
  if (const auto* v = get("a")) setup.problem_a = parse_real(*v, "a");
  if (const auto* v = get("d")) setup.problem_d = static_cast<int>(parse_int(*v, "d"));
  if (const auto* v = get("levels")) {
    for (const auto& pair : split(*v, ',')) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos) {
        throw std::runtime_error("config: levels entries are loglike:fraction, got '" +
                                 pair + "'");
      }
      setup.plateau_levels.emplace_back(parse_real(pair.substr(0, colon), "levels"),
                                        parse_real(pair.substr(colon + 1), "levels"));
    }
  }

  if (const auto* v = get("sampler")) setup.config.sampler.kind = parse_sampler_kind(*v);
  if (const auto* v = get("nlive")) setup.config.nlive = static_cast<int>(parse_int(*v, "nlive"));
  if (const auto* v = get("tol")) setup.config.stop_tol = parse_real(*v, "tol");
  if (const auto* v = get("seed")) setup.config.seed = parse_u64(*v, "seed");
  if (const auto* v = get("workers")) setup.config.workers = static_cast<int>(parse_int(*v, "workers"));
  if (const auto* v = get("output_dir")) setup.output_dir = *v;
  if (const auto* v = get("steps")) setup.config.sampler.steps = static_cast<int>(parse_int(*v, "steps"));
  if (const auto* v = get("step_scale")) setup.config.sampler.step_scale = parse_real(*v, "step_scale");
  if (const auto* v = get("target_accept")) setup.config.sampler.target_accept = parse_real(*v, "target_accept");
  if (const auto* v = get("enlargement")) setup.config.sampler.enlargement = parse_real(*v, "enlargement");
  if (const auto* v = get("max_clusters")) setup.config.sampler.max_clusters = static_cast<int>(parse_int(*v, "max_clusters"));
  if (const auto* v = get("call_budget")) setup.config.sampler.call_budget = parse_int(*v, "call_budget");
  if (const auto* v = get("tune_warmup")) setup.config.sampler.tune_warmup = parse_int(*v, "tune_warmup");
  if (const auto* v = get("max_iterations")) setup.config.max_iterations = parse_int(*v, "max_iterations");

  if (const auto* v = get("finalize")) {
    if (*v == "remainder") {
      setup.config.finalize = FinalizeMode::remainder_estimate;
    } else if (*v == "kill") {
      setup.config.finalize = FinalizeMode::kill_one_by_one;
    } else {
      throw std::runtime_error("config: finalize must be remainder or kill, got '" + *v + "'");
    }
  }
  if (const auto* v = get("plateau")) {
    if (*v == "remove_all") {
      setup.config.plateau = PlateauMode::remove_all;
    } else if (*v == "top_up") {
      setup.config.plateau = PlateauMode::top_up;
    } else if (*v == "naive_single") {
      setup.config.plateau = PlateauMode::naive_single;
    } else {
      throw std::runtime_error("config: unknown plateau mode '" + *v + "'");
    }
  }

  const bool has_dyn = get("dynamic_goal") || get("dynamic_budget") || get("dynamic_batch");
  if (has_dyn) {
    DynamicGoal goal;
    if (const auto* v = get("dynamic_goal")) goal.posterior_fraction = parse_real(*v, "dynamic_goal");
    if (const auto* v = get("dynamic_budget")) goal.budget = parse_int(*v, "dynamic_budget");
    if (const auto* v = get("dynamic_batch")) goal.batch = static_cast<int>(parse_int(*v, "dynamic_batch"));
    setup.config.dynamic = goal;
  }

  if (setup.config.nlive < 2) {
    throw std::runtime_error("config: nlive must be >= 2");
  }
  return setup;
}

Problem make_problem(const RunSetup& setup) {
  const auto& name = setup.problem_name;
  if (name == "gaussian") return truncated_gaussian(setup.problem_a, setup.problem_d);
  if (name == "cone") return cone_volume_problem(setup.problem_d);
  if (name == "harmonic") return harmonic_energy(setup.problem_a, setup.problem_d);
  if (name == "plateau") {
    if (setup.plateau_levels.empty()) {
      throw std::runtime_error("config: plateau problem needs levels=");
    }
    return plateau_problem(setup.plateau_levels);
  }
  if (name == "eggbox") return eggbox_problem();
  if (name == "rosenbrock") return rosenbrock_problem();
  if (name == "shells") return gaussian_shells_problem();
  throw std::runtime_error("config: unknown problem '" + name + "'");
}

namespace {

std::string finalize_text(FinalizeMode mode) {
  return mode == FinalizeMode::remainder_estimate ? "remainder" : "kill";
}

std::string plateau_text(PlateauMode mode) {
  switch (mode) {
    case PlateauMode::remove_all: return "remove_all";
    case PlateauMode::top_up: return "top_up";
    case PlateauMode::naive_single: return "naive_single";
  }
  return "remove_all";
}

std::string sampler_text(SamplerKind kind) { return to_string(kind); }

}  // namespace

void write_manifest(const std::string& path, const RunManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const auto& s = manifest.setup;
  out << "problem=" << s.problem_name << "\n";
  out << "a=" << format_double(s.problem_a) << "\n";
  out << "d=" << s.problem_d << "\n";
  if (!s.plateau_levels.empty()) {
    out << "levels=";
    for (std::size_t i = 0; i < s.plateau_levels.size(); ++i) {
      if (i > 0) out << ",";
      out << format_double(s.plateau_levels[i].first) << ":"
          << format_double(s.plateau_levels[i].second);
    }
    out << "\n";
  }
  out << "sampler=" << sampler_text(s.config.sampler.kind) << "\n";
  out << "nlive=" << s.config.nlive << "\n";
  out << "tol=" << format_double(s.config.stop_tol) << "\n";
  out << "seed=" << s.config.seed << "\n";
  out << "workers=" << s.config.workers << "\n";
  out << "steps=" << s.config.sampler.steps << "\n";
  out << "step_scale=" << format_double(s.config.sampler.step_scale) << "\n";
  out << "target_accept=" << format_double(s.config.sampler.target_accept) << "\n";
  out << "enlargement=" << format_double(s.config.sampler.enlargement) << "\n";
  out << "max_clusters=" << s.config.sampler.max_clusters << "\n";
  out << "call_budget=" << s.config.sampler.call_budget << "\n";
  out << "tune_warmup=" << s.config.sampler.tune_warmup << "\n";
  out << "finalize=" << finalize_text(s.config.finalize) << "\n";
  out << "plateau=" << plateau_text(s.config.plateau) << "\n";
  out << "max_iterations=" << s.config.max_iterations << "\n";
  if (s.config.dynamic) {
    out << "dynamic_goal=" << format_double(s.config.dynamic->posterior_fraction) << "\n";
    out << "dynamic_budget=" << s.config.dynamic->budget << "\n";
    out << "dynamic_batch=" << s.config.dynamic->batch << "\n";
  }
  out << "output_dir=" << s.output_dir << "\n";
  out << "version=" << manifest.version << "\n";
  out << "fingerprint=" << manifest.fingerprint << "\n";
  out << "n_like_calls=" << manifest.n_like_calls << "\n";
  out << "truncated=" << (manifest.truncated ? 1 : 0) << "\n";
  out << "started_at=" << manifest.started_at << "\n";
  out << "finished_at=" << manifest.finished_at << "\n";
}

RunManifest read_manifest(const std::string& path) {
  auto kv = read_key_value_file(path);
  RunManifest manifest;
  auto& s = manifest.setup;
  const auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (const auto* v = get("problem")) s.problem_name = *v;
  if (const auto* v = get("a")) s.problem_a = parse_double(*v);
  if (const auto* v = get("d")) s.problem_d = static_cast<int>(parse_int(*v, "d"));
  if (const auto* v = get("levels")) {
    for (const auto& pair : split(*v, ',')) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos) {
        throw std::runtime_error("manifest: bad levels entry '" + pair + "'");
      }
      s.plateau_levels.emplace_back(parse_double(pair.substr(0, colon)),
                                    parse_double(pair.substr(colon + 1)));
    }
  }
  if (const auto* v = get("sampler")) s.config.sampler.kind = parse_sampler_kind(*v);
  if (const auto* v = get("nlive")) s.config.nlive = static_cast<int>(parse_int(*v, "nlive"));
  if (const auto* v = get("tol")) s.config.stop_tol = parse_double(*v);
  if (const auto* v = get("seed")) s.config.seed = parse_u64(*v, "seed");
  if (const auto* v = get("workers")) s.config.workers = static_cast<int>(parse_int(*v, "workers"));
  if (const auto* v = get("steps")) s.config.sampler.steps = static_cast<int>(parse_int(*v, "steps"));
  if (const auto* v = get("step_scale")) s.config.sampler.step_scale = parse_double(*v);
  if (const auto* v = get("target_accept")) s.config.sampler.target_accept = parse_double(*v);
  if (const auto* v = get("enlargement")) s.config.sampler.enlargement = parse_double(*v);
  if (const auto* v = get("max_clusters")) s.config.sampler.max_clusters = static_cast<int>(parse_int(*v, "max_clusters"));
  if (const auto* v = get("call_budget")) s.config.sampler.call_budget = parse_int(*v, "call_budget");
  if (const auto* v = get("tune_warmup")) s.config.sampler.tune_warmup = parse_int(*v, "tune_warmup");
  if (const auto* v = get("finalize")) {
    s.config.finalize = (*v == "kill") ? FinalizeMode::kill_one_by_one
                                       : FinalizeMode::remainder_estimate;
  }
  if (const auto* v = get("plateau")) {
    if (*v == "top_up") {
      s.config.plateau = PlateauMode::top_up;
    } else if (*v == "naive_single") {
      s.config.plateau = PlateauMode::naive_single;
    } else {
      s.config.plateau = PlateauMode::remove_all;
    }
  }
  if (const auto* v = get("max_iterations")) s.config.max_iterations = parse_int(*v, "max_iterations");
  if (get("dynamic_budget") || get("dynamic_goal") || get("dynamic_batch")) {
    DynamicGoal goal;
    if (const auto* v = get("dynamic_goal")) goal.posterior_fraction = parse_double(*v);
    if (const auto* v = get("dynamic_budget")) goal.budget = parse_int(*v, "dynamic_budget");
    if (const auto* v = get("dynamic_batch")) goal.batch = static_cast<int>(parse_int(*v, "dynamic_batch"));
    s.config.dynamic = goal;
  }
  if (const auto* v = get("output_dir")) s.output_dir = *v;
  if (const auto* v = get("version")) manifest.version = *v;
  if (const auto* v = get("fingerprint")) manifest.fingerprint = *v;
  if (const auto* v = get("n_like_calls")) manifest.n_like_calls = parse_int(*v, "n_like_calls");
  if (const auto* v = get("truncated")) manifest.truncated = (*v == "1");
  if (const auto* v = get("started_at")) manifest.started_at = *v;
  if (const auto* v = get("finished_at")) manifest.finished_at = *v;
  return manifest;
}

void write_dead_points(const std::string& path, const RunTrace& trace) {
  std::size_t dim = 0;
  if (!trace.dead.empty()) {
    dim = trace.dead.front().particle.theta.size();
  } else if (!trace.final_live.empty()) {
    dim = trace.final_live.front().theta.size();
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "order,log_like,birth_log_like,n_active,insertion_index";
  for (std::size_t k = 0; k < dim; ++k) out << ",theta_" << k;
  out << "\n";
  const auto row = [&](std::int64_t order, const Particle& p, std::int64_t n_active,
                       std::int64_t insertion) {
    out << order << "," << format_double(p.log_like.log()) << ","
        << format_double(p.birth_log_like.log()) << "," << n_active << ","
        << insertion;
    for (std::size_t k = 0; k < dim; ++k) out << "," << format_double(p.theta[k]);
    out << "\n";
  };
  for (const auto& d : trace.dead) {
    row(d.order, d.particle, d.n_active, d.insertion_index);
  }
  // Final live rows: order -1 (never died), n_active 0 by convention; the
  // insertion index recorded at birth is kept for the insertion test.
  for (const auto& p : trace.final_live) {
    row(-1, p, 0, p.insertion_index);
  }
}

RunTrace read_dead_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  RunTrace trace;
  std::string line;
  int line_no = 0;
  std::size_t n_columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (line_no == 1) {
      if (fields.size() < 5 || fields[0] != "order" || fields[1] != "log_like" ||
          fields[2] != "birth_log_like" || fields[3] != "n_active" ||
          fields[4] != "insertion_index") {
        throw std::runtime_error(path + ": line 1: unexpected header");
      }
      n_columns = fields.size();
      continue;
    }
    if (fields.size() != n_columns) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": expected " + std::to_string(n_columns) +
                               " fields, got " + std::to_string(fields.size()));
    }
    try {
      const std::int64_t order = parse_int(fields[0], "order");
      Particle p;
      p.log_like = LogValue(parse_double(fields[1]));
      p.birth_log_like = LogValue(parse_double(fields[2]));
      const std::int64_t n_active = parse_int(fields[3], "n_active");
      const std::int64_t insertion = parse_int(fields[4], "insertion_index");
      p.theta.reserve(n_columns - 5);
      for (std::size_t k = 5; k < n_columns; ++k) {
        p.theta.push_back(parse_double(fields[k]));
      }
      p.insertion_index = insertion;
      if (order < 0) {
        trace.final_live.push_back(std::move(p));
      } else {
        trace.dead.push_back({std::move(p), order, n_active, insertion});
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  if (trace.dead.empty() && trace.final_live.empty()) {
    throw std::runtime_error(path + ": no data rows");
  }
  return trace;
}

void write_summary(const std::string& path, const EvidenceReport& report,
                   double insertion_p, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "log_z=" << format_double(report.log_z) << "\n";
  out << "sigma_log_z=" << format_double(report.sigma_log_z) << "\n";
  out << "h_nats=" << format_double(report.h_nats) << "\n";
  out << "ess=" << format_double(report.ess) << "\n";
  out << "n_like_calls=" << report.n_like_calls << "\n";
  out << "insertion_p=" << format_double(insertion_p) << "\n";
  out << "seed=" << seed << "\n";
  out << "version=" << kVersion << "\n";
}

std::map<std::string, std::string> read_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return parse_key_values(in, path);
}

}  // namespace nested
