#include "dampsym/io.hpp"

#include <charconv>
#include <cfloat>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#ifdef __unix__
#include <unistd.h>
#endif

namespace dampsym {

using nlohmann::json;

namespace {

Vector vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  Vector v;
  v.reserve(j.size());
  for (const json& x : j) {
    if (!x.is_number()) throw ConfigError(std::string(what) + " must be an array of numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ConfigError(std::string(what) + " must be a nonempty array of rows");
  std::vector<Vector> rows;
  for (const json& r : j) rows.push_back(vector_from_json(r, what));
  try {
    return Matrix::from_rows(rows);
  } catch (const DimensionError&) {
    throw ConfigError(std::string(what) + " has rows of different lengths");
  }
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (const Vector& r : m.to_rows()) rows.push_back(r);
  return rows;
}

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("missing field '") + key + "'");
  return *it;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string(), path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what(), path.string());
  }
}

}  // namespace

DampedLinearSystem system_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("system must be an object");
  std::string label;
  if (auto it = j.find("label"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("system label must be a string");
    label = it->get<std::string>();
  }
  Matrix k = matrix_from_json(require(j, "K"), "K");
  Matrix c = matrix_from_json(require(j, "C"), "C");
  try {
    return make_system(std::move(k), std::move(c), std::move(label));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

json system_to_json(const DampedLinearSystem& sys) {
  return json{{"label", sys.label()},
              {"K", matrix_to_json(sys.stiffness())},
              {"C", matrix_to_json(sys.damping())}};
}

RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir, bool check) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  const json& sys_node = require(j, "system");
  json sys_json;
  if (sys_node.is_string()) {
    std::filesystem::path p = sys_node.get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    sys_json = read_json_file(p);
  } else {
    sys_json = sys_node;
  }

  const json& init = require(j, "initial");
  if (!init.is_object()) throw ConfigError("initial must be an object");
  PhaseState initial{0.0, vector_from_json(require(init, "q"), "initial.q"),
                     vector_from_json(require(init, "p"), "initial.p")};
  if (auto it = init.find("t"); it != init.end()) {
    if (!it->is_number()) throw ConfigError("initial.t must be a number");
    initial.t = it->get<double>();
  }

  const json& tau = require(j, "tau");
  if (!tau.is_number()) throw ConfigError("tau must be a number");
  const json& steps = require(j, "n_steps");
  if (!steps.is_number_integer() || steps.get<long long>() < 0)
    throw ConfigError("n_steps must be a nonnegative integer");

  RunConfig cfg{system_from_json(sys_json), std::move(initial), tau.get<double>(),
                static_cast<std::size_t>(steps.get<long long>()), Method::midpoint_direct,
                kDefaultStiffnessGuard, std::nullopt, {}};

  if (auto it = j.find("method"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("method must be a string");
    try {
      cfg.method = parse_method(it->get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (auto it = j.find("epsilon"); it != j.end()) {
    if (!it->is_number()) throw ConfigError("epsilon must be a number");
    cfg.epsilon = it->get<double>();
  }
  if (auto it = j.find("horizon"); it != j.end()) {
    if (!it->is_number()) throw ConfigError("horizon must be a number");
    cfg.horizon = it->get<double>();
  }
  if (auto it = j.find("output_prefix"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("output_prefix must be a string");
    cfg.output_prefix = it->get<std::string>();
  }
  if (check) validate(cfg);
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  json j{{"system", system_to_json(cfg.system)},
         {"initial", {{"q", cfg.initial.q}, {"p", cfg.initial.p}, {"t", cfg.initial.t}}},
         {"tau", cfg.tau},
         {"n_steps", cfg.n_steps},
         {"method", std::string(to_string(cfg.method))},
         {"epsilon", cfg.epsilon}};
  if (cfg.horizon) j["horizon"] = *cfg.horizon;
  if (!cfg.output_prefix.empty()) j["output_prefix"] = cfg.output_prefix;
  return j;
}

RunConfig load_config(const std::filesystem::path& path, bool check) {
  const json j = read_json_file(path);
  try {
    return config_from_json(j, path.parent_path(), check);
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), e.path().empty() ? path.string() : e.path());
  }
}

void validate(const RunConfig& cfg) {
  if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau)) throw ConfigError("tau must be positive");
  if (cfg.n_steps == 0) throw ConfigError("n_steps must be at least 1");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  const std::size_t n = cfg.system.dof();
  if (cfg.initial.q.size() != n || cfg.initial.p.size() != n)
    throw ConfigError("initial state has dimension " + std::to_string(cfg.initial.q.size()) + "/" +
                      std::to_string(cfg.initial.p.size()) + ", system has " + std::to_string(n));
  for (double v : cfg.initial.stacked())
    if (!std::isfinite(v)) throw ConfigError("initial state must be finite");
  if (cfg.horizon) {
    const double span = cfg.tau * static_cast<double>(cfg.n_steps);
    const double tol = 8.0 * DBL_EPSILON * std::max(1.0, std::abs(*cfg.horizon));
    if (std::abs(span - *cfg.horizon) > tol)
      throw ConfigError("tau * n_steps = " + format_double(span) + " does not match horizon " +
                        format_double(*cfg.horizon));
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw OutputError("cannot create directory for " + path.string() + ": " + ec.message(),
                              path.string());
  }
  fs::path tmp = path;
#ifdef __unix__
  tmp += ".tmp." + std::to_string(::getpid());
#else
  tmp += ".tmp";
#endif
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot open " + tmp.string() + " for writing", path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw OutputError("write failed for " + tmp.string(), path.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignore;
    fs::remove(tmp, ignore);
    throw OutputError("cannot rename into " + path.string() + ": " + ec.message(), path.string());
  }
}

}  // namespace dampsym
