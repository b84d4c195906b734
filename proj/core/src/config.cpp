#include "binopt/config.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "binopt/csv.hpp"

namespace binopt {

using json = nlohmann::ordered_json;

std::string to_string(DriftFamily family) {
  switch (family) {
    case DriftFamily::identity: return "identity";
    case DriftFamily::sine: return "sine";
    case DriftFamily::cubic: return "cubic";
  }
  return "unknown";
}

ThetaVec TruthSpec::expected() const {
  switch (family) {
    case DriftFamily::identity: return {1.0, 0.0, 0.0, sigma0};
    case DriftFamily::sine: return {1.0, 0.0, -1.0 / 6.0, sigma0};
    case DriftFamily::cubic: return {theta[0], theta[1], theta[2], sigma0};
  }
  throw std::logic_error("TruthSpec: bad family");
}

DriftFn TruthSpec::perturbation() const {
  switch (family) {
    case DriftFamily::identity:
      return [](double y) { return y; };
    case DriftFamily::sine:
      return [](double y) { return std::sin(y); };
    case DriftFamily::cubic: {
      const auto t = theta;
      return [t](double y) { return cubic_perturbation(t[0], t[1], t[2], y); };
    }
  }
  throw std::logic_error("TruthSpec: bad family");
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&errors] {
        std::ostringstream msg;
        msg << "invalid config (" << errors.size() << " error"
            << (errors.size() == 1 ? "" : "s") << "):";
        for (const auto& e : errors) msg << "\n  - " << e;
        return msg.str();
      }()),
      errors_(std::move(errors)) {}

std::vector<std::string> validate_config(const ExperimentConfig& config) {
  std::vector<std::string> errors;
  auto fail = [&errors](const std::string& msg) { errors.push_back(msg); };

  if (config.name.empty()) fail("name: must not be empty");

  if (!(config.truth.sigma0 > 0.0) || !std::isfinite(config.truth.sigma0)) {
    fail("truth.sigma0: must be finite and > 0");
  }
  if (!(config.truth.r >= 0.0) || !std::isfinite(config.truth.r)) {
    fail("truth.r: must be finite and >= 0");
  }
  for (double t : config.truth.theta) {
    if (!std::isfinite(t)) {
      fail("truth.theta: must be finite");
      break;
    }
  }

  if (!config.grid.is_valid()) {
    fail("grid: requires y_min < 0 < y_max, n_y >= 3, n_tau >= 1 and "
         "tau_star > 0");
  }

  if (config.noise_levels.empty()) fail("noise.levels: must not be empty");
  for (std::size_t i = 0; i < config.noise_levels.size(); ++i) {
    if (!(config.noise_levels[i] >= 0.0) ||
        !std::isfinite(config.noise_levels[i])) {
      fail("noise.levels[" + std::to_string(i) + "]: must be >= 0");
    }
  }

  if (!config.measurement.interior_nodes) {
    const auto& pts = config.measurement.points;
    if (pts.empty()) fail("measurement.points: must not be empty");
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (!std::isfinite(pts[j]) || pts[j] < config.grid.y_min ||
          pts[j] > config.grid.y_max) {
        fail("measurement.points[" + std::to_string(j) +
             "]: outside [y_min, y_max]");
      }
      if (j > 0 && !(pts[j - 1] < pts[j])) {
        fail("measurement.points: must be strictly increasing");
      }
    }
  }

  static const char* kCoordNames[4] = {"theta1", "theta2", "theta3",
                                       "sigma0"};
  for (int p = 0; p < 4; ++p) {
    if (!std::isfinite(config.prior.lower[p]) ||
        !std::isfinite(config.prior.upper[p]) ||
        !(config.prior.lower[p] < config.prior.upper[p])) {
      fail(std::string("prior.") + kCoordNames[p] +
           ": lower must be strictly below upper");
    }
  }
  if (!(config.prior.lower[3] > 0.0)) {
    fail("prior.sigma0.lower: must be > 0");
  }

  if (config.sampler.iterations == 0) {
    fail("sampler.iterations: must be >= 1");
  }
  if (config.sampler.burn_in >= config.sampler.iterations) {
    fail("sampler.burn_in: must be below sampler.iterations");
  }
  for (int p = 0; p < 4; ++p) {
    if (!(config.sampler.gamma[p] >= 0.0) ||
        !std::isfinite(config.sampler.gamma[p])) {
      fail("sampler.gamma[" + std::to_string(p) + "]: must be >= 0");
    }
  }

  if (config.lm_enabled) {
    try {
      config.lm.validate();
    } catch (const std::exception&) {
      fail("lm: invalid settings (lambda0 >= 0, lambda_up > 1 > "
           "lambda_down > 0, positive tolerances)");
    }
  }

  if (config.initial_guesses.empty()) {
    fail("initial_guesses: need at least one guess");
  }
  for (std::size_t g = 0; g < config.initial_guesses.size(); ++g) {
    for (double t : config.initial_guesses[g]) {
      if (!std::isfinite(t)) {
        fail("initial_guesses[" + std::to_string(g) + "]: must be finite");
        break;
      }
    }
    if (errors.empty() && !config.prior.contains(config.initial_guesses[g])) {
      fail("initial_guesses[" + std::to_string(g) +
           "]: outside the prior box");
    }
  }

  if (config.output_dir.empty()) fail("output_dir: must not be empty");
  if (!(config.sigma_eps_floor > 0.0) ||
      !std::isfinite(config.sigma_eps_floor)) {
    fail("sigma_eps_floor: must be > 0");
  }
  if (config.histogram_bins < 1) fail("histogram_bins: must be >= 1");

  return errors;
}

namespace {

class Parser {
 public:
  explicit Parser(const json& root) : root_(root) {}

  ExperimentConfig parse() {
    ExperimentConfig config;
    check_keys(root_, "",
               {"name", "truth", "grid", "noise", "measurement", "prior",
                "sampler", "lm", "initial_guesses", "output_dir",
                "sigma_eps_floor", "histogram_bins"});

    get_string(root_, "", "name", config.name);
    if (root_.contains("truth")) parse_truth(root_["truth"], config.truth);
    if (root_.contains("grid")) parse_grid(root_["grid"], config.grid);
    if (root_.contains("noise")) parse_noise(root_["noise"], config);
    if (root_.contains("measurement")) {
      parse_measurement(root_["measurement"], config.measurement);
    }
    if (root_.contains("prior")) parse_prior(root_["prior"], config.prior);
    if (root_.contains("sampler")) {
      parse_sampler(root_["sampler"], config.sampler);
    }
    if (root_.contains("lm")) parse_lm(root_["lm"], config);
    if (root_.contains("initial_guesses")) {
      parse_guesses(root_["initial_guesses"], config.initial_guesses);
    }
    get_string(root_, "", "output_dir", config.output_dir);
    get_number(root_, "", "sigma_eps_floor", config.sigma_eps_floor);
    get_int(root_, "", "histogram_bins", config.histogram_bins);

    if (!errors_.empty()) throw ConfigError(std::move(errors_));
    return config;
  }

 private:
  const json& root_;
  std::vector<std::string> errors_;

  void fail(const std::string& path, const std::string& msg) {
    errors_.push_back(path.empty() ? msg : path + ": " + msg);
  }

  void check_keys(const json& node, const std::string& path,
                  std::initializer_list<const char*> allowed) {
    if (!node.is_object()) {
      fail(path.empty() ? "config" : path, "must be an object");
      return;
    }
    for (const auto& [key, value] : node.items()) {
      (void)value;
      if (std::find_if(allowed.begin(), allowed.end(), [&key](const char* a) {
            return key == a;
          }) == allowed.end()) {
        fail(path.empty() ? key : path + "." + key, "unknown key");
      }
    }
  }

  bool get_number(const json& node, const std::string& path, const char* key,
                  double& out) {
    if (!node.contains(key)) return false;
    const auto& v = node[key];
    if (!v.is_number()) {
      fail(join(path, key), "must be a number");
      return false;
    }
    out = v.get<double>();
    return true;
  }

  bool get_int(const json& node, const std::string& path, const char* key,
               int& out) {
    if (!node.contains(key)) return false;
    const auto& v = node[key];
    if (!v.is_number_integer()) {
      fail(join(path, key), "must be an integer");
      return false;
    }
    out = v.get<int>();
    return true;
  }

  bool get_size(const json& node, const std::string& path, const char* key,
                std::size_t& out) {
    if (!node.contains(key)) return false;
    const auto& v = node[key];
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      fail(join(path, key), "must be a non-negative integer");
      return false;
    }
    out = v.get<std::size_t>();
    return true;
  }

  bool get_seed(const json& node, const std::string& path, const char* key,
                std::uint64_t& out) {
    if (!node.contains(key)) return false;
    const auto& v = node[key];
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      fail(join(path, key), "must be a non-negative integer");
      return false;
    }
    out = v.get<std::uint64_t>();
    return true;
  }

  bool get_bool(const json& node, const std::string& path, const char* key,
                bool& out) {
    if (!node.contains(key)) return false;
    const auto& v = node[key];
    if (!v.is_boolean()) {
      fail(join(path, key), "must be a boolean");
      return false;
    }
    out = v.get<bool>();
    return true;
  }

  bool get_string(const json& node, const std::string& path, const char* key,
                  std::string& out) {
    if (!node.contains(key)) return false;
    const auto& v = node[key];
    if (!v.is_string()) {
      fail(join(path, key), "must be a string");
      return false;
    }
    out = v.get<std::string>();
    return true;
  }

  static std::string join(const std::string& path, const char* key) {
    return path.empty() ? key : path + "." + key;
  }

  void parse_truth(const json& node, TruthSpec& truth) {
    check_keys(node, "truth", {"drift", "theta", "sigma0", "r"});
    if (!node.is_object()) return;
    std::string drift;
    if (get_string(node, "truth", "drift", drift)) {
      if (drift == "identity") {
        truth.family = DriftFamily::identity;
      } else if (drift == "sine") {
        truth.family = DriftFamily::sine;
      } else if (drift == "cubic") {
        truth.family = DriftFamily::cubic;
      } else {
        fail("truth.drift", "must be one of identity, sine, cubic");
      }
    }
    if (node.contains("theta")) {
      if (truth.family != DriftFamily::cubic) {
        fail("truth.theta", "only valid for drift 'cubic'");
      } else if (!node["theta"].is_array() || node["theta"].size() != 3) {
        fail("truth.theta", "must be an array of 3 numbers");
      } else {
        for (int p = 0; p < 3; ++p) {
          const auto& v = node["theta"][static_cast<std::size_t>(p)];
          if (!v.is_number()) {
            fail("truth.theta", "must be an array of 3 numbers");
            break;
          }
          truth.theta[static_cast<std::size_t>(p)] = v.get<double>();
        }
      }
    }
    get_number(node, "truth", "sigma0", truth.sigma0);
    get_number(node, "truth", "r", truth.r);
  }

  void parse_grid(const json& node, GridSpec& grid) {
    check_keys(node, "grid", {"y_min", "y_max", "n_y", "n_tau", "tau_star"});
    if (!node.is_object()) return;
    get_number(node, "grid", "y_min", grid.y_min);
    get_number(node, "grid", "y_max", grid.y_max);
    get_int(node, "grid", "n_y", grid.n_y);
    get_int(node, "grid", "n_tau", grid.n_tau);
    get_number(node, "grid", "tau_star", grid.tau_star);
  }

  void parse_noise(const json& node, ExperimentConfig& config) {
    check_keys(node, "noise", {"levels", "seed"});
    if (!node.is_object()) return;
    if (node.contains("levels")) {
      const auto& levels = node["levels"];
      if (!levels.is_array() || levels.empty()) {
        fail("noise.levels", "must be a non-empty array of numbers");
      } else {
        config.noise_levels.clear();
        for (const auto& v : levels) {
          if (!v.is_number()) {
            fail("noise.levels", "must be a non-empty array of numbers");
            break;
          }
          config.noise_levels.push_back(v.get<double>());
        }
      }
    }
    get_seed(node, "noise", "seed", config.noise_seed);
  }

  void parse_measurement(const json& node, MeasurementSpec& spec) {
    check_keys(node, "measurement", {"points"});
    if (!node.is_object() || !node.contains("points")) return;
    const auto& pts = node["points"];
    if (pts.is_string()) {
      if (pts.get<std::string>() == "interior-nodes") {
        spec.interior_nodes = true;
      } else {
        fail("measurement.points",
             "must be \"interior-nodes\" or an array of numbers");
      }
    } else if (pts.is_array()) {
      spec.interior_nodes = false;
      spec.points.clear();
      for (const auto& v : pts) {
        if (!v.is_number()) {
          fail("measurement.points",
               "must be \"interior-nodes\" or an array of numbers");
          return;
        }
        spec.points.push_back(v.get<double>());
      }
    } else {
      fail("measurement.points",
           "must be \"interior-nodes\" or an array of numbers");
    }
  }

  void parse_prior(const json& node, PriorBox& prior) {
    static const char* kNames[4] = {"theta1", "theta2", "theta3", "sigma0"};
    check_keys(node, "prior", {"theta1", "theta2", "theta3", "sigma0"});
    if (!node.is_object()) return;
    for (int p = 0; p < 4; ++p) {
      if (!node.contains(kNames[p])) continue;
      const auto& bounds = node[kNames[p]];
      const std::string path = std::string("prior.") + kNames[p];
      check_keys(bounds, path, {"lower", "upper"});
      if (!bounds.is_object()) continue;
      get_number(bounds, path, "lower", prior.lower[p]);
      get_number(bounds, path, "upper", prior.upper[p]);
    }
  }

  void parse_sampler(const json& node, SamplerSettings& sampler) {
    check_keys(node, "sampler",
               {"iterations", "burn_in", "gamma", "seed", "adapt"});
    if (!node.is_object()) return;
    get_size(node, "sampler", "iterations", sampler.iterations);
    get_size(node, "sampler", "burn_in", sampler.burn_in);
    if (node.contains("gamma")) {
      const auto& g = node["gamma"];
      if (!g.is_array() || g.size() != 4) {
        fail("sampler.gamma", "must be an array of 4 numbers");
      } else {
        for (int p = 0; p < 4; ++p) {
          const auto& v = g[static_cast<std::size_t>(p)];
          if (!v.is_number()) {
            fail("sampler.gamma", "must be an array of 4 numbers");
            break;
          }
          sampler.gamma[static_cast<std::size_t>(p)] = v.get<double>();
        }
      }
    }
    get_seed(node, "sampler", "seed", sampler.seed);
    get_bool(node, "sampler", "adapt", sampler.adapt);
  }

  void parse_lm(const json& node, ExperimentConfig& config) {
    check_keys(node, "lm",
               {"enabled", "lambda0", "lambda_up", "lambda_down", "max_iters",
                "tol_step", "tol_grad", "fd_step", "project_to_prior"});
    if (!node.is_object()) return;
    get_bool(node, "lm", "enabled", config.lm_enabled);
    get_number(node, "lm", "lambda0", config.lm.lambda0);
    get_number(node, "lm", "lambda_up", config.lm.lambda_up);
    get_number(node, "lm", "lambda_down", config.lm.lambda_down);
    get_int(node, "lm", "max_iters", config.lm.max_iters);
    get_number(node, "lm", "tol_step", config.lm.tol_step);
    get_number(node, "lm", "tol_grad", config.lm.tol_grad);
    get_number(node, "lm", "fd_step", config.lm.fd_step);
    get_bool(node, "lm", "project_to_prior", config.lm.project_to_prior);
  }

  void parse_guesses(const json& node, std::vector<ThetaVec>& guesses) {
    if (!node.is_array() || node.empty()) {
      fail("initial_guesses", "must be a non-empty array of 4-vectors");
      return;
    }
    guesses.clear();
    for (std::size_t g = 0; g < node.size(); ++g) {
      const auto& v = node[g];
      if (!v.is_array() || v.size() != 4) {
        fail("initial_guesses[" + std::to_string(g) + "]",
             "must be an array of 4 numbers");
        continue;
      }
      ThetaVec guess{};
      bool ok = true;
      for (int p = 0; p < 4; ++p) {
        const auto& x = v[static_cast<std::size_t>(p)];
        if (!x.is_number()) {
          fail("initial_guesses[" + std::to_string(g) + "]",
               "must be an array of 4 numbers");
          ok = false;
          break;
        }
        guess[static_cast<std::size_t>(p)] = x.get<double>();
      }
      if (ok) guesses.push_back(guess);
    }
  }
};

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("JSON parse error: ") + e.what()});
  }
  ExperimentConfig config = Parser(root).parse();

  // The paper's nominal guesses sit on or outside the box boundary
  // (sigma0 = 0); clamp them in rather than rejecting.
  for (auto& guess : config.initial_guesses) {
    guess = config.prior.clamp(guess);
  }

  auto errors = validate_config(config);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = csv::read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError({e.what()});
  }
  return parse_config(text);
}

std::string config_to_json(const ExperimentConfig& config) {
  json root;
  root["name"] = config.name;
  root["truth"] = {{"drift", to_string(config.truth.family)},
                   {"sigma0", config.truth.sigma0},
                   {"r", config.truth.r}};
  if (config.truth.family == DriftFamily::cubic) {
    root["truth"]["theta"] = config.truth.theta;
  }
  root["grid"] = {{"y_min", config.grid.y_min},
                  {"y_max", config.grid.y_max},
                  {"n_y", config.grid.n_y},
                  {"n_tau", config.grid.n_tau},
                  {"tau_star", config.grid.tau_star}};
  root["noise"] = {{"levels", config.noise_levels},
                   {"seed", config.noise_seed}};
  if (config.measurement.interior_nodes) {
    root["measurement"] = {{"points", "interior-nodes"}};
  } else {
    root["measurement"] = {{"points", config.measurement.points}};
  }
  static const char* kNames[4] = {"theta1", "theta2", "theta3", "sigma0"};
  for (int p = 0; p < 4; ++p) {
    root["prior"][kNames[p]] = {{"lower", config.prior.lower[p]},
                                {"upper", config.prior.upper[p]}};
  }
  root["sampler"] = {{"iterations", config.sampler.iterations},
                     {"burn_in", config.sampler.burn_in},
                     {"gamma", config.sampler.gamma},
                     {"seed", config.sampler.seed},
                     {"adapt", config.sampler.adapt}};
  root["lm"] = {{"enabled", config.lm_enabled},
                {"lambda0", config.lm.lambda0},
                {"lambda_up", config.lm.lambda_up},
                {"lambda_down", config.lm.lambda_down},
                {"max_iters", config.lm.max_iters},
                {"tol_step", config.lm.tol_step},
                {"tol_grad", config.lm.tol_grad},
                {"fd_step", config.lm.fd_step},
                {"project_to_prior", config.lm.project_to_prior}};
  root["initial_guesses"] = config.initial_guesses;
  root["output_dir"] = config.output_dir;
  root["sigma_eps_floor"] = config.sigma_eps_floor;
  root["histogram_bins"] = config.histogram_bins;
  return root.dump(2) + "\n";
}

}  // namespace binopt
