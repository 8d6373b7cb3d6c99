#include "pcnls/error.hpp"
#include "pcnls/harness.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <set>
#include <sstream>

namespace pcnls
{

const std::vector<std::string>& known_checks()
{
  static const std::vector<std::string> names = {
    "mass_balance", "magnitude_identity", "sup_limit",  "l2_rate",
    "profile_error", "profile_algebra",   "monitors",   "schedule",
  };
  return names;
}

YAML::Node load_config_node(const std::filesystem::path& path)
{
  try
  {
    return YAML::LoadFile(path.string());
  }
  catch (const YAML::Exception& e)
  {
    throw Error("config: cannot read " + path.string() + ": " + e.what());
  }
}

void apply_override(YAML::Node& root, const std::string& assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error("config: override must look like key.path=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  std::vector<std::string> keys;
  std::stringstream ss(path);
  for (std::string k; std::getline(ss, k, '.');)
  {
    if (k.empty())
      throw Error("config: empty key in override path '" + path + "'");
    keys.push_back(k);
  }

  YAML::Node parsed;
  try
  {
    parsed = YAML::Load(value);
  }
  catch (const YAML::Exception& e)
  {
    throw Error("config: cannot parse override value '" + value + "': " + e.what());
  }

  // yaml-cpp nodes are handles; walk down by reassignment of copies
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < keys.size(); ++i)
  {
    YAML::Node next = chain.back()[keys[i]];
    if (!next.IsDefined() || next.IsNull())
      next = YAML::Node(YAML::NodeType::Map);
    if (!next.IsMap())
      throw Error("config: override path '" + path + "' crosses a non-map value");
    chain.back()[keys[i]] = next;
    chain.push_back(chain.back()[keys[i]]);
  }
  chain.back()[keys.back()] = parsed;
}

namespace
{

void reject_unknown(const YAML::Node& node, const std::string& where,
                    std::initializer_list<const char*> allowed)
{
  if (!node)
    return;
  if (!node.IsMap())
    throw Error("config: '" + where + "' must be a map");
  for (const auto& kv : node)
  {
    const auto key = kv.first.as<std::string>();
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) ==
        allowed.end())
      throw Error("config: unknown key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where)
{
  if (!node || !node[key])
    return;
  try
  {
    out = node[key].as<T>();
  }
  catch (const YAML::Exception&)
  {
    throw Error("config: bad value for '" + where + "." + key + "'");
  }
}

Equation parse_equation(const std::string& s)
{
  if (s == "nonautonomous")
    return Equation::nonautonomous;
  if (s == "autonomous")
    return Equation::autonomous;
  throw Error("config: plan.equation must be 'autonomous' or 'nonautonomous'");
}

const char* equation_name(Equation e)
{
  return e == Equation::autonomous ? "autonomous" : "nonautonomous";
}

} // namespace

ExperimentConfig parse_config(const YAML::Node& root)
{
  if (!root || !root.IsMap())
    throw Error("config: top level must be a map");
  reject_unknown(root, "", {"model", "indices", "grid", "plan", "initial", "output_dir", "seed",
                            "theorem_mode", "checks"});

  ExperimentConfig cfg;
  const YAML::Node model = root["model"];
  reject_unknown(model, "model", {"lambda_re", "lambda_im", "alpha", "dim", "b", "K"});
  read(model, "lambda_re", cfg.model.lambda_re, "model");
  read(model, "lambda_im", cfg.model.lambda_im, "model");
  read(model, "alpha", cfg.model.alpha, "model");
  read(model, "dim", cfg.model.dim, "model");
  read(model, "b", cfg.model.b, "model");
  if (model && model["K"])
  {
    read(model, "K", cfg.model.K, "model");
    cfg.K_given = true;
  }

  if (cfg.model.dim < 1 || cfg.model.dim > 3)
    throw Error("config: model.dim must be 1, 2 or 3");
  cfg.indices = IndexSet::defaults_for(cfg.model.dim);
  const YAML::Node ind = root["indices"];
  reject_unknown(ind, "indices", {"k", "n", "m", "J"});
  read(ind, "k", cfg.indices.k, "indices");
  read(ind, "n", cfg.indices.n, "indices");
  read(ind, "m", cfg.indices.m, "indices");
  read(ind, "J", cfg.indices.J, "indices");

  const YAML::Node grid = root["grid"];
  reject_unknown(grid, "grid", {"half_width", "points"});
  read(grid, "half_width", cfg.grid.half_width, "grid");
  read(grid, "points", cfg.grid.points, "grid");

  const YAML::Node plan = root["plan"];
  reject_unknown(plan, "plan", {"equation", "dt", "stop_distance", "t_end", "adapt", "adapt_c",
                                "snapshot_stride", "checkpoint_every"});
  std::string eq = equation_name(cfg.plan.equation);
  read(plan, "equation", eq, "plan");
  cfg.plan.equation = parse_equation(eq);
  read(plan, "dt", cfg.plan.dt, "plan");
  read(plan, "stop_distance", cfg.plan.stop_distance, "plan");
  read(plan, "t_end", cfg.plan.t_end, "plan");
  read(plan, "adapt", cfg.plan.adapt, "plan");
  read(plan, "adapt_c", cfg.plan.adapt_c, "plan");
  read(plan, "snapshot_stride", cfg.plan.snapshot_stride, "plan");
  read(plan, "checkpoint_every", cfg.plan.checkpoint_every, "plan");

  const YAML::Node init = root["initial"];
  reject_unknown(init, "initial", {"family", "c_re", "c_im", "power", "epsilon", "amplitude", "modes",
                                   "max_wavenumber", "width"});
  read(init, "family", cfg.initial.family, "initial");
  read(init, "c_re", cfg.initial.c_re, "initial");
  read(init, "c_im", cfg.initial.c_im, "initial");
  read(init, "power", cfg.initial.power, "initial");
  read(init, "epsilon", cfg.initial.epsilon, "initial");
  read(init, "amplitude", cfg.initial.amplitude, "initial");
  read(init, "modes", cfg.initial.modes, "initial");
  read(init, "max_wavenumber", cfg.initial.max_wavenumber, "initial");
  read(init, "width", cfg.initial.width, "initial");

  read(root, "output_dir", cfg.output_dir, "");
  read(root, "seed", cfg.seed, "");
  read(root, "theorem_mode", cfg.theorem_mode, "");
  if (root["checks"])
  {
    if (!root["checks"].IsSequence())
      throw Error("config: checks must be a list");
    for (const auto& c : root["checks"])
      cfg.checks.push_back(c.as<std::string>());
  }
  for (const auto& c : cfg.checks)
    if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end())
      throw Error("config: unknown check '" + c + "'");

  if (auto rep = validate_params(cfg.model, cfg.theorem_mode); !rep.ok())
    throw Error("config: " + rep.violations.front());
  if (auto rep = validate_indices(cfg.model, cfg.indices, cfg.theorem_mode); !rep.ok())
    throw Error("config: " + rep.violations.front());
  if (cfg.plan.checkpoint_every < 1)
    throw Error("config: plan.checkpoint_every must be >= 1");
  if (cfg.plan.equation == Equation::nonautonomous && cfg.model.b > 0.0 &&
      !(cfg.plan.stop_distance > 0.0 && cfg.plan.stop_distance < 1.0))
    throw Error("config: plan.stop_distance must lie in (0, 1)");
  make_grid(cfg);
  validate_plan(make_plan(cfg), cfg.model);
  return cfg;
}

Grid make_grid(const ExperimentConfig& cfg)
{
  return Grid(cfg.model.dim, cfg.grid.half_width, cfg.grid.points);
}

StepPlan make_plan(const ExperimentConfig& cfg)
{
  StepPlan plan;
  plan.equation = cfg.plan.equation;
  plan.dt = cfg.plan.dt;
  const bool nonauto = cfg.plan.equation == Equation::nonautonomous && cfg.model.b > 0.0;
  plan.t_end = nonauto ? time_at_distance(cfg.model.b, cfg.plan.stop_distance) : cfg.plan.t_end;
  plan.adapt = cfg.plan.adapt;
  plan.adapt_c = cfg.plan.adapt_c;
  plan.snapshot_stride = cfg.plan.snapshot_stride;
  if (cfg.initial.family == "gaussian")
    plan.modulus_floor = 0.0;
  return plan;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg)
{
  nlohmann::json j;
  j["model"] = {{"lambda_re", cfg.model.lambda_re}, {"lambda_im", cfg.model.lambda_im},
                {"alpha", cfg.model.alpha},         {"dim", cfg.model.dim},
                {"b", cfg.model.b}};
  if (cfg.K_given)
    j["model"]["K"] = cfg.model.K;
  j["indices"] = {{"k", cfg.indices.k}, {"n", cfg.indices.n}, {"m", cfg.indices.m}, {"J", cfg.indices.J}};
  j["grid"] = {{"half_width", cfg.grid.half_width}, {"points", cfg.grid.points}};
  j["plan"] = {{"equation", equation_name(cfg.plan.equation)},
               {"dt", cfg.plan.dt},
               {"stop_distance", cfg.plan.stop_distance},
               {"t_end", cfg.plan.t_end},
               {"adapt", cfg.plan.adapt},
               {"adapt_c", cfg.plan.adapt_c},
               {"snapshot_stride", cfg.plan.snapshot_stride},
               {"checkpoint_every", cfg.plan.checkpoint_every}};
  j["initial"] = {{"family", cfg.initial.family},       {"c_re", cfg.initial.c_re},
                  {"c_im", cfg.initial.c_im},           {"power", cfg.initial.power},
                  {"epsilon", cfg.initial.epsilon},     {"amplitude", cfg.initial.amplitude},
                  {"modes", cfg.initial.modes},         {"max_wavenumber", cfg.initial.max_wavenumber},
                  {"width", cfg.initial.width}};
  j["seed"] = cfg.seed;
  j["theorem_mode"] = cfg.theorem_mode;
  // the check list is a set; its order does not change the run
  std::vector<std::string> checks = cfg.checks;
  std::sort(checks.begin(), checks.end());
  checks.erase(std::unique(checks.begin(), checks.end()), checks.end());
  j["checks"] = checks;
  return j;
}

std::string config_to_yaml(const ExperimentConfig& cfg)
{
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  const nlohmann::json j = config_to_json(cfg);
  out << YAML::BeginMap;
  for (const auto& [section, body] : j.items())
  {
    out << YAML::Key << section << YAML::Value;
    if (body.is_object())
    {
      out << YAML::BeginMap;
      for (const auto& [k, v] : body.items())
      {
        out << YAML::Key << k << YAML::Value;
        if (v.is_boolean())
          out << v.get<bool>();
        else if (v.is_number_integer())
          out << v.get<long long>();
        else if (v.is_number())
          out << v.get<double>();
        else
          out << v.get<std::string>();
      }
      out << YAML::EndMap;
    }
    else if (body.is_array())
    {
      out << YAML::Flow << YAML::BeginSeq;
      for (const auto& v : body)
        out << v.get<std::string>();
      out << YAML::EndSeq;
    }
    else if (body.is_boolean())
      out << body.get<bool>();
    else
      out << body.get<std::uint64_t>();
  }
  if (!cfg.output_dir.empty())
    out << YAML::Key << "output_dir" << YAML::Value << cfg.output_dir;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string config_hash(const ExperimentConfig& cfg)
{
  const std::string text = config_to_json(cfg).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text)
  {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

} // namespace pcnls
