#include "robnet/instance_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "robnet/error.hpp"

namespace robnet {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write \"" + path + "\"");
  out << text;
  if (!out) throw IoError("write to \"" + path + "\" failed");
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
  }
}

namespace {

const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(where + ": missing field \"" + key + "\"");
  return *it;
}

std::string get_string(const Json& obj, const char* key, const std::string& where) {
  const Json& v = field(obj, key, where);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ValidationError(where + "." + key + ": expected a string");
}

double as_number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + ": expected a number");
  return v.get<double>();
}

double get_number(const Json& obj, const char* key, const std::string& where) {
  return as_number(field(obj, key, where), where + "." + key);
}

// Absent or null -> fallback.
double get_optional_number(const Json& obj, const char* key, double fallback, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return as_number(*it, where + "." + key);
}

Band get_band(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) throw ValidationError(where + ": expected [lo, hi]");
  return {as_number(v[0], where + "[0]"), as_number(v[1], where + "[1]")};
}

NodeKind parse_node_kind(const std::string& s, const std::string& where) {
  if (s == "source") return NodeKind::source;
  if (s == "sink") return NodeKind::sink;
  if (s == "inner") return NodeKind::inner;
  throw ValidationError(where + ": unknown node kind \"" + s + "\"");
}

LawModel parse_law_model(const std::string& s, const std::string& where) {
  if (s == "quadratic_signed") return LawModel::quadratic_signed;
  if (s == "power_signed") return LawModel::power_signed;
  if (s == "linear") return LawModel::linear;
  throw ValidationError(where + ": unknown law model \"" + s + "\"");
}

}  // namespace

Json number_or_null(double value) {
  if (std::isfinite(value)) return value;
  return nullptr;
}

Instance instance_from_json(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("instance: expected a JSON object");
  std::vector<Node> nodes;
  const Json& jn = field(doc, "nodes", "instance");
  if (!jn.is_array()) throw ValidationError("instance.nodes: expected an array");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    Node n;
    n.id = get_string(jn[i], "id", where);
    n.kind = parse_node_kind(get_string(jn[i], "kind", where), where + " \"" + n.id + "\"");
    n.potential_min = get_optional_number(jn[i], "potential_min", -kInfinity, where);
    n.potential_max = get_optional_number(jn[i], "potential_max", kInfinity, where);
    nodes.push_back(std::move(n));
  }
  std::unordered_map<std::string, NodeIndex> node_index;
  for (NodeIndex i = 0; i < nodes.size(); ++i) node_index.emplace(nodes[i].id, i);

  std::vector<Arc> arcs;
  const Json& ja = field(doc, "arcs", "instance");
  if (!ja.is_array()) throw ValidationError("instance.arcs: expected an array");
  for (std::size_t i = 0; i < ja.size(); ++i) {
    const std::string where = "arcs[" + std::to_string(i) + "]";
    const Json& o = ja[i];
    Arc a;
    a.id = get_string(o, "id", where);
    const std::string w = "arc \"" + a.id + "\"";
    for (const char* end : {"from", "to"}) {
      const std::string id = get_string(o, end, where);
      auto it = node_index.find(id);
      if (it == node_index.end()) throw ValidationError(w + " references unknown node \"" + id + "\"");
      (std::string(end) == "from" ? a.from : a.to) = it->second;
    }
    a.label = o.contains("label") ? get_string(o, "label", where) : "";
    const std::string kind = get_string(o, "kind", where);
    if (kind == "existing") {
      a.kind = ArcKind::existing;
    } else if (kind == "candidate") {
      a.kind = ArcKind::candidate;
    } else {
      throw ValidationError(w + ": unknown arc kind \"" + kind + "\"");
    }
    const Json& law = field(o, "law", w);
    a.law.model = parse_law_model(get_string(law, "model", w + ".law"), w + ".law");
    a.law.lambda = get_number(law, "lambda", w + ".law");
    switch (a.law.model) {
      case LawModel::quadratic_signed:
        a.law.exponent = 2.0;
        break;
      case LawModel::linear:
        a.law.exponent = 1.0;
        break;
      case LawModel::power_signed:
        a.law.exponent = get_optional_number(law, "exponent", kWaterExponent, w + ".law");
        break;
    }
    a.flow_min = get_optional_number(o, "flow_min", -kInfinity, w);
    a.flow_max = get_optional_number(o, "flow_max", kInfinity, w);
    if (o.contains("cost") && !o["cost"].is_null()) {
      a.cost = get_number(o, "cost", w);
    } else if (a.kind == ArcKind::candidate) {
      throw ValidationError(w + ": candidate arcs require a cost");
    }
    arcs.push_back(std::move(a));
  }
  std::unordered_map<std::string, ArcIndex> arc_index;
  for (ArcIndex i = 0; i < arcs.size(); ++i) arc_index.emplace(arcs[i].id, i);

  std::vector<std::vector<ArcIndex>> groups;
  if (doc.contains("exclusion_groups")) {
    const Json& jg = doc["exclusion_groups"];
    if (!jg.is_array()) throw ValidationError("instance.exclusion_groups: expected an array");
    for (std::size_t g = 0; g < jg.size(); ++g) {
      if (!jg[g].is_array()) throw ValidationError("exclusion_groups[" + std::to_string(g) + "]: expected an array");
      std::vector<ArcIndex> group;
      for (const auto& id : jg[g]) {
        if (!id.is_string()) throw ValidationError("exclusion_groups: expected arc ids");
        auto it = arc_index.find(id.get<std::string>());
        if (it == arc_index.end()) {
          throw ValidationError("exclusion group references unknown arc \"" + id.get<std::string>() + "\"");
        }
        group.push_back(it->second);
      }
      groups.push_back(std::move(group));
    }
  }
  return Instance(std::move(nodes), std::move(arcs), std::move(groups));
}

Instance parse_instance(const std::string& text) { return instance_from_json(parse_json(text)); }

Instance load_instance(const std::string& path) { return parse_instance(read_text_file(path)); }

Json instance_to_json(const Instance& instance) {
  Json doc;
  Json nodes = Json::array();
  for (const Node& n : instance.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"kind", std::string(to_string(n.kind))},
                     {"potential_min", number_or_null(n.potential_min)},
                     {"potential_max", number_or_null(n.potential_max)}});
  }
  Json arcs = Json::array();
  for (const Arc& a : instance.arcs()) {
    Json law = {{"model", std::string(to_string(a.law.model))}, {"lambda", a.law.lambda}};
    if (a.law.model == LawModel::power_signed) law["exponent"] = a.law.exponent;
    Json o = {{"id", a.id},
              {"from", instance.node(a.from).id},
              {"to", instance.node(a.to).id},
              {"label", a.label},
              {"kind", std::string(to_string(a.kind))},
              {"law", law}};
    if (a.has_flow_min()) o["flow_min"] = a.flow_min;
    if (a.has_flow_max()) o["flow_max"] = a.flow_max;
    o["cost"] = a.cost;
    arcs.push_back(std::move(o));
  }
  Json groups = Json::array();
  for (const auto& g : instance.exclusion_groups()) {
    Json ids = Json::array();
    for (ArcIndex a : g) ids.push_back(instance.arc(a).id);
    groups.push_back(std::move(ids));
  }
  doc["nodes"] = std::move(nodes);
  doc["arcs"] = std::move(arcs);
  doc["exclusion_groups"] = std::move(groups);
  return doc;
}

UncertaintyConfig uncertainty_config_from_json(const Json& doc) {
  const std::string w = "uncertainty";
  if (!doc.is_object()) throw ValidationError(w + ": expected an object");
  UncertaintyConfig c;
  if (doc.contains("kind")) {
    const std::string k = get_string(doc, "kind", w);
    auto kind = parse_uncertainty_kind(k);
    if (!kind) throw ValidationError(w + ": unknown kind \"" + k + "\"");
    c.kind = *kind;
  }
  const Json& base = field(doc, "base_load", w);
  if (!base.is_object()) throw ValidationError(w + ".base_load: expected an object keyed by node id");
  for (auto it = base.begin(); it != base.end(); ++it) {
    c.base_load[it.key()] = as_number(it.value(), w + ".base_load." + it.key());
  }
  if (doc.contains("sink_band")) c.sink_band = get_band(doc["sink_band"], w + ".sink_band");
  if (doc.contains("source_band")) c.source_band = get_band(doc["source_band"], w + ".source_band");
  if (doc.contains("sum_band") && !doc["sum_band"].is_null()) {
    c.sum_band = get_band(doc["sum_band"], w + ".sum_band");
  }
  if (doc.contains("corr") && !doc["corr"].is_null()) {
    const Json& jc = doc["corr"];
    CorrelationConfig cc;
    if (jc.contains("sinks")) {
      for (const auto& s : jc["sinks"]) {
        if (!s.is_string()) throw ValidationError(w + ".corr.sinks: expected node ids");
        cc.sinks.push_back(s.get<std::string>());
      }
    }
    cc.cap = get_optional_number(jc, "cap", cc.cap, w + ".corr");
    cc.fraction = get_optional_number(jc, "fraction", cc.fraction, w + ".corr");
    if (jc.contains("seed")) {
      if (!jc["seed"].is_number_unsigned() && !jc["seed"].is_number_integer()) {
        throw ValidationError(w + ".corr.seed: expected a non-negative integer");
      }
      cc.seed = jc["seed"].get<std::uint64_t>();
    }
    c.corr = std::move(cc);
  }
  return c;
}

Json uncertainty_config_to_json(const UncertaintyConfig& config) {
  Json doc;
  doc["kind"] = std::string(to_string(config.kind));
  Json base = Json::object();
  for (const auto& [id, v] : config.base_load) base[id] = v;
  doc["base_load"] = std::move(base);
  doc["sink_band"] = {config.sink_band.lo, config.sink_band.hi};
  doc["source_band"] = {config.source_band.lo, config.source_band.hi};
  if (config.sum_band) doc["sum_band"] = {config.sum_band->lo, config.sum_band->hi};
  if (config.corr) {
    Json jc;
    if (!config.corr->sinks.empty()) jc["sinks"] = config.corr->sinks;
    jc["cap"] = config.corr->cap;
    jc["fraction"] = config.corr->fraction;
    jc["seed"] = config.corr->seed;
    doc["corr"] = std::move(jc);
  }
  return doc;
}

std::optional<UncertaintyConfig> embedded_uncertainty(const Json& instance_doc) {
  if (!instance_doc.is_object() || !instance_doc.contains("uncertainty")) return std::nullopt;
  return uncertainty_config_from_json(instance_doc["uncertainty"]);
}

ExpansionDecision decision_from_json(const Instance& instance, const Json& doc) {
  const Json* list = &doc;
  if (doc.is_object() && doc.contains("built")) list = &doc["built"];
  if (!list->is_array()) throw ValidationError("decision: expected a JSON array of arc ids");
  std::vector<std::string> ids;
  for (const auto& v : *list) {
    if (!v.is_string()) throw ValidationError("decision: expected arc ids as strings");
    ids.push_back(v.get<std::string>());
  }
  ExpansionDecision x = ExpansionDecision::from_ids(instance, ids);
  if (!x.respects(instance)) throw ConstraintError("decision violates an exclusion group");
  return x;
}

ExpansionDecision load_decision(const Instance& instance, const std::string& path) {
  return decision_from_json(instance, parse_json(read_text_file(path)));
}

Json decision_to_json(const Instance& instance, const ExpansionDecision& decision) {
  return Json(decision.built_ids(instance));
}

Scenario scenario_from_json(const Instance& instance, const Json& doc) {
  if (!doc.is_object()) throw ValidationError("scenario: expected an object keyed by node id");
  Scenario d(instance.node_count());
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    d[instance.node_index(it.key())] = as_number(it.value(), "scenario." + it.key());
  }
  return d;
}

Json scenario_to_json(const Instance& instance, const Scenario& scenario) {
  Json o = Json::object();
  for (NodeIndex i = 0; i < instance.node_count(); ++i) o[instance.node(i).id] = scenario[i];
  return o;
}

}  // namespace robnet
