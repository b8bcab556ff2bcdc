#include "arbor/io.hpp"

#include <fstream>
#include <sstream>

namespace arbor {

json instance_to_json(const Instance& inst) {
  json j;
  j["n"] = inst.vertex_count();
  json edges = json::array();
  for (const Edge& e : inst.edges()) edges.push_back({e.first, e.second});
  j["edges"] = edges;
  j["sources"] = inst.sources();
  j["sinks"] = inst.sinks();
  return j;
}

json layered_to_json(const LayeredInstance& li) {
  json j = instance_to_json(li.base);
  if (!li.layers.empty()) j["layers"] = li.layers;
  return j;
}

LayeredInstance instance_from_json(const json& j) {
  try {
    int n = j.at("n").get<int>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<VertexId>(), e.at(1).get<VertexId>());
    auto sources = j.at("sources").get<std::vector<VertexId>>();
    auto sinks = j.at("sinks").get<std::vector<VertexId>>();
    std::vector<std::vector<VertexId>> layers;
    if (j.contains("layers") && !j["layers"].is_null()) layers = j["layers"].get<std::vector<std::vector<VertexId>>>();
    return make_layered(Instance(n, std::move(edges), std::move(sources), std::move(sinks)), std::move(layers));
  } catch (const json::exception& e) {
    throw validation_error("io", std::string("malformed instance json: ") + e.what());
  }
}

json solution_to_json(const SolutionForest& sol) {
  json nodes = json::array();
  for (NodeId i = 0; i < static_cast<NodeId>(sol.size()); ++i) {
    json nd;
    nd["path"] = sol.path(i);
    nd["parent"] = sol.parent(i) == kNone ? json(nullptr) : json(sol.parent(i));
    nodes.push_back(std::move(nd));
  }
  return json{{"nodes", nodes}};
}

SolutionForest solution_from_json(const json& j) {
  SolutionForest sol;
  try {
    const auto& nodes = j.at("nodes");
    std::vector<std::vector<VertexId>> paths;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      auto path = nodes[i].at("path").get<std::vector<VertexId>>();
      if (path.empty()) throw validation_error("io", "empty path at node " + std::to_string(i));
      const auto& par = nodes[i].at("parent");
      if (par.is_null()) {
        if (path.size() != 1) throw validation_error("io", "root node with multi-vertex path at " + std::to_string(i));
        sol.add_root(path[0]);
      } else {
        int p = par.get<int>();
        if (p < 0 || p >= static_cast<int>(i))
          throw validation_error("io", "parent must precede child at node " + std::to_string(i));
        auto expect = paths[p];
        expect.push_back(path.back());
        if (expect != path) throw validation_error("io", "path is not parent path plus one vertex at node " + std::to_string(i));
        sol.add_child(p, path.back());
      }
      paths.push_back(std::move(path));
    }
  } catch (const json::exception& e) {
    throw validation_error("io", std::string("malformed solution json: ") + e.what());
  }
  return sol;
}

json profile_to_json(const ParamProfile& p) {
  return json{{"name", p.name},
              {"ell", p.ell},
              {"L_local", p.L_local},
              {"K_global", p.K_global},
              {"granularity_base", p.granularity_base},
              {"sample_children", p.sample_children},
              {"retain_children", p.retain_children},
              {"b1_slack", p.b1_slack},
              {"mark_frac_denom", p.mark_frac_denom},
              {"mark_threshold_denom", p.mark_threshold_denom},
              {"c_const", p.c_const},
              {"ls_addable_div", p.ls_addable_div},
              {"ls_collapse_div", p.ls_collapse_div},
              {"ls_solution_div", p.ls_solution_div},
              {"group_resample_cap", p.group_resample_cap},
              {"layer_resample_cap", p.layer_resample_cap},
              {"sparsify_retries", p.sparsify_retries}};
}

ParamProfile profile_from_json(const json& j, ParamProfile p) {
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
  };
  take("name", p.name);
  take("ell", p.ell);
  take("L_local", p.L_local);
  take("K_global", p.K_global);
  take("granularity_base", p.granularity_base);
  take("sample_children", p.sample_children);
  take("retain_children", p.retain_children);
  take("b1_slack", p.b1_slack);
  take("mark_frac_denom", p.mark_frac_denom);
  take("mark_threshold_denom", p.mark_threshold_denom);
  take("c_const", p.c_const);
  take("ls_addable_div", p.ls_addable_div);
  take("ls_collapse_div", p.ls_collapse_div);
  take("ls_solution_div", p.ls_solution_div);
  take("group_resample_cap", p.group_resample_cap);
  take("layer_resample_cap", p.layer_resample_cap);
  take("sparsify_retries", p.sparsify_retries);
  return p;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("io", "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw validation_error("io", "cannot parse " + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw stage_error("io", "cannot write " + path);
  out << text;
}

}  // namespace arbor
