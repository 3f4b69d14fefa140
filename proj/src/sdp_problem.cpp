#include "sketchsdp/sdp_problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sketchsdp/polynomial.hpp"

namespace sketchsdp {

int SdpProblem::cone_dim() const {
  return block_dims.empty() ? 0 : *std::max_element(block_dims.begin(), block_dims.end());
}

int SdpProblem::add_block(int dim, std::string name) {
  if (dim < 1) throw std::invalid_argument("PSD block dimension must be positive");
  block_dims.push_back(dim);
  block_names.push_back(std::move(name));
  block_objective.emplace_back();
  return num_blocks() - 1;
}

int SdpProblem::add_free(int count) {
  const int first = num_free;
  num_free += count;
  free_objective.resize(num_free, 0.0);
  return first;
}

namespace {

void check_entries(const std::vector<SymEntry>& entries, int dim, const std::string& where) {
  for (const auto& e : entries) {
    if (e.row < 0 || e.col < e.row || e.col >= dim)
      throw std::invalid_argument(where + ": entry (" + std::to_string(e.row) + "," +
                                  std::to_string(e.col) +
                                  ") is not an upper-triangle coordinate of a " +
                                  std::to_string(dim) + "x" + std::to_string(dim) + " block");
    if (!std::isfinite(e.value)) throw std::invalid_argument(where + ": non-finite coefficient");
  }
}

}  // namespace

void SdpProblem::validate() const {
  if (block_names.size() != block_dims.size() || block_objective.size() != block_dims.size())
    throw std::invalid_argument("block metadata size mismatch");
  if (static_cast<int>(free_objective.size()) != num_free)
    throw std::invalid_argument("free objective has wrong length");
  for (int k = 0; k < num_blocks(); ++k) {
    if (block_dims[k] < 1) throw std::invalid_argument("PSD block dimension must be positive");
    check_entries(block_objective[k], block_dims[k], "objective block " + std::to_string(k));
  }
  for (int j = 0; j < num_constraints(); ++j) {
    const auto& c = constraints[j];
    const std::string where = "constraint " + std::to_string(j);
    for (const auto& bt : c.blocks) {
      if (bt.block < 0 || bt.block >= num_blocks())
        throw std::invalid_argument(where + ": block index out of range");
      check_entries(bt.entries, block_dims[bt.block], where);
    }
    for (const auto& [idx, v] : c.free) {
      if (idx < 0 || idx >= num_free)
        throw std::invalid_argument(where + ": free variable index out of range");
      if (!std::isfinite(v)) throw std::invalid_argument(where + ": non-finite coefficient");
    }
    if (!std::isfinite(c.rhs)) throw std::invalid_argument(where + ": non-finite rhs");
  }
}

namespace {

nlohmann::json entries_to_json(const std::vector<SymEntry>& entries) {
  auto arr = nlohmann::json::array();
  for (const auto& e : entries) arr.push_back({e.row, e.col, e.value});
  return arr;
}

std::vector<SymEntry> entries_from_json(const nlohmann::json& j) {
  std::vector<SymEntry> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3)
      throw std::invalid_argument("matrix entry must be [row, col, value]");
    out.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
  }
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const SdpProblem& p) {
  j = nlohmann::json::object();
  j["format"] = "sketchsdp-problem-1";
  j["sense"] = p.sense == Sense::Minimize ? "minimize" : "maximize";
  j["blocks"] = p.block_dims;
  j["block_names"] = p.block_names;
  j["num_free"] = p.num_free;
  auto obj = nlohmann::json::object();
  obj["blocks"] = nlohmann::json::array();
  for (const auto& b : p.block_objective) obj["blocks"].push_back(entries_to_json(b));
  obj["free"] = p.free_objective;
  j["objective"] = obj;
  auto cons = nlohmann::json::array();
  for (const auto& c : p.constraints) {
    nlohmann::json jc;
    jc["rhs"] = c.rhs;
    jc["blocks"] = nlohmann::json::array();
    for (const auto& bt : c.blocks)
      jc["blocks"].push_back({{"block", bt.block}, {"entries", entries_to_json(bt.entries)}});
    jc["free"] = nlohmann::json::array();
    for (const auto& [idx, v] : c.free) jc["free"].push_back({idx, v});
    if (!c.label.empty()) jc["label"] = {{"family", c.label.family}, {"monomial", c.label.monomial}};
    cons.push_back(std::move(jc));
  }
  j["constraints"] = std::move(cons);
}

void from_json(const nlohmann::json& j, SdpProblem& p) {
  SdpProblem r;
  const std::string sense = j.value("sense", "minimize");
  if (sense == "minimize" || sense == "min") {
    r.sense = Sense::Minimize;
  } else if (sense == "maximize" || sense == "max") {
    r.sense = Sense::Maximize;
  } else {
    throw std::invalid_argument("unknown sense '" + sense + "'");
  }
  r.block_dims = j.at("blocks").get<std::vector<int>>();
  r.block_names = j.value("block_names", std::vector<std::string>(r.block_dims.size()));
  r.num_free = j.value("num_free", 0);
  r.block_objective.assign(r.block_dims.size(), {});
  r.free_objective.assign(r.num_free, 0.0);
  if (j.contains("objective")) {
    const auto& obj = j.at("objective");
    if (obj.contains("blocks")) {
      const auto& ob = obj.at("blocks");
      if (ob.size() != r.block_dims.size())
        throw std::invalid_argument("objective lists " + std::to_string(ob.size()) +
                                    " blocks, problem has " + std::to_string(r.block_dims.size()));
      for (std::size_t k = 0; k < ob.size(); ++k) r.block_objective[k] = entries_from_json(ob[k]);
    }
    if (obj.contains("free")) r.free_objective = obj.at("free").get<std::vector<double>>();
  }
  for (const auto& jc : j.at("constraints")) {
    Constraint c;
    c.rhs = jc.value("rhs", 0.0);
    if (jc.contains("blocks")) {
      for (const auto& bt : jc.at("blocks"))
        c.blocks.push_back({bt.at("block").get<int>(), entries_from_json(bt.at("entries"))});
    }
    if (jc.contains("free")) {
      for (const auto& f : jc.at("free")) c.free.emplace_back(f.at(0).get<int>(), f.at(1).get<double>());
    }
    if (jc.contains("label")) {
      c.label.family = jc["label"].value("family", "");
      c.label.monomial = jc["label"].value("monomial", std::vector<int>{});
    }
    r.constraints.push_back(std::move(c));
  }
  r.validate();
  p = std::move(r);
}

nlohmann::json parse_json_with_position(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.byte is 1-based offset of the offending character.
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("JSON parse error at line " + std::to_string(line) + ", column " +
                     std::to_string(col) + ": " + e.what());
  }
}

SdpProblem parse_sdp_problem(const std::string& text) {
  const auto j = parse_json_with_position(text);
  try {
    return j.get<SdpProblem>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed problem document: ") + e.what());
  }
}

}  // namespace sketchsdp
