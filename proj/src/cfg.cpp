#include "mcs/cfg.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mcs {

using nlohmann::json;

Cfg::Cfg(std::string function, std::vector<std::string> blocks, const std::string& entry,
         const std::vector<std::pair<std::string, std::string>>& edges)
    : function_(std::move(function)), names_(std::move(blocks)) {
  if (names_.empty()) throw ParseError("graph has no blocks");
  std::map<std::string, BlockIndex> seen;
  for (BlockIndex b = 0; b < size(); ++b) {
    if (names_[b].empty()) throw ParseError("empty block name");
    if (!seen.emplace(names_[b], b).second) throw ParseError("duplicate block '" + names_[b] + "'");
  }
  entry_ = index(entry);
  succ_.assign(names_.size(), {});
  pred_.assign(names_.size(), {});
  for (const auto& [from, to] : edges) {
    const BlockIndex a = index(from);
    const BlockIndex b = index(to);
    if (std::find(succ_[a].begin(), succ_[a].end(), b) != succ_[a].end()) continue;
    succ_[a].push_back(b);
    pred_[b].push_back(a);
  }
  std::vector<bool> reached(names_.size(), false);
  std::vector<BlockIndex> stack{entry_};
  reached[entry_] = true;
  while (!stack.empty()) {
    const BlockIndex b = stack.back();
    stack.pop_back();
    for (BlockIndex s : succ_[b]) {
      if (!reached[s]) {
        reached[s] = true;
        stack.push_back(s);
      }
    }
  }
  for (BlockIndex b = 0; b < size(); ++b) {
    if (!reached[b]) throw UnreachableBlock("block '" + names_[b] + "' is unreachable from the entry");
  }
}

BlockIndex Cfg::index(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ParseError("unknown block '" + name + "'");
  return static_cast<BlockIndex>(it - names_.begin());
}

std::vector<std::pair<std::string, std::string>> Cfg::edges() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (BlockIndex a = 0; a < size(); ++a) {
    for (BlockIndex b : succ_[a]) out.emplace_back(names_[a], names_[b]);
  }
  return out;
}

Cfg cfg_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("graph document must be an object");
  try {
    std::vector<std::pair<std::string, std::string>> edges;
    if (doc.contains("edges")) {
      for (const json& e : doc.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw ParseError("edges must be [from, to] pairs");
        edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
      }
    }
    std::vector<std::string> blocks;
    if (doc.contains("blocks")) {
      blocks = doc.at("blocks").get<std::vector<std::string>>();
    } else {
      for (const auto& [a, b] : edges) {
        for (const std::string& n : {a, b}) {
          if (std::find(blocks.begin(), blocks.end(), n) == blocks.end()) blocks.push_back(n);
        }
      }
    }
    if (blocks.empty()) throw ParseError("graph has no blocks");
    const std::string entry = doc.value("entry", blocks.front());
    return Cfg(doc.value("function", std::string("f")), std::move(blocks), entry, edges);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed graph document: ") + e.what());
  }
}

namespace {

class DotLexer {
 public:
  explicit DotLexer(std::string_view text) : text_(text) {}

  // Returns an empty string at end of input.
  std::string next() {
    skip_space();
    if (pos_ >= text_.size()) return {};
    const char c = text_[pos_];
    if (c == '-' && pos_ + 1 < text_.size() && (text_[pos_ + 1] == '>' || text_[pos_ + 1] == '-')) {
      pos_ += 2;
      return "->";
    }
    if (std::string_view("{}[];=,").find(c) != std::string_view::npos) {
      ++pos_;
      return std::string(1, c);
    }
    if (c == '"') {
      std::string out;
      ++pos_;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
        out += text_[pos_++];
      }
      if (pos_ >= text_.size()) throw ParseError("unterminated string in DOT input");
      ++pos_;
      return "\"" + out;
    }
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
      std::string out;
      while (pos_ < text_.size()) {
        const char d = text_[pos_];
        if (!(std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.')) break;
        out += d;
        ++pos_;
      }
      if (out.empty()) throw ParseError(std::string("unexpected '") + c + "' in DOT input");
      return out;
    }
    throw ParseError(std::string("unexpected '") + c + "' in DOT input");
  }

  std::string peek() {
    const std::size_t saved = pos_;
    std::string t = next();
    pos_ = saved;
    return t;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#' || text_.substr(pos_, 2) == "//") {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (text_.substr(pos_, 2) == "/*") {
        const std::size_t end = text_.find("*/", pos_ + 2);
        pos_ = end == std::string_view::npos ? text_.size() : end + 2;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

bool is_id(const std::string& tok) {
  return !tok.empty() && tok != "->" && std::string_view("{}[];=,").find(tok[0]) == std::string_view::npos;
}

std::string id_text(const std::string& tok) { return tok[0] == '"' ? tok.substr(1) : tok; }

void skip_attributes(DotLexer& lex) {
  while (lex.peek() == "[") {
    lex.next();
    for (std::string t = lex.next(); t != "]"; t = lex.next()) {
      if (t.empty()) throw ParseError("unterminated attribute list in DOT input");
    }
  }
}

}  // namespace

Cfg cfg_from_dot(std::string_view text) {
  DotLexer lex(text);
  std::string tok = lex.next();
  if (tok == "strict") tok = lex.next();
  if (tok != "digraph") throw ParseError("DOT input must be a digraph");
  std::string function = "f";
  tok = lex.next();
  if (is_id(tok)) {
    function = id_text(tok);
    tok = lex.next();
  }
  if (tok != "{") throw ParseError("expected '{' in DOT input");

  std::vector<std::string> blocks;
  std::vector<std::pair<std::string, std::string>> edges;
  auto add_block = [&](const std::string& n) {
    if (std::find(blocks.begin(), blocks.end(), n) == blocks.end()) blocks.push_back(n);
  };
  while (true) {
    tok = lex.next();
    if (tok.empty()) throw ParseError("unterminated DOT graph");
    if (tok == "}") break;
    if (tok == ";" || tok == ",") continue;
    if (tok == "subgraph" || tok == "{") throw ParseError("subgraphs are not supported");
    if ((tok == "graph" || tok == "node" || tok == "edge") && lex.peek() == "[") {
      skip_attributes(lex);
      continue;
    }
    if (!is_id(tok)) throw ParseError("unexpected '" + tok + "' in DOT input");
    if (lex.peek() == "=") {
      lex.next();
      lex.next();
      continue;
    }
    std::string from = id_text(tok);
    add_block(from);
    while (lex.peek() == "->") {
      lex.next();
      const std::string t = lex.next();
      if (!is_id(t)) throw ParseError("edge without a target in DOT input");
      const std::string to = id_text(t);
      add_block(to);
      edges.emplace_back(from, to);
      from = to;
    }
    skip_attributes(lex);
  }
  if (blocks.empty()) throw ParseError("graph has no blocks");
  const std::string entry = blocks.front();
  return Cfg(function, std::move(blocks), entry, edges);
}

Cfg parse_cfg(std::string_view text, CfgFormat* detected) {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    if (detected) *detected = CfgFormat::Json;
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ParseError("graph document is not valid JSON");
    return cfg_from_json(doc);
  }
  if (detected) *detected = CfgFormat::Dot;
  return cfg_from_dot(text);
}

Cfg load_cfg(const std::filesystem::path& path, CfgFormat* detected) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_cfg(buf.str(), detected);
}

namespace {

// Iterative DFS from the entry; returns blocks in reverse postorder and the
// retreating edges (targets still on the DFS stack).
void depth_first(const Cfg& cfg, std::vector<BlockIndex>& rpo,
                 std::vector<std::pair<BlockIndex, BlockIndex>>& retreating) {
  const int n = cfg.size();
  std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
  std::vector<BlockIndex> post;
  std::vector<std::pair<BlockIndex, std::size_t>> stack{{cfg.entry(), 0}};
  state[cfg.entry()] = 1;
  while (!stack.empty()) {
    auto& [b, i] = stack.back();
    if (i < cfg.succ(b).size()) {
      const BlockIndex s = cfg.succ(b)[i++];
      if (state[s] == 0) {
        state[s] = 1;
        stack.emplace_back(s, 0);
      } else if (state[s] == 1) {
        retreating.emplace_back(b, s);
      }
    } else {
      state[b] = 2;
      post.push_back(b);
      stack.pop_back();
    }
  }
  rpo.assign(post.rbegin(), post.rend());
}

}  // namespace

bool LoopInfo::is_header(BlockIndex b) const {
  return std::any_of(loops.begin(), loops.end(), [b](const Loop& l) { return l.header == b; });
}

bool LoopInfo::dominates(BlockIndex a, BlockIndex b) const {
  while (true) {
    if (a == b) return true;
    if (idom[b] == b) return false;
    b = idom[b];
  }
}

LoopInfo compute_loops(const Cfg& cfg) {
  const int n = cfg.size();
  LoopInfo info;
  std::vector<BlockIndex> rpo;
  std::vector<std::pair<BlockIndex, BlockIndex>> retreating;
  depth_first(cfg, rpo, retreating);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[rpo[i]] = i;

  // Cooper, Harvey and Kennedy's iterative dominator algorithm.
  constexpr BlockIndex kUndefined = -1;
  info.idom.assign(n, kUndefined);
  info.idom[cfg.entry()] = cfg.entry();
  auto intersect = [&](BlockIndex a, BlockIndex b) {
    while (a != b) {
      while (order[a] > order[b]) a = info.idom[a];
      while (order[b] > order[a]) b = info.idom[b];
    }
    return a;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (BlockIndex b : rpo) {
      if (b == cfg.entry()) continue;
      BlockIndex next = kUndefined;
      for (BlockIndex p : cfg.pred(b)) {
        if (info.idom[p] == kUndefined) continue;
        next = next == kUndefined ? p : intersect(p, next);
      }
      if (info.idom[b] != next) {
        info.idom[b] = next;
        changed = true;
      }
    }
  }

  for (BlockIndex u = 0; u < n; ++u) {
    for (BlockIndex v : cfg.succ(u)) {
      if (info.dominates(v, u)) info.back_edges.emplace_back(u, v);
    }
  }
  for (const auto& [u, v] : retreating) {
    if (!info.dominates(v, u)) {
      info.warnings.push_back("irreducible edge " + cfg.name(u) + " -> " + cfg.name(v) + " ignored");
    }
  }

  // Natural loop of every header; back edges sharing a header merge.
  std::map<BlockIndex, std::set<BlockIndex>> body;
  for (const auto& [u, h] : info.back_edges) {
    std::set<BlockIndex>& loop = body[h];
    loop.insert(h);
    std::vector<BlockIndex> work;
    if (loop.insert(u).second) work.push_back(u);
    while (!work.empty()) {
      const BlockIndex b = work.back();
      work.pop_back();
      for (BlockIndex p : cfg.pred(b)) {
        if (loop.insert(p).second) work.push_back(p);
      }
    }
  }

  std::vector<BlockIndex> outer;
  for (const auto& [h, blocks] : body) {
    const bool nested = std::any_of(body.begin(), body.end(), [&, h = h](const auto& other) {
      return other.first != h && other.second.count(h) > 0;
    });
    if (!nested) outer.push_back(h);
  }
  std::sort(outer.begin(), outer.end(), [&](BlockIndex a, BlockIndex b) { return order[a] < order[b]; });

  info.loop_id.assign(n, std::nullopt);
  for (BlockIndex h : outer) {
    Loop loop;
    loop.id = static_cast<int>(info.loops.size());
    loop.header = h;
    loop.blocks.assign(body[h].begin(), body[h].end());
    for (BlockIndex b : loop.blocks) info.loop_id[b] = loop.id;
    info.loops.push_back(std::move(loop));
  }

  info.is_loop_before.assign(n, false);
  for (const Loop& loop : info.loops) {
    std::vector<bool> seen(n, false);
    std::vector<BlockIndex> work;
    for (BlockIndex b : loop.blocks) {
      for (BlockIndex s : cfg.succ(b)) {
        if (!seen[s]) {
          seen[s] = true;
          work.push_back(s);
        }
      }
    }
    while (!work.empty()) {
      const BlockIndex b = work.back();
      work.pop_back();
      if (info.loop_id[b] != loop.id) info.is_loop_before[b] = true;
      for (BlockIndex s : cfg.succ(b)) {
        if (!seen[s]) {
          seen[s] = true;
          work.push_back(s);
        }
      }
    }
  }
  return info;
}

namespace {

std::vector<BlockIndex> entering_preds(const Cfg& cfg, const LoopInfo& loops, BlockIndex header) {
  std::vector<BlockIndex> out;
  for (BlockIndex p : cfg.pred(header)) {
    if (!loops.dominates(header, p)) out.push_back(p);
  }
  return out;
}

std::string preheader_name(const Cfg& cfg, BlockIndex header) { return "preheader." + cfg.name(header); }

}  // namespace

CheckpointPlacement insert_checkpoints(const Cfg& cfg, const LoopInfo& loops) {
  CheckpointPlacement placement;
  std::set<std::string> used;
  std::vector<bool> visited(cfg.size(), false);
  std::vector<BlockIndex> stack{cfg.entry()};
  while (!stack.empty()) {
    const BlockIndex b = stack.back();
    stack.pop_back();
    if (visited[b]) continue;
    visited[b] = true;
    if (loops.is_header(b) && loops.is_loop_before[b]) {
      CheckpointSite site;
      site.function = cfg.function();
      site.header = cfg.name(b);
      const std::vector<BlockIndex> preds = entering_preds(cfg, loops, b);
      if (preds.size() == 1 && !used.count(cfg.name(preds.front()))) {
        site.block = cfg.name(preds.front());
      } else {
        site.block = preheader_name(cfg, b);
        site.synthetic = true;
      }
      used.insert(site.block);
      placement.sites.push_back(site);
    }
    const auto& succ = cfg.succ(b);
    for (auto it = succ.rbegin(); it != succ.rend(); ++it) {
      if (!visited[*it]) stack.push_back(*it);
    }
  }
  return placement;
}

Cfg apply_placement(const Cfg& cfg, const CheckpointPlacement& placement) {
  const LoopInfo loops = compute_loops(cfg);
  std::vector<std::string> blocks;
  std::vector<std::pair<std::string, std::string>> edges;
  std::set<BlockIndex> split;
  for (const CheckpointSite& site : placement.sites) {
    if (site.synthetic) split.insert(cfg.index(site.header));
  }
  for (BlockIndex b = 0; b < cfg.size(); ++b) {
    if (split.count(b)) {
      blocks.push_back(preheader_name(cfg, b));
      edges.emplace_back(preheader_name(cfg, b), cfg.name(b));
    }
    blocks.push_back(cfg.name(b));
  }
  for (BlockIndex a = 0; a < cfg.size(); ++a) {
    for (BlockIndex b : cfg.succ(a)) {
      const bool reroute = split.count(b) && !loops.dominates(b, a);
      edges.emplace_back(cfg.name(a), reroute ? preheader_name(cfg, b) : cfg.name(b));
    }
  }
  const std::string entry =
      split.count(cfg.entry()) ? preheader_name(cfg, cfg.entry()) : cfg.name(cfg.entry());
  return Cfg(cfg.function(), blocks, entry, edges);
}

json cfg_to_json(const Cfg& cfg, const CheckpointPlacement& placement) {
  const Cfg g = apply_placement(cfg, placement);
  json doc;
  doc["function"] = g.function();
  doc["entry"] = g.name(g.entry());
  json blocks = json::array();
  for (BlockIndex b = 0; b < g.size(); ++b) blocks.push_back(g.name(b));
  doc["blocks"] = blocks;
  json edges = json::array();
  for (const auto& [a, b] : g.edges()) edges.push_back({a, b});
  doc["edges"] = edges;
  json cps = json::array();
  for (const CheckpointSite& s : placement.sites) cps.push_back(s.block);
  doc["checkpoints"] = cps;
  return doc;
}

std::string cfg_to_dot(const Cfg& cfg, const CheckpointPlacement& placement) {
  const Cfg g = apply_placement(cfg, placement);
  std::set<std::string> marked;
  for (const CheckpointSite& s : placement.sites) marked.insert(s.block);
  std::ostringstream out;
  out << "digraph \"" << g.function() << "\" {\n";
  out << "  \"" << g.name(g.entry()) << "\";\n";
  for (BlockIndex b = 0; b < g.size(); ++b) {
    if (marked.count(g.name(b))) out << "  \"" << g.name(b) << "\" [checkpoint=true, style=bold];\n";
  }
  for (const auto& [a, b] : g.edges()) out << "  \"" << a << "\" -> \"" << b << "\";\n";
  out << "}\n";
  return out.str();
}

json placement_to_json(const Cfg& cfg, const LoopInfo& loops, const CheckpointPlacement& placement) {
  json doc;
  doc["function"] = cfg.function();
  json cps = json::array();
  for (const CheckpointSite& s : placement.sites) {
    cps.push_back({{"id", {s.function, s.block}}, {"block", s.block}, {"header", s.header}, {"synthetic", s.synthetic}});
  }
  doc["checkpoints"] = cps;
  json jl = json::array();
  for (const Loop& l : loops.loops) {
    json blocks = json::array();
    for (BlockIndex b : l.blocks) blocks.push_back(cfg.name(b));
    jl.push_back({{"id", l.id}, {"header", cfg.name(l.header)}, {"blocks", blocks}});
  }
  doc["loops"] = jl;
  doc["warnings"] = loops.warnings;
  doc["graph"] = cfg_to_json(cfg, placement);
  return doc;
}

}  // namespace mcs
