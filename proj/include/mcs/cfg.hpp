#pragma once

// Control-flow graphs, natural loops and checkpoint placement between
// outermost loops.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mcs/errors.hpp"

namespace mcs {

using BlockIndex = int;

// Immutable basic-block graph. Blocks are addressed by index; names are kept
// for I/O.
class Cfg {
 public:
  // Throws ParseError on duplicate or unknown blocks, UnreachableBlock when a
  // block cannot be reached from the entry.
  Cfg(std::string function, std::vector<std::string> blocks, const std::string& entry,
      const std::vector<std::pair<std::string, std::string>>& edges);

  const std::string& function() const { return function_; }
  int size() const { return static_cast<int>(names_.size()); }
  BlockIndex entry() const { return entry_; }
  const std::string& name(BlockIndex b) const { return names_.at(b); }
  // Throws ParseError for an unknown name.
  BlockIndex index(const std::string& name) const;
  const std::vector<BlockIndex>& succ(BlockIndex b) const { return succ_.at(b); }
  const std::vector<BlockIndex>& pred(BlockIndex b) const { return pred_.at(b); }
  std::vector<std::pair<std::string, std::string>> edges() const;

 private:
  std::string function_;
  std::vector<std::string> names_;
  BlockIndex entry_ = 0;
  std::vector<std::vector<BlockIndex>> succ_;
  std::vector<std::vector<BlockIndex>> pred_;
};

enum class CfgFormat { Json, Dot };

// {"function": "f", "entry": "a", "blocks": [...], "edges": [["a","b"], ...]}.
// "blocks" defaults to the edge endpoints in order of appearance and "entry"
// to the first block.
Cfg cfg_from_json(const nlohmann::json& doc);
// digraph f { a -> b; b -> c -> a; }. The first node mentioned is the entry.
Cfg cfg_from_dot(std::string_view text);
// Sniffs the format: a document starting with '{' is JSON.
Cfg parse_cfg(std::string_view text, CfgFormat* detected = nullptr);
Cfg load_cfg(const std::filesystem::path& path, CfgFormat* detected = nullptr);

struct Loop {
  int id = 0;
  BlockIndex header = 0;
  // All blocks of the loop, nested loops included, sorted.
  std::vector<BlockIndex> blocks;
};

struct LoopInfo {
  // Immediate dominator of every block; the entry maps to itself.
  std::vector<BlockIndex> idom;
  std::vector<std::pair<BlockIndex, BlockIndex>> back_edges;
  // Outermost loops, numbered in reverse postorder of their headers.
  std::vector<Loop> loops;
  // Id of the outermost loop containing each block.
  std::vector<std::optional<int>> loop_id;
  std::vector<bool> is_loop_before;
  // Retreating edges that form no natural loop.
  std::vector<std::string> warnings;

  bool is_header(BlockIndex b) const;
  bool dominates(BlockIndex a, BlockIndex b) const;
};

LoopInfo compute_loops(const Cfg& cfg);

struct CheckpointSite {
  // Unique id: (function, block).
  std::string function;
  std::string block;
  std::string header;
  // The block is a preheader to be created in front of the header.
  bool synthetic = false;
};

struct CheckpointPlacement {
  std::vector<CheckpointSite> sites;
};

// One checkpoint in front of every outermost loop that follows another loop.
CheckpointPlacement insert_checkpoints(const Cfg& cfg, const LoopInfo& loops);

// The graph with synthetic preheaders spliced in.
Cfg apply_placement(const Cfg& cfg, const CheckpointPlacement& placement);

nlohmann::json cfg_to_json(const Cfg& cfg, const CheckpointPlacement& placement);
std::string cfg_to_dot(const Cfg& cfg, const CheckpointPlacement& placement);
nlohmann::json placement_to_json(const Cfg& cfg, const LoopInfo& loops, const CheckpointPlacement& placement);

}  // namespace mcs
