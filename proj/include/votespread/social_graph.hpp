#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace votespread {

// Opaque, case-sensitive user token (no whitespace).
using UserId = std::string;

// Dense index assigned to a user on first sight.
using NodeId = std::uint32_t;

// Directed watch graph. An edge fan -> watched means `fan` sees the activity of
// `watched`; the reverse edge is never inferred.
//
// Built by a single writer; every const member is safe to call concurrently
// once construction is finished.
class FanGraph {
 public:
  FanGraph() = default;

  // Registers a user with no edges. Returns its node id.
  NodeId add_user(std::string_view user);

  // Inserts fan -> watched. Returns false when the edge already existed.
  // Throws Error(SelfEdge) when fan == watched.
  bool add_edge(std::string_view fan, std::string_view watched);
  bool add_edge(NodeId fan, NodeId watched);

  std::set<UserId> fans(std::string_view user) const;
  std::set<UserId> friends(std::string_view user) const;
  std::size_t fan_count(std::string_view user) const;

  std::optional<NodeId> find(std::string_view user) const;
  const UserId& name(NodeId id) const { return names_[id]; }

  // Sorted neighbour lists by node id.
  std::span<const NodeId> fans_of(NodeId id) const { return fans_[id]; }
  std::span<const NodeId> friends_of(NodeId id) const { return friends_[id]; }

  bool has_edge(NodeId fan, NodeId watched) const;

  std::size_t user_count() const { return names_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  // All edges as (fan, watched) names, sorted.
  std::vector<std::pair<UserId, UserId>> edges() const;

 private:
  std::vector<UserId> names_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::vector<NodeId>> fans_;
  std::vector<std::vector<NodeId>> friends_;
  std::size_t edge_count_ = 0;
};

// Edge-list text: one `fan<TAB>watched` per line, `#` comments and blank lines
// ignored. Any run of whitespace separates the two columns.
FanGraph read_graph(std::istream& in);
FanGraph load_graph(const std::filesystem::path& path);

// Writes sorted edges in the edge-list format.
void write_graph(std::ostream& out, const FanGraph& graph);
void save_graph(const std::filesystem::path& path, const FanGraph& graph);

}  // namespace votespread
