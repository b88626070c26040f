#include "votespread/social_graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "votespread/error.hpp"

namespace votespread {

NodeId FanGraph::add_user(std::string_view user) {
  auto it = index_.find(std::string(user));
  if (it != index_.end()) return it->second;
  const auto id = static_cast<NodeId>(names_.size());
  names_.emplace_back(user);
  index_.emplace(names_.back(), id);
  fans_.emplace_back();
  friends_.emplace_back();
  return id;
}

bool FanGraph::add_edge(std::string_view fan, std::string_view watched) {
  if (fan == watched) {
    throw Error(ErrorCode::SelfEdge, "user '" + std::string(fan) + "' cannot watch itself");
  }
  const NodeId f = add_user(fan);
  const NodeId w = add_user(watched);
  return add_edge(f, w);
}

bool FanGraph::add_edge(NodeId fan, NodeId watched) {
  if (fan == watched) {
    throw Error(ErrorCode::SelfEdge, "user '" + names_[fan] + "' cannot watch itself");
  }
  auto& fan_list = fans_[watched];
  auto pos = std::lower_bound(fan_list.begin(), fan_list.end(), fan);
  if (pos != fan_list.end() && *pos == fan) return false;
  fan_list.insert(pos, fan);
  auto& friend_list = friends_[fan];
  friend_list.insert(std::lower_bound(friend_list.begin(), friend_list.end(), watched),
                     watched);
  ++edge_count_;
  return true;
}

std::optional<NodeId> FanGraph::find(std::string_view user) const {
  auto it = index_.find(std::string(user));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool FanGraph::has_edge(NodeId fan, NodeId watched) const {
  const auto& list = fans_[watched];
  return std::binary_search(list.begin(), list.end(), fan);
}

std::set<UserId> FanGraph::fans(std::string_view user) const {
  std::set<UserId> out;
  if (auto id = find(user)) {
    for (NodeId f : fans_[*id]) out.insert(names_[f]);
  }
  return out;
}

std::set<UserId> FanGraph::friends(std::string_view user) const {
  std::set<UserId> out;
  if (auto id = find(user)) {
    for (NodeId f : friends_[*id]) out.insert(names_[f]);
  }
  return out;
}

std::size_t FanGraph::fan_count(std::string_view user) const {
  auto id = find(user);
  return id ? fans_[*id].size() : 0;
}

std::vector<std::pair<UserId, UserId>> FanGraph::edges() const {
  std::vector<std::pair<UserId, UserId>> out;
  out.reserve(edge_count_);
  for (NodeId w = 0; w < fans_.size(); ++w) {
    for (NodeId f : fans_[w]) out.emplace_back(names_[f], names_[w]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

FanGraph read_graph(std::istream& in) {
  FanGraph graph;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string fan, watched, extra;
    if (!(fields >> fan >> watched) || (fields >> extra)) {
      throw Error(ErrorCode::ParseError, "expected 'fan<TAB>watched'", line_no);
    }
    if (fan == watched) {
      throw Error(ErrorCode::SelfEdge, "user '" + fan + "' cannot watch itself", line_no);
    }
    graph.add_edge(fan, watched);
  }
  return graph;
}

FanGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_graph(in);
}

void write_graph(std::ostream& out, const FanGraph& graph) {
  for (const auto& [fan, watched] : graph.edges()) out << fan << '\t' << watched << '\n';
}

void save_graph(const std::filesystem::path& path, const FanGraph& graph) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_graph(out, graph);
}

}  // namespace votespread
