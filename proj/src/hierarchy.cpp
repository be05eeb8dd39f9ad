#include "finetype/hierarchy.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "finetype/errors.hpp"

namespace finetype {

void TypeHierarchy::validate_path(const std::string& path) {
  if (path.size() < 2 || path[0] != '/') {
    throw format_error("malformed label path '" + path + "': expected /segment(/segment)*");
  }
  std::size_t seg_len = 0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (path[i] == '/') {
      if (seg_len == 0) {
        throw format_error("malformed label path '" + path + "': empty segment");
      }
      seg_len = 0;
    } else {
      ++seg_len;
    }
  }
  if (seg_len == 0) {
    throw format_error("malformed label path '" + path + "': empty segment");
  }
}

std::size_t TypeHierarchy::path_depth(const std::string& path) {
  return static_cast<std::size_t>(std::count(path.begin(), path.end(), '/'));
}

std::string TypeHierarchy::parent_path(const std::string& path) {
  const std::size_t cut = path.rfind('/');
  return cut == 0 ? std::string{} : path.substr(0, cut);
}

bool TypeHierarchy::is_ancestor_or_equal(const std::string& a, const std::string& b) {
  if (a == b) return true;
  return b.size() > a.size() && b.compare(0, a.size(), a) == 0 && b[a.size()] == '/';
}

TypeHierarchy TypeHierarchy::from_labels(const std::vector<std::string>& paths) {
  std::set<std::string> closed;
  for (const std::string& p : paths) {
    validate_path(p);
    std::string cur = p;
    while (!cur.empty()) {
      closed.insert(cur);
      cur = parent_path(cur);
    }
  }
  TypeHierarchy h;
  h.nodes_.assign(closed.begin(), closed.end());
  for (std::size_t i = 0; i < h.nodes_.size(); ++i) h.index_[h.nodes_[i]] = i;
  h.children_.resize(h.nodes_.size());
  for (std::size_t i = 0; i < h.nodes_.size(); ++i) {
    const std::string parent = parent_path(h.nodes_[i]);
    if (parent.empty()) {
      h.roots_.push_back(i);
    } else {
      h.children_[h.index_.at(parent)].push_back(i);
    }
  }
  return h;
}

std::size_t TypeHierarchy::index_of(const std::string& path) const {
  auto it = index_.find(path);
  if (it == index_.end()) {
    throw std::invalid_argument("unknown label '" + path + "'");
  }
  return it->second;
}

std::optional<std::size_t> TypeHierarchy::parent_of(std::size_t idx) const {
  const std::string parent = parent_path(nodes_[idx]);
  if (parent.empty()) return std::nullopt;
  return index_.at(parent);
}

std::size_t TypeHierarchy::max_depth() const {
  std::size_t d = 0;
  for (const std::string& n : nodes_) d = std::max(d, path_depth(n));
  return d;
}

}  // namespace finetype
