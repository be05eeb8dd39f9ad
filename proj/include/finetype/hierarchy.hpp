#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace finetype {

// Rooted tree over slash-path labels ("/person/artist"). Indices are dense
// and lexicographic, so a fixed label set yields the same layout regardless
// of input order.
class TypeHierarchy {
 public:
  TypeHierarchy() = default;

  // Builds the closure of the given paths with all their ancestors.
  static TypeHierarchy from_labels(const std::vector<std::string>& paths);

  std::size_t k() const { return nodes_.size(); }
  const std::vector<std::string>& labels() const { return nodes_; }
  const std::string& label(std::size_t idx) const { return nodes_[idx]; }
  bool contains(const std::string& path) const { return index_.count(path) > 0; }
  std::size_t index_of(const std::string& path) const;

  // Depth-1 nodes, the candidate set when descending from the virtual root.
  const std::vector<std::size_t>& roots() const { return roots_; }
  const std::vector<std::size_t>& children_of(std::size_t idx) const { return children_[idx]; }
  std::optional<std::size_t> parent_of(std::size_t idx) const;
  std::size_t depth_of(std::size_t idx) const { return path_depth(nodes_[idx]); }
  std::size_t max_depth() const;

  bool operator==(const TypeHierarchy& other) const { return nodes_ == other.nodes_; }

  static std::size_t path_depth(const std::string& path);
  // "/a/b" -> "/a"; "" for depth-1 paths.
  static std::string parent_path(const std::string& path);
  static bool is_ancestor_or_equal(const std::string& a, const std::string& b);
  // Rejects anything not matching /segment(/segment)* with format_error.
  static void validate_path(const std::string& path);

 private:
  std::vector<std::string> nodes_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> roots_;
};

}  // namespace finetype
