#include "dynmatch/matching.hpp"

#include <deque>
#include <utility>

namespace dynmatch {

namespace {

constexpr int kUnlabeled = -1;
constexpr int kOdd = 0;
constexpr int kEven = 1;

class BlossomSearch {
public:
  explicit BlossomSearch(const std::vector<std::vector<int>>& adj)
      : adj_(adj),
        n_(static_cast<int>(adj.size())),
        mate_(n_, -1),
        label_(n_, kUnlabeled),
        link_(n_, -1),
        base_(n_),
        depth_(n_, 0),
        dead_(n_, 0) {
    for (int v = 0; v < n_; ++v) base_[v] = v;
  }

  std::vector<int> run() {
    greedy_start();
    for (int r = 0; r < n_; ++r) {
      if (mate_[r] != -1 || dead_[r]) continue;
      const bool augmented = augment_from(r);
      // A vertex set explored by a failed search (a Hungarian tree) can never
      // be part of a later augmenting path; drop it from further searches.
      for (int v : touched_) {
        if (!augmented) dead_[v] = 1;
        label_[v] = kUnlabeled;
        link_[v] = -1;
        base_[v] = v;
      }
      touched_.clear();
    }
    return std::move(mate_);
  }

private:
  void greedy_start() {
    for (int u = 0; u < n_; ++u) {
      if (mate_[u] != -1) continue;
      for (int v : adj_[u]) {
        if (v != u && mate_[v] == -1) {
          mate_[u] = v;
          mate_[v] = u;
          break;
        }
      }
    }
  }

  int find(int u) {
    while (base_[u] != u) {
      base_[u] = base_[base_[u]];
      u = base_[u];
    }
    return u;
  }

  int lca(int u, int v) {
    u = find(u);
    v = find(v);
    while (u != v) {
      if (depth_[u] < depth_[v]) std::swap(u, v);
      u = find(link_[mate_[u]]);
    }
    return u;
  }

  void touch(int v) { touched_.push_back(v); }

  void shrink(int u, int v, int p) {
    while (find(u) != p) {
      link_[u] = v;
      v = mate_[u];
      if (label_[v] == kOdd) {
        label_[v] = kEven;
        queue_.push_back(v);
      }
      base_[u] = p;
      base_[v] = p;
      u = link_[v];
    }
  }

  bool augment_from(int root) {
    queue_.clear();
    label_[root] = kEven;
    depth_[root] = 0;
    touch(root);
    queue_.push_back(root);
    while (!queue_.empty()) {
      const int u = queue_.front();
      queue_.pop_front();
      for (int v : adj_[u]) {
        if (v == u || dead_[v]) continue;
        if (label_[v] == kUnlabeled) {
          label_[v] = kOdd;
          link_[v] = u;
          touch(v);
          if (mate_[v] == -1) {
            for (int x = v, y = u; y != -1;) {
              const int next = mate_[y];
              mate_[x] = y;
              mate_[y] = x;
              x = next;
              y = x == -1 ? -1 : link_[x];
            }
            return true;
          }
          const int w = mate_[v];
          label_[w] = kEven;
          depth_[v] = depth_[u] + 1;
          depth_[w] = depth_[u] + 2;
          touch(w);
          queue_.push_back(w);
        } else if (label_[v] == kEven && find(u) != find(v)) {
          const int p = lca(u, v);
          shrink(u, v, p);
          shrink(v, u, p);
        }
      }
    }
    return false;
  }

  const std::vector<std::vector<int>>& adj_;
  int n_;
  std::vector<int> mate_;
  std::vector<int> label_;
  std::vector<int> link_;
  std::vector<int> base_;
  std::vector<int> depth_;
  std::vector<char> dead_;
  std::vector<int> touched_;
  std::deque<int> queue_;
};

}  // namespace

std::vector<int> maximum_matching(const std::vector<std::vector<int>>& adjacency) {
  return BlossomSearch(adjacency).run();
}

int matching_size(const std::vector<int>& mate) {
  int twice = 0;
  for (int v : mate)
    if (v != -1) ++twice;
  return twice / 2;
}

}  // namespace dynmatch
