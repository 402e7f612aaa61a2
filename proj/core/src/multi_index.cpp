#include "sgcalc/multi_index.hpp"
#include "sgcalc/errors.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace sgcalc {

namespace {

void enumerate_rec(int nvars, int order, int pos, int remaining,
                   std::vector<std::uint8_t>& cur,
                   std::vector<std::vector<std::uint8_t>>& out) {
  if (pos == nvars) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    cur[pos] = static_cast<std::uint8_t>(e);
    enumerate_rec(nvars, order, pos + 1, remaining - e, cur, out);
  }
  cur[pos] = 0;
}

} // namespace

MultiIndexTable::MultiIndexTable(int nvars, int order)
  : nvars_(nvars), order_(order) {
  if (nvars < 1 || nvars > 12 || order < 0 || order > 6)
    throw InvalidInput("multi-index table: nvars must be 1..12 and order 0..6");

  std::vector<std::vector<std::uint8_t>> all;
  std::vector<std::uint8_t> cur(nvars, 0);
  enumerate_rec(nvars, order, 0, order, cur, all);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    int da = 0, db = 0;
    for (auto v : a) da += v;
    for (auto v : b) db += v;
    if (da != db) return da < db;
    return a < b;
  });

  size_ = static_cast<int>(all.size());
  exps_.resize(static_cast<std::size_t>(size_) * nvars_);
  degree_.resize(size_);
  factprod_.resize(size_);
  first_of_degree_.assign(order + 2, size_);
  key_radix_ = order + 1;

  std::size_t keyspan = 1;
  for (int v = 0; v < nvars_; ++v) keyspan *= key_radix_;
  lookup_.assign(keyspan, -1);

  for (int k = 0; k < size_; ++k) {
    int deg = 0;
    double fp = 1.0;
    std::size_t key = 0;
    for (int v = 0; v < nvars_; ++v) {
      std::uint8_t e = all[k][v];
      exps_[static_cast<std::size_t>(k) * nvars_ + v] = e;
      deg += e;
      for (int f = 2; f <= e; ++f) fp *= f;
      key = key * key_radix_ + e;
    }
    degree_[k] = deg;
    factprod_[k] = fp;
    lookup_[key] = k;
    if (first_of_degree_[deg] > k) first_of_degree_[deg] = k;
  }
  for (int d = order; d >= 0; --d)
    if (first_of_degree_[d] > first_of_degree_[d + 1])
      first_of_degree_[d] = first_of_degree_[d + 1];

  var_index_.resize(nvars_);
  std::vector<int> e(nvars_, 0);
  for (int v = 0; v < nvars_; ++v) {
    e.assign(nvars_, 0);
    if (order >= 1) {
      e[v] = 1;
      var_index_[v] = find(e);
    } else {
      var_index_[v] = -1;
    }
  }

  prod_.assign(static_cast<std::size_t>(size_) * size_, -1);
  for (int i = 0; i < size_; ++i) {
    for (int j = 0; j < size_; ++j) {
      if (degree_[i] + degree_[j] > order_) continue;
      std::size_t key = 0;
      for (int v = 0; v < nvars_; ++v)
        key = key * key_radix_ + (exps(i)[v] + exps(j)[v]);
      prod_[static_cast<std::size_t>(i) * size_ + j] = lookup_[key];
    }
  }

  raise_.assign(static_cast<std::size_t>(size_) * nvars_, -1);
  for (int k = 0; k < size_; ++k) {
    if (degree_[k] >= order_) continue;
    for (int v = 0; v < nvars_; ++v) {
      std::size_t key = 0;
      for (int w = 0; w < nvars_; ++w)
        key = key * key_radix_ + (exps(k)[w] + (w == v ? 1 : 0));
      raise_[static_cast<std::size_t>(k) * nvars_ + v] = lookup_[key];
    }
  }
}

int MultiIndexTable::find(const std::vector<int>& e) const {
  if (static_cast<int>(e.size()) != nvars_) return -1;
  std::size_t key = 0;
  for (int v = 0; v < nvars_; ++v) {
    if (e[v] < 0 || e[v] > order_) return -1;
    key = key * key_radix_ + e[v];
  }
  return lookup_[key];
}

const MultiIndexTable& MultiIndexTable::get(int nvars, int order) {
  static std::mutex mtx;
  static std::map<std::pair<int, int>, std::unique_ptr<MultiIndexTable>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(nvars, order);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::unique_ptr<MultiIndexTable>(new MultiIndexTable(nvars, order))).first;
  }
  return *it->second;
}

} // namespace sgcalc
