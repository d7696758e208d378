#include "indexing.h"

shape_t strides(shape_t const& bound) {
  shape_t ret(bound.size(), 1);
  for(int i = int(bound.size()) - 2; i >= 0; --i) {
    ret[i] = ret[i + 1] * bound[i + 1];
  }
  return ret;
}

int64_t flatten(shape_t const& idx, shape_t const& bound) {
  int64_t ret = 0;
  for(size_t i = 0; i != bound.size(); ++i) {
    ret = ret * bound[i] + idx[i];
  }
  return ret;
}

bool next_index(shape_t& idx, shape_t const& bound) {
  for(int i = int(bound.size()) - 1; i >= 0; --i) {
    idx[i] += 1;
    if(idx[i] < bound[i]) {
      return true;
    }
    idx[i] = 0;
  }
  return false;
}

vector<int> label_positions(labels_t const& l1, labels_t const& l2) {
  vector<int> ret;
  ret.reserve(l1.size());
  for(auto const& l: l1) {
    auto iter = std::find(l2.begin(), l2.end(), l);
    if(iter == l2.end()) {
      throw plan_error_t("unknown label '" + l + "' in projection");
    }
    ret.push_back(int(iter - l2.begin()));
  }
  return ret;
}

shape_t project(shape_t const& b, labels_t const& l1, labels_t const& l2) {
  if(b.size() != l2.size()) {
    throw plan_error_t("projection: bound and label list lengths differ");
  }
  shape_t ret;
  ret.reserve(l1.size());
  for(int pos: label_positions(l1, l2)) {
    ret.push_back(b[pos]);
  }
  return ret;
}

labels_t concat_distinct(labels_t const& l1, labels_t const& l2) {
  labels_t ret = l1;
  for(auto const& l: l2) {
    if(!contains_label(ret, l)) {
      ret.push_back(l);
    }
  }
  return ret;
}

bool contains_label(labels_t const& ls, string const& l) {
  return std::find(ls.begin(), ls.end(), l) != ls.end();
}
