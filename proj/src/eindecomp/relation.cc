#include "relation.h"

shape_t tensor_relation_t::chunk_bound() const {
  shape_t ret(bound.size());
  for(size_t i = 0; i != bound.size(); ++i) {
    ret[i] = bound[i] / part[i];
  }
  return ret;
}

bool operator==(tensor_relation_t const& lhs, tensor_relation_t const& rhs) {
  return lhs.bound == rhs.bound && lhs.part == rhs.part && lhs.chunks == rhs.chunks;
}

void check_divides(shape_t const& part, shape_t const& bound) {
  if(part.size() != bound.size()) {
    throw plan_error_t(
      "partition vector rank " + std::to_string(part.size()) +
      " does not match bound rank " + std::to_string(bound.size()));
  }
  for(size_t i = 0; i != part.size(); ++i) {
    if(part[i] < 1 || bound[i] % part[i] != 0) {
      throw plan_error_t(
        "partition entry " + std::to_string(part[i]) +
        " does not divide bound " + std::to_string(bound[i]) +
        " in dimension " + std::to_string(i));
    }
  }
}

tensor_relation_t chunk(tensor_t const& t, shape_t const& d) {
  check_divides(d, t.bound);
  shape_t cb(t.bound.size());
  for(size_t i = 0; i != d.size(); ++i) {
    cb[i] = t.bound[i] / d[i];
  }

  tensor_relation_t ret { t.bound, d, {} };
  shape_t key(d.size(), 0);
  do {
    tensor_t c = tensor_t::zeros(cb);
    shape_t local(cb.size(), 0);
    shape_t global(cb.size());
    do {
      for(size_t i = 0; i != cb.size(); ++i) {
        global[i] = key[i] * cb[i] + local[i];
      }
      c.at(local) = t.at(global);
    } while(next_index(local, cb));
    ret.chunks.insert({ key, std::move(c) });
  } while(next_index(key, d));
  return ret;
}

tensor_t assemble(tensor_relation_t const& r) {
  shape_t cb = r.chunk_bound();
  tensor_t ret = tensor_t::zeros(r.bound);
  shape_t key(r.part.size(), 0);
  do {
    auto iter = r.chunks.find(key);
    if(iter == r.chunks.end()) {
      throw plan_error_t("incomplete relation: missing chunk " + write_with_ss(key));
    }
    tensor_t const& c = iter->second;
    if(c.bound != cb) {
      throw plan_error_t("relation chunk " + write_with_ss(key) + " has the wrong bound");
    }
    shape_t local(cb.size(), 0);
    shape_t global(cb.size());
    do {
      for(size_t i = 0; i != cb.size(); ++i) {
        global[i] = key[i] * cb[i] + local[i];
      }
      ret.at(global) = c.at(local);
    } while(next_index(local, cb));
  } while(next_index(key, r.part));
  return ret;
}

bool equivalent(tensor_t const& t, tensor_relation_t const& r) {
  if(t.bound != r.bound) {
    return false;
  }
  shape_t cb = r.chunk_bound();
  shape_t global(t.bound.size(), 0);
  shape_t key(t.bound.size()), local(t.bound.size());
  do {
    for(size_t i = 0; i != global.size(); ++i) {
      key[i] = global[i] / cb[i];
      local[i] = global[i] % cb[i];
    }
    auto iter = r.chunks.find(key);
    if(iter == r.chunks.end() || iter->second.bound != cb) {
      return false;
    }
    if(iter->second.at(local) != t.at(global)) {
      return false;
    }
  } while(next_index(global, t.bound));
  return true;
}

tensor_relation_t tra_repartition(tensor_relation_t const& r, shape_t const& d_new) {
  check_divides(d_new, r.bound);
  return chunk(assemble(r), d_new);
}
