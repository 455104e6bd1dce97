#include "cova/dataset.hpp"

#include "cova/errors.hpp"

namespace cova {

void Dataset::resolve_targets() {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < gallery.size(); ++i) index.emplace(gallery[i].id, i);
  for (auto& t : triplets) {
    auto it = index.find(t.target_id);
    if (it == index.end()) {
      throw LoadError("triplet " + t.id + ": target_id '" + t.target_id +
                      "' not found in gallery");
    }
    t.target_index = it->second;
  }
}

}  // namespace cova
