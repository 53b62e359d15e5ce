#include "tempo/params.hpp"

#include <stdexcept>

namespace tempo {

Parameter& ParamStore::add(std::string name, ParamGroup group, Matrix init) {
    if (index_.contains(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
    index_.emplace(name, params_.size());
    params_.emplace_back(std::move(name), group, std::move(init));
    return params_.back();
}

Parameter& ParamStore::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no parameter named '" + name + "'");
    return params_[it->second];
}

const Parameter& ParamStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no parameter named '" + name + "'");
    return params_[it->second];
}

void ParamStore::zero_grad() {
    for (Parameter& p : params_) p.zero_grad();
}

std::size_t ParamStore::scalar_count(bool trainable_only) const {
    std::size_t n = 0;
    for (const Parameter& p : params_)
        if (!trainable_only || p.trainable) n += p.value.size();
    return n;
}

} // namespace tempo
