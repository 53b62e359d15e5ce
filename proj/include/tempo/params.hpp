#pragma once

#include <map>
#include <string>
#include <vector>

#include "tempo/autograd.hpp"

namespace tempo {

/// Named, ordered collection of trainable tensors. Insertion order is the
/// canonical order for checkpoints, optimizers and gradient accumulation.
class ParamStore {
public:
    Parameter& add(std::string name, ParamGroup group, Matrix init);
    Parameter& at(const std::string& name);
    const Parameter& at(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.contains(name); }

    std::vector<Parameter>& all() { return params_; }
    const std::vector<Parameter>& all() const { return params_; }
    std::size_t size() const { return params_.size(); }

    void zero_grad();
    std::size_t scalar_count(bool trainable_only) const;

private:
    std::vector<Parameter> params_;
    std::map<std::string, std::size_t> index_;
};

} // namespace tempo
