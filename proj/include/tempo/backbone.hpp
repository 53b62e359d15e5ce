#pragma once

// Pre-norm decoder-only transformer over a T x L_E token sequence, with LoRA
// adapters on the query and value projections, plus the gradient utilities
// (exact reverse-mode gradients and a finite-difference checker).

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tempo/autograd.hpp"
#include "tempo/params.hpp"

namespace tempo::backbone {

struct BackboneConfig {
    std::size_t layers = 3;
    std::size_t heads = 4;
    std::size_t embed_dim = 64;
    std::size_t mlp_mult = 4;
    double dropout = 0.0;
    bool causal = true;
    std::uint64_t seed = 0;
    bool lora = true;
    std::size_t lora_rank = 4;
    double lora_alpha = 8.0;

    void validate() const;
};

enum class FreezePolicy { from_scratch, gpt_style };

std::string policy_name(FreezePolicy p);
FreezePolicy parse_policy(const std::string& name);

/// Adds the backbone tensors ("backbone.*") to `store`. The positional table
/// has `max_tokens` rows.
void init_backbone(ParamStore& store, const BackboneConfig& cfg, std::size_t max_tokens);

/// Hidden states for `seq` (T x L_E). dropout_rng may be null, which disables
/// dropout regardless of cfg.dropout.
ag::Var forward(ag::Tape& tape, ag::Var seq, ParamStore& store, const BackboneConfig& cfg,
                std::mt19937_64* dropout_rng = nullptr);

/// w + (alpha / rank) * b * a, with w d x d, a rank x d and b d x rank.
Matrix apply_lora(const Matrix& w, const Matrix& a, const Matrix& b, double alpha, std::size_t rank);

bool group_trainable(ParamGroup group, FreezePolicy policy);

/// Sets Parameter::trainable for every tensor in the store from its group.
void set_freeze_policy(ParamStore& store, FreezePolicy policy);

using LossFn = std::function<ag::Var(ag::Tape&)>;

/// Zeroes all gradients, records loss_fn on a fresh tape and runs the reverse
/// sweep. Returns the loss value.
double compute_gradients(ParamStore& store, const LossFn& loss_fn);

struct GradCheckSample {
    std::string param;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

struct GroupCheck {
    double max_rel_error = 0.0;
    std::size_t samples = 0;
};

struct GradCheckReport {
    std::map<ParamGroup, GroupCheck> groups;
    std::vector<GradCheckSample> samples;
    double max_rel_error = 0.0;
};

/// Compares analytic gradients to central differences on up to
/// samples_per_group coordinates of every trainable group. analytic_scale
/// multiplies the analytic gradient before comparison (fault injection).
GradCheckReport grad_check(ParamStore& store, const LossFn& loss_fn, double h,
                           std::size_t samples_per_group, std::uint64_t seed,
                           double analytic_scale = 1.0);

} // namespace tempo::backbone
