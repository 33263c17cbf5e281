#pragma once

#include <string>
#include <vector>

#include "igcl/pipeline.hpp"

namespace igcl {

// Published hyperparameter rows, stored verbatim. The GAT rows keep their
// printed backbone string but resolve to the GCN backbone at run time (GAT
// is not implemented; see README).
struct Preset {
    std::string name;
    TaskLevel level = TaskLevel::node;
    std::string printed_backbone;    // node rows: "GCN" or "GAT"
    std::string printed_projection;  // graph rows: "Linear" or "Skip"
    int num_epochs = 0;
    int num_layers = 0;  // graph rows only (node rows use 2)
    int emb_size = 0;
    int batch_size = 0;  // graph rows only
    double dropout = 0.0;
    double lr = 0.0;
    double lr_step = 0.0;  // 0 = printed as "-"
    double l2 = 0.0;
    double tau = 0.0;

    TrainConfig to_config() const;
};

const std::vector<Preset>& all_presets();
// nullptr when unknown; names are lowercase (mutag, imdb-b, cora, ...)
const Preset* find_preset(const std::string& name);
std::string preset_names_joined();

}  // namespace igcl
