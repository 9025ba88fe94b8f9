#pragma once
// Checkpoint file: a versioned binary header (magic, version, schema
// fingerprint, model hyperparameters, feature partition, sampling pipeline)
// followed by every parameter blob in registry order as little-endian
// 64-bit floats. Byte layout is fixed, so identical training runs produce
// identical files.

#include <string>

#include "hinctr/model.hpp"
#include "hinctr/pipeline.hpp"

namespace hinctr {

struct CheckpointData {
  ModelParams params;
  PipelineConfig pipeline;
};

void save_checkpoint(const std::string& path, ModelParams& params,
                     const PipelineConfig& pipeline);

// Requires the same schema the checkpoint was trained against.
CheckpointData load_checkpoint(const std::string& path, const FeatureSchema& schema);

}  // namespace hinctr
