#pragma once

#include "qtrack/qgnn.hpp"

namespace qtrack::reference {

// Plain serial implementations of the data-parallel kernels in qgnn. Kept
// as the comparison baseline for the OpenMP paths (tests assert bit-equal
// results) and for the benchmark tool.

std::vector<double> edge_network(const Matrix& state,
                                 const qgnn::EdgeList& edges,
                                 const qgnn::Model& model,
                                 const qgnn::ModelParams& p);

Matrix node_network(const Matrix& state, const qgnn::EdgeList& edges,
                    std::span<const double> scores, const qgnn::Model& model,
                    const qgnn::ModelParams& p);

std::vector<double> forward(const graphbuild::SubGraph& graph,
                            const qgnn::Model& model,
                            const qgnn::ModelParams& p);

}  // namespace qtrack::reference
