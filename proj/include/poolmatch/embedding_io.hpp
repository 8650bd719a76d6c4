#pragma once

// Feature-set files, one feature vector per row.
//
// Binary layout: little-endian, 8-byte header of two uint32 (count, dim)
// followed by count*dim float32 values in row-major order.
// CSV layout: one comma-separated row of decimal floats per feature.

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace poolmatch {

std::vector<Eigen::VectorXd> load_embeddings_binary(const std::string& path);
void save_embeddings_binary(const std::string& path, const std::vector<Eigen::VectorXd>& rows);

std::vector<Eigen::VectorXd> load_embeddings_csv(const std::string& path);
void save_embeddings_csv(const std::string& path, const std::vector<Eigen::VectorXd>& rows);

}  // namespace poolmatch
