#pragma once

#include <cstdint>
#include <string>

#include "cae/nets.hpp"
#include "cae/optim.hpp"

namespace cae {

struct CheckpointMeta {
    std::string architecture_id;
    Role role = Role::aux;
    uint32_t epoch = 0;
    uint64_t seed = 0;
};

// Binary container: magic "CAEC", version u16, architecture id, role, epoch,
// seed, named float32 parameter segments, BN running statistics, optional
// Adam state. Little-endian throughout.
void save_checkpoint(Network<float>& net, const std::string& path, uint32_t epoch = 0,
                     uint64_t seed = 0, Adam* adam = nullptr);

// Rebuilds the network from the stored architecture id. When
// expected_arch_prefix is non-empty the stored id must start with it.
Network<float> load_checkpoint(const std::string& path, CheckpointMeta* meta = nullptr,
                               Adam* adam = nullptr, const std::string& expected_arch_prefix = "");

}  // namespace cae
