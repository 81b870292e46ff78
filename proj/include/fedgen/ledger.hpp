#pragma once

#include <cstdint>

namespace fedgen {

// One transfer = one model upload; broadcasts are not counted.
struct CommLedger {
  std::uint64_t group_transfers = 0;    // uploads within FL groups
  std::uint64_t central_transfers = 0;  // uploads to the central merger
  std::uint64_t bytes_per_transfer = 0;

  std::uint64_t group_bytes() const { return group_transfers * bytes_per_transfer; }
  std::uint64_t central_bytes() const { return central_transfers * bytes_per_transfer; }
};

enum class TransferChannel { group, central };

}  // namespace fedgen
