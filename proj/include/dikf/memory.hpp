#pragma once

#include <algorithm>
#include <cstddef>

#include "dikf/types.hpp"

namespace dikf {

// Accounting of the large temporaries a computation allocates, in units of
// doubles. Peak is what the memory-budget checks assert against; it is a
// conservative count (temporaries are held until the scope that noted them
// closes).
struct MemLedger {
  std::size_t current_floats = 0;
  std::size_t peak_floats = 0;

  void add(std::size_t n) {
    current_floats += n;
    peak_floats = std::max(peak_floats, current_floats);
  }
  void release(std::size_t n) { current_floats -= std::min(n, current_floats); }
  void reset() { current_floats = peak_floats = 0; }
};

// Notes matrix allocations against a ledger and releases them all when the
// scope ends. A null ledger makes every call a no-op.
class MemScope {
 public:
  explicit MemScope(MemLedger* ledger) : ledger_(ledger) {}
  MemScope(const MemScope&) = delete;
  MemScope& operator=(const MemScope&) = delete;
  ~MemScope() {
    if (ledger_ != nullptr) ledger_->release(noted_);
  }

  void note(const Matrix& m) { note(static_cast<std::size_t>(m.size())); }
  void note(const Vector& v) { note(static_cast<std::size_t>(v.size())); }
  void note(std::size_t floats) {
    if (ledger_ == nullptr) return;
    ledger_->add(floats);
    noted_ += floats;
  }

 private:
  MemLedger* ledger_;
  std::size_t noted_ = 0;
};

}  // namespace dikf
