#pragma once

#include <atomic>
#include <cstddef>

namespace sepchain {

/**
 * Byte-accurate allocation accounting (current and peak requested bytes).
 * Each table owns or shares one ledger; every bucket and header allocation
 * of the table is routed through it. Counters are atomic, so distinct
 * ledgers can be driven from distinct threads.
 */
class AllocLedger {
   public:
    struct Snapshot {
        std::size_t current;
        std::size_t peak;
        std::size_t events;
    };

    AllocLedger() = default;
    AllocLedger(const AllocLedger&) = delete;
    AllocLedger& operator=(const AllocLedger&) = delete;

    void record_alloc(std::size_t bytes) noexcept;
    //! throws AccountingFault if more bytes are released than are held
    void record_free(std::size_t bytes);
    Snapshot snapshot() const noexcept;
    //! restarts peak tracking at the current balance
    void reset_peak() noexcept;

    std::size_t current() const noexcept { return m_current.load(std::memory_order_relaxed); }
    std::size_t peak() const noexcept { return m_peak.load(std::memory_order_relaxed); }

   private:
    std::atomic<std::size_t> m_current{0};
    std::atomic<std::size_t> m_peak{0};
    std::atomic<std::size_t> m_events{0};
};

/// Allocation routines that report requested sizes to a ledger.
/// A request of zero bytes returns nullptr and records nothing.
namespace tracked {

std::byte* allocate(AllocLedger& ledger, std::size_t bytes);
std::byte* reallocate(AllocLedger& ledger, std::byte* ptr, std::size_t old_bytes, std::size_t new_bytes);
//! bytes are rounded up to a multiple of alignment; the rounded size is what gets recorded
std::byte* allocate_aligned(AllocLedger& ledger, std::size_t bytes, std::size_t alignment);
void deallocate(AllocLedger& ledger, std::byte* ptr, std::size_t bytes);

constexpr std::size_t aligned_size(std::size_t bytes, std::size_t alignment) noexcept {
    return (bytes + alignment - 1) / alignment * alignment;
}

} // namespace tracked

} // namespace sepchain
