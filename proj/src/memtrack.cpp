#include "sepchain/memtrack.hpp"

#include "sepchain/errors.hpp"

#include <cstdint>
#include <cstdlib>
#include <new>
#include <string>

namespace sepchain {

void AllocLedger::record_alloc(std::size_t bytes) noexcept {
    const std::size_t now = m_current.fetch_add(bytes, std::memory_order_relaxed) + bytes;
    std::size_t seen = m_peak.load(std::memory_order_relaxed);
    while (now > seen && !m_peak.compare_exchange_weak(seen, now, std::memory_order_relaxed)) {
    }
    m_events.fetch_add(1, std::memory_order_relaxed);
}

void AllocLedger::record_free(std::size_t bytes) {
    std::size_t held = m_current.load(std::memory_order_relaxed);
    do {
        if (bytes > held) {
            throw AccountingFault("releasing " + std::to_string(bytes) + " bytes but only " + std::to_string(held) +
                                  " are recorded");
        }
    } while (!m_current.compare_exchange_weak(held, held - bytes, std::memory_order_relaxed));
    m_events.fetch_add(1, std::memory_order_relaxed);
}

AllocLedger::Snapshot AllocLedger::snapshot() const noexcept {
    return {m_current.load(std::memory_order_relaxed), m_peak.load(std::memory_order_relaxed),
            m_events.load(std::memory_order_relaxed)};
}

void AllocLedger::reset_peak() noexcept { m_peak.store(m_current.load(std::memory_order_relaxed), std::memory_order_relaxed); }

namespace tracked {

std::byte* allocate(AllocLedger& ledger, std::size_t bytes) {
    if (bytes == 0) return nullptr;
    void* ptr = std::malloc(bytes);
    if (ptr == nullptr) throw std::bad_alloc();
    ledger.record_alloc(bytes);
    return static_cast<std::byte*>(ptr);
}

std::byte* reallocate(AllocLedger& ledger, std::byte* ptr, std::size_t old_bytes, std::size_t new_bytes) {
    if (new_bytes == 0) {
        deallocate(ledger, ptr, old_bytes);
        return nullptr;
    }
    if (ptr == nullptr) return allocate(ledger, new_bytes);
    const auto old_address = reinterpret_cast<std::uintptr_t>(ptr);
    void* grown = std::realloc(ptr, new_bytes);
    if (grown == nullptr) throw std::bad_alloc();
    if (reinterpret_cast<std::uintptr_t>(grown) == old_address) {
        if (new_bytes >= old_bytes) {
            ledger.record_alloc(new_bytes - old_bytes);
        } else {
            ledger.record_free(old_bytes - new_bytes);
        }
    } else {
        // moved: the old and the new block coexisted during the copy
        ledger.record_alloc(new_bytes);
        ledger.record_free(old_bytes);
    }
    return static_cast<std::byte*>(grown);
}

std::byte* allocate_aligned(AllocLedger& ledger, std::size_t bytes, std::size_t alignment) {
    if (bytes == 0) return nullptr;
    const std::size_t rounded = aligned_size(bytes, alignment);
    void* ptr = std::aligned_alloc(alignment, rounded);
    if (ptr == nullptr) throw std::bad_alloc();
    ledger.record_alloc(rounded);
    return static_cast<std::byte*>(ptr);
}

void deallocate(AllocLedger& ledger, std::byte* ptr, std::size_t bytes) {
    if (ptr == nullptr) return;
    std::free(ptr);
    ledger.record_free(bytes);
}

} // namespace tracked

} // namespace sepchain
