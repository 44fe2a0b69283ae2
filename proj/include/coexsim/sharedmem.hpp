#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "coexsim/engine.hpp"
#include "coexsim/rng.hpp"
#include "coexsim/time.hpp"
#include "coexsim/trace.hpp"

namespace coexsim::shmem {

// Address constants of the combo-chip mapping. The Bluetooth window at
// wlan_mem_base aliases Wi-Fi RAM at shared_base; host crash dumps report
// Wi-Fi addresses shifted down by the dump delta.
inline constexpr std::uint32_t kBtWindowBase = 0x680000;
inline constexpr std::uint32_t kWifiRamBase = 0x180000;
inline constexpr std::uint32_t kAddressDelta = 0x500000;  // bt addr - wifi addr
inline constexpr std::uint32_t kDumpDelta = 0x170000;     // wifi addr - dump offset
inline constexpr std::uint32_t kDumpBase = 0x10000;       // dump offset of shared_base
inline constexpr std::uint32_t kDefaultWindowLen = 0x80000;
inline constexpr std::uint32_t kTrapBranch = 3;  // trap id of a wild branch

constexpr std::uint32_t bt_to_wifi(std::uint32_t bt_addr) { return bt_addr - kAddressDelta; }
constexpr std::uint32_t wifi_to_bt(std::uint32_t wifi_addr) { return wifi_addr + kAddressDelta; }

/// Branch targets are reported aligned down to 4 bytes in crash logs.
constexpr std::uint32_t expected_pc(std::uint32_t target) { return target & ~std::uint32_t{3}; }

/// Model branch instruction: a little-endian word holding the target address.
std::array<std::uint8_t, 4> encode_branch(std::uint32_t target);

struct BranchProbe {
    std::uint32_t written_at = 0;  // bt address
    std::uint32_t target = 0;
    std::uint32_t pc = 0;  // expected_pc(target)
};

struct CrashLog {
    std::uint32_t cause = kTrapBranch;
    std::uint32_t pc = 0;
    std::uint32_t ram_base = kWifiRamBase;
    std::uint32_t dump_base = kDumpBase;
    std::vector<std::uint8_t> ram_dump;  // RAM bytes from ram_base

    /// Byte at a dump offset (offset = wifi address - 0x170000); nullopt when
    /// the offset falls outside the dump.
    std::optional<std::uint8_t> byte_at_dump_offset(std::uint32_t offset) const;
};

struct Secrets {
    std::string ssid;
    std::string passphrase;
};

/// Scans a crash dump for the association record and recovers the network
/// name and passphrase; absent when the chip was not associated or the dump
/// is truncated before the record ends.
std::optional<Secrets> extract_secrets(const CrashLog& log);

/// Writes the directory-per-crash export: metadata.json plus SoC_RAM.bin laid
/// out so that file offset == dump offset.
void export_crash_log(const CrashLog& log, const std::filesystem::path& dir);

struct Config {
    std::uint32_t window_len = kDefaultWindowLen;
    std::vector<std::uint32_t> exec_bt_addresses;  // regularly executed words (bt view)
    std::vector<std::pair<std::uint32_t, std::uint32_t>> valid_code_ranges = {{0x0, 0x4000}};
    bool associated = false;
    std::string ssid;
    std::string passphrase;
    std::uint32_t secret_offset = 0x3000;  // from ram base
    SimTime boot_delay = SimTime::from_ms(200);
    SimTime reinit_delay = SimTime::from_s(1);
    SimTime exec_check_period = SimTime::from_ms(10);
};

/// Wi-Fi core lifecycle: RAM content, executable words, crash-and-reset
/// behaviour, and the host-visible crash log directory.
class WifiCore {
public:
    enum class Power { kOff, kBooting, kOn, kResetting };

    WifiCore(Engine& engine, TraceRecorder& trace, Config cfg);

    /// Maps the window immediately (writable during early boot) and finishes
    /// boot after boot_delay.
    void power_on();
    void power_off();
    void start_exec_checks();

    Power power() const { return power_; }
    bool mapped() const { return power_ == Power::kBooting || power_ == Power::kOn; }
    bool associated() const { return associated_; }

    std::uint32_t ram_base() const { return kWifiRamBase; }
    std::uint32_t window_len() const { return cfg_.window_len; }

    std::uint8_t ram_byte(std::uint32_t wifi_addr) const;
    void ram_store(std::uint32_t wifi_addr, std::span<const std::uint8_t> data, bool foreign);

    /// One execution round over the regularly executed words. A foreign word
    /// whose branch target is not valid code traps: the crash log (with full
    /// RAM dump) is emitted and the core resets, unmapping the window until
    /// re-initialization completes.
    std::optional<CrashLog> execute_check();

    const std::vector<CrashLog>& crash_logs() const { return crash_logs_; }

private:
    void seed_ram();
    bool is_valid_code(std::uint32_t target) const;

    Engine& engine_;
    TraceRecorder& trace_;
    Config cfg_;
    Power power_ = Power::kOff;
    bool associated_ = false;
    std::vector<std::uint8_t> ram_;
    std::unordered_set<std::uint32_t> foreign_words_;  // wifi word addresses
    std::vector<CrashLog> crash_logs_;
};

/// Bluetooth-side view of the shared window.
class BtWindow {
public:
    BtWindow(WifiCore& core, RngStream& stream, double p_unstable = 0.05);

    /// Write-through: bytes appear in Wi-Fi RAM immediately. Throws
    /// UnmappedError when the window is not mapped, OutOfWindowError when the
    /// range leaves the window.
    void bt_write(std::uint32_t bt_addr, std::span<const std::uint8_t> data);

    struct ReadResult {
        enum class Kind { kOk, kZeros, kBtCrash };
        Kind kind = Kind::kOk;
        std::vector<std::uint8_t> bytes;
    };

    /// Unstable read path: zero-filled chunks when the window is off, exact
    /// bytes with probability 1 - p_unstable otherwise, and the remainder
    /// split evenly between zero chunks and Bluetooth-core crashes.
    ReadResult bt_read(std::uint32_t bt_addr, std::size_t len);

    WifiCore& core() { return core_; }

private:
    void check_range(std::uint32_t bt_addr, std::size_t len) const;

    WifiCore& core_;
    RngStream& stream_;
    double p_unstable_;
};

/// Automated executable-region finder: fills the window with
/// self-identifying branch probes, decodes the crash-log pc after each trap,
/// waits out the mandated cool-down, and repeats until a sweep stays clean.
class CodeExecFinder {
public:
    struct Options {
        std::uint32_t probe_base = 0xca000000;  // invalid-code target prefix
        std::uint32_t chunk_bytes = 1024;
        SimTime chunk_interval = SimTime::from_ms(1);
        SimTime crash_cooldown = SimTime::from_s(10);
        unsigned max_sweeps = 8;
    };

    CodeExecFinder(Engine& engine, BtWindow& window, RngStream& fuzzer);
    CodeExecFinder(Engine& engine, BtWindow& window, RngStream& fuzzer, Options options);

    /// Begins probing; throws AbortedByBtCrash (from inside the event loop)
    /// if the initial mapping read crashes the Bluetooth core.
    void start();

    bool done() const { return done_; }
    bool window_absent() const { return window_absent_; }
    const std::vector<std::uint32_t>& found() const { return found_; }
    unsigned sweeps() const { return sweeps_; }

private:
    void begin_sweep();
    void fill_chunk(std::uint32_t word_index);
    void after_fill();
    bool harvest_crashes();

    Engine& engine_;
    BtWindow& window_;
    RngStream& fuzzer_;
    Options options_;
    std::vector<std::uint32_t> found_;
    std::size_t crash_logs_seen_ = 0;
    unsigned sweeps_ = 0;
    bool done_ = false;
    bool window_absent_ = false;
};

}  // namespace coexsim::shmem
