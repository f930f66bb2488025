#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "dgforge/dialect.hpp"

namespace dgforge {

enum class ScalarType { i64, f32, f64 };

inline int word_size(ScalarType t) { return t == ScalarType::f32 ? 4 : 8; }
const char* scalar_type_name(ScalarType t);

/// Host-resident storage owned by one backend.
class Buffer {
 public:
  Buffer(ScalarType type, std::size_t size);

  ScalarType type() const { return type_; }
  std::size_t size() const { return size_; }
  bool released() const { return released_; }

  void* data() { return storage_.data(); }
  const void* data() const { return storage_.data(); }

 private:
  friend class Backend;
  ScalarType type_;
  std::size_t size_;
  std::vector<std::uint64_t> storage_;
  bool released_ = false;
};

using BufferPtr = std::shared_ptr<Buffer>;
using KernelArg = std::variant<BufferPtr, std::int64_t, double>;

/// Generated kernel text plus the metadata the generator knows about it.
struct KernelSource {
  std::string entry;
  std::string text;
  int lanes = 1;
  std::int64_t shared_bytes = 0;
  int registers_estimate = 0;
};

class CompiledKernel {
 public:
  virtual ~CompiledKernel() = default;

  std::string name;
  int lanes = 1;
  std::vector<dgk::Param> params;
  std::string hash;
  double compile_seconds = 0.0;
  bool cache_hit = false;
};

using KernelPtr = std::shared_ptr<CompiledKernel>;

/// One in-order queue. Launches are deferred until synchronize(); host
/// reads and writes synchronize first.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string name() const = 0;

  BufferPtr allocate(ScalarType type, std::size_t size);
  void release(const BufferPtr& buffer);

  void write(const BufferPtr& buffer, const std::vector<double>& values);
  void write(const BufferPtr& buffer, const std::vector<std::int64_t>& values);
  std::vector<double> read(const BufferPtr& buffer);
  std::vector<std::int64_t> read_i64(const BufferPtr& buffer);

  /// Compiles dialect source; throws ParseError (with line) on invalid source.
  virtual KernelPtr compile(const std::string& source) = 0;
  KernelPtr compile(const KernelSource& source) { return compile(source.text); }

  void launch(const KernelPtr& kernel, std::int64_t groups, std::vector<KernelArg> args);
  void synchronize();

  /// Real arithmetic operations executed so far (backends that count them).
  virtual bool counts_flops() const { return false; }
  virtual std::uint64_t flops() const { return 0; }
  virtual void reset_flops() {}

 protected:
  virtual void execute(const CompiledKernel& kernel, std::int64_t groups, const std::vector<KernelArg>& args) = 0;

 private:
  struct Launch {
    KernelPtr kernel;
    std::int64_t groups;
    std::vector<KernelArg> args;
  };
  std::vector<Launch> queue_;
};

/// "cpu" (native), "interp" (serial reference interpreter) or "device".
std::unique_ptr<Backend> make_backend(const std::string& name);

/// DGFORGE_BACKEND if set, else "cpu".
std::string default_backend_name();

/// Creates the interpreter backend. Its kernels validate every memory
/// access and detect shared-memory races between barriers.
std::unique_ptr<Backend> make_interp_backend();
std::unique_ptr<Backend> make_native_backend();

/// Directory for compiled kernels: DGFORGE_KERNEL_CACHE or ~/.cache/dgforge/kernels.
std::string kernel_cache_dir();

/// Translates a checked kernel to C++ with an extern "C" entry point
/// `void <name>_entry(void** bufs, const long long* ints, const double* reals, long long groups)`.
std::string translate_to_cpp(const dgk::Kernel& kernel);

// Timing.

class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() = 0;  // seconds
};

class SteadyClock : public Clock {
 public:
  double now() override;
};

/// Advances by a fixed tick at every reading.
class ManualClock : public Clock {
 public:
  explicit ManualClock(double tick = 1e-3) : tick_(tick) {}
  double now() override {
    t_ += tick_;
    return t_;
  }

 private:
  double tick_;
  double t_ = 0.0;
};

/// Wall time of a synchronize-bounded launch sequence.
double wall_time(Backend& backend, const std::function<void()>& launches, Clock& clock);
double wall_time(Backend& backend, const std::function<void()>& launches);

struct TimingStats {
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> samples;

  double spread() const { return median > 0 ? (max - min) / median : 0.0; }
};

TimingStats time_repeated(Backend& backend, const std::function<void()>& launches, int warmup = 2, int repetitions = 5,
                          Clock* clock = nullptr);

}  // namespace dgforge
