#include <cstdlib>
#include <cstring>

#include "dgforge/executor.hpp"

namespace dgforge {

const char* scalar_type_name(ScalarType t) {
  switch (t) {
    case ScalarType::i64: return "i64";
    case ScalarType::f32: return "f32";
    case ScalarType::f64: return "f64";
  }
  return "?";
}

Buffer::Buffer(ScalarType type, std::size_t size)
    : type_(type), size_(size), storage_((size * word_size(type) + 7) / 8 + 1, 0) {}

BufferPtr Backend::allocate(ScalarType type, std::size_t size) { return std::make_shared<Buffer>(type, size); }

void Backend::release(const BufferPtr& buffer) {
  synchronize();
  buffer->released_ = true;
  buffer->storage_.clear();
  buffer->storage_.shrink_to_fit();
}

namespace {

void require_live(const Buffer& b) {
  if (b.released()) throw Error("access to a released buffer");
}

}  // namespace

void Backend::write(const BufferPtr& buffer, const std::vector<double>& values) {
  synchronize();
  require_live(*buffer);
  if (values.size() != buffer->size()) throw Error("buffer write size mismatch");
  switch (buffer->type()) {
    case ScalarType::f64: std::memcpy(buffer->data(), values.data(), values.size() * sizeof(double)); break;
    case ScalarType::f32: {
      auto* p = static_cast<float*>(buffer->data());
      for (std::size_t i = 0; i < values.size(); ++i) p[i] = static_cast<float>(values[i]);
      break;
    }
    case ScalarType::i64: {
      auto* p = static_cast<std::int64_t*>(buffer->data());
      for (std::size_t i = 0; i < values.size(); ++i) p[i] = static_cast<std::int64_t>(values[i]);
      break;
    }
  }
}

void Backend::write(const BufferPtr& buffer, const std::vector<std::int64_t>& values) {
  synchronize();
  require_live(*buffer);
  if (values.size() != buffer->size()) throw Error("buffer write size mismatch");
  if (buffer->type() != ScalarType::i64) throw Error("integer write to a real buffer");
  std::memcpy(buffer->data(), values.data(), values.size() * sizeof(std::int64_t));
}

std::vector<double> Backend::read(const BufferPtr& buffer) {
  synchronize();
  require_live(*buffer);
  std::vector<double> out(buffer->size());
  switch (buffer->type()) {
    case ScalarType::f64: std::memcpy(out.data(), buffer->data(), out.size() * sizeof(double)); break;
    case ScalarType::f32: {
      const auto* p = static_cast<const float*>(buffer->data());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = p[i];
      break;
    }
    case ScalarType::i64: {
      const auto* p = static_cast<const std::int64_t*>(buffer->data());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(p[i]);
      break;
    }
  }
  return out;
}

std::vector<std::int64_t> Backend::read_i64(const BufferPtr& buffer) {
  synchronize();
  require_live(*buffer);
  if (buffer->type() != ScalarType::i64) throw Error("integer read from a real buffer");
  std::vector<std::int64_t> out(buffer->size());
  std::memcpy(out.data(), buffer->data(), out.size() * sizeof(std::int64_t));
  return out;
}

void Backend::launch(const KernelPtr& kernel, std::int64_t groups, std::vector<KernelArg> args) {
  if (!kernel) throw Error("launch of a null kernel");
  if (groups < 0) throw Error("negative workgroup count");
  if (args.size() != kernel->params.size()) {
    throw Error("kernel " + kernel->name + " expects " + std::to_string(kernel->params.size()) + " arguments, got " +
                std::to_string(args.size()));
  }
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& p = kernel->params[i];
    const std::string where = "argument " + std::to_string(i) + " (" + p.name + ") of " + kernel->name;
    if (p.global) {
      const auto* b = std::get_if<BufferPtr>(&args[i]);
      if (!b || !*b) throw Error(where + " must be a buffer");
      if ((*b)->released()) throw Error(where + " is a released buffer");
      const ScalarType want = p.type == dgk::Type::i64 ? ScalarType::i64
                              : p.type == dgk::Type::f32 ? ScalarType::f32
                                                          : ScalarType::f64;
      if ((*b)->type() != want) throw Error(where + " has the wrong element type");
    } else if (p.type == dgk::Type::i64) {
      if (!std::holds_alternative<std::int64_t>(args[i])) throw Error(where + " must be an integer");
    } else if (!std::holds_alternative<double>(args[i])) {
      throw Error(where + " must be a real scalar");
    }
  }
  queue_.push_back({kernel, groups, std::move(args)});
}

void Backend::synchronize() {
  // Take the queue first so a failing launch does not leave stale work behind.
  auto pending = std::move(queue_);
  queue_.clear();
  for (const auto& l : pending) execute(*l.kernel, l.groups, l.args);
}

std::string default_backend_name() {
  const char* env = std::getenv("DGFORGE_BACKEND");
  return env && *env ? env : "cpu";
}

std::unique_ptr<Backend> make_backend(const std::string& name) {
  if (name == "cpu") return make_native_backend();
  if (name == "interp") return make_interp_backend();
  if (name == "device") throw Error("device backend unavailable: no compute-device runtime found on this host");
  throw Error("unknown backend '" + name + "' (expected cpu, interp or device)");
}

}  // namespace dgforge
