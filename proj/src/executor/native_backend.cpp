#include <dlfcn.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "dgforge/executor.hpp"
#include "dgforge/hash.hpp"

namespace dgforge {

namespace {

namespace fs = std::filesystem;

using EntryFn = void (*)(void**, const long long*, const double*, long long);

struct Module {
  void* handle = nullptr;
  EntryFn entry = nullptr;
};

class NativeKernel : public CompiledKernel {
 public:
  EntryFn entry = nullptr;
};

// Loaded modules are shared by every backend instance in the process.
std::mutex& module_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, Module>& modules() {
  static std::map<std::string, Module> m;
  return m;
}

std::string jit_compiler() {
  const char* env = std::getenv("DGFORGE_JIT_CXX");
  return env && *env ? env : DGFORGE_JIT_CXX;
}

std::string jit_flags() { return DGFORGE_JIT_FLAGS; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Module load(const fs::path& so, const std::string& symbol) {
  Module m;
  m.handle = dlopen(so.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (!m.handle) throw Error(std::string("cannot load compiled kernel: ") + dlerror());
  m.entry = reinterpret_cast<EntryFn>(dlsym(m.handle, symbol.c_str()));
  if (!m.entry) throw Error("compiled kernel lacks entry point " + symbol);
  return m;
}

class NativeBackend : public Backend {
 public:
  std::string name() const override { return "cpu"; }

  KernelPtr compile(const std::string& source) override {
    const auto t0 = std::chrono::steady_clock::now();
    dgk::Kernel k = dgk::compile_dialect(source);
    const std::string cpp = translate_to_cpp(k);
    const std::string hash = hex64(fnv1a64(jit_compiler() + "\n" + jit_flags() + "\n" + cpp));
    const std::string symbol = k.name + "_entry";

    auto kernel = std::make_shared<NativeKernel>();
    kernel->name = k.name;
    kernel->lanes = k.lanes;
    kernel->params = k.params;
    kernel->hash = hash;

    std::lock_guard<std::mutex> lock(module_mutex());
    auto& mods = modules();
    auto it = mods.find(hash);
    if (it != mods.end()) {
      kernel->cache_hit = true;
    } else {
      const fs::path dir = kernel_cache_dir();
      fs::create_directories(dir);
      const fs::path so = dir / (hash + ".so");
      if (fs::exists(so)) {
        kernel->cache_hit = true;
      } else {
        build(dir, hash, cpp, so);
      }
      it = mods.emplace(hash, load(so, symbol)).first;
    }
    kernel->entry = it->second.entry;
    kernel->compile_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return kernel;
  }

 protected:
  void execute(const CompiledKernel& base, std::int64_t groups, const std::vector<KernelArg>& args) override {
    const auto& k = static_cast<const NativeKernel&>(base);
    std::vector<void*> bufs(args.size(), nullptr);
    std::vector<long long> ints(args.size(), 0);
    std::vector<double> reals(args.size(), 0.0);
    for (size_t i = 0; i < args.size(); ++i) {
      if (const auto* b = std::get_if<BufferPtr>(&args[i])) bufs[i] = (*b)->data();
      else if (const auto* v = std::get_if<std::int64_t>(&args[i])) ints[i] = *v;
      else reals[i] = std::get<double>(args[i]);
    }
    k.entry(bufs.data(), ints.data(), reals.data(), groups);
  }

 private:
  static void build(const fs::path& dir, const std::string& hash, const std::string& cpp, const fs::path& so) {
    const std::string tag = hash + "." + std::to_string(::getpid());
    const fs::path src = dir / (tag + ".cpp");
    const fs::path tmp = dir / (tag + ".so.tmp");
    const fs::path log = dir / (tag + ".log");
    {
      std::ofstream out(src);
      out << cpp;
      if (!out) throw Error("cannot write kernel source to " + src.string());
    }
    const std::string cmd = jit_compiler() + " " + jit_flags() + " -o '" + tmp.string() + "' '" + src.string() +
                            "' > '" + log.string() + "' 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
      const std::string diag = read_file(log);
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("native kernel compilation failed (" + src.string() + "):\n" + diag);
    }
    fs::rename(tmp, so);
    std::error_code ec;
    fs::remove(log, ec);
    fs::rename(src, dir / (hash + ".cpp"), ec);
  }
};

}  // namespace

std::string kernel_cache_dir() {
  if (const char* env = std::getenv("DGFORGE_KERNEL_CACHE"); env && *env) return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return std::string(xdg) + "/dgforge/kernels";
  if (const char* home = std::getenv("HOME"); home && *home) return std::string(home) + "/.cache/dgforge/kernels";
  return (fs::temp_directory_path() / "dgforge-kernels").string();
}

std::unique_ptr<Backend> make_native_backend() { return std::make_unique<NativeBackend>(); }

}  // namespace dgforge
