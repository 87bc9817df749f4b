//! Fixed text embedded at the top of every unit.

use super::BackendKind;

const INCLUDES: &str = r#"#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>
"#;

/// CSR graph, edge-list loader and driver argument helpers. Matches the
/// interpreter's graph construction: undirected edges are stored both ways,
/// duplicate arcs keep the lightest weight, missing weights are 1.
const HOST_COMMON: &str = r#"
struct graph {
  int V;
  int E;
  int* offsets;
  int* dests;
  int* weights;
  int* rev_offsets;
  int* rev_srcs;
};

static graph load_graph(const char* path, bool directed, int num_nodes) {
  std::ifstream in(path);
  if (!in) {
    fprintf(stderr, "cannot open %s\n", path);
    exit(1);
  }
  std::vector<std::tuple<int, int, int>> arcs;
  std::string line;
  int n = num_nodes;
  while (std::getline(in, line)) {
    size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream fields(line);
    long long u, v, w = 1;
    fields >> u >> v;
    if (!(fields >> w)) w = 1;
    n = std::max<long long>(n, std::max(u, v) + 1);
    arcs.emplace_back((int)u, (int)v, (int)w);
    if (!directed) arcs.emplace_back((int)v, (int)u, (int)w);
  }
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end(),
                         [](const std::tuple<int, int, int>& a, const std::tuple<int, int, int>& b) {
                           return std::get<0>(a) == std::get<0>(b) && std::get<1>(a) == std::get<1>(b);
                         }),
             arcs.end());
  graph g;
  g.V = n;
  g.E = (int)arcs.size();
  g.offsets = (int*)calloc(n + 1, sizeof(int));
  g.rev_offsets = (int*)calloc(n + 1, sizeof(int));
  g.dests = (int*)malloc(sizeof(int) * (g.E + 1));
  g.weights = (int*)malloc(sizeof(int) * (g.E + 1));
  g.rev_srcs = (int*)malloc(sizeof(int) * (g.E + 1));
  for (int e = 0; e < g.E; e++) {
    g.offsets[std::get<0>(arcs[e]) + 1]++;
    g.rev_offsets[std::get<1>(arcs[e]) + 1]++;
    g.dests[e] = std::get<1>(arcs[e]);
    g.weights[e] = std::get<2>(arcs[e]);
  }
  for (int v = 0; v < n; v++) {
    g.offsets[v + 1] += g.offsets[v];
    g.rev_offsets[v + 1] += g.rev_offsets[v];
  }
  std::vector<int> cursor(g.rev_offsets, g.rev_offsets + n);
  for (int e = 0; e < g.E; e++) g.rev_srcs[cursor[std::get<1>(arcs[e])]++] = std::get<0>(arcs[e]);
  return g;
}

static const char* arg_text(int argc, char** argv, const char* name) {
  size_t len = strlen(name);
  for (int i = 4; i < argc; i++) {
    if (strncmp(argv[i], name, len) == 0 && argv[i][len] == '=') return argv[i] + len + 1;
  }
  fprintf(stderr, "missing argument %s\n", name);
  exit(2);
}

static bool arg_bool(const char* text) {
  return strcmp(text, "true") == 0 || strcmp(text, "True") == 0 || strcmp(text, "1") == 0;
}

static std::vector<int> arg_nodes(const char* text, int V) {
  std::vector<int> nodes;
  if (strcmp(text, "all") == 0) {
    for (int v = 0; v < V; v++) nodes.push_back(v);
    return nodes;
  }
  std::stringstream items(text);
  std::string item;
  while (std::getline(items, item, ',')) {
    if (!item.empty()) nodes.push_back(atoi(item.c_str()));
  }
  return nodes;
}

static int graph_min_weight(const graph& g) {
  int m = 0;
  for (int e = 0; e < g.E; e++) m = (e == 0 || g.weights[e] < m) ? g.weights[e] : m;
  return m;
}

static int graph_max_weight(const graph& g) {
  int m = 0;
  for (int e = 0; e < g.E; e++) m = (e == 0 || g.weights[e] > m) ? g.weights[e] : m;
  return m;
}
"#;

const FIND_EDGE_BODY: &str = r#"find_edge(const int* offsets, const int* dests, int u, int v) {
  int lo = offsets[u], hi = offsets[u + 1];
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (dests[mid] == v) return mid;
    if (dests[mid] < v) lo = mid + 1; else hi = mid;
  }
  return -1;
}
"#;

const CUDA_ATOMICS: &str = r#"
__device__ int atomicMul(int* address, int val) {
  int old = *address, assumed;
  do {
    assumed = old;
    old = atomicCAS(address, assumed, assumed * val);
  } while (assumed != old);
  return old;
}

__device__ long long atomicMul(long long* address, long long val) {
  unsigned long long* p = (unsigned long long*)address;
  unsigned long long old = *p, assumed;
  do {
    assumed = old;
    old = atomicCAS(p, assumed, (unsigned long long)((long long)assumed * val));
  } while (assumed != old);
  return (long long)old;
}

__device__ double atomicMul(double* address, double val) {
  unsigned long long* p = (unsigned long long*)address;
  unsigned long long old = *p, assumed;
  do {
    assumed = old;
    old = atomicCAS(p, assumed, __double_as_longlong(__longlong_as_double(assumed) * val));
  } while (assumed != old);
  return __longlong_as_double(old);
}

__device__ double atomicAddCas(double* address, double val) {
  unsigned long long* p = (unsigned long long*)address;
  unsigned long long old = *p, assumed;
  do {
    assumed = old;
    old = atomicCAS(p, assumed, __double_as_longlong(__longlong_as_double(assumed) + val));
  } while (assumed != old);
  return __longlong_as_double(old);
}

__device__ double atomicMin(double* address, double val) {
  unsigned long long* p = (unsigned long long*)address;
  unsigned long long old = *p, assumed;
  do {
    assumed = old;
    if (__longlong_as_double(assumed) <= val) break;
    old = atomicCAS(p, assumed, __double_as_longlong(val));
  } while (assumed != old);
  return __longlong_as_double(old);
}

__device__ double atomicMax(double* address, double val) {
  unsigned long long* p = (unsigned long long*)address;
  unsigned long long old = *p, assumed;
  do {
    assumed = old;
    if (__longlong_as_double(assumed) >= val) break;
    old = atomicCAS(p, assumed, __double_as_longlong(val));
  } while (assumed != old);
  return __longlong_as_double(old);
}
"#;

const SYCL_ATOMICS: &str = r#"
template <typename T>
using atomic_ref_t = sycl::atomic_ref<T, sycl::memory_order::relaxed, sycl::memory_scope::device,
                                      sycl::access::address_space::global_space>;

template <typename T>
T atomic_mul(T& target, T val) {
  atomic_ref_t<T> ref(target);
  T old = ref.load();
  while (!ref.compare_exchange_strong(old, old * val)) {
  }
  return old;
}

template <typename T>
T atomic_add_cas(T& target, T val) {
  atomic_ref_t<T> ref(target);
  T old = ref.load();
  while (!ref.compare_exchange_strong(old, old + val)) {
  }
  return old;
}
"#;

/// OpenCL C helpers: 64-bit integer atomics and compare-exchange loops for
/// every floating-point and min/max update.
const CL_PRELUDE: &str = r#"#pragma OPENCL EXTENSION cl_khr_fp64 : enable
#pragma OPENCL EXTENSION cl_khr_int64_base_atomics : enable
#pragma OPENCL EXTENSION cl_khr_int64_extended_atomics : enable

int find_edge(__global const int* offsets, __global const int* dests, int u, int v) {
  int lo = offsets[u], hi = offsets[u + 1];
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (dests[mid] == v) return mid;
    if (dests[mid] < v) lo = mid + 1; else hi = mid;
  }
  return -1;
}

#define CMPXCHG_INT(NAME, EXPR, SKIP)                              \
  int NAME(__global int* p, int val) {                             \
    int old = *p, assumed;                                         \
    do {                                                           \
      assumed = old;                                               \
      if (SKIP) break;                                             \
      old = atomic_cmpxchg(p, assumed, EXPR);                      \
    } while (assumed != old);                                      \
    return old;                                                    \
  }
CMPXCHG_INT(cmpxchg_min_int, val, assumed <= val)
CMPXCHG_INT(cmpxchg_max_int, val, assumed >= val)
CMPXCHG_INT(cmpxchg_mul_int, assumed * val, false)

#define CMPXCHG_LONG(NAME, EXPR, SKIP)                             \
  long NAME(__global long* p, long val) {                          \
    long old = *p, assumed;                                        \
    do {                                                           \
      assumed = old;                                               \
      if (SKIP) break;                                             \
      old = atom_cmpxchg(p, assumed, EXPR);                        \
    } while (assumed != old);                                      \
    return old;                                                    \
  }
CMPXCHG_LONG(cmpxchg_min_long, val, assumed <= val)
CMPXCHG_LONG(cmpxchg_max_long, val, assumed >= val)
CMPXCHG_LONG(cmpxchg_mul_long, assumed * val, false)

#define CMPXCHG_DOUBLE(NAME, EXPR, SKIP)                           \
  double NAME(__global double* p, double val) {                    \
    __global long* q = (__global long*)p;                          \
    long old = *q, assumed;                                        \
    do {                                                           \
      assumed = old;                                               \
      if (SKIP) break;                                             \
      old = atom_cmpxchg(q, assumed, as_long(EXPR));               \
    } while (assumed != old);                                      \
    return as_double(old);                                         \
  }
CMPXCHG_DOUBLE(cmpxchg_add_double, as_double(assumed) + val, false)
CMPXCHG_DOUBLE(cmpxchg_mul_double, as_double(assumed) * val, false)
CMPXCHG_DOUBLE(cmpxchg_min_double, val, as_double(assumed) <= val)
CMPXCHG_DOUBLE(cmpxchg_max_double, val, as_double(assumed) >= val)
"#;

const CL_HOST: &str = r#"
static std::string read_kernel_source(const char* default_path) {
  const char* path = getenv("GRAPHDSL_CL_FILE");
  std::ifstream in(path ? path : default_path);
  if (!in) {
    fprintf(stderr, "cannot open kernel file %s\n", path ? path : default_path);
    exit(1);
  }
  std::stringstream text;
  text << in.rdbuf();
  return text.str();
}
"#;

/// Host prelude for `backend`, ending with [`super::BODY_BEGIN`].
pub(crate) fn host(backend: BackendKind, unit: &str) -> String {
    let mut out = format!("// {unit}: generated {} code\n", backend.name());
    match backend {
        BackendKind::Cuda => out.push_str("#include <cuda_runtime.h>\n"),
        BackendKind::Sycl => out.push_str("#include <sycl/sycl.hpp>\n"),
        BackendKind::OpenCl => out.push_str("#define CL_TARGET_OPENCL_VERSION 120\n#include <CL/cl.h>\n"),
        BackendKind::OpenAcc => {}
    }
    out.push_str(INCLUDES);
    out.push_str(HOST_COMMON);
    out.push('\n');
    match backend {
        BackendKind::Cuda => {
            out.push_str("__host__ __device__ inline int ");
            out.push_str(FIND_EDGE_BODY);
            out.push_str(CUDA_ATOMICS);
        }
        BackendKind::OpenAcc => {
            out.push_str("#pragma acc routine seq\nstatic int ");
            out.push_str(FIND_EDGE_BODY);
        }
        BackendKind::Sycl => {
            out.push_str("inline int ");
            out.push_str(FIND_EDGE_BODY);
            out.push_str(SYCL_ATOMICS);
        }
        BackendKind::OpenCl => {
            out.push_str("static int ");
            out.push_str(FIND_EDGE_BODY);
            out.push_str(CL_HOST);
        }
    }
    out.push('\n');
    out.push_str(super::BODY_BEGIN);
    out.push('\n');
    out
}

/// Prelude of the OpenCL kernel file.
pub(crate) fn opencl_kernels(unit: &str) -> String {
    format!(
        "// {unit}: generated opencl kernels\n{CL_PRELUDE}\n{}\n",
        super::BODY_BEGIN
    )
}
