// bc: generated cuda code
#include <cuda_runtime.h>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

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

__host__ __device__ inline int find_edge(const int* offsets, const int* dests, int u, int v) {
  int lo = offsets[u], hi = offsets[u + 1];
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (dests[mid] == v) return mid;
    if (dests[mid] < v) lo = mid + 1; else hi = mid;
  }
  return -1;
}

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

// ---- generated code ----
__global__ void ComputeBC_kernel_0(int V, int* gpu_offsets, int* gpu_dests, int* gpu_level, int hops_from_source, bool* gpu_bfs_finished, double* gpu_sigma) {
  int v = blockIdx.x * blockDim.x + threadIdx.x;
  if (v >= V) return;
  if (gpu_level[v] == hops_from_source) {
    for (int bfs_edge = gpu_offsets[v]; bfs_edge < gpu_offsets[v + 1]; bfs_edge++) {
      int bfs_nbr = gpu_dests[bfs_edge];
      if (gpu_level[bfs_nbr] == -1) {
        gpu_level[bfs_nbr] = hops_from_source + 1;
        gpu_bfs_finished[0] = false;
      }
    }
    for (int edge_w = gpu_offsets[v]; edge_w < gpu_offsets[v + 1]; edge_w++) {
      int w = gpu_dests[edge_w];
      if (gpu_level[w] == gpu_level[v] + 1) {
        atomicAdd(&gpu_sigma[w], gpu_sigma[v]);
      }
    }
  }
}

__global__ void ComputeBC_kernel_1(int V, int* gpu_offsets, int* gpu_dests, int* gpu_level, int hops_from_source, double* gpu_bc, int* gpu_src, double* gpu_sigma, double* gpu_delta) {
  int v = blockIdx.x * blockDim.x + threadIdx.x;
  if (v >= V) return;
  if (gpu_level[v] == hops_from_source && v != gpu_src[0]) {
    for (int edge_w = gpu_offsets[v]; edge_w < gpu_offsets[v + 1]; edge_w++) {
      int w = gpu_dests[edge_w];
      if (gpu_level[w] == gpu_level[v] + 1) {
        atomicAdd(&gpu_delta[v], gpu_sigma[v] / gpu_sigma[w] * (1.0 + gpu_delta[w]));
      }
    }
    atomicAdd(&gpu_bc[v], gpu_delta[v]);
  }
}

void ComputeBC(graph& g, double* bc, const std::vector<int>& sourceSet) {
  int V = g.V;
  int E = g.E;
  const int numThreads = 1024;
  const int numBlocks = (V + numThreads - 1) / numThreads;
  int hops_from_source = 0;
  bool bfs_finished = false;
  double* sigma = (double*)malloc(sizeof(double) * V);
  double* delta = (double*)malloc(sizeof(double) * V);
  int* level = (int*)malloc(sizeof(int) * V);
  double* gpu_bc;
  cudaMalloc(&gpu_bc, sizeof(double) * V);
  int* gpu_src;
  cudaMalloc(&gpu_src, sizeof(int));
  double* gpu_sigma;
  cudaMalloc(&gpu_sigma, sizeof(double) * V);
  double* gpu_delta;
  cudaMalloc(&gpu_delta, sizeof(double) * V);
  int* gpu_level;
  cudaMalloc(&gpu_level, sizeof(int) * V);
  bool* gpu_bfs_finished;
  cudaMalloc(&gpu_bfs_finished, sizeof(bool));
  int* gpu_offsets;
  cudaMalloc(&gpu_offsets, sizeof(int) * (V + 1));
  cudaMemcpy(gpu_offsets, g.offsets, sizeof(int) * (V + 1), cudaMemcpyHostToDevice);
  int* gpu_dests;
  cudaMalloc(&gpu_dests, sizeof(int) * E);
  cudaMemcpy(gpu_dests, g.dests, sizeof(int) * E, cudaMemcpyHostToDevice);
  for (int i = 0; i < V; i++) {
    bc[i] = 0.0;
  }
  for (int src : sourceSet) {
    for (int i = 0; i < V; i++) {
      sigma[i] = 0.0;
      delta[i] = 0.0;
    }
    sigma[src] = 1.0;
    // transfer scope 0: regions 0, 1
    cudaMemcpy(gpu_bc, bc, sizeof(double) * V, cudaMemcpyHostToDevice);
    cudaMemcpy(gpu_src, &src, sizeof(int), cudaMemcpyHostToDevice);
    cudaMemcpy(gpu_sigma, sigma, sizeof(double) * V, cudaMemcpyHostToDevice);
    cudaMemcpy(gpu_delta, delta, sizeof(double) * V, cudaMemcpyHostToDevice);
    for (int i = 0; i < V; i++) {
      level[i] = (i == src) ? 0 : -1;
    }
    cudaMemcpy(gpu_level, level, sizeof(int) * V, cudaMemcpyHostToDevice);
    hops_from_source = 0;
    do {
      bfs_finished = true;
      cudaMemcpy(gpu_bfs_finished, &bfs_finished, sizeof(bool), cudaMemcpyHostToDevice);
      ComputeBC_kernel_0<<<numBlocks, numThreads>>>(V, gpu_offsets, gpu_dests, gpu_level, hops_from_source, gpu_bfs_finished, gpu_sigma);
      cudaDeviceSynchronize();
      cudaMemcpy(&bfs_finished, gpu_bfs_finished, sizeof(bool), cudaMemcpyDeviceToHost);
      hops_from_source++;
    } while (!bfs_finished);
    hops_from_source--;
    while (hops_from_source >= 0) {
      ComputeBC_kernel_1<<<numBlocks, numThreads>>>(V, gpu_offsets, gpu_dests, gpu_level, hops_from_source, gpu_bc, gpu_src, gpu_sigma, gpu_delta);
      cudaDeviceSynchronize();
      hops_from_source--;
    }
    cudaMemcpy(bc, gpu_bc, sizeof(double) * V, cudaMemcpyDeviceToHost);
    cudaMemcpy(sigma, gpu_sigma, sizeof(double) * V, cudaMemcpyDeviceToHost);
    cudaMemcpy(delta, gpu_delta, sizeof(double) * V, cudaMemcpyDeviceToHost);
    // end transfer scope 0
  }
  cudaFree(gpu_offsets);
  cudaFree(gpu_dests);
  cudaFree(gpu_bc);
  cudaFree(gpu_src);
  cudaFree(gpu_sigma);
  cudaFree(gpu_delta);
  cudaFree(gpu_level);
  cudaFree(gpu_bfs_finished);
  free(sigma);
  free(delta);
  free(level);
}

// ---- driver ----
int main(int argc, char** argv) {
  if (argc < 4) {
    fprintf(stderr, "usage: %s GRAPH DIRECTED NODES [name=value ...]\n", argv[0]);
    return 2;
  }
  graph input = load_graph(argv[1], atoi(argv[2]) != 0, atoi(argv[3]));
  double* bc = (double*)calloc(input.V + 1, sizeof(double));
  std::vector<int> sourceSet = arg_nodes(arg_text(argc, argv, "sourceSet"), input.V);
  ComputeBC(input, bc, sourceSet);
  for (int i = 0; i < input.V; i++) printf("bc\t%d\t%.17g\n", i, (double)bc[i]);
  return 0;
}
