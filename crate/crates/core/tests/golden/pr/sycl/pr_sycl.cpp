// pr: generated sycl code
#include <sycl/sycl.hpp>
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

inline int find_edge(const int* offsets, const int* dests, int u, int v) {
  int lo = offsets[u], hi = offsets[u + 1];
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (dests[mid] == v) return mid;
    if (dests[mid] < v) lo = mid + 1; else hi = mid;
  }
  return -1;
}

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

// ---- generated code ----
void ComputePR(graph& g, double* pr_out, double damping, double threshold, int maxIter) {
  int V = g.V;
  int E = g.E;
  sycl::queue Q(sycl::default_selector_v);
  const int NUM_THREADS = 1024;
  double* pr = (double*)malloc(sizeof(double) * V);
  double* prNext = (double*)malloc(sizeof(double) * V);
  memcpy(pr, pr_out, sizeof(double) * V);
  double* gpu_pr = sycl::malloc_device<double>(V, Q);
  double* gpu_damping = sycl::malloc_device<double>(1, Q);
  double* gpu_prNext = sycl::malloc_device<double>(V, Q);
  double* gpu_n = sycl::malloc_device<double>(1, Q);
  double* gpu_diff = sycl::malloc_device<double>(1, Q);
  double* gpu_dangling = sycl::malloc_device<double>(1, Q);
  int* gpu_offsets = sycl::malloc_device<int>((V + 1), Q);
  Q.memcpy(gpu_offsets, g.offsets, sizeof(int) * (V + 1)).wait();
  int* gpu_rev_offsets = sycl::malloc_device<int>((V + 1), Q);
  Q.memcpy(gpu_rev_offsets, g.rev_offsets, sizeof(int) * (V + 1)).wait();
  int* gpu_rev_srcs = sycl::malloc_device<int>(E, Q);
  Q.memcpy(gpu_rev_srcs, g.rev_srcs, sizeof(int) * E).wait();
  double n = (double)V;
  for (int i = 0; i < V; i++) {
    pr[i] = 1.0 / n;
    prNext[i] = 0.0;
  }
  int iter = 0;
  double diff = 0.0;
  bool done = false;
  // fixedPoint 0 until done
  while (!done) {
    double dangling = 0.0;
    // transfer scope 0: regions 0
    Q.memcpy(gpu_pr, pr, sizeof(double) * V).wait();
    Q.memcpy(gpu_dangling, &dangling, sizeof(double)).wait();
    // ComputePR_kernel_0
    Q.submit([&](sycl::handler& h) {
      h.parallel_for(sycl::range<1>(NUM_THREADS), [=](sycl::id<1> i) {
        for (int u = i[0]; u < V; u += NUM_THREADS) {
          if ((gpu_offsets[u + 1] - gpu_offsets[u]) == 0) {
            atomic_ref_t<double>(gpu_dangling[0]).fetch_add(gpu_pr[u]);
          }
        }
      });
    }).wait();
    Q.memcpy(&dangling, gpu_dangling, sizeof(double)).wait();
    // end transfer scope 0
    diff = 0.0;
    // transfer scope 1: regions 1
    Q.memcpy(gpu_pr, pr, sizeof(double) * V).wait();
    Q.memcpy(gpu_damping, &damping, sizeof(double)).wait();
    Q.memcpy(gpu_prNext, prNext, sizeof(double) * V).wait();
    Q.memcpy(gpu_n, &n, sizeof(double)).wait();
    Q.memcpy(gpu_diff, &diff, sizeof(double)).wait();
    Q.memcpy(gpu_dangling, &dangling, sizeof(double)).wait();
    // ComputePR_kernel_1
    Q.submit([&](sycl::handler& h) {
      h.parallel_for(sycl::range<1>(NUM_THREADS), [=](sycl::id<1> i) {
        for (int v = i[0]; v < V; v += NUM_THREADS) {
          double sum = 0.0;
          for (int edge_u = gpu_rev_offsets[v]; edge_u < gpu_rev_offsets[v + 1]; edge_u++) {
            int u = gpu_rev_srcs[edge_u];
            sum = sum + gpu_pr[u] / (double)(gpu_offsets[u + 1] - gpu_offsets[u]);
          }
          double val = (1.0 - gpu_damping[0]) / gpu_n[0] + gpu_damping[0] * (sum + gpu_dangling[0] / gpu_n[0]);
          atomic_ref_t<double>(gpu_diff[0]).fetch_max(val - gpu_pr[v]);
          atomic_ref_t<double>(gpu_diff[0]).fetch_max(gpu_pr[v] - val);
          gpu_prNext[v] = val;
        }
      });
    }).wait();
    Q.memcpy(prNext, gpu_prNext, sizeof(double) * V).wait();
    Q.memcpy(&diff, gpu_diff, sizeof(double)).wait();
    // end transfer scope 1
    std::swap(pr, prNext);
    std::swap(gpu_pr, gpu_prNext);
    iter += 1;
    done = diff < threshold || iter >= maxIter;
  }
  // end fixedPoint 0
  memcpy(pr_out, pr, sizeof(double) * V);
  sycl::free(gpu_offsets, Q);
  sycl::free(gpu_rev_offsets, Q);
  sycl::free(gpu_rev_srcs, Q);
  sycl::free(gpu_pr, Q);
  sycl::free(gpu_damping, Q);
  sycl::free(gpu_prNext, Q);
  sycl::free(gpu_n, Q);
  sycl::free(gpu_diff, Q);
  sycl::free(gpu_dangling, Q);
  free(pr);
  free(prNext);
}

// ---- driver ----
int main(int argc, char** argv) {
  if (argc < 4) {
    fprintf(stderr, "usage: %s GRAPH DIRECTED NODES [name=value ...]\n", argv[0]);
    return 2;
  }
  graph input = load_graph(argv[1], atoi(argv[2]) != 0, atoi(argv[3]));
  double* pr = (double*)calloc(input.V + 1, sizeof(double));
  double damping = atof(arg_text(argc, argv, "damping"));
  double threshold = atof(arg_text(argc, argv, "threshold"));
  int maxIter = (int)atoll(arg_text(argc, argv, "maxIter"));
  ComputePR(input, pr, damping, threshold, maxIter);
  for (int i = 0; i < input.V; i++) printf("pr\t%d\t%.17g\n", i, (double)pr[i]);
  return 0;
}
