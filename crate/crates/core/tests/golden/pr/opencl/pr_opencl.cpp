// pr: generated opencl code
#define CL_TARGET_OPENCL_VERSION 120
#include <CL/cl.h>
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

static int find_edge(const int* offsets, const int* dests, int u, int v) {
  int lo = offsets[u], hi = offsets[u + 1];
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (dests[mid] == v) return mid;
    if (dests[mid] < v) lo = mid + 1; else hi = mid;
  }
  return -1;
}

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

// ---- generated code ----
void ComputePR(graph& g, double* pr_out, double damping, double threshold, int maxIter) {
  int V = g.V;
  int E = g.E;
  size_t global_size = 1024;
  cl_int status;
  cl_platform_id platform;
  clGetPlatformIDs(1, &platform, NULL);
  cl_device_id device;
  clGetDeviceIDs(platform, CL_DEVICE_TYPE_DEFAULT, 1, &device, NULL);
  cl_context context = clCreateContext(NULL, 1, &device, NULL, NULL, &status);
  cl_command_queue queue = clCreateCommandQueue(context, device, 0, &status);
  std::string source = read_kernel_source("pr_opencl.cl");
  const char* source_text = source.c_str();
  cl_program program = clCreateProgramWithSource(context, 1, &source_text, NULL, &status);
  clBuildProgram(program, 1, &device, NULL, NULL, NULL);
  cl_kernel ComputePR_kernel_0 = clCreateKernel(program, "ComputePR_kernel_0", &status);
  cl_kernel ComputePR_kernel_1 = clCreateKernel(program, "ComputePR_kernel_1", &status);
  cl_event event;
  double* pr = (double*)malloc(sizeof(double) * V);
  double* prNext = (double*)malloc(sizeof(double) * V);
  memcpy(pr, pr_out, sizeof(double) * V);
  cl_mem gpu_pr = clCreateBuffer(context, CL_MEM_READ_WRITE, sizeof(double) * V, NULL, &status);
  cl_mem gpu_damping = clCreateBuffer(context, CL_MEM_READ_WRITE, sizeof(double), NULL, &status);
  cl_mem gpu_prNext = clCreateBuffer(context, CL_MEM_READ_WRITE, sizeof(double) * V, NULL, &status);
  cl_mem gpu_n = clCreateBuffer(context, CL_MEM_READ_WRITE, sizeof(double), NULL, &status);
  cl_mem gpu_diff = clCreateBuffer(context, CL_MEM_READ_WRITE, sizeof(double), NULL, &status);
  cl_mem gpu_dangling = clCreateBuffer(context, CL_MEM_READ_WRITE, sizeof(double), NULL, &status);
  cl_mem gpu_offsets = clCreateBuffer(context, CL_MEM_READ_WRITE, sizeof(int) * (V + 1), NULL, &status);
  clEnqueueWriteBuffer(queue, gpu_offsets, CL_TRUE, 0, sizeof(int) * (V + 1), g.offsets, 0, NULL, NULL);
  cl_mem gpu_rev_offsets = clCreateBuffer(context, CL_MEM_READ_WRITE, sizeof(int) * (V + 1), NULL, &status);
  clEnqueueWriteBuffer(queue, gpu_rev_offsets, CL_TRUE, 0, sizeof(int) * (V + 1), g.rev_offsets, 0, NULL, NULL);
  cl_mem gpu_rev_srcs = clCreateBuffer(context, CL_MEM_READ_WRITE, sizeof(int) * E, NULL, &status);
  clEnqueueWriteBuffer(queue, gpu_rev_srcs, CL_TRUE, 0, sizeof(int) * E, g.rev_srcs, 0, NULL, NULL);
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
    clEnqueueWriteBuffer(queue, gpu_pr, CL_TRUE, 0, sizeof(double) * V, pr, 0, NULL, NULL);
    clEnqueueWriteBuffer(queue, gpu_dangling, CL_TRUE, 0, sizeof(double), &dangling, 0, NULL, NULL);
    clSetKernelArg(ComputePR_kernel_0, 0, sizeof(int), &V);
    clSetKernelArg(ComputePR_kernel_0, 1, sizeof(cl_mem), &gpu_offsets);
    clSetKernelArg(ComputePR_kernel_0, 2, sizeof(cl_mem), &gpu_pr);
    clSetKernelArg(ComputePR_kernel_0, 3, sizeof(cl_mem), &gpu_dangling);
    clEnqueueNDRangeKernel(queue, ComputePR_kernel_0, 1, NULL, &global_size, NULL, 0, NULL, &event);
    clWaitForEvents(1, &event);
    clEnqueueReadBuffer(queue, gpu_dangling, CL_TRUE, 0, sizeof(double), &dangling, 0, NULL, NULL);
    // end transfer scope 0
    diff = 0.0;
    // transfer scope 1: regions 1
    clEnqueueWriteBuffer(queue, gpu_pr, CL_TRUE, 0, sizeof(double) * V, pr, 0, NULL, NULL);
    clEnqueueWriteBuffer(queue, gpu_damping, CL_TRUE, 0, sizeof(double), &damping, 0, NULL, NULL);
    clEnqueueWriteBuffer(queue, gpu_prNext, CL_TRUE, 0, sizeof(double) * V, prNext, 0, NULL, NULL);
    clEnqueueWriteBuffer(queue, gpu_n, CL_TRUE, 0, sizeof(double), &n, 0, NULL, NULL);
    clEnqueueWriteBuffer(queue, gpu_diff, CL_TRUE, 0, sizeof(double), &diff, 0, NULL, NULL);
    clEnqueueWriteBuffer(queue, gpu_dangling, CL_TRUE, 0, sizeof(double), &dangling, 0, NULL, NULL);
    clSetKernelArg(ComputePR_kernel_1, 0, sizeof(int), &V);
    clSetKernelArg(ComputePR_kernel_1, 1, sizeof(cl_mem), &gpu_offsets);
    clSetKernelArg(ComputePR_kernel_1, 2, sizeof(cl_mem), &gpu_rev_offsets);
    clSetKernelArg(ComputePR_kernel_1, 3, sizeof(cl_mem), &gpu_rev_srcs);
    clSetKernelArg(ComputePR_kernel_1, 4, sizeof(cl_mem), &gpu_pr);
    clSetKernelArg(ComputePR_kernel_1, 5, sizeof(cl_mem), &gpu_damping);
    clSetKernelArg(ComputePR_kernel_1, 6, sizeof(cl_mem), &gpu_prNext);
    clSetKernelArg(ComputePR_kernel_1, 7, sizeof(cl_mem), &gpu_n);
    clSetKernelArg(ComputePR_kernel_1, 8, sizeof(cl_mem), &gpu_diff);
    clSetKernelArg(ComputePR_kernel_1, 9, sizeof(cl_mem), &gpu_dangling);
    clEnqueueNDRangeKernel(queue, ComputePR_kernel_1, 1, NULL, &global_size, NULL, 0, NULL, &event);
    clWaitForEvents(1, &event);
    clEnqueueReadBuffer(queue, gpu_prNext, CL_TRUE, 0, sizeof(double) * V, prNext, 0, NULL, NULL);
    clEnqueueReadBuffer(queue, gpu_diff, CL_TRUE, 0, sizeof(double), &diff, 0, NULL, NULL);
    // end transfer scope 1
    std::swap(pr, prNext);
    std::swap(gpu_pr, gpu_prNext);
    iter += 1;
    done = diff < threshold || iter >= maxIter;
  }
  // end fixedPoint 0
  memcpy(pr_out, pr, sizeof(double) * V);
  clReleaseMemObject(gpu_offsets);
  clReleaseMemObject(gpu_rev_offsets);
  clReleaseMemObject(gpu_rev_srcs);
  clReleaseMemObject(gpu_pr);
  clReleaseMemObject(gpu_damping);
  clReleaseMemObject(gpu_prNext);
  clReleaseMemObject(gpu_n);
  clReleaseMemObject(gpu_diff);
  clReleaseMemObject(gpu_dangling);
  free(pr);
  free(prNext);
  clReleaseKernel(ComputePR_kernel_0);
  clReleaseKernel(ComputePR_kernel_1);
  clReleaseProgram(program);
  clReleaseCommandQueue(queue);
  clReleaseContext(context);
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
