// Benchmark: serial reference loop vs the OpenMP worker pool on a mock
// attack workload. The two paths must produce identical results files.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vca/harness.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

std::string file_contents(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string make_dataset(int items) {
    const std::string path = "/tmp/vca_bench_dataset.jsonl";
    std::ofstream out(path);
    const char* nouns[] = {"copper", "walnut", "harbor", "violin", "meadow",
                           "lantern", "marble", "falcon", "cedar", "prairie"};
    for (int i = 0; i < items; ++i) {
        const char* a = nouns[i % 10];
        const char* b = nouns[(i + 3) % 10];
        out << R"({"id":"b)" << i << R"(","question":"which of these pairs the )" << a
            << R"( with the )" << b << R"( tone","options":[")" << a << " " << b
            << R"( tone","plastic crate","gravel mound","paper kite"],"answer":0})"
            << "\n";
    }
    return path;
}

double timed_run(vca::RunConfig cfg, const std::string& out) {
    std::filesystem::remove(out);
    std::filesystem::remove(out + ".meta.json");
    cfg.out_path = out;
    auto t0 = std::chrono::steady_clock::now();
    vca::run_attack_suite(cfg);
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    int items = argc > 1 ? std::atoi(argv[1]) : 60;
    int threads = argc > 2 ? std::atoi(argv[2]) : 4;

    vca::RunConfig cfg;
    cfg.dataset_path = make_dataset(items);
    cfg.attack = "ssr";
    cfg.cem = "base";
    cfg.seed = 17;
    cfg.caching = false;  // measure raw evaluation throughput

    cfg.concurrency = 1;
    double serial = timed_run(cfg, "/tmp/vca_bench_serial.jsonl");

    cfg.concurrency = threads;
    double parallel = timed_run(cfg, "/tmp/vca_bench_parallel.jsonl");

    const bool identical = file_contents("/tmp/vca_bench_serial.jsonl") ==
                           file_contents("/tmp/vca_bench_parallel.jsonl");

#ifdef _OPENMP
    std::printf("openmp: enabled (max threads %d)\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled at build time\n");
#endif
    std::printf("items: %d\n", items);
    std::printf("serial:   %.3f s\n", serial);
    std::printf("parallel: %.3f s (%d workers, speedup %.2fx)\n", parallel, threads,
                parallel > 0 ? serial / parallel : 0.0);
    std::printf("outputs identical: %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
