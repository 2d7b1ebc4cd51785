// Copyright 2026 nestmatch Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nestmatch/kernels.h"

#include <algorithm>
#include <numeric>

#include "absl/container/flat_hash_map.h"

namespace nm {

namespace {

struct UnionFind {
    std::vector<std::uint32_t> parent;
    std::vector<std::uint32_t> size;

    explicit UnionFind(std::size_t n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), 0u); }

    std::uint32_t find(std::uint32_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }

    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
    }
};

void add_sizes(ClusterCounts& counts, const std::vector<std::uint32_t>& sizes) {
    for (std::uint32_t s : sizes) {
        if (counts.size() <= s) counts.resize(s + 1, 0);
        counts[s]++;
    }
}

void merge(ClusterCounts& into, const ClusterCounts& from) {
    if (into.size() < from.size()) into.resize(from.size(), 0);
    for (std::size_t s = 0; s < from.size(); s++) into[s] += from[s];
}

}  // namespace

std::vector<std::uint32_t> cluster_sizes(const Nest& nest, const ErrorSample& sample) {
    const std::size_t k = sample.highlighted.size();
    UnionFind uf(k);
    absl::flat_hash_map<BallId, std::uint32_t> first_stick;
    first_stick.reserve(2 * k);
    for (std::uint32_t i = 0; i < k; i++) {
        const Stick s = *nest.stick(sample.highlighted[i]);
        for (BallId b : {s.a, s.b}) {
            if (b == kBoundaryBall) continue;
            auto [it, inserted] = first_stick.try_emplace(b, i);
            if (!inserted) uf.unite(it->second, i);
        }
    }
    std::vector<std::uint32_t> sizes;
    for (std::uint32_t i = 0; i < k; i++) {
        if (uf.find(i) == i) sizes.push_back(uf.size[i]);
    }
    std::sort(sizes.begin(), sizes.end());
    return sizes;
}

ClusterCounts cluster_histogram_serial(const Nest& nest, double p, std::uint64_t trials, std::uint64_t seed) {
    ClusterCounts counts(1, 0);
    for (std::uint64_t t = 0; t < trials; t++) {
        add_sizes(counts, cluster_sizes(nest, sample_errors_uniform(nest, p, derive_seed(seed, t))));
    }
    return counts;
}

ClusterCounts cluster_histogram_parallel(const Nest& nest, double p, std::uint64_t trials, std::uint64_t seed) {
    ClusterCounts total(1, 0);
#pragma omp parallel
    {
        ClusterCounts local(1, 0);
#pragma omp for schedule(dynamic, 16) nowait
        for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); t++) {
            add_sizes(local, cluster_sizes(nest, sample_errors_uniform(nest, p, derive_seed(seed, t))));
        }
#pragma omp critical
        merge(total, local);
    }
    return total;
}

std::vector<MatchResult> match_batch_serial(const Nest& nest, const std::vector<Instance>& instances,
                                            const MatcherOptions& options) {
    std::vector<MatchResult> out;
    out.reserve(instances.size());
    for (const Instance& inst : instances) out.push_back(match_all(nest, inst.events, options));
    return out;
}

std::vector<MatchResult> match_batch_parallel(const Nest& nest, const std::vector<Instance>& instances,
                                              const MatcherOptions& options) {
    std::vector<MatchResult> out(instances.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(instances.size()); i++) {
        out[i] = match_all(nest, instances[i].events, options);
    }
    return out;
}

}  // namespace nm
