// Copyright 2026 The hqc Authors
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

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "hqc/rng.hpp"

namespace hqc {

enum class PhaseKind { Classical, Quantum };

inline const char *phase_kind_name(PhaseKind k) {
    return k == PhaseKind::Classical ? "classical" : "quantum";
}

struct Phase {
    PhaseKind kind = PhaseKind::Classical;
    std::int64_t duration = 0;
};

/// One phase of a hybrid job; `J_i_j` is phase j of job i (both 1-based).
struct JobBlock {
    std::string id;
    std::size_t job = 0;
    std::size_t order = 0;
    PhaseKind kind = PhaseKind::Classical;
    std::int64_t duration = 0;
    std::vector<std::string> deps;
};

inline std::string block_id(std::size_t job, std::size_t order) {
    return "J_" + std::to_string(job) + "_" + std::to_string(order);
}

/// One block per phase, each depending on its predecessor.
inline std::vector<JobBlock> split_job(std::size_t job, const std::vector<Phase> &phases) {
    if (phases.empty()) {
        throw std::invalid_argument("job " + std::to_string(job) + " has no phases");
    }
    std::vector<JobBlock> out;
    for (std::size_t j = 0; j < phases.size(); ++j) {
        if (phases[j].duration < 0) {
            throw std::invalid_argument("phase durations must be non-negative");
        }
        JobBlock b{block_id(job, j + 1), job, j + 1, phases[j].kind, phases[j].duration, {}};
        if (j > 0) b.deps.push_back(out.back().id);
        out.push_back(std::move(b));
    }
    return out;
}

/// Blocks for jobs numbered 1..k in order.
inline std::vector<JobBlock> split_jobs(const std::vector<std::vector<Phase>> &jobs) {
    std::vector<JobBlock> out;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto blocks = split_job(i + 1, jobs[i]);
        out.insert(out.end(), blocks.begin(), blocks.end());
    }
    return out;
}

struct Resources {
    std::size_t n_classical = 1;
    std::size_t n_qpu = 1;
};

enum class Policy { Monolithic, Split };

inline const char *policy_name(Policy p) {
    return p == Policy::Monolithic ? "monolithic" : "split";
}

struct Placement {
    std::string block;
    std::string resource;
    std::int64_t start = 0;
    std::int64_t end = 0;
};

/// A span during which a resource is held, whether or not it computes.
struct Reservation {
    std::string resource;
    std::size_t job = 0;
    std::int64_t start = 0;
    std::int64_t end = 0;
};

struct ScheduleMetrics {
    std::int64_t qpu_busy = 0;
    std::int64_t qpu_reserved = 0;
    std::int64_t qpu_reserved_idle = 0;
    double qpu_idle_fraction = 0.0;
    std::int64_t makespan = 0;
    bool operator==(const ScheduleMetrics &) const = default;
};

struct Schedule {
    Policy policy = Policy::Split;
    std::vector<Placement> placements;  // in input block order
    std::vector<Reservation> reservations;
    ScheduleMetrics metrics;
};

inline std::string resource_name(PhaseKind kind, std::size_t index) {
    return (kind == PhaseKind::Classical ? "classical_" : "qpu_") + std::to_string(index);
}

inline bool is_qpu(const std::string &resource) {
    return resource.rfind("qpu_", 0) == 0;
}

/// Metrics over the reservation timeline: busy = quantum block time,
/// reserved = QPU reservation time, idle = reserved - busy.
inline ScheduleMetrics compute_metrics(const std::vector<Placement> &placements,
                                       const std::vector<Reservation> &reservations) {
    ScheduleMetrics m;
    for (const Placement &p : placements) {
        if (is_qpu(p.resource)) m.qpu_busy += p.end - p.start;
        m.makespan = std::max(m.makespan, p.end);
    }
    for (const Reservation &r : reservations) {
        if (is_qpu(r.resource)) m.qpu_reserved += r.end - r.start;
        m.makespan = std::max(m.makespan, r.end);
    }
    m.qpu_reserved_idle = m.qpu_reserved - m.qpu_busy;
    m.qpu_idle_fraction =
        m.qpu_reserved > 0 ? static_cast<double>(m.qpu_reserved_idle) / static_cast<double>(m.qpu_reserved) : 0.0;
    return m;
}

namespace detail {

// Validates ids and dependencies; returns a topological order (stable in input order).
inline std::vector<std::size_t> topological_order(const std::vector<JobBlock> &blocks,
                                                  std::map<std::string, std::size_t> &index) {
    index.clear();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (!index.emplace(blocks[i].id, i).second) {
            throw std::invalid_argument("duplicate block id " + blocks[i].id);
        }
        if (blocks[i].duration < 0) {
            throw std::invalid_argument("block " + blocks[i].id + " has a negative duration");
        }
    }
    std::vector<std::size_t> indegree(blocks.size(), 0);
    std::vector<std::vector<std::size_t>> users(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        for (const std::string &d : blocks[i].deps) {
            const auto it = index.find(d);
            if (it == index.end()) {
                throw std::invalid_argument("block " + blocks[i].id + " depends on unknown block " + d);
            }
            users[it->second].push_back(i);
            ++indegree[i];
        }
    }
    std::vector<std::size_t> order;
    std::vector<bool> done(blocks.size(), false);
    while (order.size() < blocks.size()) {
        bool progressed = false;
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            if (!done[i] && indegree[i] == 0) {
                done[i] = true;
                order.push_back(i);
                for (std::size_t u : users[i]) --indegree[u];
                progressed = true;
                break;
            }
        }
        if (!progressed) {
            throw std::invalid_argument("block dependencies contain a cycle");
        }
    }
    return order;
}

}  // namespace detail

namespace detail {

/// Greedy list scheduling in integer ticks. Each step places the ready unit
/// (a block under split, a whole job under monolithic) with the earliest
/// feasible start; ties go to the unit listed first. Resources are taken at
/// the earliest time they free up, lowest index first.
inline Schedule list_schedule(const std::vector<JobBlock> &blocks, const Resources &res, Policy policy) {
    if (res.n_classical < 1 || res.n_qpu < 1) {
        throw std::invalid_argument("at least one classical node and one QPU are required");
    }
    std::map<std::string, std::size_t> index;
    detail::topological_order(blocks, index);

    Schedule s;
    s.policy = policy;
    s.placements.resize(blocks.size());
    std::vector<std::int64_t> free_classical(res.n_classical, 0), free_qpu(res.n_qpu, 0);
    std::vector<std::optional<std::int64_t>> end(blocks.size());
    auto earliest = [](const std::vector<std::int64_t> &pool) {
        return static_cast<std::size_t>(std::min_element(pool.begin(), pool.end()) - pool.begin());
    };

    // Units: single blocks, or every block of one job in phase order.
    std::vector<std::vector<std::size_t>> units;
    if (policy == Policy::Split) {
        for (std::size_t i = 0; i < blocks.size(); ++i) units.push_back({i});
    } else {
        std::map<std::size_t, std::size_t> unit_of_job;
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            auto [it, fresh] = unit_of_job.emplace(blocks[i].job, units.size());
            if (fresh) units.emplace_back();
            units[it->second].push_back(i);
        }
        for (auto &u : units) {
            std::stable_sort(u.begin(), u.end(),
                             [&](std::size_t a, std::size_t b) { return blocks[a].order < blocks[b].order; });
        }
    }
    std::vector<bool> placed(units.size(), false);
    std::vector<std::size_t> unit_of(blocks.size());
    for (std::size_t u = 0; u < units.size(); ++u)
        for (std::size_t b : units[u]) unit_of[b] = u;

    for (std::size_t step = 0; step < units.size(); ++step) {
        std::optional<std::size_t> best;
        std::int64_t best_start = std::numeric_limits<std::int64_t>::max();
        for (std::size_t u = 0; u < units.size(); ++u) {
            if (placed[u]) continue;
            // Ready when every external dependency is placed.
            bool ready = true;
            std::int64_t dep_end = 0;
            for (std::size_t b : units[u]) {
                for (const std::string &d : blocks[b].deps) {
                    const std::size_t di = index.at(d);
                    if (unit_of[di] == u) continue;
                    if (!end[di]) {
                        ready = false;
                        break;
                    }
                    dep_end = std::max(dep_end, *end[di]);
                }
                if (!ready) break;
            }
            if (!ready) continue;
            std::int64_t start = dep_end;
            if (policy == Policy::Split) {
                const auto &pool = blocks[units[u][0]].kind == PhaseKind::Classical ? free_classical : free_qpu;
                start = std::max(start, pool[earliest(pool)]);
            } else {
                start = std::max(start, free_classical[earliest(free_classical)]);
                const bool quantum = std::any_of(units[u].begin(), units[u].end(), [&](std::size_t b) {
                    return blocks[b].kind == PhaseKind::Quantum;
                });
                if (quantum) start = std::max(start, free_qpu[earliest(free_qpu)]);
            }
            if (start < best_start) {
                best_start = start;
                best = u;
            }
        }
        if (!best) {
            throw std::invalid_argument("block dependencies cannot be satisfied");
        }
        const auto &unit = units[*best];
        placed[*best] = true;
        if (policy == Policy::Split) {
            const JobBlock &b = blocks[unit[0]];
            auto &pool = b.kind == PhaseKind::Classical ? free_classical : free_qpu;
            const std::size_t r = earliest(pool);
            const std::int64_t stop = best_start + b.duration;
            s.placements[unit[0]] = {b.id, resource_name(b.kind, r), best_start, stop};
            if (b.kind == PhaseKind::Quantum) s.reservations.push_back({resource_name(b.kind, r), b.job, best_start, stop});
            pool[r] = stop;
            end[unit[0]] = stop;
            continue;
        }
        // Monolithic: the job's blocks run back to back on held resources, each
        // also waiting for its own external dependencies.
        const std::size_t c = earliest(free_classical);
        const bool quantum = std::any_of(unit.begin(), unit.end(), [&](std::size_t b) {
            return blocks[b].kind == PhaseKind::Quantum;
        });
        const std::optional<std::size_t> q = quantum ? std::optional<std::size_t>(earliest(free_qpu)) : std::nullopt;
        std::int64_t t = best_start;
        for (std::size_t b : unit) {
            for (const std::string &d : blocks[b].deps) t = std::max(t, end[index.at(d)].value_or(t));
            const JobBlock &blk = blocks[b];
            const std::string resource =
                blk.kind == PhaseKind::Classical ? resource_name(PhaseKind::Classical, c) : resource_name(PhaseKind::Quantum, *q);
            s.placements[b] = {blk.id, resource, t, t + blk.duration};
            t += blk.duration;
            end[b] = t;
        }
        const std::size_t job = blocks[unit[0]].job;
        s.reservations.push_back({resource_name(PhaseKind::Classical, c), job, best_start, t});
        free_classical[c] = t;
        if (q) {
            s.reservations.push_back({resource_name(PhaseKind::Quantum, *q), job, best_start, t});
            free_qpu[*q] = t;
        }
    }
    s.metrics = compute_metrics(s.placements, s.reservations);
    return s;
}

// Releases the held resources of a monolithic schedule and shifts every block
// as early as its dependencies and its resource's block order allow.
inline Schedule compact_split(const std::vector<JobBlock> &blocks, const Schedule &mono) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < blocks.size(); ++i) index.emplace(blocks[i].id, i);
    std::vector<std::size_t> order(blocks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return mono.placements[a].start < mono.placements[b].start;
    });
    Schedule s;
    s.policy = Policy::Split;
    s.placements = mono.placements;
    std::map<std::string, std::int64_t> free;
    for (std::size_t i : order) {
        Placement &p = s.placements[i];
        std::int64_t start = free[p.resource];
        for (const std::string &d : blocks[i].deps) start = std::max(start, s.placements[index.at(d)].end);
        p.start = start;
        p.end = start + blocks[i].duration;
        free[p.resource] = p.end;
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const Placement &p = s.placements[i];
        if (is_qpu(p.resource)) s.reservations.push_back({p.resource, blocks[i].job, p.start, p.end});
    }
    s.metrics = compute_metrics(s.placements, s.reservations);
    return s;
}

}  // namespace detail

/// Schedules `blocks` under `policy`. Monolithic jobs hold one classical node,
/// plus one QPU when they have a quantum phase, for their whole span. Split
/// blocks hold a resource only while they run; the split schedule is the
/// earliest-start list schedule unless the left-shifted monolithic schedule
/// finishes strictly sooner, so splitting never lengthens the makespan.
inline Schedule schedule(const std::vector<JobBlock> &blocks, const Resources &res, Policy policy) {
    if (policy == Policy::Monolithic) return detail::list_schedule(blocks, res, policy);
    Schedule greedy = detail::list_schedule(blocks, res, Policy::Split);
    Schedule compact = detail::compact_split(blocks, detail::list_schedule(blocks, res, Policy::Monolithic));
    return compact.metrics.makespan < greedy.metrics.makespan ? compact : greedy;
}

/// Independent consistency checks; returns human-readable problems (empty if valid).
inline std::vector<std::string> validate_schedule(const std::vector<JobBlock> &blocks, const Schedule &s) {
    std::vector<std::string> problems;
    if (s.placements.size() != blocks.size()) {
        return {"placement count differs from block count"};
    }
    std::map<std::string, const Placement *> by_id;
    for (const Placement &p : s.placements) by_id[p.block] = &p;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const Placement &p = s.placements[i];
        if (p.block != blocks[i].id) problems.push_back("placement " + std::to_string(i) + " is for the wrong block");
        if (p.end - p.start != blocks[i].duration) problems.push_back(p.block + " has the wrong length");
        if (is_qpu(p.resource) != (blocks[i].kind == PhaseKind::Quantum))
            problems.push_back(p.block + " runs on the wrong resource kind");
        for (const std::string &d : blocks[i].deps) {
            const auto it = by_id.find(d);
            if (it == by_id.end() || p.start < it->second->end) problems.push_back(p.block + " starts before " + d);
        }
    }
    // Per-resource overlap among placements and among reservations.
    auto check_overlap = [&](std::vector<std::tuple<std::string, std::int64_t, std::int64_t>> spans, const char *what) {
        std::sort(spans.begin(), spans.end());
        for (std::size_t i = 1; i < spans.size(); ++i) {
            if (std::get<0>(spans[i]) == std::get<0>(spans[i - 1]) && std::get<1>(spans[i]) < std::get<2>(spans[i - 1]))
                problems.push_back(std::string(what) + " overlap on " + std::get<0>(spans[i]));
        }
    };
    std::vector<std::tuple<std::string, std::int64_t, std::int64_t>> spans;
    for (const Placement &p : s.placements)
        if (p.end > p.start) spans.emplace_back(p.resource, p.start, p.end);
    check_overlap(spans, "placement");
    spans.clear();
    for (const Reservation &r : s.reservations)
        if (r.end > r.start) spans.emplace_back(r.resource, r.start, r.end);
    check_overlap(spans, "reservation");
    // Every QPU placement lies inside a reservation of that QPU.
    for (const Placement &p : s.placements) {
        if (!is_qpu(p.resource) || p.end == p.start) continue;
        const bool covered = std::any_of(s.reservations.begin(), s.reservations.end(), [&](const Reservation &r) {
            return r.resource == p.resource && r.start <= p.start && p.end <= r.end;
        });
        if (!covered) problems.push_back(p.block + " runs on an unreserved QPU");
    }
    if (!(compute_metrics(s.placements, s.reservations) == s.metrics)) problems.push_back("metrics do not recompute");
    return problems;
}

// ---------------------------------------------------------------------------
// Workload files and output.

struct Workload {
    Resources resources;
    std::vector<std::vector<Phase>> jobs;
};

inline PhaseKind parse_phase_kind(const std::string &s) {
    if (s == "c" || s == "classical") return PhaseKind::Classical;
    if (s == "q" || s == "quantum") return PhaseKind::Quantum;
    throw std::invalid_argument("unknown phase kind '" + s + "' (expected c|classical|q|quantum)");
}

/// {"resources": {"classical": 2, "qpu": 1}, "jobs": [[["c", 10], ["q", 1]], ...]}
inline Workload workload_from_json(const nlohmann::json &doc) {
    Workload w;
    if (doc.contains("resources")) {
        w.resources.n_classical = doc["resources"].value("classical", std::size_t{1});
        w.resources.n_qpu = doc["resources"].value("qpu", std::size_t{1});
    }
    for (const auto &job : doc.at("jobs")) {
        std::vector<Phase> phases;
        for (const auto &ph : job) {
            if (!ph.is_array() || ph.size() != 2 || !ph[0].is_string() || !ph[1].is_number_integer()) {
                throw std::invalid_argument("each phase must be [kind, integer duration]");
            }
            phases.push_back({parse_phase_kind(ph[0].get<std::string>()), ph[1].get<std::int64_t>()});
        }
        w.jobs.push_back(std::move(phases));
    }
    return w;
}

inline nlohmann::json workload_to_json(const Workload &w) {
    nlohmann::json jobs = nlohmann::json::array();
    for (const auto &job : w.jobs) {
        nlohmann::json phases = nlohmann::json::array();
        for (const Phase &p : job) phases.push_back({p.kind == PhaseKind::Classical ? "c" : "q", p.duration});
        jobs.push_back(phases);
    }
    return {{"resources", {{"classical", w.resources.n_classical}, {"qpu", w.resources.n_qpu}}}, {"jobs", jobs}};
}

/// Up to `max_jobs` jobs of 1..max_phases phases with durations in 1..max_duration.
inline Workload random_workload(Rng &rng, std::size_t max_jobs = 20, std::size_t max_phases = 8,
                                std::int64_t max_duration = 10) {
    Workload w;
    w.resources.n_classical = 1 + rng.below(4);
    w.resources.n_qpu = 1 + rng.below(2);
    const std::size_t jobs = 1 + rng.below(max_jobs);
    for (std::size_t i = 0; i < jobs; ++i) {
        std::vector<Phase> phases(1 + rng.below(max_phases));
        for (Phase &p : phases) {
            p.kind = rng.below(2) ? PhaseKind::Quantum : PhaseKind::Classical;
            p.duration = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_duration)));
        }
        w.jobs.push_back(std::move(phases));
    }
    return w;
}

/// Gantt-ready timeline.
inline void write_timeline_csv(std::ostream &out, const Schedule &s) {
    out << "block,resource,start,end\n";
    for (const Placement &p : s.placements) out << p.block << ',' << p.resource << ',' << p.start << ',' << p.end << '\n';
}

inline void write_metrics_csv_header(std::ostream &out) {
    out << "policy,qpu_busy,qpu_reserved,qpu_reserved_idle,qpu_idle_fraction,makespan\n";
}

inline void write_metrics_csv_row(std::ostream &out, const Schedule &s) {
    std::ostringstream row;
    row.precision(17);
    row << policy_name(s.policy) << ',' << s.metrics.qpu_busy << ',' << s.metrics.qpu_reserved << ','
        << s.metrics.qpu_reserved_idle << ',' << s.metrics.qpu_idle_fraction << ',' << s.metrics.makespan;
    out << row.str() << '\n';
}

}  // namespace hqc
