#pragma once

// Test-only brute-force models. Nothing here calls into the sparse tensor's
// lookup path; expected values are computed from the raw random draws.

#include "fbac/tensor.hpp"

#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

namespace fbac::testing {

struct Universe {
    std::vector<std::string> subjects;
    std::vector<FunctionSig> functions;
    std::vector<std::string> objects;
};

/// Every tuple over `objects` with length 0..max_len, in lexicographic order per length.
inline std::vector<ObjectTuple> all_tuples(const std::vector<std::string>& objects, std::size_t max_len) {
    std::vector<ObjectTuple> out{ObjectTuple{}};
    std::vector<ObjectTuple> layer{ObjectTuple{}};
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<ObjectTuple> next;
        for (const auto& prefix : layer)
            for (const auto& o : objects) {
                auto t = prefix;
                t.push_back(ObjectRef{o});
                next.push_back(std::move(t));
            }
        out.insert(out.end(), next.begin(), next.end());
        layer = std::move(next);
    }
    return out;
}

/// Dense array model: value codes 'F' (false), 'T' (true), 'P' (predicate).
/// Missing cells of correct arity are 'F'; arity mismatches are 'N'.
class DenseOracle {
public:
    explicit DenseOracle(Universe u, std::size_t max_len = 2) : u_(std::move(u)), tuples_(all_tuples(u_.objects, max_len)) {
        cells_.assign(u_.subjects.size() * u_.functions.size() * tuples_.size(), Cell{});
    }

    const Universe& universe() const { return u_; }
    const std::vector<ObjectTuple>& tuples() const { return tuples_; }

    void set(std::size_t s, std::size_t f, std::size_t t, char code, std::string pattern = {}) {
        cells_[index(s, f, t)] = Cell{code, std::move(pattern)};
    }

    void clear(std::size_t s, std::size_t f, std::size_t t) { cells_[index(s, f, t)] = Cell{}; }

    TensorEntry expected(std::size_t s, std::size_t f, std::size_t t) const {
        if (tuples_[t].size() != u_.functions[f].arity) return TensorEntry::not_applicable();
        const auto& c = cells_[index(s, f, t)];
        if (c.code == 'T') return TensorEntry::true_entry();
        if (c.code == 'P') return TensorEntry::true_with(Predicate::regex(c.pattern));
        return TensorEntry::false_entry();
    }

    std::size_t tuple_index(const ObjectTuple& t) const {
        for (std::size_t i = 0; i < tuples_.size(); ++i)
            if (tuples_[i] == t) return i;
        return tuples_.size();
    }

private:
    struct Cell {
        char code = 'F';
        std::string pattern;
    };

    std::size_t index(std::size_t s, std::size_t f, std::size_t t) const {
        return (s * u_.functions.size() + f) * tuples_.size() + t;
    }

    Universe u_;
    std::vector<ObjectTuple> tuples_;
    std::vector<Cell> cells_;
};

inline const std::vector<std::string>& sample_patterns() {
    static const std::vector<std::string> patterns = {
        "context=[0-5](;.*)?\\nSTDIN:.*",
        "quiet(;.*)?\\nSTDIN:.*",
        ".*",
        "\\nSTDIN:",
    };
    return patterns;
}

struct RandomTensor {
    AccessTensor tensor;
    DenseOracle oracle;
};

/// Random universe with |S|,|F|,|O| in [1, max_size] and arities in [0, 2];
/// the tensor and the dense oracle are filled from the same draws.
inline RandomTensor random_tensor(std::mt19937& rng, std::size_t max_size = 5) {
    std::uniform_int_distribution<std::size_t> size(1, max_size);
    Universe u;
    const auto ns = size(rng), nf = size(rng), no = size(rng);
    for (std::size_t i = 0; i < ns; ++i) u.subjects.push_back("s" + std::to_string(i));
    for (std::size_t i = 0; i < nf; ++i) u.functions.push_back({"f" + std::to_string(i), rng() % 3});
    for (std::size_t i = 0; i < no; ++i) u.objects.push_back("dir" + std::to_string(i % 2) + "/o" + std::to_string(i));

    RandomTensor rt{AccessTensor{}, DenseOracle(u)};
    for (const auto& s : u.subjects) rt.tensor.create_subject(SubjectId{s});
    for (const auto& f : u.functions) rt.tensor.create_function(f);
    for (const auto& o : u.objects) rt.tensor.create_object(ObjectRef{o});

    const auto& tuples = rt.oracle.tuples();
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t f = 0; f < nf; ++f)
            for (std::size_t t = 0; t < tuples.size(); ++t) {
                if (tuples[t].size() != u.functions[f].arity) continue;
                const auto roll = rng() % 100;
                if (roll < 40) continue;
                if (roll < 60) {
                    rt.tensor.enter_entry(SubjectId{u.subjects[s]}, u.functions[f].name, tuples[t], TensorEntry::false_entry());
                    rt.oracle.set(s, f, t, 'F');
                } else if (roll < 85) {
                    rt.tensor.enter_entry(SubjectId{u.subjects[s]}, u.functions[f].name, tuples[t], TensorEntry::true_entry());
                    rt.oracle.set(s, f, t, 'T');
                } else {
                    const auto& p = sample_patterns()[rng() % sample_patterns().size()];
                    rt.tensor.enter_entry(SubjectId{u.subjects[s]}, u.functions[f].name, tuples[t],
                                          TensorEntry::true_with(Predicate::regex(p)));
                    rt.oracle.set(s, f, t, 'P', p);
                }
            }
    return rt;
}

}  // namespace fbac::testing
