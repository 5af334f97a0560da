#pragma once

#include "fbac/tensor.hpp"

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fbac {

struct SecurityClass {
    unsigned level = 0;
    std::set<std::string> compartments;

    auto operator<=>(const SecurityClass&) const = default;
};

std::string to_string(const SecurityClass& c);

/// Ranks are named in the order they were declared; a rank's numeric value is what orders classes.
class ClassLattice {
public:
    void add_level(unsigned rank, std::string name);
    void add_compartment(std::string token);

    const std::map<unsigned, std::string>& levels() const { return levels_; }
    const std::set<std::string>& compartments() const { return compartments_; }

    /// Rank for a level name or a decimal rank; throws ForeignClass.
    unsigned rank_of(std::string_view name_or_rank) const;

    /// Throws ForeignClass when `c` is not drawn from this lattice.
    void require_member(const SecurityClass& c) const;

    bool leq(const SecurityClass& a, const SecurityClass& b) const;
    SecurityClass join(const SecurityClass& a, const SecurityClass& b) const;
    SecurityClass meet(const SecurityClass& a, const SecurityClass& b) const;

    /// Every class of the lattice, ordered.
    std::vector<SecurityClass> all_classes() const;

private:
    std::map<unsigned, std::string> levels_;
    std::set<std::string> compartments_;
};

enum class LatticeMode { Confidentiality, Integrity };

struct ClassAssignment {
    ClassLattice lattice;
    LatticeMode mode = LatticeMode::Confidentiality;
    std::map<SubjectId, SecurityClass> subject_class;
    std::map<std::pair<std::string, ObjectTuple>, SecurityClass> pair_class;
    /// Integrity classes of objects, consulted by biba_write_allowed only.
    std::map<ObjectTuple, SecurityClass> object_class;
};

/// pair_class(f, o) ⪯ subject_class(s). Throws UnassignedPair / UnassignedSubject.
bool flow_allowed(const ClassAssignment& a, const SubjectId& s, const FunctionSig& f, const ObjectTuple& o);

/// class(o) ⪯ class(s). Throws UnassignedSubject / UnassignedObject.
bool biba_write_allowed(const ClassAssignment& a, const SubjectId& s, const ObjectTuple& o);

/// Copy of `base` with True/False written for every assigned (subject, pair) coordinate.
AccessTensor compile_to_tensor(const ClassAssignment& a, const AccessTensor& base);

/// Checks registration and arity of every name in `a` against `t`.
void validate_assignment(const ClassAssignment& a, const AccessTensor& t);

/// LEVEL / COMPARTMENT / SUBJECTCLASS / PAIRCLASS / OBJECTCLASS / MODE lines.
ClassAssignment parse_lattice_policy(std::string_view policy_text, std::string_view source = "<lattice>");

}  // namespace fbac
