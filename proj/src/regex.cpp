#include "fbac/regex.hpp"

#include "fbac/error.hpp"

#include <memory>
#include <optional>

namespace fbac::re {

namespace {

struct Node;
using NodePtr = std::unique_ptr<Node>;

struct Node {
    enum class Kind { Empty, Byte, Class, Concat, Alternate, Repeat, Begin, End };
    Kind kind = Kind::Empty;
    std::uint8_t byte = 0;
    std::size_t cls = 0;
    std::vector<NodePtr> children;
    int min = 0;
    int max = -1;  // -1 = unbounded
};

NodePtr make(Node::Kind kind) {
    auto node = std::make_unique<Node>();
    node->kind = kind;
    return node;
}

constexpr int kMaxCount = 1000;

class Parser {
public:
    Parser(std::string_view pattern, std::vector<std::bitset<256>>& classes)
        : src_(pattern), classes_(classes) {}

    NodePtr parse() {
        auto node = alternation();
        if (!at_end()) fail("unmatched ')'");
        return node;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::InvalidPattern, what + " at offset " + std::to_string(pos_));
    }

    bool at_end() const { return pos_ >= src_.size(); }
    char peek() const { return src_[pos_]; }

    NodePtr alternation() {
        std::vector<NodePtr> branches;
        branches.push_back(concatenation());
        while (!at_end() && peek() == '|') {
            ++pos_;
            branches.push_back(concatenation());
        }
        if (branches.size() == 1) return std::move(branches.front());
        auto node = make(Node::Kind::Alternate);
        node->children = std::move(branches);
        return node;
    }

    NodePtr concatenation() {
        auto node = make(Node::Kind::Concat);
        while (!at_end() && peek() != '|' && peek() != ')') node->children.push_back(repetition());
        if (node->children.empty()) return make(Node::Kind::Empty);
        if (node->children.size() == 1) return std::move(node->children.front());
        return node;
    }

    NodePtr repetition() {
        auto atom_node = atom();
        while (!at_end()) {
            int lo = 0;
            int hi = -1;
            const char c = peek();
            if (c == '*') {
                ++pos_;
            } else if (c == '+') {
                lo = 1;
                ++pos_;
            } else if (c == '?') {
                hi = 1;
                ++pos_;
            } else if (c == '{') {
                ++pos_;
                lo = number();
                hi = lo;
                if (!at_end() && peek() == ',') {
                    ++pos_;
                    hi = (!at_end() && peek() == '}') ? -1 : number();
                }
                if (at_end() || peek() != '}') fail("unterminated interval");
                ++pos_;
                if (hi != -1 && hi < lo) fail("interval upper bound below lower bound");
            } else {
                break;
            }
            auto rep = make(Node::Kind::Repeat);
            rep->min = lo;
            rep->max = hi;
            rep->children.push_back(std::move(atom_node));
            atom_node = std::move(rep);
        }
        return atom_node;
    }

    int number() {
        const std::size_t start = pos_;
        int value = 0;
        while (!at_end() && peek() >= '0' && peek() <= '9') {
            value = value * 10 + (peek() - '0');
            if (value > kMaxCount) fail("repetition count exceeds " + std::to_string(kMaxCount));
            ++pos_;
        }
        if (pos_ == start) fail("expected repetition count");
        return value;
    }

    NodePtr atom() {
        const char c = peek();
        switch (c) {
        case '(': {
            ++pos_;
            auto inner = alternation();
            if (at_end() || peek() != ')') fail("unmatched '('");
            ++pos_;
            return inner;
        }
        case '[':
            ++pos_;
            return bracket();
        case '.': {
            ++pos_;
            std::bitset<256> all;
            all.set();
            return class_node(all);
        }
        case '^':
            ++pos_;
            return make(Node::Kind::Begin);
        case '$':
            ++pos_;
            return make(Node::Kind::End);
        case '\\': {
            ++pos_;
            return byte_node(escape());
        }
        case '*':
        case '+':
        case '?':
        case '{':
            fail("repetition operator with nothing to repeat");
        default:
            ++pos_;
            return byte_node(static_cast<std::uint8_t>(c));
        }
    }

    std::uint8_t escape() {
        if (at_end()) fail("trailing backslash");
        const char c = src_[pos_++];
        switch (c) {
        case 'n': return '\n';
        case 't': return '\t';
        case 'r': return '\r';
        case 'x': {
            if (pos_ + 2 > src_.size()) fail("truncated \\x escape");
            int value = 0;
            for (int i = 0; i < 2; ++i) {
                const char h = src_[pos_++];
                value <<= 4;
                if (h >= '0' && h <= '9') value |= h - '0';
                else if (h >= 'a' && h <= 'f') value |= h - 'a' + 10;
                else if (h >= 'A' && h <= 'F') value |= h - 'A' + 10;
                else fail("bad hex digit in \\x escape");
            }
            return static_cast<std::uint8_t>(value);
        }
        default:
            if ((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'))
                fail(std::string("unsupported escape \\") + c);
            return static_cast<std::uint8_t>(c);
        }
    }

    NodePtr bracket() {
        std::bitset<256> set;
        bool negate = false;
        if (!at_end() && peek() == '^') {
            negate = true;
            ++pos_;
        }
        bool first = true;
        for (;;) {
            if (at_end()) fail("unterminated bracket expression");
            char c = peek();
            if (c == ']' && !first) {
                ++pos_;
                break;
            }
            first = false;
            if (c == '[' && pos_ + 1 < src_.size() && src_[pos_ + 1] == ':') {
                named_class(set);
                continue;
            }
            if (c == '[' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '=' || src_[pos_ + 1] == '.'))
                fail("collating elements are not supported");
            std::uint8_t lo = bracket_char();
            if (!at_end() && peek() == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] != ']') {
                ++pos_;
                std::uint8_t hi = bracket_char();
                if (hi < lo) fail("reversed range in bracket expression");
                for (int b = lo; b <= hi; ++b) set.set(static_cast<std::size_t>(b));
            } else {
                set.set(lo);
            }
        }
        if (negate) set.flip();
        return class_node(set);
    }

    std::uint8_t bracket_char() {
        const char c = src_[pos_++];
        if (c != '\\') return static_cast<std::uint8_t>(c);
        return escape();
    }

    void named_class(std::bitset<256>& set) {
        const auto close = src_.find(":]", pos_ + 2);
        if (close == std::string_view::npos) fail("unterminated character class name");
        const auto name = src_.substr(pos_ + 2, close - pos_ - 2);
        pos_ = close + 2;
        auto add_if = [&set](auto pred) {
            for (int b = 0; b < 128; ++b)
                if (pred(b)) set.set(static_cast<std::size_t>(b));
        };
        auto digit = [](int b) { return b >= '0' && b <= '9'; };
        auto upper = [](int b) { return b >= 'A' && b <= 'Z'; };
        auto lower = [](int b) { return b >= 'a' && b <= 'z'; };
        if (name == "digit") add_if(digit);
        else if (name == "upper") add_if(upper);
        else if (name == "lower") add_if(lower);
        else if (name == "alpha") add_if([&](int b) { return upper(b) || lower(b); });
        else if (name == "alnum") add_if([&](int b) { return upper(b) || lower(b) || digit(b); });
        else if (name == "xdigit")
            add_if([&](int b) { return digit(b) || (b >= 'a' && b <= 'f') || (b >= 'A' && b <= 'F'); });
        else if (name == "space") add_if([](int b) { return b == ' ' || (b >= '\t' && b <= '\r'); });
        else if (name == "blank") add_if([](int b) { return b == ' ' || b == '\t'; });
        else if (name == "punct")
            add_if([&](int b) { return b > 32 && b < 127 && !upper(b) && !lower(b) && !digit(b); });
        else if (name == "print") add_if([](int b) { return b >= 32 && b < 127; });
        else if (name == "cntrl") add_if([](int b) { return b < 32 || b == 127; });
        else fail("unknown character class [:" + std::string(name) + ":]");
    }

    NodePtr byte_node(std::uint8_t b) {
        auto node = make(Node::Kind::Byte);
        node->byte = b;
        return node;
    }

    NodePtr class_node(const std::bitset<256>& set) {
        auto node = make(Node::Kind::Class);
        node->cls = classes_.size();
        classes_.push_back(set);
        return node;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::vector<std::bitset<256>>& classes_;
};

using Inst = Regex::Inst;
using Op = Regex::Op;

class Compiler {
public:
    explicit Compiler(std::vector<Inst>& program) : program_(program) {}

    void emit(const Node& node) {
        switch (node.kind) {
        case Node::Kind::Empty:
            break;
        case Node::Kind::Byte:
            push({Op::Byte, node.byte});
            break;
        case Node::Kind::Class:
            push({Op::Class, 0, static_cast<std::uint32_t>(node.cls)});
            break;
        case Node::Kind::Begin:
            push({Op::AssertBegin});
            break;
        case Node::Kind::End:
            push({Op::AssertEnd});
            break;
        case Node::Kind::Concat:
            for (const auto& child : node.children) emit(*child);
            break;
        case Node::Kind::Alternate: {
            std::vector<std::size_t> exits;
            for (std::size_t i = 0; i < node.children.size(); ++i) {
                if (i + 1 < node.children.size()) {
                    const auto split = push({Op::Split});
                    program_[split].x = here();
                    emit(*node.children[i]);
                    exits.push_back(push({Op::Jump}));
                    program_[split].y = here();
                } else {
                    emit(*node.children[i]);
                }
            }
            for (auto e : exits) program_[e].x = here();
            break;
        }
        case Node::Kind::Repeat:
            repeat(*node.children.front(), node.min, node.max);
            break;
        }
    }

private:
    void repeat(const Node& body, int lo, int hi) {
        for (int i = 0; i < lo; ++i) emit(body);
        if (hi == -1) {
            // star loop
            const auto split = push({Op::Split});
            program_[split].x = here();
            emit(body);
            const auto back = push({Op::Jump});
            program_[back].x = static_cast<std::uint32_t>(split);
            program_[split].y = here();
            return;
        }
        std::vector<std::size_t> skips;
        for (int i = lo; i < hi; ++i) {
            const auto split = push({Op::Split});
            program_[split].x = here();
            skips.push_back(split);
            emit(body);
        }
        for (auto s : skips) program_[s].y = here();
    }

    std::uint32_t here() const { return static_cast<std::uint32_t>(program_.size()); }

    std::size_t push(Inst inst) {
        if (program_.size() >= kMaxProgramSize)
            throw Error(ErrorCode::InvalidPattern, "compiled pattern exceeds size limit");
        program_.push_back(inst);
        return program_.size() - 1;
    }

    std::vector<Inst>& program_;
};

// Sparse set of program counters, reused per input position.
class ThreadList {
public:
    explicit ThreadList(std::size_t n) : dense_(n), sparse_(n) {}

    bool contains(std::uint32_t pc) const {
        const auto i = sparse_[pc];
        return i < size_ && dense_[i] == pc;
    }
    void insert(std::uint32_t pc) {
        sparse_[pc] = static_cast<std::uint32_t>(size_);
        dense_[size_++] = pc;
    }
    void clear() { size_ = 0; }
    std::size_t size() const { return size_; }
    std::uint32_t operator[](std::size_t i) const { return dense_[i]; }

private:
    std::vector<std::uint32_t> dense_;
    std::vector<std::uint32_t> sparse_;
    std::size_t size_ = 0;
};

}  // namespace

Regex::Regex(std::string_view pattern) : pattern_(pattern) {
    Parser parser(pattern, classes_);
    auto root = parser.parse();
    Compiler compiler(program_);
    compiler.emit(*root);
    if (program_.size() >= kMaxProgramSize)
        throw Error(ErrorCode::InvalidPattern, "compiled pattern exceeds size limit");
    program_.push_back({Op::Match});
}

bool Regex::full_match(std::string_view subject) const {
    const std::size_t n = program_.size();
    ThreadList current(n);
    ThreadList next(n);
    std::vector<std::uint32_t> stack;

    // Follows epsilon edges from pc and records every reachable consuming state.
    auto add = [&](ThreadList& list, std::uint32_t pc, std::size_t pos) {
        stack.push_back(pc);
        while (!stack.empty()) {
            const auto p = stack.back();
            stack.pop_back();
            if (list.contains(p)) continue;
            list.insert(p);
            const auto& inst = program_[p];
            switch (inst.op) {
            case Op::Jump:
                stack.push_back(inst.x);
                break;
            case Op::Split:
                stack.push_back(inst.y);
                stack.push_back(inst.x);
                break;
            case Op::AssertBegin:
                if (pos == 0) stack.push_back(p + 1);
                break;
            case Op::AssertEnd:
                if (pos == subject.size()) stack.push_back(p + 1);
                break;
            default:
                break;
            }
        }
    };

    add(current, 0, 0);
    for (std::size_t pos = 0; pos < subject.size(); ++pos) {
        if (current.size() == 0) return false;
        const auto b = static_cast<std::uint8_t>(subject[pos]);
        next.clear();
        for (std::size_t i = 0; i < current.size(); ++i) {
            const auto pc = current[i];
            const auto& inst = program_[pc];
            const bool step = (inst.op == Op::Byte && inst.byte == b) ||
                              (inst.op == Op::Class && classes_[inst.x].test(b));
            if (step) add(next, pc + 1, pos + 1);
        }
        std::swap(current, next);
    }
    for (std::size_t i = 0; i < current.size(); ++i)
        if (program_[current[i]].op == Op::Match) return true;
    return false;
}

std::string decimal_at_most(std::uint64_t max_value) {
    const std::string digits = std::to_string(max_value);
    const std::size_t len = digits.size();
    auto range = [](char lo, char hi) -> std::string {
        if (lo == hi) return std::string(1, lo);
        return std::string("[") + lo + "-" + hi + "]";
    };
    auto any_digits = [](std::size_t count) -> std::string {
        if (count == 0) return "";
        if (count == 1) return "[0-9]";
        return "[0-9]{" + std::to_string(count) + "}";
    };

    std::vector<std::string> branches;
    // Shorter numbers are all below max_value.
    if (len > 1) branches.push_back("[0-9]");
    for (std::size_t k = 2; k < len; ++k) branches.push_back("[1-9]" + any_digits(k - 1));

    // Same length: share a prefix with max_value, then go strictly below at position i.
    for (std::size_t i = 0; i < len; ++i) {
        const char low = (i == 0 && len > 1) ? '1' : '0';
        if (digits[i] > low) {
            const char below = static_cast<char>(digits[i] - 1);
            branches.push_back(digits.substr(0, i) + range(low, below) + any_digits(len - i - 1));
        }
    }
    branches.push_back(digits);

    std::string out = "(";
    for (std::size_t i = 0; i < branches.size(); ++i) {
        if (i) out += '|';
        out += branches[i];
    }
    out += ')';
    return out;
}

std::string escape_literal(std::string_view text) {
    static constexpr std::string_view kSpecial = ".[]()|*+?{}^$\\";
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(text.size());
    for (const char c : text) {
        const auto b = static_cast<unsigned char>(c);
        if (c == '\n') {
            out += "\\n";
        } else if (b < 0x20 || b == 0x7f) {
            out += "\\x";
            out += kHex[b >> 4];
            out += kHex[b & 0xf];
        } else {
            if (kSpecial.find(c) != std::string_view::npos) out += '\\';
            out += c;
        }
    }
    return out;
}

}  // namespace fbac::re
