#include "hypwalk/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "hypwalk/errors.hpp"

namespace hypwalk {

namespace {

struct Key4 {
    std::array<int64_t, 4> k;
    bool operator==(const Key4& o) const { return k == o.k; }
};

struct Key4Hash {
    size_t operator()(const Key4& key) const {
        uint64_t h = 1469598103934665603ULL;
        for (int64_t v : key.k) {
            h ^= static_cast<uint64_t>(v);
            h *= 1099511628211ULL;
        }
        return static_cast<size_t>(h);
    }
};

// Accumulates (element, mass) pairs with canonical dedup for either backend.
class Accumulator {
public:
    Accumulator(Backend backend, size_t cap) : backend_(backend), cap_(cap) {}

    void add(const GroupElement& g, double mass) {
        if (backend_ == Backend::tree) {
            auto [it, inserted] = tree_.try_emplace(g.word, tree_.size());
            if (inserted) {
                atoms_.push_back(g);
                masses_.push_back(0.0);
            }
            masses_[it->second] += mass;
        } else {
            Key4 key{g.mat.quantizedKey()};
            auto [it, inserted] = mat_.try_emplace(key, mat_.size());
            if (inserted) {
                atoms_.push_back(g);
                masses_.push_back(0.0);
            } else if (!atoms_[it->second].mat.approxEq(g.mat, 1e-9)) {
                throw ResourceLimit("matrix quantization collision at 1e-9: " +
                                    atoms_[it->second].mat.str() + " vs " + g.mat.str());
            }
            masses_[it->second] += mass;
        }
        if (atoms_.size() > cap_)
            throw ResourceLimit("convolution support exceeds cap " + std::to_string(cap_) +
                                "; use the radial route for long horizons");
    }

    std::vector<GroupElement> takeAtoms() { return std::move(atoms_); }
    std::vector<double> takeMasses() { return std::move(masses_); }

private:
    Backend backend_;
    size_t cap_;
    std::unordered_map<Word, size_t, WordHash> tree_;
    std::unordered_map<Key4, size_t, Key4Hash> mat_;
    std::vector<GroupElement> atoms_;
    std::vector<double> masses_;
};

double neumaierSum(const std::vector<double>& xs) {
    double s = 0.0, comp = 0.0;
    for (double x : xs) {
        double t = s + x;
        comp += std::fabs(s) >= std::fabs(x) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    return s + comp;
}

}  // namespace

FiniteMeasure::FiniteMeasure(const SpaceModel& model, std::vector<GroupElement> atoms,
                             std::vector<double> masses) {
    if (atoms.size() != masses.size()) throw Error("atom/mass list length mismatch");
    if (atoms.empty()) throw Error("measure needs at least one atom");
    backend_ = model.backend();
    Accumulator acc(backend_, kDefaultSupportCap);
    for (size_t i = 0; i < atoms.size(); ++i) {
        if (atoms[i].backend != backend_)
            throw BackendMismatch("measure atom backend mismatch");
        if (!(masses[i] > 0)) throw Error("measure masses must be strictly positive");
        acc.add(atoms[i], masses[i]);
    }
    atoms_ = acc.takeAtoms();
    masses_ = acc.takeMasses();

    std::vector<size_t> order(atoms_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (backend_ == Backend::tree) {
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return atoms_[a].word < atoms_[b].word; });
    } else {
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return atoms_[a].mat.quantizedKey() < atoms_[b].mat.quantizedKey();
        });
    }
    std::vector<GroupElement> sorted_atoms;
    std::vector<double> sorted_masses;
    sorted_atoms.reserve(order.size());
    sorted_masses.reserve(order.size());
    for (size_t i : order) {
        sorted_atoms.push_back(std::move(atoms_[i]));
        sorted_masses.push_back(masses_[i]);
    }
    atoms_ = std::move(sorted_atoms);
    masses_ = std::move(sorted_masses);

    double total = neumaierSum(masses_);
    if (std::fabs(total - 1.0) > 1e-12)
        throw Error("measure masses sum to " + std::to_string(total) + ", expected 1");

    symmetric_ = true;
    for (size_t i = 0; i < atoms_.size() && symmetric_; ++i) {
        GroupElement inv = model.inverse(atoms_[i]);
        double m_inv = massOf(model, inv);
        if (std::fabs(m_inv - masses_[i]) > 1e-12) symmetric_ = false;
    }
}

double FiniteMeasure::massOf(const SpaceModel& model, const GroupElement& g) const {
    if (backend_ == Backend::tree) {
        for (size_t i = 0; i < atoms_.size(); ++i)
            if (atoms_[i].word == g.word) return masses_[i];
        return 0.0;
    }
    (void)model;
    for (size_t i = 0; i < atoms_.size(); ++i)
        if (atoms_[i].mat.approxEq(g.mat, 1e-9)) return masses_[i];
    return 0.0;
}

double FiniteMeasure::entropy() const {
    double h = 0.0;
    for (double m : masses_) h -= m * std::log(m);
    return h;
}

double FiniteMeasure::firstMoment(const SpaceModel& model) const {
    SpacePoint o = model.basepoint();
    double s = 0.0;
    for (size_t i = 0; i < atoms_.size(); ++i)
        s += masses_[i] * model.distance(o, model.orbitPoint(atoms_[i]));
    return s;
}

double FiniteMeasure::maxStepLength(const SpaceModel& model) const {
    SpacePoint o = model.basepoint();
    double m = 0.0;
    for (const auto& g : atoms_) m = std::max(m, model.distance(o, model.orbitPoint(g)));
    return m;
}

std::string FiniteMeasure::str(const SpaceModel& model) const {
    std::ostringstream os;
    os << "{";
    for (size_t i = 0; i < atoms_.size(); ++i) {
        if (i) os << ", ";
        os << model.formatElement(atoms_[i]) << ": " << masses_[i];
    }
    os << "}";
    return os.str();
}

FiniteMeasure convolve(const SpaceModel& model, const FiniteMeasure& m1,
                       const FiniteMeasure& m2, size_t support_cap) {
    if (m1.backend() != model.backend() || m2.backend() != model.backend())
        throw BackendMismatch("convolve backend mismatch");
    Accumulator acc(model.backend(), support_cap);
    for (size_t i = 0; i < m1.size(); ++i) {
        for (size_t j = 0; j < m2.size(); ++j) {
            acc.add(model.multiply(m1.atom(i), m2.atom(j)), m1.mass(i) * m2.mass(j));
        }
    }
    return FiniteMeasure(model, acc.takeAtoms(), acc.takeMasses());
}

MuKFamily::MuKFamily(const SpaceModel& model, FiniteMeasure base, GroupElement gamma0)
    : base_(std::move(base)), gamma0_(std::move(gamma0)) {
    auto cls = model.classify(gamma0_);
    if (!cls.hyperbolic)
        throw Error("mu_k family requires a hyperbolic gamma0, got " +
                    model.formatElement(gamma0_));
    plus_ = cls.plus;
    minus_ = cls.minus;

    // Partial semigroup-generation check: products of support atoms and their
    // inverses must reach every element in the radius-2 ball of the
    // generating set.
    std::vector<GroupElement> seeds;
    for (size_t i = 0; i < base_.size(); ++i) {
        seeds.push_back(base_.atom(i));
        seeds.push_back(model.inverse(base_.atom(i)));
    }
    std::vector<GroupElement> targets{model.identity()};
    for (const auto& g : model.generators()) {
        targets.push_back(g);
        for (const auto& h : model.generators()) targets.push_back(model.multiply(g, h));
    }
    auto keyOf = [&](const GroupElement& g) -> std::string {
        if (model.backend() == Backend::tree) {
            const auto& ls = g.word.letters();
            return std::string(reinterpret_cast<const char*>(ls.data()),
                               ls.size() * sizeof(Letter));
        }
        auto k4 = g.mat.quantizedKey();
        return std::string(reinterpret_cast<const char*>(k4.data()), sizeof(k4));
    };
    std::unordered_set<std::string> reached{keyOf(model.identity())};
    std::vector<GroupElement> frontier{model.identity()};
    const int max_depth = 6;
    const size_t max_reached = 50000;
    for (int depth = 0; depth < max_depth && reached.size() < max_reached; ++depth) {
        std::vector<GroupElement> next;
        for (const auto& f : frontier) {
            for (const auto& s : seeds) {
                GroupElement p = model.multiply(f, s);
                if (reached.insert(keyOf(p)).second) {
                    next.push_back(std::move(p));
                    if (reached.size() >= max_reached) break;
                }
            }
            if (reached.size() >= max_reached) break;
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    for (const auto& t : targets) {
        if (!reached.count(keyOf(t)))
            throw Error("support does not reach the radius-2 generator ball: missing " +
                        model.formatElement(t));
    }
}

FiniteMeasure MuKFamily::makeMuK(const SpaceModel& model, long long k) const {
    if (k < 0) throw Error("mu_k index must be >= 0");
    std::vector<GroupElement> atoms;
    std::vector<double> masses;
    for (size_t i = 0; i < base_.size(); ++i) {
        atoms.push_back(base_.atom(i));
        masses.push_back(0.5 * base_.mass(i));
    }
    atoms.push_back(model.power(gamma0_, k));
    masses.push_back(0.25);
    atoms.push_back(model.power(gamma0_, -k));
    masses.push_back(0.25);
    return FiniteMeasure(model, std::move(atoms), std::move(masses));
}

SpacePoint MuKFamily::gammaK(const SpaceModel& model, long long k) const {
    return model.orbitPoint(model.power(gamma0_, k));
}

}  // namespace hypwalk
