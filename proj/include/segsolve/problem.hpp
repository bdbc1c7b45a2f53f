#ifndef SEGSOLVE_PROBLEM_HPP
#define SEGSOLVE_PROBLEM_HPP

#include <memory>
#include <optional>
#include <vector>

#include "segsolve/grid.hpp"

namespace segsolve {

enum class ReactionKind { zero, linear, concave_quadratic, logistic, capped_linear };

/// Closed set of reaction terms with exact antiderivatives.
/// Evaluation at s<0 uses the odd extension f(-s) = -f(s); potentials are even.
///   zero:              f(s) = 0
///   linear(l):         f(s) = l*s
///   concave_quadratic: f(s) = -2*c*s          (F(s) = -c*s^2, concave)
///   logistic(a):       f(s) = s*(a-s) on [0,a], 0 beyond (keeps the global Lipschitz bound)
///   capped_linear(l):  f(s) = min(l*s, s^(1/3))
class ReactionTerm {
public:
    static ReactionTerm zero();
    static ReactionTerm linear(double lambda);
    static ReactionTerm concave_quadratic(double c);
    static ReactionTerm logistic(double a);
    static ReactionTerm capped_linear(double lambda);

    double eval(double s) const;
    double potential(double s) const;

    double lipschitz_bound() const { return lipschitz_; }
    double growth_bound() const { return growth_; }
    /// sup over s of d2F/ds2, as the uniqueness corollary requires.
    double curvature_sup() const { return curvature_; }
    /// f'(0); for the linear kinds this is the whole reaction.
    double linear_part() const { return linear_part_; }
    bool is_linear() const {
        return kind_ == ReactionKind::zero || kind_ == ReactionKind::linear ||
               kind_ == ReactionKind::concave_quadratic;
    }

    ReactionKind kind() const { return kind_; }
    double param() const { return param_; }

private:
    ReactionTerm(ReactionKind k, double p);
    ReactionKind kind_ = ReactionKind::zero;
    double param_ = 0;
    double lipschitz_ = 0, growth_ = 0, curvature_ = 0, linear_part_ = 0;
};

double reaction_eval(const ReactionTerm& t, double s);
double potential_eval(const ReactionTerm& t, double s);

/// Node data attached to reactions produced by rescale_to_unit_diffusion.
struct RescaleNodeData {
    Field d;            // original diffusion values
    Field lap_over_d;   // discrete laplacian of d divided by d (interior value copied to rim)
};

/// A reaction as the energy sees it: a base term, optionally composed with the
/// variable-diffusion substitution u = v/d (which adds a -(lap d/d) v linear term).
class Reaction {
public:
    Reaction() : base_(ReactionTerm::zero()) {}
    explicit Reaction(ReactionTerm t) : base_(t) {}
    Reaction(ReactionTerm t, std::shared_ptr<const RescaleNodeData> r)
        : base_(t), rescale_(std::move(r)) {}

    double eval(int node, double s) const;
    double potential(int node, double s) const;
    double growth_at(int node) const;
    double linear_part_at(int node) const;
    bool is_linear() const { return base_.is_linear(); }
    bool is_plain() const { return rescale_ == nullptr; }
    const ReactionTerm& term() const { return base_; }
    const RescaleNodeData* rescale_data() const { return rescale_.get(); }

private:
    ReactionTerm base_;
    std::shared_ptr<const RescaleNodeData> rescale_;
};

class Diffusion {
public:
    static Diffusion constant(double d);
    static Diffusion nodal(Field values);

    bool is_constant() const { return !nodal_.has_value(); }
    double constant_value() const { return c_; }
    double at(int node) const { return nodal_ ? (*nodal_)[node] : c_; }
    const Field& nodal_values() const { return *nodal_; }
    void validate_positive(const Grid& g) const;

private:
    double c_ = 1.0;
    std::optional<Field> nodal_;
};

/// Per-density boundary traces; values live at boundary nodes, 0 elsewhere.
struct BoundaryData {
    std::vector<Field> phi;
    int k() const { return static_cast<int>(phi.size()); }
};

struct AdmissibilityIssue {
    enum Kind { negative, overlap };
    Kind kind;
    int node;
    int i, j;       // densities involved (j = -1 for negativity)
    double value;   // offending value (negative trace or product)
};

struct AdmissibilityReport {
    std::vector<AdmissibilityIssue> issues;
    bool admissible() const { return issues.empty(); }
};

AdmissibilityReport validate_admissible(const Grid& g, const BoundaryData& bd, double tol);

struct Tolerances {
    double segregation_tol = -1.0;  // <0: 10*h*max(phi), resolved by Problem::segregation_tol()
    double residual_tol = 1e-6;
};

struct Problem {
    Grid grid;
    int k = 0;
    std::vector<Reaction> reactions;
    std::vector<Diffusion> diffusions;
    BoundaryData boundary;
    Tolerances tol;

    void validate() const;
    double max_boundary_value() const;
    double segregation_tol() const;
    bool unit_diffusion() const;
};

struct CoercivityResult {
    bool holds = false;
    double min_eigenvalue = 0;
    int iterations = 0;
};

/// Smallest eigenvalue of w -> sum d_i^2 |grad w|^2 - b_i w^2 over fields vanishing on
/// the boundary, by inverse power iteration with a safe negative shift. holds = (mu > 0).
CoercivityResult check_coercivity(const Problem& p, int i);

struct StateMaps;  // defined in segregation.hpp consumers; fwd decl not needed here

struct RescaledProblem {
    Problem problem;                 // d == 1, transformed reactions
    std::vector<Field> d_values;     // per density, original d on the grid
    double additive_constant = 0;    // boundary term of the change of variables
    Field forward(const Field& u, int i) const;   // v = d*u
    Field backward(const Field& v, int i) const;  // u = v/d
};

RescaledProblem rescale_to_unit_diffusion(const Problem& p);

struct UniquenessCondition {
    bool holds = false;
    Field residual;  // min over densities of the tested left-hand side, at interior nodes
};

/// Tests the supersolution condition -lap d + (lap d_i/d_i - b_i/(2 d_i^2)) d >= 0
/// node-wise for every density, with b_i the curvature sup of F_i.
UniquenessCondition uniqueness_condition_check(const Problem& p, const Field& d_candidate);

}  // namespace segsolve

#endif
