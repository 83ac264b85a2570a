//! Names, citations and descriptions of the runnable checks, in
//! execution order.

pub struct CheckInfo {
    pub name: &'static str,
    /// The statement being checked.
    pub citation: &'static str,
    pub description: &'static str,
}

pub const CHECKS: [CheckInfo; 11] = [
    CheckInfo {
        name: "hypotheses",
        citation: "standing hypotheses: interior ball of radius ρ, 0 < λ ≤ det D²φ ≤ Λ, quadratic separation ρ|x−x₀|² ≤ b(x,x₀) ≤ ρ⁻¹|x−x₀|² on ∂Ω",
        description: "Samples midpoint convexity, Ω ⊂ B_{1/ρ}, the inner ball, the Hessian-determinant bounds, a finite-difference gradient check and boundary quadratic separation; reports worst witnesses per clause.",
    },
    CheckInfo {
        name: "global_height",
        citation: "global height: S(x₀, M) ⊃ Ω̄ for every x₀ ∈ Ω̄",
        description: "M_emp = sup of b(x, x₀) over sampled pairs, refined by hill-climbing. Every other height in the run must lie in (0, M_emp].",
    },
    CheckInfo {
        name: "engulfing",
        citation: "engulfing property: y ∈ S(x,t) implies S(x,t) ⊂ S(y, θ∗t); two-step form S(y,t) ⊂ S(x, θ∗²t)",
        description: "θ_emp = max b(z,y)/t over a stratified sweep of sections with y, z in S(x,t), climbed on the section boundary. Asserts θ_emp ≥ 1, stability under a larger budget, and the two-step inclusion with θ_emp².",
    },
    CheckInfo {
        name: "separating",
        citation: "separating property: y ∉ S(x,t) implies S(y, t/θ²) ∩ S(x, t/θ²) = ∅, equivalent to engulfing with constant θ²",
        description: "Searches for common points of the shrunk sections with θ = θ_emp² (any witness fails), reports the smallest passing θ on the 2^{k/8} grid and the θ = 1 control.",
    },
    CheckInfo {
        name: "dichotomy",
        citation: "dichotomy: S(x₀, 2t₀) is interior or lies in a boundary section S(z, c t₀) of comparable height",
        description: "Classifies a stratified sweep; Boundary entries report c_emp = sup b(y,z)/t₀ over S(x₀,2t₀) with z the tangency point of the maximal interior section. Asserts full coverage and finite c_emp; reports stability.",
    },
    CheckInfo {
        name: "volume_growth",
        citation: "volume growth: C₁ t^{n/2} ≤ |S(x,t)| ≤ C₂ t^{n/2} for small t",
        description: "Hit-or-miss section volumes for interior, near-boundary and boundary centers; C₁_emp, C₂_emp and per-center log-log exponents, asserted within tolerance of n/2.",
    },
    CheckInfo {
        name: "localization",
        citation: "localization: kE_h ∩ Ω̄ ⊂ S(h) ⊂ k⁻¹E_h for an ellipsoid E_h of volume ω_n h^{n/2} given by a sliding map",
        description: "Normalizes boundary base points, fits E_h as the volume-normalized John ellipsoid of the section and reports k_lo, k_hi and the slide residual. Reported only.",
    },
    CheckInfo {
        name: "covering_lemma",
        citation: "Besicovitch-type covering: generations M/2^{k+1} < t ≤ M/2^k, centers covered, selected centers outside earlier sections, S(x_k, t_k/α) disjoint, overlap of S(x_k, (1−ε)t_k) at most K log(1/ε)",
        description: "Greedy selection on random families; hard assertions for coverage, selection order, generation heights and probed disjointness with α = 2θ_emp²; the mean overlap profile is fitted to a + b log(1/ε).",
    },
    CheckInfo {
        name: "covering_theorem",
        citation: "density covering: if |S(x,t_x) ∩ O| = ε|S(x,t_x)| for x ∈ O then |O| ≤ √ε |⋃ S(x_k, t_k)|",
        description: "Finds t_x by bisection of the density ratio, selects a subfamily and checks coverage of O and the volume inequality, reporting the slack.",
    },
    CheckInfo {
        name: "maximal",
        citation: "maximal function M(f)(x) = sup_t average of |f| over S(x,t): weak type 1-1 and strong type p-p",
        description: "Evaluates M f on a dyadic height grid up to M_emp for each test function; reports weak and strong constants and their change under a larger budget, and asserts M f ≥ ‖f‖₁/|Ω|.",
    },
    CheckInfo {
        name: "quasimetric",
        citation: "quasi-distance d(x,y) = inf{r > 0 : x ∈ S(y,r), y ∈ S(x,r)}; d(x,y) ≤ θ∗²[d(x,z) + d(z,y)]; S(x, r/(2θ∗²)) ⊂ B_d(x,r) ⊂ S(x,r); doubling",
        description: "Checks the closed form against bisection, then certifies symmetry, identity, positivity, K_emp ≤ θ_emp², the ball sandwich and finite doubling constants.",
    },
];

pub fn find(name: &str) -> Option<&'static CheckInfo> {
    CHECKS.iter().find(|c| c.name == name)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    CHECKS.iter().map(|c| c.name)
}
