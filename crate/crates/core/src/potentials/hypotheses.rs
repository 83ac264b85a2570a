use serde::{Deserialize, Serialize};

use super::domain::{boundary_param_dim, ConvexDomain};
use super::potential::{Potential, Tangent};
use crate::directions::direction_grid;
use crate::error::{Error, Result};
use crate::point::{dist_sq, midpoint, norm_sq, Point};
use crate::sampling::{derive_seed, QmcStream};

/// Standing constants: domain ball radius `ρ`, Monge-Ampère bounds
/// `λ ≤ det D²φ ≤ Λ`, and the boundary quadratic separation constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub rho: f64,
    pub lambda: f64,
    pub big_lambda: f64,
    pub quadratic_separation_constant: f64,
}

impl Hypotheses {
    pub fn new(rho: f64, lambda: f64, big_lambda: f64, sep: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidConstant(format!("rho must lie in (0,1], got {rho}")));
        }
        if !(sep > 0.0 && sep <= 1.0) {
            return Err(Error::InvalidConstant(format!("separation constant must lie in (0,1], got {sep}")));
        }
        if !(lambda > 0.0 && lambda <= big_lambda) {
            return Err(Error::InvalidConstant(format!("need 0 < lambda <= Lambda, got {lambda}, {big_lambda}")));
        }
        Ok(Hypotheses { rho, lambda, big_lambda, quadratic_separation_constant: sep })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certification {
    /// Built-in instance; sampling confirms a closed-form argument.
    Analytic,
    /// User-supplied potential or domain; sampling only.
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the clause's statistic.
    pub value: f64,
    pub witness: Vec<Point>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub certification: Certification,
    pub clauses: Vec<Clause>,
    /// Min and max of `b(x,x₀)/|x−x₀|²` over sampled boundary pairs.
    pub separation_min: f64,
    pub separation_max: f64,
    pub passed: bool,
}

impl HypothesisReport {
    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

const REL_TOL: f64 = 1e-9;
const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-6;

fn sample_domain_points(omega: &dyn ConvexDomain, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = omega.dim();
    let bbox = omega.bounding_box();
    let s = QmcStream::new(n, seed);
    let mut out = Vec::with_capacity(count);
    let (mut u, mut p) = (vec![0.0; n], vec![0.0; n]);
    let mut i = 0u64;
    while out.len() < count && i < 64 * count as u64 + 64 {
        s.fill(i, &mut u);
        bbox.map_unit(&u, &mut p);
        if omega.contains_closed(&p) {
            out.push(p.clone());
        }
        i += 1;
    }
    out
}

fn sample_boundary(omega: &dyn ConvexDomain, count: usize, seed: u64) -> Vec<Point> {
    let s = QmcStream::new(boundary_param_dim(omega), seed);
    (0..count as u64).map(|i| omega.boundary_point(&s.point(i))).collect()
}

/// Samples every standing hypothesis and reports worst-case witnesses.
/// Failures are clauses of the report, never errors.
pub fn verify_hypotheses(
    phi: &dyn Potential,
    omega: &dyn ConvexDomain,
    hyp: &Hypotheses,
    budget: usize,
    seed: u64,
) -> HypothesisReport {
    let budget = budget.max(1);
    let n = omega.dim();
    let mut clauses = Vec::new();

    // midpoint convexity
    {
        let a = sample_domain_points(omega, budget, derive_seed(seed, &[1]));
        let b = sample_domain_points(omega, budget, derive_seed(seed, &[2]));
        let mut worst = f64::NEG_INFINITY;
        let mut witness = Vec::new();
        for (y, z) in a.iter().zip(&b) {
            let m = midpoint(y, z);
            let (fy, fz) = (phi.value(y), phi.value(z));
            let excess = phi.value(&m) - 0.5 * (fy + fz);
            let tol = 1e-12 * (1.0 + fy.abs() + fz.abs());
            if excess - tol > worst {
                worst = excess - tol;
                witness = vec![Point::from(y.clone()), Point::from(z.clone()), Point::from(m)];
            }
        }
        let passed = worst <= 0.0;
        clauses.push(Clause {
            name: "convexity".into(),
            passed,
            value: worst,
            witness: if passed { Vec::new() } else { witness },
            note: "φ((y+z)/2) ≤ (φ(y)+φ(z))/2 on sampled pairs".into(),
        });
    }

    let boundary = sample_boundary(omega, budget, derive_seed(seed, &[3]));

    // Ω ⊂ B_{1/ρ}
    {
        let limit = 1.0 / hyp.rho;
        let (mut worst, mut wit) = (0.0f64, None);
        for z in &boundary {
            let r = norm_sq(z).sqrt();
            if r > worst {
                worst = r;
                wit = Some(z.clone());
            }
        }
        let passed = worst <= limit * (1.0 + REL_TOL);
        clauses.push(Clause {
            name: "containment".into(),
            passed,
            value: worst,
            witness: if passed { Vec::new() } else { wit.into_iter().collect() },
            note: format!("max |z| over boundary samples vs 1/ρ = {limit}"),
        });
    }

    // interior ball around the inner point
    let sphere = direction_grid(n, 256);
    let ball_inside = |c: &[f64], r: f64| -> Option<Point> {
        let r = r * (1.0 - REL_TOL);
        sphere
            .iter()
            .map(|u| Point::from(c.iter().zip(u).map(|(a, b)| a + r * b).collect::<Vec<_>>()))
            .find(|p| !omega.contains_closed(p))
    };
    {
        let c = omega.inner_point();
        let bad = ball_inside(&c, hyp.rho);
        clauses.push(Clause {
            name: "inner_ball".into(),
            passed: bad.is_none(),
            value: if bad.is_none() { 0.0 } else { 1.0 },
            witness: bad.into_iter().collect(),
            note: format!("B_ρ(inner point) ⊂ Ω̄ with ρ = {}", hyp.rho),
        });
    }

    // tangent interior balls at sampled boundary points
    {
        let mut missing_normal = false;
        let mut bad = None;
        for z in boundary.iter().take(budget.min(512)) {
            match omega.inner_normal(z) {
                Some(nu) => {
                    let c: Vec<f64> = z.iter().zip(&nu).map(|(a, b)| a + hyp.rho * b).collect();
                    if let Some(p) = ball_inside(&c, hyp.rho) {
                        bad = Some(vec![z.clone(), p]);
                        break;
                    }
                }
                None => {
                    missing_normal = true;
                    break;
                }
            }
        }
        let (passed, note) = if missing_normal {
            (true, "no analytic normal: tangency at every boundary point is not certified".to_string())
        } else {
            (bad.is_none(), "B_ρ(z + ρν(z)) ⊂ Ω̄ at sampled boundary points".to_string())
        };
        clauses.push(Clause {
            name: "tangent_ball".into(),
            passed,
            value: if bad.is_none() { 0.0 } else { 1.0 },
            witness: bad.unwrap_or_default(),
            note,
        });
    }

    // quadratic separation on boundary pairs
    let (mut smin, mut smax) = (f64::INFINITY, f64::NEG_INFINITY);
    {
        let other = sample_boundary(omega, budget, derive_seed(seed, &[4]));
        let (mut wmin, mut wmax) = (Vec::new(), Vec::new());
        for (x0, x) in boundary.iter().zip(&other) {
            let d2 = dist_sq(x, x0);
            if d2 < 1e-12 {
                continue;
            }
            let r = Tangent::new(phi, x0).gap(x) / d2;
            if r < smin {
                smin = r;
                wmin = vec![x.clone(), x0.clone()];
            }
            if r > smax {
                smax = r;
                wmax = vec![x.clone(), x0.clone()];
            }
        }
        let rho = hyp.quadratic_separation_constant;
        let lo_ok = smin >= rho * (1.0 - REL_TOL);
        let hi_ok = smax <= (1.0 + REL_TOL) / rho;
        let mut witness = Vec::new();
        if !lo_ok {
            witness.extend(wmin);
        }
        if !hi_ok {
            witness.extend(wmax);
        }
        clauses.push(Clause {
            name: "quadratic_separation".into(),
            passed: lo_ok && hi_ok && smin.is_finite(),
            value: smin.min(1.0 / smax),
            witness,
            note: format!("b(x,x₀)/|x−x₀|² ∈ [{smin}, {smax}] vs [{rho}, {}]", 1.0 / rho),
        });
    }

    let interior = sample_domain_points(omega, budget.min(2048), derive_seed(seed, &[5]));

    // finite-difference gradient consistency
    {
        let mut worst = 0.0f64;
        let mut wit = None;
        let mut g = vec![0.0; n];
        for x in &interior {
            phi.gradient(x, &mut g);
            for i in 0..n {
                let h = FD_STEP * x[i].abs().max(1.0);
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[i] += h;
                xm[i] -= h;
                let fd = (phi.value(&xp) - phi.value(&xm)) / (2.0 * h);
                let err = (fd - g[i]).abs() / g[i].abs().max(1.0);
                if err > worst || err.is_nan() {
                    worst = if err.is_nan() { f64::INFINITY } else { err };
                    wit = Some(Point::from(x.clone()));
                }
            }
        }
        let passed = worst <= FD_TOL;
        clauses.push(Clause {
            name: "gradient_consistency".into(),
            passed,
            value: worst,
            witness: if passed { Vec::new() } else { wit.into_iter().collect() },
            note: format!("central differences, step {FD_STEP}, relative tolerance {FD_TOL}"),
        });
    }

    // Monge-Ampère bounds via differences of the analytic gradient
    if let Some((lam, big)) = phi.hessian_det_bounds() {
        let (mut dmin, mut dmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut wit = Vec::new();
        let (mut gp, mut gm) = (vec![0.0; n], vec![0.0; n]);
        for x in interior.iter().filter(|x| omega.contains_open(x)) {
            let mut h = nalgebra::DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                let s = FD_STEP * x[j].abs().max(1.0);
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[j] += s;
                xm[j] -= s;
                phi.gradient(&xp, &mut gp);
                phi.gradient(&xm, &mut gm);
                for i in 0..n {
                    h[(i, j)] = (gp[i] - gm[i]) / (2.0 * s);
                }
            }
            let d = (0.5 * (&h + h.transpose())).determinant();
            if d < dmin {
                dmin = d;
            }
            if d > dmax {
                dmax = d;
            }
            if d < lam * (1.0 - 1e-6) || d > big * (1.0 + 1e-6) {
                wit.push(Point::from(x.clone()));
            }
        }
        let within_claimed = wit.is_empty();
        let within_hyp = dmin >= hyp.lambda * (1.0 - 1e-6) && dmax <= hyp.big_lambda * (1.0 + 1e-6);
        wit.truncate(4);
        clauses.push(Clause {
            name: "monge_ampere_bounds".into(),
            passed: within_claimed && within_hyp,
            value: dmin,
            witness: wit,
            note: format!("det D²φ ∈ [{dmin}, {dmax}]; claimed [{lam}, {big}], assumed [{}, {}]", hyp.lambda, hyp.big_lambda),
        });
    }

    let certification = if phi.is_analytic() && omega.is_analytic() {
        Certification::Analytic
    } else {
        Certification::Empirical
    };
    let passed = clauses.iter().all(|c| c.passed);
    HypothesisReport { certification, clauses, separation_min: smin, separation_max: smax, passed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{AxisEllipsoid, FnPotential, Quadratic, QuarticPerturbed};

    #[test]
    fn quadratic_ball_passes_with_unit_separation() {
        let phi = Quadratic::isotropic(2);
        let omega = AxisEllipsoid::unit_ball(2);
        let hyp = Hypotheses::new(1.0, 4.0, 4.0, 1.0).unwrap();
        let r = verify_hypotheses(&phi, &omega, &hyp, 2000, 1);
        assert!(r.passed, "{:#?}", r.clauses);
        assert!((r.separation_min - 1.0).abs() < 1e-9);
        assert!((r.separation_max - 1.0).abs() < 1e-9);
        assert_eq!(r.certification, Certification::Analytic);
    }

    #[test]
    fn concave_function_fails_convexity() {
        let phi = Quadratic::diagonal("concave", &[-1.0, -1.0]);
        let omega = AxisEllipsoid::unit_ball(2);
        let hyp = Hypotheses::new(1.0, 4.0, 4.0, 1.0).unwrap();
        let r = verify_hypotheses(&phi, &omega, &hyp, 500, 1);
        let c = r.clause("convexity").unwrap();
        assert!(!c.passed);
        assert_eq!(c.witness.len(), 3);
        // the witness midpoint really violates the inequality
        let (y, z, m) = (&c.witness[0], &c.witness[1], &c.witness[2]);
        assert!(phi.value(m) > 0.5 * (phi.value(y) + phi.value(z)));
        assert!(!r.passed);
    }

    #[test]
    fn quartic_separation_range() {
        let phi = QuarticPerturbed::new(2, 0.1).unwrap();
        let omega = AxisEllipsoid::unit_ball(2);
        let hyp = Hypotheses::new(1.0, 4.0, 4.0 * 1.6, 1.0 / 1.6).unwrap();
        let r = verify_hypotheses(&phi, &omega, &hyp, 4000, 3);
        assert!(r.passed, "{:#?}", r.clauses);
        assert!(r.separation_min >= 1.0 - 1e-12);
        assert!(r.separation_max <= 1.2);
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let phi = FnPotential::new(
            "bad_grad",
            2,
            |x| x[0] * x[0] + x[1] * x[1],
            |x, g| {
                g[0] = 2.0 * x[0];
                g[1] = 3.0 * x[1];
            },
        );
        let omega = AxisEllipsoid::unit_ball(2);
        let hyp = Hypotheses::new(1.0, 4.0, 4.0, 1.0).unwrap();
        let r = verify_hypotheses(&phi, &omega, &hyp, 200, 1);
        assert!(!r.clause("gradient_consistency").unwrap().passed);
        assert_eq!(r.certification, Certification::Empirical);
    }

    #[test]
    fn hypotheses_validation() {
        assert!(Hypotheses::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(Hypotheses::new(1.5, 1.0, 1.0, 1.0).is_err());
        assert!(Hypotheses::new(1.0, 2.0, 1.0, 1.0).is_err());
    }
}
