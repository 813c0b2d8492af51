//! Branch counting at a singular point by a chain of quadratic transforms.
//!
//! The input is a bivariate polynomial (variables in slots 0 and 1, slot 2
//! unused) with the point of interest at the origin.  Each step inspects
//! the tangent cone and either
//!
//!   * stops: a smooth point is one branch, and a squarefree cone of degree
//!     m splits into m distinct tangent lines over the closure, hence m
//!     branches;
//!   * divides out an axis: if one variable does not divide the cone, the
//!     transform along it is admissible and branch counting localizes at
//!     the points of the exceptional line, which are the tangent slopes;
//!   * shears first: a cone that is a power of a single linear form in both
//!     variables is straightened onto an axis, and the shear constant is
//!     recorded — these constants are the β's of the chain.

use crate::gf::{poly_roots, Felt};
use crate::mpoly::{binary_form_squarefree, MPoly};

use super::CurveError;

/// One step of the resolution chain, for reporting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainStep {
    /// f(v0, v0·v1) / v0^m — exceptional line v0 = 0
    DivideFirstAxis { mult: u32 },
    /// f(v0·v1, v1) / v1^m — exceptional line v1 = 0
    DivideSecondAxis { mult: u32 },
    /// v0 ↦ v0 + β·v1 straightening the unique tangent onto v0 = 0
    Shear { beta: Felt },
    /// recursion moved to the exceptional point with the given slope
    Recenter { slope: Felt },
    /// terminal: smooth point
    Smooth,
    /// terminal: cone with the given number of distinct tangents, all simple
    SplitCone { branches: u32 },
}

/// The recorded resolution chain at one point.
#[derive(Clone, Debug, Default)]
pub struct BranchChain {
    pub steps: Vec<ChainStep>,
    /// the shear constants, in order of appearance
    pub shifts: Vec<Felt>,
}

/// Number of branches of `f` centered at the origin, recording the chain.
/// `max_steps` bounds the number of quadratic transforms.
pub fn branch_count(f: &MPoly, max_steps: u32) -> Result<(u32, BranchChain), CurveError> {
    let mut chain = BranchChain::default();
    let mut budget = max_steps;
    let n = branches_rec(f, &mut budget, max_steps, &mut chain)?;
    Ok((n, chain))
}

/// The coefficient vector of cone(T, 1) as a univariate in T: entry i is
/// the coefficient of v0^i v1^{m−i}.
fn cone_univariate(cone: &MPoly, m: u32) -> Vec<Felt> {
    let ctx = cone.ctx().clone();
    let mut u = vec![ctx.zero(); m as usize + 1];
    for (e, c) in cone.terms() {
        debug_assert_eq!(e[0] + e[1], m);
        u[e[0] as usize] = c;
    }
    u
}

/// Distinct roots of a dense univariate with their multiplicities, plus the
/// degree of the non-splitting remainder factor and whether that remainder
/// is squarefree.
fn root_multiplicities(
    coeffs: &[Felt],
) -> Result<(Vec<(Felt, u32)>, u32, bool), CurveError> {
    let ctx = coeffs[0].ctx().clone();
    let mut work: Vec<Felt> = coeffs.to_vec();
    while let Some(last) = work.last() {
        if last.is_zero() && work.len() > 1 {
            work.pop();
        } else {
            break;
        }
    }
    let roots = poly_roots(&ctx, &work)?;
    let mut out = Vec::new();
    for r in roots {
        let mut mult = 0u32;
        // synthetic division while the root persists
        loop {
            // evaluate
            let mut val = ctx.zero();
            for c in work.iter().rev() {
                val = &(&val * &r) + c;
            }
            if !val.is_zero() {
                break;
            }
            // divide by (T - r)
            let mut quo = vec![ctx.zero(); work.len() - 1];
            let mut carry = ctx.zero();
            for i in (0..work.len() - 1).rev() {
                carry = &work[i + 1] + &(&carry * &r);
                quo[i] = carry.clone();
            }
            work = quo;
            mult += 1;
            if work.len() == 1 {
                break;
            }
        }
        out.push((r, mult));
    }
    let rem_deg = (work.len() - 1) as u32;
    let rem_squarefree = if rem_deg == 0 {
        true
    } else {
        univ_squarefree(&work)
    };
    Ok((out, rem_deg, rem_squarefree))
}

/// gcd(f, f') is constant and f is not a p-th power.
fn univ_squarefree(f: &[Felt]) -> bool {
    let ctx = f[0].ctx().clone();
    let der = crate::mpoly::uderiv(&ctx, f);
    if der.is_empty() {
        return false; // p-th power
    }
    crate::mpoly::ugcd(f, &der).len() == 1
}

fn branches_rec(
    f: &MPoly,
    budget: &mut u32,
    max_steps: u32,
    chain: &mut BranchChain,
) -> Result<u32, CurveError> {
    let ctx = f.ctx().clone();
    let m = match f.min_total_degree() {
        Some(m) => m,
        None => {
            return Err(CurveError::UnresolvedSingularity(
                "polynomial vanished during the chain".into(),
            ))
        }
    };
    if m == 0 {
        return Err(CurveError::PointNotOnCurve);
    }
    if m == 1 {
        chain.steps.push(ChainStep::Smooth);
        return Ok(1);
    }
    let cone = f.homogeneous_part(m);
    if binary_form_squarefree(&cone, 0, 1) {
        chain.steps.push(ChainStep::SplitCone { branches: m });
        return Ok(m);
    }

    if *budget == 0 {
        return Err(CurveError::ChainBudgetExceeded(max_steps));
    }
    *budget -= 1;

    let v0_divides = cone.terms().all(|(e, _)| e[0] >= 1);
    let v1_divides = cone.terms().all(|(e, _)| e[1] >= 1);

    // cone = c (v0 − β v1)^m with β ≠ 0: shear the tangent onto v0 = 0 and
    // record β, then fall through to the pure-v0 transform.
    let mut work = f.clone();
    let mut cone_w = cone.clone();
    if !v0_divides && !v1_divides {
        let u = cone_univariate(&cone_w, m);
        let (roots, rem_deg, _) = root_multiplicities(&u)?;
        if roots.len() == 1 && roots[0].1 == m && rem_deg == 0 {
            let beta = roots[0].0.clone();
            chain.steps.push(ChainStep::Shear { beta: beta.clone() });
            chain.shifts.push(beta.clone());
            work = work.shear(0, 1, &beta);
            cone_w = work.homogeneous_part(m);
        }
    }
    let v0_div_w = cone_w.terms().all(|(e, _)| e[0] >= 1);
    let v1_div_w = cone_w.terms().all(|(e, _)| e[1] >= 1);

    if !v0_div_w {
        // f(v0, v0 v1)/v0^m; exceptional points (0, s), cone_w(1, s) = 0
        chain.steps.push(ChainStep::DivideFirstAxis { mult: m });
        let fnext = work.quad_transform(0, 1, m);
        // slopes: univariate in s with coefficient of s^{m-i} = coeff of v0^i
        let u = cone_univariate(&cone_w, m);
        let rev: Vec<Felt> = u.into_iter().rev().collect();
        recurse_over_slopes(&fnext, &rev, 1, budget, max_steps, chain)
    } else if !v1_div_w {
        // f(v0 v1, v1)/v1^m; exceptional points (s, 0), cone_w(s, 1) = 0
        chain.steps.push(ChainStep::DivideSecondAxis { mult: m });
        let fnext = work.quad_transform(1, 0, m);
        let u = cone_univariate(&cone_w, m);
        recurse_over_slopes(&fnext, &u, 0, budget, max_steps, chain)
    } else {
        // both axes divide the (sheared) cone: mixed cone with tangents on
        // both axes — straighten by a generic shear v0 ↦ v0 + c v1
        let mut chosen: Option<Felt> = None;
        for cand in ctx.elements() {
            let u = cone_univariate(&cone_w, m);
            let mut val = ctx.zero();
            for c in u.iter().rev() {
                val = &(&val * &cand) + c;
            }
            if !val.is_zero() {
                chosen = Some(cand);
                break;
            }
        }
        let c = chosen.ok_or(CurveError::UnclassifiedCone)?;
        chain.steps.push(ChainStep::Shear { beta: c.clone() });
        chain.shifts.push(c.clone());
        let sheared = work.shear(0, 1, &c);
        branches_rec(&sheared, budget, max_steps, chain)
    }
}

/// Sum branch counts over the exceptional points of one transform.
/// `slope_poly` is the univariate whose roots are the slopes, `var` is the
/// coordinate of the exceptional line that varies.
fn recurse_over_slopes(
    fnext: &MPoly,
    slope_poly: &[Felt],
    var: usize,
    budget: &mut u32,
    max_steps: u32,
    chain: &mut BranchChain,
) -> Result<u32, CurveError> {
    let (roots, rem_deg, rem_sf) = root_multiplicities(slope_poly)?;
    let mut total = 0u32;
    for (slope, mult) in roots {
        if mult == 1 {
            // a simple tangent direction carries exactly one branch
            total += 1;
            continue;
        }
        if !slope.is_zero() {
            chain.steps.push(ChainStep::Recenter { slope: slope.clone() });
        }
        let moved = if slope.is_zero() {
            fnext.clone()
        } else {
            fnext.translate_var(var, &slope)
        };
        total += branches_rec(&moved, budget, max_steps, chain)?;
    }
    if rem_deg > 0 {
        if rem_sf {
            // conjugate simple directions outside the working field:
            // one branch each
            total += rem_deg;
        } else {
            return Err(CurveError::UnresolvedSingularity(
                "repeated tangent direction outside the working field".into(),
            ));
        }
    }
    Ok(total)
}

/// Closed forms for the first two shear constants of the chain at an
/// infinite point (1:ξ:0), for cross-checking the recorded shifts:
///
/// β₁^{q^t} = −F(λ)(ξ^{q^{k−t}}−ξ)^{q^t} / (λ^{q^t} δ)
///
/// β₂^{q^{2t}} = F(λ)^{q^t−1}(ξ^{q^{k−t}}−ξ)^{q^t(q^t−1)}
///               · [λ^{q^t(q^t+1)} δ (ξ^{q^k}−ξ)^{q^t} − F(λ)^{q^t+1}(ξ^{q^{k−t}}−ξ)^{q^t}]
///               / (λ^{2q^{2t}} δ^{2q^t})
pub fn beta_closed_forms(inst: &super::CurveInstance, xi: &Felt) -> (Felt, Felt) {
    let t = inst.t as i64;
    let k = inst.k as i64;
    let qt = inst.qp(inst.t) as i64;
    let lam = &inst.lambda;
    let delta = &inst.delta;
    let f_lam = inst.f_poly.eval(lam);
    let a = (&xi.frobenius(k - t) - xi).frobenius(t);
    let b1_qt = -&(&(&f_lam * &a) / &(&lam.frobenius(t) * delta));
    let beta1 = b1_qt.frobenius(-t);

    let num = &(&f_lam.pow(qt - 1) * &a.pow(qt - 1))
        * &(&(&(&lam.pow(qt * (qt + 1)) * delta) * &(&xi.frobenius(k) - xi).pow(qt))
            - &(&f_lam.pow(qt + 1) * &a));
    let den = &lam.frobenius(2 * t).pow(2) * &delta.frobenius(t).pow(2);
    let beta2 = (&num / &den).frobenius(-2 * t);
    (beta1, beta2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldCtx;
    use crate::mpoly::MPoly;

    #[test]
    fn node_has_two_branches() {
        // Y² − X² − X³: tangent cone Y² − X² splits into two distinct lines
        let ctx = FieldCtx::new(5, 1, 2, None).unwrap();
        let f = MPoly::monomial(&ctx, [0, 2, 0], &ctx.one())
            .sub(&MPoly::monomial(&ctx, [2, 0, 0], &ctx.one()))
            .sub(&MPoly::monomial(&ctx, [3, 0, 0], &ctx.one()));
        let (n, chain) = branch_count(&f, 16).unwrap();
        assert_eq!(n, 2);
        assert!(chain.shifts.is_empty());
    }

    #[test]
    fn cusp_has_one_branch() {
        // Y² − X³ in characteristic 5
        let ctx = FieldCtx::new(5, 1, 1, None).unwrap();
        let f = MPoly::monomial(&ctx, [0, 2, 0], &ctx.one())
            .sub(&MPoly::monomial(&ctx, [3, 0, 0], &ctx.one()));
        let (n, _) = branch_count(&f, 16).unwrap();
        assert_eq!(n, 1);
    }

    #[test]
    fn tacnode_has_two_branches() {
        // Y² − X⁴ = (Y − X²)(Y + X²): cone Y², one transform splits it
        let ctx = FieldCtx::new(5, 1, 1, None).unwrap();
        let f = MPoly::monomial(&ctx, [0, 2, 0], &ctx.one())
            .sub(&MPoly::monomial(&ctx, [4, 0, 0], &ctx.one()));
        let (n, _) = branch_count(&f, 16).unwrap();
        assert_eq!(n, 2);
    }

    #[test]
    fn shifted_cusp_records_the_shear() {
        // (Y − X)³ − X⁴ over F_7: cone (Y − X)³ forces a shear by 1 before
        // the transform; a single branch remains
        let ctx = FieldCtx::new(7, 1, 1, None).unwrap();
        let y_minus_x = MPoly::var(&ctx, 1).sub(&MPoly::var(&ctx, 0));
        let f = y_minus_x
            .pow(3)
            .sub(&MPoly::monomial(&ctx, [4, 0, 0], &ctx.one()));
        let (n, chain) = branch_count(&f, 16).unwrap();
        assert_eq!(n, 1);
        assert_eq!(chain.shifts, vec![ctx.one()]);
    }

    #[test]
    fn smooth_point_is_one_branch() {
        let ctx = FieldCtx::new(3, 1, 2, None).unwrap();
        let f = MPoly::var(&ctx, 1).add(&MPoly::monomial(&ctx, [2, 0, 0], &ctx.one()));
        let (n, chain) = branch_count(&f, 4).unwrap();
        assert_eq!(n, 1);
        assert_eq!(chain.steps, vec![ChainStep::Smooth]);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let ctx = FieldCtx::new(5, 1, 1, None).unwrap();
        // Y² − X⁵ needs two transforms; a budget of 1 must abort
        let f = MPoly::monomial(&ctx, [0, 2, 0], &ctx.one())
            .sub(&MPoly::monomial(&ctx, [5, 0, 0], &ctx.one()));
        assert!(matches!(
            branch_count(&f, 1),
            Err(CurveError::ChainBudgetExceeded(_))
        ));
        let (n, _) = branch_count(&f, 8).unwrap();
        assert_eq!(n, 1);
    }

    fn inst3() -> super::super::CurveInstance {
        super::super::CurveInstance::new(
            3,
            1,
            6,
            1,
            4,
            super::super::CaseTag::TwoT,
            "g",
            &[(2, "1".to_string()), (4, "g".to_string())],
            None,
        )
        .unwrap()
    }

    #[test]
    fn infinity_chart_coefficients_match_closed_forms() {
        let inst = inst3();
        let t = inst.t as i64;
        let k = inst.k as i64;
        let qt = inst.qp(inst.t) as i64;
        let f_lam = inst.f_poly.eval(&inst.lambda);
        let c = &inst.c_coeff;
        for xi in inst.xi_condition_set() {
            let chart = inst.infinity_chart(&xi);
            // coefficient closed forms in the chart at (1 : ξ : 0):
            // Y^0 Z^{q^{2t}−q^t}: −C·F(λ)·(ξ^{q^{k−t}} − ξ)^{q^t}
            let want = -((c * &f_lam) * (&xi.frobenius(k - t) - &xi).pow(qt));
            assert_eq!(chart.coeff([0, 6, 0]), want);
            // Y^0 Z^{q^{2t}−1}: C·λ^{q^t}·(ξ^{q^k} − ξ)
            let want = &(c * &inst.lambda.frobenius(t)) * &(&xi.frobenius(k) - &xi);
            assert_eq!(chart.coeff([0, 8, 0]), want);
            // Y^{q^t} Z^{q^{2t}−q^t}: C·F(λ)
            assert_eq!(chart.coeff([3, 6, 0]), c * &f_lam);
            // Y Z^{q^{2t}−1}: −C·λ^{q^t}
            assert_eq!(chart.coeff([1, 8, 0]), -(c * &inst.lambda.frobenius(t)));
            // Y^{q^{2t}} Z^0: −C·λ^{q^t}·δ
            assert_eq!(
                chart.coeff([9, 0, 0]),
                -(&(c * &inst.lambda.frobenius(t)) * &inst.delta)
            );
        }
    }

    #[test]
    fn unique_branch_at_infinity_with_closed_form_shears() {
        let inst = inst3();
        let budget = 4 * inst.qp(inst.t) as u32 + 4;
        for xi in inst.xi_condition_set() {
            let chart = inst.infinity_chart(&xi);
            // rename (Y, Z) into the first two variables for the counter
            let (n, chain) = branch_count(&chart, budget).unwrap();
            assert_eq!(n, 1, "unique branch at every xi outside F_3");
            let (b1, b2) = beta_closed_forms(&inst, &xi);
            assert_eq!(chain.shifts.len(), 2);
            assert_eq!(chain.shifts[0], b1);
            assert_eq!(chain.shifts[1], b2);
        }
    }
}
