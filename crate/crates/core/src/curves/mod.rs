//! The r = 3 curve engine: the Moore-determinant curve 𝒞 and its reduced
//! quotient 𝒜, λ-selection, singularity location and classification at
//! finite points and at infinity, branch counting by quadratic transforms,
//! the 2/9 irreducibility criterion, and the non-existence inequality tables.

pub mod branch;
pub mod criterion;
pub mod report;

use std::sync::Arc;

use thiserror::Error;

use crate::gf::{gcd, lcm, Embedding, Felt, FieldCtx, GfError};
use crate::linpoly::LinPoly;
use crate::mpoly::MPoly;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("no valid lambda exists in F_q^n (n too small or hypothesis violated)")]
    NoLambdaFound,
    #[error("division of the curve by a linear factor left a nonzero remainder")]
    NonExactDivision,
    #[error("computed polynomial disagrees with its closed form: {0}")]
    ClosedFormMismatch(String),
    #[error("point does not lie on the curve")]
    PointNotOnCurve,
    #[error("tangent cone fits no supported classification")]
    UnclassifiedCone,
    #[error("the divided-out axis is tangent at the origin")]
    AxisIsTangent,
    #[error("blowup chain exceeded the step budget {0}")]
    ChainBudgetExceeded(u32),
    #[error("singularity could not be resolved: {0}")]
    UnresolvedSingularity(String),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Which normal form the trailing part of G takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseTag {
    /// min deg_q(G) = 2t
    TwoT,
    /// min deg_q(G) = t/2 (t even)
    HalfT,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::TwoT => "2t",
            CaseTag::HalfT => "t/2",
        }
    }
    pub fn parse(s: &str) -> Option<CaseTag> {
        match s {
            "2t" => Some(CaseTag::TwoT),
            "t/2" => Some(CaseTag::HalfT),
            _ => None,
        }
    }
}

/// A fully constructed curve instance: the data of (q, t, k, n, δ, G, λ)
/// together with the working field F_{q^N}, N = lcm(n, k−2t), where every
/// slope at infinity and every blowup shift constant is representable.
pub struct CurveInstance {
    pub t: u32,
    pub k: u32,
    pub n: u32,
    pub case: CaseTag,
    /// F_{q^n}, where δ, the G-coefficients and λ live natively
    pub ctx_n: Arc<FieldCtx>,
    /// working field F_{q^N}
    pub ctx: Arc<FieldCtx>,
    pub embedding: Embedding,
    pub delta: Felt,
    /// trailing coefficient C of G (working field)
    pub c_coeff: Felt,
    pub lambda: Felt,
    pub lambda_small: Felt,
    /// F = X + δX^{q^{2t}} over the working field
    pub f_poly: LinPoly,
    /// G over the working field
    pub g_poly: LinPoly,
    /// 𝒞(X,Y): the Moore determinant specialized at Z = λ
    pub curve_c: MPoly,
    /// 𝒜 = 𝒞 / 𝒱(X,Y,λ)
    pub curve_a: MPoly,
}

/// det of a symbolic 3×3 matrix of polynomials.
fn det3(rows: &[[MPoly; 3]; 3]) -> MPoly {
    let ctx = rows[0][0].ctx().clone();
    let mut acc = MPoly::zero(&ctx);
    const PERMS: [([usize; 3], bool); 6] = [
        ([0, 1, 2], true),
        ([1, 2, 0], true),
        ([2, 0, 1], true),
        ([0, 2, 1], false),
        ([1, 0, 2], false),
        ([2, 1, 0], false),
    ];
    for (perm, pos) in PERMS {
        let prod = rows[0][perm[0]].mul(&rows[1][perm[1]]).mul(&rows[2][perm[2]]);
        acc = if pos { acc.add(&prod) } else { acc.sub(&prod) };
    }
    acc
}

/// A linearized polynomial as a sparse polynomial in one of X, Y, Z.
pub fn lin_as_mpoly(l: &LinPoly, var: usize) -> MPoly {
    let ctx = l.ctx().clone();
    let q = ctx.q();
    let mut out = MPoly::zero(&ctx);
    for (i, c) in l.coeffs().iter().enumerate() {
        if !c.is_zero() {
            let exp = q.pow(i as u32);
            assert!(exp <= 1 << 20, "q-power exponent exceeds the degree guard");
            let mut e = [0u32; 3];
            e[var] = exp as u32;
            out.add_term(e, c);
        }
    }
    out
}

/// The Moore-style determinant det(f_j(V_i)) for V = (X, Y, Z), expanded as
/// a sparse trivariate polynomial.
pub fn moore_det(f1: &LinPoly, f2: &LinPoly, f3: &LinPoly) -> MPoly {
    let rows: [[MPoly; 3]; 3] = [0, 1, 2].map(|v| {
        [lin_as_mpoly(f1, v), lin_as_mpoly(f2, v), lin_as_mpoly(f3, v)]
    });
    det3(&rows)
}

/// ∏ over P²(F_q) of the projectively normalized linear forms
/// a·X + b·Y + c·Z, a product of q²+q+1 factors.
pub fn v_poly(ctx: &Arc<FieldCtx>) -> MPoly {
    let mut acc = MPoly::constant(ctx, &ctx.one());
    for l in v_poly_factors(ctx) {
        acc = acc.mul(&l);
    }
    acc
}

/// The individual linear factors of [`v_poly`], first nonzero coefficient
/// normalized to 1, in deterministic order.
pub fn v_poly_factors(ctx: &Arc<FieldCtx>) -> Vec<MPoly> {
    let fq: Vec<Felt> = ctx.elements().filter(|x| x.in_subfield(1)).collect();
    let mut out = Vec::new();
    // (1 : b : c), (0 : 1 : c), (0 : 0 : 1)
    for b in &fq {
        for c in &fq {
            out.push(
                MPoly::var(ctx, 0)
                    .add(&MPoly::var(ctx, 1).scale(b))
                    .add(&MPoly::var(ctx, 2).scale(c)),
            );
        }
    }
    for c in &fq {
        out.push(MPoly::var(ctx, 1).add(&MPoly::var(ctx, 2).scale(c)));
    }
    out.push(MPoly::var(ctx, 2));
    out
}

impl CurveInstance {
    /// Validates parameters, builds the two fields and the embedding,
    /// selects λ when not supplied, and constructs 𝒞 and 𝒜.
    ///
    /// `delta_lit`, `g_terms` coefficients and `lambda_lit` are element
    /// literals of F_{q^n} (decimal index or "g^j").
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p: u64,
        e: u32,
        n: u32,
        t: u32,
        k: u32,
        case: CaseTag,
        delta_lit: &str,
        g_terms: &[(u32, String)],
        lambda_lit: Option<&str>,
    ) -> Result<CurveInstance, CurveError> {
        Self::build(p, e, n, t, k, case, delta_lit, g_terms, lambda_lit, true)
    }

    /// Like [`CurveInstance::new`] but skips expanding 𝒞 and 𝒜 (left as the
    /// zero polynomial). Criterion summaries only need λ, the Θ/Σ root
    /// enumeration and the degree formulas, and the quotient polynomial is
    /// far too dense to expand once q^k grows past desk scale.
    #[allow(clippy::too_many_arguments)]
    pub fn new_summary(
        p: u64,
        e: u32,
        n: u32,
        t: u32,
        k: u32,
        case: CaseTag,
        delta_lit: &str,
        g_terms: &[(u32, String)],
        lambda_lit: Option<&str>,
    ) -> Result<CurveInstance, CurveError> {
        Self::build(p, e, n, t, k, case, delta_lit, g_terms, lambda_lit, false)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        p: u64,
        e: u32,
        n: u32,
        t: u32,
        k: u32,
        case: CaseTag,
        delta_lit: &str,
        g_terms: &[(u32, String)],
        lambda_lit: Option<&str>,
        expand_curves: bool,
    ) -> Result<CurveInstance, CurveError> {
        if t == 0 || 2 * t >= k || k >= n {
            return Err(CurveError::Instance(format!(
                "need 0 < 2t < k < n, got t={t}, k={k}, n={n}"
            )));
        }
        if n < k + t + 1 {
            return Err(CurveError::Instance(format!(
                "lambda existence needs n >= k+t+1, got n={n} < {}",
                k + t + 1
            )));
        }
        let min_deg_expected = match case {
            CaseTag::TwoT => 2 * t,
            CaseTag::HalfT => {
                if t % 2 != 0 {
                    return Err(CurveError::Instance("case t/2 requires t even".into()));
                }
                t / 2
            }
        };

        let big_n = lcm(n as u64, (k - 2 * t) as u64) as u32;
        let ctx_n = FieldCtx::new(p, e, n, None)?;
        let ctx = FieldCtx::new(p, e, big_n, None)?;
        let embedding = Embedding::new(&ctx_n, &ctx)?;

        let delta_small = ctx_n.parse_element(delta_lit)?;
        let delta = embedding.map(&delta_small);
        if delta.is_zero() || delta_small.norm_rel(1)?.is_one() {
            return Err(CurveError::Instance(
                "delta must be nonzero with relative norm != 1".into(),
            ));
        }

        // G = X^{q^u} + ... + C X^{q^k} in normal form: trailing coefficient
        // 1 at the minimum q-degree, nonzero C at q-degree k, >= 2 terms
        let mut g_pairs: Vec<(u32, Felt)> = Vec::new();
        for (i, lit) in g_terms {
            let c_small = ctx_n.parse_element(lit)?;
            g_pairs.push((*i, embedding.map(&c_small)));
        }
        g_pairs.sort_by_key(|(i, _)| *i);
        let g_small_terms: Vec<&(u32, Felt)> =
            g_pairs.iter().filter(|(_, c)| !c.is_zero()).collect();
        if g_small_terms.len() < 2 {
            return Err(CurveError::Instance("G must contain at least two terms".into()));
        }
        if g_small_terms.first().unwrap().0 != min_deg_expected
            || !g_small_terms.first().unwrap().1.is_one()
        {
            return Err(CurveError::Instance(format!(
                "G must have trailing term 1*x^q^{min_deg_expected} in case {}",
                case.as_str()
            )));
        }
        if g_small_terms.last().unwrap().0 != k {
            return Err(CurveError::Instance(format!("G must have q-degree {k}")));
        }
        let c_coeff = g_small_terms.last().unwrap().1.clone();

        let f_poly = LinPoly::from_terms(&ctx, &[(0, ctx.one()), (2 * t, delta.clone())])?;
        let g_poly = LinPoly::from_terms(&ctx, &g_pairs)?;

        let placeholder = ctx.zero();
        let placeholder_small = ctx_n.zero();
        let mut inst = CurveInstance {
            t,
            k,
            n,
            case,
            curve_c: MPoly::zero(&ctx),
            curve_a: MPoly::zero(&ctx),
            ctx_n,
            ctx,
            embedding,
            delta,
            c_coeff,
            lambda: placeholder,
            lambda_small: placeholder_small,
            f_poly,
            g_poly,
        };

        // λ: supplied or deterministically scanned
        match lambda_lit {
            Some(lit) => {
                let ls = inst.ctx_n.parse_element(lit)?;
                if !inst.lambda_admissible(&ls) {
                    return Err(CurveError::Instance(
                        "supplied lambda violates the selection conditions".into(),
                    ));
                }
                inst.lambda_small = ls.clone();
                inst.lambda = inst.embedding.map(&ls);
            }
            None => {
                let ls = inst.choose_lambda()?;
                inst.lambda_small = ls.clone();
                inst.lambda = inst.embedding.map(&ls);
            }
        }

        if expand_curves {
            inst.build_curves()?;
        }
        Ok(inst)
    }

    pub fn q(&self) -> u64 {
        self.ctx.q()
    }

    /// q^a as u64 (desk scale keeps this in range).
    pub fn qp(&self, a: u32) -> u64 {
        self.ctx.q().pow(a)
    }

    /// The ξ-set of the λ-condition: F_{q^{k−2t}} ∖ F_{q^{gcd(k,t)}},
    /// realized inside the working field.
    pub fn xi_condition_set(&self) -> Vec<Felt> {
        let s = gcd(self.k as u64, self.t as u64) as u32;
        self.ctx
            .elements()
            .filter(|x| x.in_subfield(self.k - 2 * self.t) && !x.in_subfield(s))
            .collect()
    }

    /// All ξ with (1:ξ:0) on the curve: the elements of F_{q^{k−2t}}.
    pub fn xi_all(&self) -> Vec<Felt> {
        self.ctx
            .elements()
            .filter(|x| x.in_subfield(self.k - 2 * self.t))
            .collect()
    }

    /// L_ξ(λ) = (ξ−ξ^{q^t})^{q^{k+t}} (ξ^{q^{k−t}}−ξ)^{q^t} F(λ)^{q^t+1}
    ///        + δ (ξ^{q^k}−ξ)^{q^t(q^t+1)} λ^{q^t(q^t+1)}
    pub fn l_xi(&self, xi: &Felt, lambda: &Felt) -> Felt {
        let t = self.t as i64;
        let k = self.k as i64;
        let qt = self.qp(self.t) as i64;
        let f_lam = self.f_poly.eval(lambda);
        let term1 = (xi - &xi.frobenius(t)).frobenius(k + t)
            * (&xi.frobenius(k - t) - xi).frobenius(t)
            * f_lam.pow(qt + 1);
        let term2 = &self.delta
            * &(&xi.frobenius(k) - xi).pow(qt * (qt + 1))
            * lambda.pow(qt * (qt + 1));
        term1 + term2
    }

    fn lambda_admissible(&self, lambda_small: &Felt) -> bool {
        if lambda_small.in_subfield(1) {
            return false;
        }
        let lam = self.embedding.map(lambda_small);
        if self.f_poly.eval(&lam).is_zero() || self.g_poly.eval(&lam).is_zero() {
            return false;
        }
        self.xi_condition_set().iter().all(|xi| !self.l_xi(xi, &lam).is_zero())
    }

    /// First admissible λ in the element order of F_{q^n}.
    pub fn choose_lambda(&self) -> Result<Felt, CurveError> {
        for cand in self.ctx_n.elements() {
            if self.lambda_admissible(&cand) {
                return Ok(cand);
            }
        }
        Err(CurveError::NoLambdaFound)
    }

    fn build_curves(&mut self) -> Result<(), CurveError> {
        let xqt = LinPoly::monomial(&self.ctx, self.t, self.ctx.one());
        let tri = moore_det(&xqt, &self.f_poly, &self.g_poly);
        self.curve_c = tri.specialize(2, &self.lambda);

        let expected_deg_c = self.qp(self.k) + self.qp(2 * self.t);
        if self.curve_c.total_degree() != Some(expected_deg_c as u32) {
            return Err(CurveError::ClosedFormMismatch(format!(
                "deg C = {:?}, expected {expected_deg_c}",
                self.curve_c.total_degree()
            )));
        }

        // divide out the q²+q+1 factors of V(X, Y, λ): q²+q of them stay
        // linear in (X, Y); the pure-Z factor specializes to the nonzero
        // constant λ and is divided out as a scalar, so the quotient
        // polynomial has degree q^k+q^{2t}−(q²+q), one more than the
        // nominal curve degree reported by `deg_a`
        let mut a = self.curve_c.clone();
        for factor in v_poly_factors(&self.ctx) {
            let spec = factor.specialize(2, &self.lambda);
            match spec.total_degree() {
                Some(0) => {
                    a = a.scale(&spec.coeff([0, 0, 0]).inv());
                }
                Some(1) => {
                    a = a.div_exact_linear(&spec).ok_or(CurveError::NonExactDivision)?;
                }
                _ => return Err(CurveError::NonExactDivision),
            }
        }
        let q = self.q();
        let expected_deg_a = expected_deg_c - (q * q + q);
        if a.total_degree() != Some(expected_deg_a as u32) {
            return Err(CurveError::ClosedFormMismatch(format!(
                "deg A = {:?}, expected {expected_deg_a}",
                a.total_degree()
            )));
        }
        self.curve_a = a;
        Ok(())
    }

    pub fn deg_c(&self) -> u32 {
        (self.qp(self.k) + self.qp(2 * self.t)) as u32
    }

    /// Nominal degree of 𝒜, deg 𝒞 − (q²+q+1), the value entering the 2/9
    /// threshold. The stored quotient polynomial has degree one higher,
    /// since the pure-Z factor of 𝒱 specializes to the constant λ; using
    /// the smaller value in the threshold only makes the criterion stricter.
    pub fn deg_a(&self) -> u32 {
        let q = self.q();
        (self.qp(self.k) + self.qp(2 * self.t) - (q * q + q + 1)) as u32
    }

    /// The homogenization of 𝒞(X,Y) to total degree q^k + q^{2t} in Z.
    pub fn curve_c_homogeneous(&self) -> MPoly {
        self.curve_c.homogenize(2, self.deg_c())
    }

    /// Asserts the degree-max form of 𝒞 equals
    /// δ·C·λ^{q^t} · X^{q^{2t}} Y^{q^{2t}} · ∏_{ξ ∈ F_{q^{k−2t}} ∖ 0} (Y−ξX)^{q^{2t}},
    /// using the product identity ∏(Y−ξX) = Y^{s−1} − X^{s−1}, s = q^{k−2t};
    /// then returns the ξ with (1:ξ:0) on the curve. (0:1:0) always lies on
    /// the curve as well.
    pub fn infinity_points(&self) -> Result<Vec<Felt>, CurveError> {
        let top = self.curve_c.homogeneous_part(self.deg_c());
        let q2t = self.qp(2 * self.t) as u32;
        let s = self.qp(self.k - 2 * self.t) as u32;
        let scalar = &(&self.delta * &self.c_coeff) * &self.lambda.pow(self.qp(self.t) as i64);
        let base = MPoly::monomial(&self.ctx, [0, (s - 1) * q2t, 0], &self.ctx.one())
            .sub(&MPoly::monomial(&self.ctx, [(s - 1) * q2t, 0, 0], &self.ctx.one()));
        let expected = base.mul(&MPoly::monomial(&self.ctx, [q2t, q2t, 0], &scalar));
        if top != expected {
            return Err(CurveError::ClosedFormMismatch(
                "degree-max form of C does not match the product of linear factors at infinity"
                    .into(),
            ));
        }
        Ok(self.xi_all())
    }

    /// f_ξ(Y,Z): the curve transported so the infinite point (1:ξ:0) sits at
    /// the origin — homogenize, apply (x:y:z) ↦ (x:y−ξx:z), dehomogenize by
    /// X = 1. Variables are renamed so Y, Z occupy slots 0, 1.
    pub fn infinity_chart(&self, xi: &Felt) -> MPoly {
        let h = self.curve_c_homogeneous();
        let at_x1 = h.specialize(0, &self.ctx.one());
        let shifted = at_x1.translate_var(1, xi);
        // [0, a, b] -> [a, b, 0]
        let mut out = MPoly::zero(&self.ctx);
        for (e, c) in shifted.terms() {
            debug_assert_eq!(e[0], 0);
            out.add_term([e[1], e[2], 0], &c);
        }
        out
    }

    /// Chart at (0:1:0): homogenize, swap X ↔ Y (the curve construction is
    /// symmetric), dehomogenize by the new X = 1.
    pub fn infinity_chart_y(&self) -> MPoly {
        let h = self.curve_c_homogeneous();
        let mut swapped = MPoly::zero(&self.ctx);
        for (e, c) in h.terms() {
            swapped.add_term([e[1], e[0], e[2]], &c);
        }
        let at_x1 = swapped.specialize(0, &self.ctx.one());
        let mut out = MPoly::zero(&self.ctx);
        for (e, c) in at_x1.terms() {
            out.add_term([e[1], e[2], 0], &c);
        }
        out
    }

    /// Multiplicity of the infinite point (1:ξ:0).
    pub fn multiplicity_at_infinity(&self, xi: &Felt) -> u32 {
        self.infinity_chart(xi).min_total_degree().expect("curve is nonzero")
    }

    /// Homogeneous parts of 𝒞 translated to the affine point (x̄, ȳ),
    /// computed by row additivity of the determinant: with variable rows
    /// R(X), R(Y) and constant rows r(x̄), r(ȳ), the translate is
    /// det(R+r, R+r, L) = det(R,R,L) + det(R,r,L) + det(r,R,L) + det(r,r,L).
    pub fn shift_expand(&self, xbar: &Felt, ybar: &Felt) -> Vec<(u32, MPoly)> {
        let ctx = &self.ctx;
        let xqt = LinPoly::monomial(ctx, self.t, ctx.one());
        let var_row = |v: usize| -> [MPoly; 3] {
            [
                lin_as_mpoly(&xqt, v),
                lin_as_mpoly(&self.f_poly, v),
                lin_as_mpoly(&self.g_poly, v),
            ]
        };
        let const_row = |a: &Felt| -> [MPoly; 3] {
            [
                MPoly::constant(ctx, &a.frobenius(self.t as i64)),
                MPoly::constant(ctx, &self.f_poly.eval(a)),
                MPoly::constant(ctx, &self.g_poly.eval(a)),
            ]
        };
        let lam_row = const_row(&self.lambda);
        let rx = var_row(0);
        let ry = var_row(1);
        let cx = const_row(xbar);
        let cy = const_row(ybar);
        let total = det3(&[rx.clone(), ry.clone(), lam_row.clone()])
            .add(&det3(&[rx.clone(), cy.clone(), lam_row.clone()]))
            .add(&det3(&[cx.clone(), ry, lam_row.clone()]))
            .add(&det3(&[cx, cy, lam_row]));
        total.homogeneous_parts()
    }

    /// Multiplicity and tangent cone at an affine point of 𝒞.
    pub fn multiplicity_affine(&self, xbar: &Felt, ybar: &Felt) -> Result<(u32, MPoly), CurveError> {
        let parts = self.shift_expand(xbar, ybar);
        let (m, cone) = parts.into_iter().next().expect("curve is nonzero");
        if m == 0 {
            return Err(CurveError::PointNotOnCurve);
        }
        Ok((m, cone))
    }

    /// The separable linearized polynomial g with
    /// det[[x̄^{q^t}, G(x̄)], [λ^{q^t}, G(λ)]] = g(x̄)^{q^u},
    /// u = min(t, min deg_q G); its roots locate the affine singularities.
    pub fn g_singular_locator(&self) -> LinPoly {
        let u = self.t.min(self.g_poly.min_qdeg().expect("G nonzero"));
        let ctx = &self.ctx;
        let g_lam = self.g_poly.eval(&self.lambda);
        let mut terms: Vec<(u32, Felt)> = vec![(self.t - u, g_lam.frobenius(-(u as i64)))];
        let lam_tu = self.lambda.frobenius((self.t - u) as i64);
        for (i, c) in self.g_poly.coeffs().iter().enumerate() {
            if !c.is_zero() {
                terms.push((i as u32 - u, -&(&lam_tu * &c.frobenius(-(u as i64)))));
            }
        }
        LinPoly::from_terms(ctx, &terms).expect("locator terms share the working context")
    }

    /// Roots of the singular locator, i.e. the coordinate pool of Θ.
    pub fn theta_roots(&self) -> Vec<Felt> {
        let g = self.g_singular_locator();
        self.ctx.elements().filter(|x| g.eval(x).is_zero()).collect()
    }

    /// F(x̄)λ^{q^t} − F(λ)x̄^{q^t}; vanishing on both coordinates of a Θ-point
    /// puts it in Σ (multiplicity q^u + 1 instead of q^u).
    pub fn sigma_condition(&self, xbar: &Felt) -> Felt {
        let t = self.t as i64;
        &self.f_poly.eval(xbar) * &self.lambda.frobenius(t)
            - &self.f_poly.eval(&self.lambda) * &xbar.frobenius(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::fq_span_dim;

    fn inst3() -> CurveInstance {
        CurveInstance::new(
            3,
            1,
            6,
            1,
            4,
            CaseTag::TwoT,
            "g",
            &[(2, "1".to_string()), (4, "g".to_string())],
            None,
        )
        .unwrap()
    }

    fn inst3_half() -> CurveInstance {
        CurveInstance::new(
            3,
            1,
            8,
            2,
            5,
            CaseTag::HalfT,
            "g",
            &[(1, "1".to_string()), (5, "g".to_string())],
            None,
        )
        .unwrap()
    }

    #[test]
    fn classical_moore_det_vanishes_iff_dependent() {
        // f-tuple (x, x^q, x^{q^2}) over F_{2^3}, exhaustive
        let ctx = FieldCtx::new(2, 1, 3, None).unwrap();
        let f1 = LinPoly::identity(&ctx);
        let f2 = LinPoly::monomial(&ctx, 1, ctx.one());
        let f3 = LinPoly::monomial(&ctx, 2, ctx.one());
        let m = moore_det(&f1, &f2, &f3);
        let els: Vec<Felt> = ctx.elements().collect();
        for a in &els {
            for b in &els {
                for c in &els {
                    let v = m.eval(&[a.clone(), b.clone(), c.clone()]);
                    let dep = fq_span_dim(&ctx, &[a.clone(), b.clone(), c.clone()]) < 3;
                    assert_eq!(v.is_zero(), dep, "Moore determinant vs span dimension");
                }
            }
        }
    }

    #[test]
    fn moore_det_is_alternating() {
        let ctx = FieldCtx::new(3, 1, 3, None).unwrap();
        let g = ctx.generator();
        let f1 = LinPoly::monomial(&ctx, 1, ctx.one());
        let f2 = LinPoly::from_terms(&ctx, &[(0, ctx.one()), (2, g.clone())]).unwrap();
        let f3 = LinPoly::monomial(&ctx, 2, g);
        let m = moore_det(&f1, &f2, &f3);
        // swap X <-> Y
        let mut swapped = MPoly::zero(&ctx);
        for (e, c) in m.terms() {
            swapped.add_term([e[1], e[0], e[2]], &c);
        }
        assert_eq!(swapped, m.neg());
        // swap Y <-> Z
        let mut swapped = MPoly::zero(&ctx);
        for (e, c) in m.terms() {
            swapped.add_term([e[0], e[2], e[1]], &c);
        }
        assert_eq!(swapped, m.neg());
    }

    #[test]
    fn moore_det_degree_example() {
        // (x^{q^t}, X+delta X^{q^{2t}}, G) at q=3, t=1, k=4
        let inst = inst3();
        let xqt = LinPoly::monomial(&inst.ctx, 1, inst.ctx.one());
        let tri = moore_det(&xqt, &inst.f_poly, &inst.g_poly);
        assert_eq!(tri.total_degree(), Some(81 + 9 + 3));
    }

    #[test]
    fn v_poly_degree_and_vanishing() {
        let ctx = FieldCtx::new(2, 1, 2, None).unwrap();
        assert_eq!(v_poly_factors(&ctx).len(), 7);
        assert_eq!(v_poly(&ctx).total_degree(), Some(7));

        let ctx = FieldCtx::new(3, 1, 2, None).unwrap();
        let v = v_poly(&ctx);
        assert_eq!(v.total_degree(), Some(13));
        // vanishes at F_q-dependent triples: z = a*x + b*y with a,b in F_3
        let x = ctx.generator();
        let y = &x * &x;
        for a in 0..3u64 {
            for b in 0..3u64 {
                let z = &(&ctx.from_prime(a) * &x) + &(&ctx.from_prime(b) * &y);
                assert!(v.eval(&[x.clone(), y.clone(), z]).is_zero());
            }
        }
    }

    #[test]
    fn instance_builds_with_valid_lambda() {
        let inst = inst3();
        assert_eq!(inst.deg_c(), 90);
        assert_eq!(inst.deg_a(), 77);
        assert_eq!(inst.curve_c.total_degree(), Some(90));
        // the quotient polynomial keeps one extra degree: only the q²+q
        // factors that stay linear after Z = λ lower the degree
        assert_eq!(inst.curve_a.total_degree(), Some(78));
        let lam = &inst.lambda;
        assert!(!lam.in_subfield(1));
        assert!(!inst.f_poly.eval(lam).is_zero());
        assert!(!inst.g_poly.eval(lam).is_zero());
        for xi in inst.xi_condition_set() {
            assert!(!inst.l_xi(&xi, lam).is_zero());
        }
        // the xi condition set is F_9 minus F_3
        assert_eq!(inst.xi_condition_set().len(), 6);
    }

    #[test]
    fn curve_a_times_v_recovers_curve_c() {
        let inst = inst3();
        let mut prod = inst.curve_a.clone();
        for f in v_poly_factors(&inst.ctx) {
            prod = prod.mul(&f.specialize(2, &inst.lambda));
        }
        assert_eq!(prod, inst.curve_c);
    }

    #[test]
    fn infinity_form_matches_linear_factor_product() {
        let inst = inst3();
        let ctx = &inst.ctx;
        let xi_nonzero: Vec<Felt> = inst.xi_all().into_iter().filter(|x| !x.is_zero()).collect();
        assert_eq!(xi_nonzero.len(), 8);
        let mut prod = MPoly::monomial(
            ctx,
            [9, 9, 0],
            &(&(&inst.delta * &inst.c_coeff) * &inst.lambda.pow(3)),
        );
        for xi in &xi_nonzero {
            let factor = MPoly::var(ctx, 1).sub(&MPoly::var(ctx, 0).scale(xi));
            prod = prod.mul(&factor.pow(9));
        }
        assert_eq!(prod, inst.curve_c.homogeneous_part(90));
        // and the built-in check agrees
        assert_eq!(inst.infinity_points().unwrap().len(), 9);
    }

    #[test]
    fn multiplicity_dichotomy_at_infinity() {
        let inst = inst3();
        for xi in inst.infinity_points().unwrap() {
            let m = inst.multiplicity_at_infinity(&xi);
            if xi.in_subfield(1) {
                assert_eq!(m, 9, "xi in F_3 must give q^{{2t}}");
            } else {
                assert_eq!(m, 6, "xi outside F_3 must give q^{{2t}}-q^t");
            }
        }
        let m_y = inst.infinity_chart_y().min_total_degree().unwrap();
        assert_eq!(m_y, 9);
    }

    #[test]
    fn locator_matches_determinant_oracle() {
        let inst = inst3();
        let g = inst.g_singular_locator();
        let t = inst.t as i64;
        // g(x)^{q^u} = x^{q^t} G(lambda) - lambda^{q^t} G(x) for every x
        let u = inst.t.min(inst.g_poly.min_qdeg().unwrap()) as i64;
        let g_lam = inst.g_poly.eval(&inst.lambda);
        for x in inst.ctx.elements().step_by(7) {
            let det = &(&x.frobenius(t) * &g_lam)
                - &(&inst.lambda.frobenius(t) * &inst.g_poly.eval(&x));
            assert_eq!(g.eval(&x).frobenius(u), det);
        }
        // separable: nonzero coefficient on x^{q^0}
        assert!(!g.coeff(0).is_zero());
    }

    #[test]
    fn affine_h_forms_match_closed_forms() {
        let inst = inst3();
        let ctx = &inst.ctx;
        let t = inst.t as i64;
        let roots = inst.theta_roots();
        assert!(roots.len() as u64 <= 27);
        assert!((roots.len() * roots.len()) as u64 <= 729);
        let f_lam = inst.f_poly.eval(&inst.lambda);
        let g_lam = inst.g_poly.eval(&inst.lambda);
        let minor_fg = |a: &Felt| -> Felt {
            &(&inst.f_poly.eval(a) * &g_lam) - &(&inst.g_poly.eval(a) * &f_lam)
        };
        for x in &roots {
            for y in &roots {
                let parts = inst.shift_expand(x, y);
                assert!(parts[0].0 >= 3, "multiplicity at least q^t");
                // H_{q^t} = minor(y) X^{q^t} - minor(x) Y^{q^t}
                let h_qt = MPoly::monomial(ctx, [3, 0, 0], &minor_fg(y))
                    .sub(&MPoly::monomial(ctx, [0, 3, 0], &minor_fg(x)));
                // H_{q^t+1} = G(lambda) (X^{q^t} Y - X Y^{q^t})
                let h_qt1 = MPoly::monomial(ctx, [3, 1, 0], &g_lam)
                    .sub(&MPoly::monomial(ctx, [1, 3, 0], &g_lam));
                let sigma = inst.sigma_condition(x).is_zero() && inst.sigma_condition(y).is_zero();
                let (m, cone) = inst.multiplicity_affine(x, y).unwrap();
                if sigma {
                    assert!(h_qt.is_zero() || m == 4);
                    assert_eq!(m, 4, "Sigma point has multiplicity q^t+1");
                    assert_eq!(cone, h_qt1);
                } else {
                    assert_eq!(m, 3, "non-Sigma Theta point has multiplicity q^t");
                    assert_eq!(cone, h_qt);
                    let next = parts
                        .iter()
                        .find(|(d, _)| *d == 4)
                        .map(|(_, p)| p.clone())
                        .unwrap();
                    assert_eq!(next, h_qt1);
                }
            }
        }
        let _ = t;
    }

    #[test]
    fn shift_expand_identity_and_composition() {
        let inst = inst3();
        let zero = inst.ctx.zero();
        let parts = inst.shift_expand(&zero, &zero);
        let mut sum = MPoly::zero(&inst.ctx);
        for (_, p) in &parts {
            sum = sum.add(p);
        }
        assert_eq!(sum, inst.curve_c);
        // composition: expanding at (a, b) equals translating the curve
        let a = inst.ctx.felt(11);
        let b = inst.ctx.felt(23);
        let parts = inst.shift_expand(&a, &b);
        let mut sum = MPoly::zero(&inst.ctx);
        for (_, p) in &parts {
            sum = sum.add(p);
        }
        assert_eq!(sum, inst.curve_c.translate(&[a.clone(), b.clone(), zero.clone()]));
        // shift by a then by a' equals shift by a+a'
        let a2 = inst.ctx.felt(5);
        let b2 = inst.ctx.felt(7);
        let once: MPoly = {
            let parts = inst.shift_expand(&(&a + &a2), &(&b + &b2));
            parts.into_iter().fold(MPoly::zero(&inst.ctx), |acc, (_, p)| acc.add(&p))
        };
        let twice = inst
            .curve_c
            .translate(&[a, b, zero.clone()])
            .translate(&[a2, b2, zero]);
        assert_eq!(once, twice);
    }

    #[test]
    fn half_t_instance_forms() {
        let inst = inst3_half();
        assert_eq!(inst.deg_c(), 243 + 81);
        assert_eq!(inst.deg_a(), 243 + 81 - 13);
        // all xi at infinity lie in F_3 = F_{q^{gcd(k,t)}}: multiplicity q^{2t}
        for xi in inst.infinity_points().unwrap() {
            assert!(xi.in_subfield(1));
            assert_eq!(inst.multiplicity_at_infinity(&xi), 81);
        }
        // affine lowest parts: minor-combination on X^{q^{t/2}}, Y^{q^{t/2}}
        let ctx = &inst.ctx;
        let t = inst.t as i64;
        let f_lam = inst.f_poly.eval(&inst.lambda);
        let lam_qt = inst.lambda.frobenius(t);
        let minor_xf = |a: &Felt| -> Felt {
            &(&a.frobenius(t) * &f_lam) - &(&inst.f_poly.eval(a) * &lam_qt)
        };
        let roots = inst.theta_roots();
        assert!((roots.len() as u64).pow(2) <= 3u64.pow(2 * 5 - 2));
        for x in roots.iter().take(6) {
            for y in roots.iter().take(6) {
                let (m, cone) = inst.multiplicity_affine(x, y).unwrap();
                let h_low = MPoly::monomial(ctx, [3, 0, 0], &minor_xf(y))
                    .sub(&MPoly::monomial(ctx, [0, 3, 0], &minor_xf(x)));
                let sigma = inst.sigma_condition(x).is_zero() && inst.sigma_condition(y).is_zero();
                if sigma {
                    assert_eq!(m, 4);
                } else {
                    assert_eq!(m, 3);
                    assert_eq!(cone, h_low);
                }
                // next part: lambda^{q^t} (X Y^{q^{t/2}} - X^{q^{t/2}} Y)
                let parts = inst.shift_expand(x, y);
                let next = parts
                    .iter()
                    .find(|(d, _)| *d == 4)
                    .map(|(_, p)| p.clone())
                    .unwrap();
                let h_next = MPoly::monomial(ctx, [1, 3, 0], &lam_qt)
                    .sub(&MPoly::monomial(ctx, [3, 1, 0], &lam_qt));
                assert_eq!(next, h_next);
            }
        }
    }

    #[test]
    fn instance_validation_guards() {
        let terms = |v: &[(u32, &str)]| -> Vec<(u32, String)> {
            v.iter().map(|(i, s)| (*i, s.to_string())).collect()
        };
        // monomial G rejected
        assert!(CurveInstance::new(3, 1, 6, 1, 4, CaseTag::TwoT, "g", &terms(&[(4, "1")]), None).is_err());
        // k <= 2t rejected
        assert!(CurveInstance::new(3, 1, 6, 1, 2, CaseTag::TwoT, "g", &terms(&[(2, "1")]), None).is_err());
        // n < k+t+1 rejected
        assert!(CurveInstance::new(
            3, 1, 5, 1, 4, CaseTag::TwoT, "g",
            &terms(&[(2, "1"), (4, "g")]), None
        ).is_err());
        // norm-1 delta rejected: norm_rel(1) of 1 is 1
        assert!(CurveInstance::new(
            3, 1, 6, 1, 4, CaseTag::TwoT, "1",
            &terms(&[(2, "1"), (4, "g")]), None
        ).is_err());
        // odd t in case t/2 rejected
        assert!(CurveInstance::new(
            3, 1, 8, 1, 4, CaseTag::HalfT, "g",
            &terms(&[(1, "1"), (4, "g")]), None
        ).is_err());
        // wrong trailing q-degree for the case rejected
        assert!(CurveInstance::new(
            3, 1, 6, 1, 4, CaseTag::TwoT, "g",
            &terms(&[(1, "1"), (4, "g")]), None
        ).is_err());
        // lambda in F_q rejected
        assert!(CurveInstance::new(
            3, 1, 6, 1, 4, CaseTag::TwoT, "g",
            &terms(&[(2, "1"), (4, "g")]), Some("1")
        ).is_err());
    }

    #[test]
    fn theta_points_lie_on_curve() {
        let inst = inst3();
        let roots = inst.theta_roots();
        let lam = inst.lambda.clone();
        for x in roots.iter().take(9) {
            for y in roots.iter().take(9) {
                let v = inst.curve_c.eval(&[x.clone(), y.clone(), lam.clone()]);
                assert!(v.is_zero(), "Theta pair must lie on the curve");
            }
        }
    }
}
