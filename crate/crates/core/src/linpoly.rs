//! F_q-linearized polynomials Σ aᵢX^{qⁱ} over F_{q^N}: evaluation, q-degrees,
//! the induced F_q-linear map (matrix, rank, kernel), and composition mod
//! X^{q^N}−X.

use std::fmt;
use std::sync::Arc;

use crate::gf::{Felt, FieldCtx, GfError};

/// A linearized polynomial, stored as the full coefficient vector
/// a_0..a_{N-1} (a_i multiplies X^{q^i}).
#[derive(Clone, PartialEq, Eq)]
pub struct LinPoly {
    ctx: Arc<FieldCtx>,
    coeffs: Vec<Felt>,
}

impl fmt::Debug for LinPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_literal())
    }
}

impl LinPoly {
    /// Builds from (q-degree, coefficient) pairs; later duplicates add up.
    pub fn from_terms(ctx: &Arc<FieldCtx>, terms: &[(u32, Felt)]) -> Result<LinPoly, GfError> {
        let n = ctx.ext_degree() as usize;
        let mut coeffs = vec![ctx.zero(); n];
        for (i, c) in terms {
            if !c.same_ctx(&ctx.zero()) {
                return Err(GfError::ContextMismatch);
            }
            let slot = (*i as usize) % n;
            coeffs[slot] = &coeffs[slot] + c;
        }
        Ok(LinPoly { ctx: Arc::clone(ctx), coeffs })
    }

    pub fn zero(ctx: &Arc<FieldCtx>) -> LinPoly {
        LinPoly { ctx: Arc::clone(ctx), coeffs: vec![ctx.zero(); ctx.ext_degree() as usize] }
    }

    /// The monomial c·X^{q^i}.
    pub fn monomial(ctx: &Arc<FieldCtx>, i: u32, c: Felt) -> LinPoly {
        Self::from_terms(ctx, &[(i, c)]).expect("monomial coefficient context")
    }

    /// X itself (the identity map).
    pub fn identity(ctx: &Arc<FieldCtx>) -> LinPoly {
        Self::monomial(ctx, 0, ctx.one())
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[Felt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: u32) -> &Felt {
        &self.coeffs[i as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn eval(&self, x: &Felt) -> Felt {
        assert!(x.same_ctx(&self.ctx.zero()), "context mismatch in evaluation");
        let mut acc = self.ctx.zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc = acc + c * &x.frobenius(i as i64);
            }
        }
        acc
    }

    pub fn qdeg(&self) -> Result<u32, GfError> {
        self.coeffs
            .iter()
            .rposition(|c| !c.is_zero())
            .map(|i| i as u32)
            .ok_or(GfError::ZeroPolynomial)
    }

    pub fn min_qdeg(&self) -> Result<u32, GfError> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| i as u32)
            .ok_or(GfError::ZeroPolynomial)
    }

    pub fn scale(&self, c: &Felt) -> LinPoly {
        LinPoly {
            ctx: Arc::clone(&self.ctx),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn add(&self, other: &LinPoly) -> LinPoly {
        assert_eq!(self.ctx.id(), other.ctx.id(), "context mismatch");
        LinPoly {
            ctx: Arc::clone(&self.ctx),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &LinPoly) -> LinPoly {
        assert_eq!(self.ctx.id(), other.ctx.id(), "context mismatch");
        LinPoly {
            ctx: Arc::clone(&self.ctx),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    /// x ↦ self(other(x)), exponents reduced mod X^{q^N}−X:
    /// c_k = Σ_{i+j ≡ k (mod N)} a_i · b_j^{q^i}.
    pub fn compose(&self, other: &LinPoly) -> LinPoly {
        assert_eq!(self.ctx.id(), other.ctx.id(), "context mismatch");
        let n = self.coeffs.len();
        let mut out = vec![self.ctx.zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let k = (i + j) % n;
                out[k] = &out[k] + &(a * &b.frobenius(i as i64));
            }
        }
        LinPoly { ctx: Arc::clone(&self.ctx), coeffs: out }
    }

    /// Matrix of x ↦ L(x) over F_q in the polynomial basis 1, β, …, β^{N-1};
    /// entry (i,j) is the i-th F_q-coordinate of L(β^j).
    pub fn matrix(&self) -> Vec<Vec<Felt>> {
        let n = self.coeffs.len();
        let beta = if self.ctx.order() == self.ctx.p() {
            self.ctx.one()
        } else {
            self.ctx.felt(self.ctx.p())
        };
        let mut cols = Vec::with_capacity(n);
        let mut bp = self.ctx.one();
        for _ in 0..n {
            cols.push(self.ctx.fq_coords(&self.eval(&bp)));
            bp = &bp * &beta;
        }
        (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect()
    }

    /// Rank of the induced F_q-linear map. Computed by Gaussian elimination
    /// on images of the basis; rank over F_{q^N} equals rank over F_q since
    /// the matrix entries lie in F_q.
    pub fn rank(&self) -> u32 {
        let n = self.coeffs.len();
        let m = self.matrix();
        let mut rows: Vec<Vec<Felt>> = m;
        let mut rank = 0usize;
        let mut col = 0usize;
        while col < n && rank < n {
            if let Some(piv) = (rank..n).find(|&r| !rows[r][col].is_zero()) {
                rows.swap(rank, piv);
                let inv = rows[rank][col].inv();
                for c in col..n {
                    rows[rank][c] = &rows[rank][c] * &inv;
                }
                for r in 0..n {
                    if r != rank && !rows[r][col].is_zero() {
                        let f = rows[r][col].clone();
                        for c in col..n {
                            let sub = &f * &rows[rank][c];
                            rows[r][c] = &rows[r][c] - &sub;
                        }
                    }
                }
                rank += 1;
            }
            col += 1;
        }
        rank as u32
    }

    pub fn kernel_dim(&self) -> u32 {
        self.ctx.ext_degree() - self.rank()
    }

    /// "coeff*x^q^i; ..." literal, omitting zero terms ("0" if all zero).
    pub fn to_literal(&self) -> String {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("{}*x^q^{}", c.to_literal(), i))
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("; ")
        }
    }

    /// Parses the literal format of [`to_literal`](Self::to_literal).
    pub fn parse(ctx: &Arc<FieldCtx>, s: &str) -> Result<LinPoly, GfError> {
        let s = s.trim();
        if s == "0" {
            return Ok(LinPoly::zero(ctx));
        }
        let mut terms = Vec::new();
        for part in s.split(';') {
            let part = part.trim();
            let (coeff_s, exp_s) = part
                .split_once("*x^q^")
                .ok_or_else(|| GfError::BadElementLiteral(part.into()))?;
            let c = ctx.parse_element(coeff_s)?;
            let i: u32 = exp_s
                .trim()
                .parse()
                .map_err(|_| GfError::BadElementLiteral(part.into()))?;
            if i >= ctx.ext_degree() {
                return Err(GfError::BadElementLiteral(part.into()));
            }
            terms.push((i, c));
        }
        LinPoly::from_terms(ctx, &terms)
    }

    /// Serialization as sorted (i, coeff-index) pairs for the JSON reports.
    pub fn to_pairs(&self) -> Vec<(u32, u64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i as u32, c.index()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldCtx;

    fn f81() -> Arc<FieldCtx> {
        FieldCtx::new(3, 1, 4, None).unwrap()
    }

    #[test]
    fn eval_monomial_at_one() {
        let ctx = f81();
        let l = LinPoly::monomial(&ctx, 1, ctx.one());
        assert!(l.eval(&ctx.one()).is_one());
    }

    #[test]
    fn eval_is_additive() {
        let ctx = f81();
        let delta = ctx.generator();
        let f = LinPoly::from_terms(&ctx, &[(0, ctx.one()), (2, delta)]).unwrap();
        let xs: Vec<_> = ctx.elements().collect();
        for i in (0..81).step_by(5) {
            for j in (0..81).step_by(7) {
                let (x, y) = (&xs[i], &xs[j]);
                assert_eq!(f.eval(&(x + y)), f.eval(x) + f.eval(y));
            }
        }
    }

    #[test]
    fn eval_matches_direct_powers() {
        // F = X + δX^{q^2} in F_81, δ = g, at x = g: compare against
        // brute-force exponentiation
        let ctx = f81();
        let g = ctx.generator();
        let f = LinPoly::from_terms(&ctx, &[(0, ctx.one()), (2, g.clone())]).unwrap();
        let mut x9 = g.clone();
        for _ in 0..8 {
            x9 = &x9 * &g; // g^9
        }
        assert_eq!(f.eval(&g), &g + &(&g * &x9));
    }

    #[test]
    fn qdeg_and_min_qdeg() {
        let ctx = FieldCtx::new(3, 1, 6, None).unwrap();
        let t = 1u32;
        let delta = ctx.generator();
        // X + δX^{q^{2t}}
        let f = LinPoly::from_terms(&ctx, &[(0, ctx.one()), (2 * t, delta)]).unwrap();
        assert_eq!(f.qdeg().unwrap(), 2 * t);
        assert_eq!(f.min_qdeg().unwrap(), 0);
        let m = LinPoly::monomial(&ctx, t, ctx.one());
        assert_eq!(m.qdeg().unwrap(), t);
        assert_eq!(m.min_qdeg().unwrap(), t);
        // G = X^{q^2} + C X^{q^4}
        let g = LinPoly::from_terms(&ctx, &[(2, ctx.one()), (4, ctx.generator())]).unwrap();
        assert_eq!(g.qdeg().unwrap(), 4);
        assert_eq!(g.min_qdeg().unwrap(), 2);
        assert!(LinPoly::zero(&ctx).qdeg().is_err());
    }

    #[test]
    fn identity_has_full_rank() {
        let ctx = f81();
        let l = LinPoly::identity(&ctx);
        assert_eq!(l.rank(), 4);
        assert_eq!(l.kernel_dim(), 0);
    }

    #[test]
    fn frobenius_monomial_is_bijective() {
        let ctx = FieldCtx::new(2, 1, 5, None).unwrap();
        for d in 1..5 {
            let l = LinPoly::monomial(&ctx, d, ctx.one());
            assert_eq!(l.rank(), 5);
        }
    }

    #[test]
    fn trace_map_has_rank_one() {
        let ctx = f81();
        let terms: Vec<(u32, Felt)> = (0..4).map(|i| (i, ctx.one())).collect();
        let tr = LinPoly::from_terms(&ctx, &terms).unwrap();
        assert_eq!(tr.rank(), 1);
        assert_eq!(tr.kernel_dim(), 3);
        // oracle: brute-force kernel count q^{kernel_dim}
        let kcount = ctx.elements().filter(|x| tr.eval(x).is_zero()).count();
        assert_eq!(kcount, 27);
    }

    #[test]
    fn kernel_dim_matches_bruteforce() {
        let ctx = f81();
        let g = ctx.generator();
        let samples = [
            LinPoly::from_terms(&ctx, &[(0, ctx.one()), (2, g.clone())]).unwrap(),
            LinPoly::from_terms(&ctx, &[(0, -ctx.one()), (2, ctx.one())]).unwrap(),
            LinPoly::from_terms(&ctx, &[(1, g.pow(5)), (3, g.pow(11))]).unwrap(),
            LinPoly::from_terms(&ctx, &[(0, ctx.one()), (1, ctx.one()), (2, ctx.one())]).unwrap(),
        ];
        for l in &samples {
            let count = ctx.elements().filter(|x| l.eval(x).is_zero()).count() as u32;
            let q = ctx.q() as u32;
            assert_eq!(q.pow(l.kernel_dim()), count);
        }
    }

    #[test]
    fn rank_nullity_on_random_polys() {
        let ctx = FieldCtx::new(2, 1, 4, None).unwrap();
        let mut s: u64 = 99;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 33) % ctx.order()
        };
        for _ in 0..200 {
            let terms: Vec<(u32, Felt)> = (0..4).map(|i| (i, ctx.felt(next()))).collect();
            let l = LinPoly::from_terms(&ctx, &terms).unwrap();
            assert_eq!(l.rank() + l.kernel_dim(), 4);
            let count = ctx.elements().filter(|x| l.eval(x).is_zero()).count() as u32;
            assert_eq!(2u32.pow(l.kernel_dim()), count);
        }
    }

    #[test]
    fn compose_with_identity() {
        let ctx = f81();
        let g = ctx.generator();
        let l = LinPoly::from_terms(&ctx, &[(0, g.clone()), (3, g.pow(7))]).unwrap();
        let id = LinPoly::identity(&ctx);
        assert_eq!(l.compose(&id), l);
        assert_eq!(id.compose(&l), l);
    }

    #[test]
    fn compose_monomials_adds_exponents() {
        let ctx = f81();
        let xq = LinPoly::monomial(&ctx, 1, ctx.one());
        let xq2 = LinPoly::monomial(&ctx, 2, ctx.one());
        assert_eq!(xq.compose(&xq), xq2);
    }

    #[test]
    fn compose_matches_evaluation() {
        let ctx = FieldCtx::new(3, 1, 4, None).unwrap();
        let mut s: u64 = 7;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 33) % ctx.order()
        };
        for _ in 0..30 {
            let l = LinPoly::from_terms(
                &ctx,
                &(0..4).map(|i| (i, ctx.felt(next()))).collect::<Vec<_>>(),
            )
            .unwrap();
            let m = LinPoly::from_terms(
                &ctx,
                &(0..4).map(|i| (i, ctx.felt(next()))).collect::<Vec<_>>(),
            )
            .unwrap();
            let lm = l.compose(&m);
            for x in ctx.elements() {
                assert_eq!(lm.eval(&x), l.eval(&m.eval(&x)));
            }
        }
    }

    #[test]
    fn compose_qdeg_no_wraparound() {
        let ctx = FieldCtx::new(2, 1, 5, None).unwrap();
        let l = LinPoly::from_terms(&ctx, &[(0, ctx.one()), (2, ctx.generator())]).unwrap();
        let m = LinPoly::from_terms(&ctx, &[(1, ctx.one())]).unwrap();
        assert_eq!(l.compose(&m).qdeg().unwrap(), 3);
    }

    #[test]
    fn literal_round_trip() {
        let ctx = f81();
        let g = ctx.generator();
        let l = LinPoly::from_terms(&ctx, &[(0, ctx.one()), (2, g.pow(7))]).unwrap();
        let lit = l.to_literal();
        assert_eq!(lit, "1*x^q^0; g^7*x^q^2");
        assert_eq!(LinPoly::parse(&ctx, &lit).unwrap(), l);
        assert_eq!(LinPoly::parse(&ctx, "0").unwrap(), LinPoly::zero(&ctx));
        assert!(LinPoly::parse(&ctx, "1*x^q^9").is_err());
        assert!(LinPoly::parse(&ctx, "junk").is_err());
    }

    #[test]
    fn matrix_entries_lie_in_fq() {
        let ctx = FieldCtx::new(2, 2, 2, None).unwrap(); // F_16 over F_4
        let l = LinPoly::from_terms(&ctx, &[(0, ctx.generator()), (1, ctx.one())]).unwrap();
        for row in l.matrix() {
            for entry in row {
                assert!(entry.in_subfield(1));
            }
        }
        assert_eq!(l.rank() + l.kernel_dim(), 2);
        let count = ctx.elements().filter(|x| l.eval(x).is_zero()).count() as u32;
        assert_eq!(4u32.pow(l.kernel_dim()), count);
    }
}
