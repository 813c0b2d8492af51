//! Sparse polynomials in X, Y, Z over a finite field, with the operations the
//! curve engine needs: specialization, translation (characteristic-p aware),
//! exact division by linear forms, homogeneous parts, quadratic transforms,
//! and square-freeness of binary forms.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::gf::{Felt, FieldCtx};

pub const VAR_NAMES: [&str; 3] = ["X", "Y", "Z"];

/// Sparse trivariate polynomial: exponent vector -> element index of the
/// (nonzero) coefficient.
#[derive(Clone, PartialEq, Eq)]
pub struct MPoly {
    ctx: Arc<FieldCtx>,
    terms: BTreeMap<[u32; 3], u32>,
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, &c)| {
                let mut s = self.ctx.felt(c as u64).to_literal();
                for (v, &exp) in e.iter().enumerate() {
                    if exp > 0 {
                        s.push_str(&format!("*{}^{}", VAR_NAMES[v], exp));
                    }
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl MPoly {
    pub fn zero(ctx: &Arc<FieldCtx>) -> MPoly {
        MPoly { ctx: Arc::clone(ctx), terms: BTreeMap::new() }
    }

    pub fn constant(ctx: &Arc<FieldCtx>, c: &Felt) -> MPoly {
        let mut p = MPoly::zero(ctx);
        p.add_term([0, 0, 0], c);
        p
    }

    /// c · X^e0 Y^e1 Z^e2
    pub fn monomial(ctx: &Arc<FieldCtx>, e: [u32; 3], c: &Felt) -> MPoly {
        let mut p = MPoly::zero(ctx);
        p.add_term(e, c);
        p
    }

    /// The bare variable `v`.
    pub fn var(ctx: &Arc<FieldCtx>, v: usize) -> MPoly {
        let mut e = [0u32; 3];
        e[v] = 1;
        MPoly::monomial(ctx, e, &ctx.one())
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = ([u32; 3], Felt)> + '_ {
        self.terms.iter().map(|(e, &c)| (*e, self.ctx.felt(c as u64)))
    }

    pub fn coeff(&self, e: [u32; 3]) -> Felt {
        self.ctx.felt(self.terms.get(&e).copied().unwrap_or(0) as u64)
    }

    /// Adds `c` into the coefficient at `e`, dropping the term if it cancels.
    pub fn add_term(&mut self, e: [u32; 3], c: &Felt) {
        if c.is_zero() {
            return;
        }
        let cur = self.terms.get(&e).copied().unwrap_or(0);
        let sum = &self.ctx.felt(cur as u64) + c;
        if sum.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, sum.index() as u32);
        }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e, &c);
        }
        out
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e, &-&c);
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        let mut out = MPoly::zero(&self.ctx);
        for (e, c) in self.terms() {
            out.add_term(e, &-&c);
        }
        out
    }

    pub fn scale(&self, c: &Felt) -> MPoly {
        let mut out = MPoly::zero(&self.ctx);
        for (e, a) in self.terms() {
            out.add_term(e, &(&a * c));
        }
        out
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        let mut out = MPoly::zero(&self.ctx);
        for (ea, ca) in self.terms() {
            for (eb, cb) in other.terms() {
                out.add_term([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], &(&ca * &cb));
            }
        }
        out
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn min_total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    pub fn degree_in(&self, v: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[v]).max()
    }

    /// The homogeneous part of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> MPoly {
        let mut out = MPoly::zero(&self.ctx);
        for (e, c) in self.terms() {
            if e.iter().sum::<u32>() == d {
                out.add_term(e, &c);
            }
        }
        out
    }

    /// All nonzero homogeneous parts, lowest degree first.
    pub fn homogeneous_parts(&self) -> Vec<(u32, MPoly)> {
        let mut map: BTreeMap<u32, MPoly> = BTreeMap::new();
        for (e, c) in self.terms() {
            map.entry(e.iter().sum())
                .or_insert_with(|| MPoly::zero(&self.ctx))
                .add_term(e, &c);
        }
        map.into_iter().collect()
    }

    pub fn eval(&self, point: &[Felt; 3]) -> Felt {
        let mut acc = self.ctx.zero();
        for (e, c) in self.terms() {
            let mut term = c;
            for (v, &exp) in e.iter().enumerate() {
                if exp > 0 {
                    term = &term * &point[v].pow(exp as i64);
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// Substitutes the constant `val` for variable `v`.
    pub fn specialize(&self, v: usize, val: &Felt) -> MPoly {
        let mut out = MPoly::zero(&self.ctx);
        for (e, c) in self.terms() {
            let mut ne = e;
            ne[v] = 0;
            let factor = if e[v] == 0 { c } else { &c * &val.pow(e[v] as i64) };
            out.add_term(ne, &factor);
        }
        out
    }

    /// self^{p^i} computed termwise — valid in characteristic p.
    fn frob_pow(&self, i: u32) -> MPoly {
        let pi = self.ctx.p().pow(i) as i64;
        let m = pi as u32;
        let mut out = MPoly::zero(&self.ctx);
        for (e, c) in self.terms() {
            out.add_term([e[0] * m, e[1] * m, e[2] * m], &c.pow(pi));
        }
        out
    }

    /// self^n via base-p digits of n: ∏ (self^{p^i})^{n_i}, exploiting the
    /// termwise Frobenius power. Far sparser than repeated squaring when the
    /// base has few terms.
    pub fn pow(&self, n: u32) -> MPoly {
        if n == 0 {
            return MPoly::constant(&self.ctx, &self.ctx.one());
        }
        let p = self.ctx.p() as u32;
        let mut out = MPoly::constant(&self.ctx, &self.ctx.one());
        let mut n = n;
        let mut i = 0u32;
        while n > 0 {
            let digit = n % p;
            if digit > 0 {
                let block = self.frob_pow(i);
                for _ in 0..digit {
                    out = out.mul(&block);
                }
            }
            n /= p;
            i += 1;
        }
        out
    }

    /// P with variable `v` replaced by `v + shift`.
    pub fn translate_var(&self, v: usize, shift: &Felt) -> MPoly {
        if shift.is_zero() {
            return self.clone();
        }
        // group by the exponent of v, expand (v + shift)^a once per distinct a
        let base = MPoly::var(&self.ctx, v).add(&MPoly::constant(&self.ctx, shift));
        let mut cache: BTreeMap<u32, MPoly> = BTreeMap::new();
        let mut out = MPoly::zero(&self.ctx);
        for (e, c) in self.terms() {
            let a = e[v];
            let expanded = cache.entry(a).or_insert_with(|| base.pow(a)).clone();
            let mut rest = e;
            rest[v] = 0;
            out = out.add(&expanded.mul(&MPoly::monomial(&self.ctx, rest, &c)));
        }
        out
    }

    /// P translated to the affine point: P(X+x̄, Y+ȳ, Z+z̄).
    pub fn translate(&self, shift: &[Felt; 3]) -> MPoly {
        self.translate_var(0, &shift[0]).translate_var(1, &shift[1]).translate_var(2, &shift[2])
    }

    /// P with variable `v` replaced by `v + c·u` (a shear).
    pub fn shear(&self, v: usize, u: usize, c: &Felt) -> MPoly {
        if c.is_zero() {
            return self.clone();
        }
        let base = MPoly::var(&self.ctx, v).add(&MPoly::var(&self.ctx, u).scale(c));
        let mut cache: BTreeMap<u32, MPoly> = BTreeMap::new();
        let mut out = MPoly::zero(&self.ctx);
        for (e, co) in self.terms() {
            let a = e[v];
            let expanded = cache.entry(a).or_insert_with(|| base.pow(a)).clone();
            let mut rest = e;
            rest[v] = 0;
            out = out.add(&expanded.mul(&MPoly::monomial(&self.ctx, rest, &co)));
        }
        out
    }

    pub fn derivative(&self, v: usize) -> MPoly {
        let mut out = MPoly::zero(&self.ctx);
        for (e, c) in self.terms() {
            if e[v] == 0 {
                continue;
            }
            let scalar = self.ctx.from_prime(e[v] as u64 % self.ctx.p());
            if scalar.is_zero() {
                continue;
            }
            let mut ne = e;
            ne[v] -= 1;
            out.add_term(ne, &(&c * &scalar));
        }
        out
    }

    /// Division with remainder by a polynomial of total degree 1. The
    /// quotient is computed by eliminating the main variable (the first one
    /// appearing in the divisor); the remainder is free of that variable.
    pub fn div_rem_linear(&self, l: &MPoly) -> (MPoly, MPoly) {
        assert_eq!(l.total_degree(), Some(1), "divisor must have degree 1");
        let v = (0..3)
            .find(|&v| l.degree_in(v) == Some(1))
            .expect("a degree-1 polynomial involves a variable");
        let mut ev = [0u32; 3];
        ev[v] = 1;
        let a = l.coeff(ev);
        let a_inv = a.inv();
        let mut rem = self.clone();
        let mut quo = MPoly::zero(&self.ctx);
        loop {
            let d = match rem.degree_in(v) {
                Some(d) if d >= 1 => d,
                _ => break,
            };
            // leading v-part: all terms with exponent d in v
            let mut lead = MPoly::zero(&self.ctx);
            for (e, c) in rem.terms() {
                if e[v] == d {
                    let mut ne = e;
                    ne[v] = d - 1;
                    lead.add_term(ne, &(&c * &a_inv));
                }
            }
            quo = quo.add(&lead);
            rem = rem.sub(&lead.mul(l));
        }
        (quo, rem)
    }

    /// Exact division; `None` when the remainder is nonzero.
    pub fn div_exact_linear(&self, l: &MPoly) -> Option<MPoly> {
        let (q, r) = self.div_rem_linear(l);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    /// Quadratic (geometric) transform along `x_var`: substitutes
    /// `y_var ↦ x_var·y_var` and divides by `x_var^m`. Requires every term to
    /// keep a non-negative exponent (guaranteed when m is the multiplicity at
    /// the origin in these two variables).
    pub fn quad_transform(&self, x_var: usize, y_var: usize, m: u32) -> MPoly {
        let mut out = MPoly::zero(&self.ctx);
        for (e, c) in self.terms() {
            let mut ne = e;
            let total = e[x_var] + e[y_var];
            assert!(total >= m, "multiplicity exceeds term degree in quadratic transform");
            ne[x_var] = total - m;
            out.add_term(ne, &c);
        }
        out
    }

    /// Homogenizes a polynomial in `x_var`, `y_var` (third variable unused)
    /// to total degree `d` using `z_var`.
    pub fn homogenize(&self, z_var: usize, d: u32) -> MPoly {
        let mut out = MPoly::zero(&self.ctx);
        for (e, c) in self.terms() {
            let cur: u32 = e.iter().sum();
            assert!(cur <= d && e[z_var] == 0, "cannot homogenize to degree {d}");
            let mut ne = e;
            ne[z_var] = d - cur;
            out.add_term(ne, &c);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Dense univariate helpers (coefficients low to high) for binary-form tests.
// ---------------------------------------------------------------------------

pub(crate) fn utrim(v: &mut Vec<Felt>) {
    while v.last().map(|c| c.is_zero()) == Some(true) {
        v.pop();
    }
}

pub(crate) fn uderiv(ctx: &Arc<FieldCtx>, f: &[Felt]) -> Vec<Felt> {
    let mut out = Vec::new();
    for (i, c) in f.iter().enumerate().skip(1) {
        let s = ctx.from_prime(i as u64 % ctx.p());
        out.push(c * &s);
    }
    utrim(&mut out);
    out
}

pub(crate) fn urem(f: &[Felt], g: &[Felt]) -> Vec<Felt> {
    let mut r = f.to_vec();
    utrim(&mut r);
    let dg = g.len() - 1;
    let lead_inv = g[dg].inv();
    while r.len() > dg {
        let dr = r.len() - 1;
        let c = &r[dr] * &lead_inv;
        for i in 0..=dg {
            let sub = &c * &g[i];
            r[dr - dg + i] = &r[dr - dg + i] - &sub;
        }
        utrim(&mut r);
        if dg == 0 {
            break;
        }
    }
    r
}

pub(crate) fn ugcd(f: &[Felt], g: &[Felt]) -> Vec<Felt> {
    let mut a = f.to_vec();
    let mut b = g.to_vec();
    utrim(&mut a);
    utrim(&mut b);
    while !b.is_empty() {
        let r = urem(&a, &b);
        a = b;
        b = r;
    }
    a
}

/// Square-freeness of a homogeneous binary form in variables `x_var`,
/// `y_var`. A form is separable iff it has no repeated linear factor over
/// the closure: the dehomogenization f(T) = F(T,1) must be square-free and
/// the factor `x_var` (if present) must be simple. A vanishing derivative
/// with nonconstant f means f is a p-th power, hence not square-free.
pub fn binary_form_squarefree(form: &MPoly, x_var: usize, y_var: usize) -> bool {
    let ctx = form.ctx().clone();
    let d = match form.total_degree() {
        Some(d) => d,
        None => return true, // zero form: vacuous
    };
    // coefficient of x^i y^{d-i}
    let mut f = vec![ctx.zero(); d as usize + 1];
    for (e, c) in form.terms() {
        f[e[x_var] as usize] = c;
    }
    let mut fv = f;
    // multiplicity of the y_var linear factor = lowest index with nonzero coeff
    let low = fv.iter().position(|c| !c.is_zero()).unwrap_or(0);
    if low > 1 {
        return false; // y-factor... actually x_var-low => divisible by y^? see below
    }
    // dividing out T^low leaves the T-free part; T | f with multiplicity low
    // corresponds to the linear factor x_var (f collects x-exponents).
    let _ = y_var;
    fv.drain(..low);
    utrim(&mut fv);
    // multiplicity of the x_var=0 factor (i.e. y_var | form): degree deficit
    let deg_f = fv.len() - 1;
    let y_mult = d as usize - deg_f - low;
    if y_mult > 1 {
        return false;
    }
    if deg_f == 0 {
        return true;
    }
    let der = uderiv(&ctx, &fv);
    if der.is_empty() {
        return false; // p-th power
    }
    ugcd(&fv, &der).len() == 1
}

/// Distinct linear factors count of a square-free binary form whose roots lie
/// in the field: roots of F(T,1) plus the `x_var = 0` factor when present.
/// Returns `None` when the form does not split completely over the field.
pub fn binary_form_distinct_roots(form: &MPoly, x_var: usize) -> Option<Vec<Option<Felt>>> {
    let ctx = form.ctx().clone();
    let d = form.total_degree()?;
    let mut f = vec![ctx.zero(); d as usize + 1];
    for (e, c) in form.terms() {
        f[e[x_var] as usize] = c;
    }
    let mut fv = f;
    utrim(&mut fv);
    let deg_f = fv.len() - 1;
    let y_mult = d as usize - deg_f;
    // roots of F(T,1); each root τ gives the factor (x_var − τ·y_var)
    let roots = crate::gf::poly_roots(&ctx, &fv).ok()?;
    if roots.len() != deg_f {
        return None; // does not split (or has repeated factors) over this field
    }
    let mut out: Vec<Option<Felt>> = roots.into_iter().map(Some).collect();
    if y_mult >= 1 {
        out.push(None); // the factor x_var = 0
    }
    Some(out)
}
