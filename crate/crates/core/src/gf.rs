//! Arithmetic in finite-field towers `F_p ⊆ F_q = F_{p^e} ⊆ F_{q^N}`.
//!
//! A [`FieldCtx`] fixes one concrete model of `F_{q^N}`: a monic irreducible
//! modulus of degree `e·N` over `F_p` (searched deterministically when not
//! supplied) and a multiplicative generator. Elements are indices in
//! `[0, q^N)` interpreting the polynomial-basis coefficient vector base `p`,
//! so element I/O is exact and reproducible across runs. Multiplication,
//! inversion, powers, Frobenius and norms all run on discrete logarithms
//! w.r.t. the fixed generator.
//!
//! The tower is desk-scale by design: `q^N` is capped (see
//! [`FieldCtx::MAX_FIELD_SIZE`]) and root finding is full enumeration.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

/// Hard cap on `q^N`; enumeration-based operations stay feasible below it.
const MAX_FIELD_SIZE: u64 = 2_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GfError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u64),
    #[error("supplied modulus is reducible over F_{0}")]
    ReducibleModulus(u64),
    #[error("modulus degree {got} does not match e*N = {want}")]
    DegreeMismatch { got: usize, want: usize },
    #[error("field size {0} exceeds the desk-scale cap {MAX_FIELD_SIZE}")]
    FieldTooLarge(u64),
    #[error("degree {0} does not divide the extension degree {1}")]
    DegreeNotDividing(usize, usize),
    #[error("the zero polynomial has no roots/degree")]
    ZeroPolynomial,
    #[error("elements belong to different field contexts")]
    ContextMismatch,
    #[error("element literal {0:?} is malformed")]
    BadElementLiteral(String),
    #[error("field spec {0:?} is malformed")]
    BadFieldSpec(String),
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// ---------------------------------------------------------------------------
// Dense polynomial arithmetic over F_p, used only at context-build time.
// ---------------------------------------------------------------------------

fn fp_trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn fp_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ai as u64 * bj as u64) % p as u64;
        }
    }
    let mut out: Vec<u32> = out.into_iter().map(|c| c as u32).collect();
    fp_trim(&mut out);
    out
}

fn fp_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    fp_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = fp_inv_scalar(m[dm], p);
    while r.len() > dm {
        let dr = r.len() - 1;
        let c = (r[dr] as u64 * lead_inv as u64 % p as u64) as u32;
        for i in 0..=dm {
            let idx = dr - dm + i;
            let sub = c as u64 * m[i] as u64 % p as u64;
            r[idx] = ((r[idx] as u64 + p as u64 - sub) % p as u64) as u32;
        }
        fp_trim(&mut r);
    }
    r
}

fn fp_inv_scalar(a: u32, p: u32) -> u32 {
    // Fermat; p is prime and a != 0.
    let mut base = a as u64 % p as u64;
    let mut exp = p as u64 - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    acc as u32
}

fn fp_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    fp_trim(&mut a);
    fp_trim(&mut b);
    while !b.is_empty() {
        let r = fp_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// x^(p^k) mod m, by repeated exponentiation-by-squaring of x^p.
fn fp_xpow_pk(k: u32, m: &[u32], p: u32) -> Vec<u32> {
    let mut cur = vec![0, 1]; // x
    for _ in 0..k {
        // cur <- cur^p mod m
        let mut acc = vec![1u32];
        let mut base = cur.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = fp_rem(&fp_mul(&acc, &base, p), m, p);
            }
            base = fp_rem(&fp_mul(&base, &base, p), m, p);
            e >>= 1;
        }
        cur = acc;
    }
    cur
}

fn fp_is_irreducible(m: &[u32], p: u32) -> bool {
    let d = m.len() - 1;
    if d == 0 {
        return false;
    }
    // x^(p^d) == x mod m
    let xpd = fp_xpow_pk(d as u32, m, p);
    let mut x_minus = xpd;
    // subtract x
    if x_minus.len() < 2 {
        x_minus.resize(2, 0);
    }
    x_minus[1] = ((x_minus[1] as u64 + p as u64 - 1) % p as u64) as u32;
    fp_trim(&mut x_minus);
    // subtracting x can push the degree back up to deg m when d = 1
    let x_minus = fp_rem(&x_minus, m, p);
    if !x_minus.is_empty() {
        return false;
    }
    for r in prime_factors(d as u64) {
        let k = d as u64 / r;
        let mut diff = fp_xpow_pk(k as u32, m, p);
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] = ((diff[1] as u64 + p as u64 - 1) % p as u64) as u32;
        fp_trim(&mut diff);
        let g = fp_gcd(m, &diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// FieldCtx
// ---------------------------------------------------------------------------

static CTX_COUNTER: AtomicU64 = AtomicU64::new(0);

/// An immutable model of the tower `F_p ⊆ F_{p^e} = F_q ⊆ F_{q^N}`.
pub struct FieldCtx {
    id: u64,
    p: u32,
    e: u32,
    n_ext: u32,
    /// total F_p-degree, `e * N`
    d: u32,
    /// `q = p^e`
    q: u64,
    /// `q^N = p^d`
    size: u64,
    modulus: Vec<u32>,
    generator_idx: u32,
    /// exp[j] = index of g^j, j in [0, size-1)
    exp: Vec<u32>,
    /// log[idx] = j with g^j = element idx; log[0] is a sentinel
    log: Vec<u32>,
    /// inverse of the F_p matrix whose columns are digits(zeta^l * beta^j)
    coord_inv: Vec<Vec<u32>>,
    /// generator of F_q^*, g^((size-1)/(q-1))
    subfield_gen_idx: u32,
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for FieldCtx {}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldCtx(p={}, e={}, N={}, size={})", self.p, self.e, self.n_ext, self.size)
    }
}

impl FieldCtx {
    pub const MAX_FIELD_SIZE: u64 = MAX_FIELD_SIZE;

    /// Build the tower `F_p ⊆ F_{p^e} ⊆ F_{(p^e)^N}`.
    ///
    /// When `modulus` is `None`, the monic irreducible polynomial of degree
    /// `e·N` with the smallest base-`p` encoding of its non-leading
    /// coefficients is used, so the element indexing is reproducible.
    pub fn new(p: u64, e: u32, n_ext: u32, modulus: Option<Vec<u32>>) -> Result<Arc<FieldCtx>, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if e == 0 || n_ext == 0 {
            return Err(GfError::DegreeMismatch { got: 0, want: 1 });
        }
        let d = e * n_ext;
        let mut size: u64 = 1;
        for _ in 0..d {
            size = size.saturating_mul(p);
            if size > MAX_FIELD_SIZE {
                return Err(GfError::FieldTooLarge(size));
            }
        }
        let p = p as u32;
        let modulus = match modulus {
            Some(mut m) => {
                fp_trim(&mut m);
                if m.len() != d as usize + 1 || m[d as usize] != 1 {
                    return Err(GfError::DegreeMismatch { got: m.len().saturating_sub(1), want: d as usize });
                }
                if m.iter().any(|&c| c >= p) {
                    return Err(GfError::ReducibleModulus(p as u64));
                }
                if !fp_is_irreducible(&m, p) {
                    return Err(GfError::ReducibleModulus(p as u64));
                }
                m
            }
            None => Self::find_modulus(p, d),
        };

        let mut ctx = FieldCtx {
            id: CTX_COUNTER.fetch_add(1, Ordering::Relaxed),
            p,
            e,
            n_ext,
            d,
            q: (p as u64).pow(e),
            size,
            modulus,
            generator_idx: 0,
            exp: Vec::new(),
            log: Vec::new(),
            coord_inv: Vec::new(),
            subfield_gen_idx: 0,
        };
        ctx.find_generator();
        ctx.build_tables();
        ctx.build_coord_solver();
        Ok(Arc::new(ctx))
    }

    fn find_modulus(p: u32, d: u32) -> Vec<u32> {
        // Non-leading coefficients enumerated by base-p index, low digit =
        // constant term; the first irreducible wins.
        let mut lower: u64 = 0;
        loop {
            let mut m = vec![0u32; d as usize + 1];
            let mut v = lower;
            for c in m.iter_mut().take(d as usize) {
                *c = (v % p as u64) as u32;
                v /= p as u64;
            }
            m[d as usize] = 1;
            if fp_is_irreducible(&m, p) {
                return m;
            }
            lower += 1;
        }
    }

    // digit-vector arithmetic (index <-> base-p digits of length d)

    fn idx_to_digits(&self, idx: u32) -> Vec<u32> {
        let mut v = idx as u64;
        let mut out = vec![0u32; self.d as usize];
        for c in out.iter_mut() {
            *c = (v % self.p as u64) as u32;
            v /= self.p as u64;
        }
        out
    }

    fn digits_to_idx(&self, digits: &[u32]) -> u32 {
        let mut idx: u64 = 0;
        for &c in digits.iter().rev() {
            idx = idx * self.p as u64 + c as u64;
        }
        idx as u32
    }

    fn mul_digits(&self, a: u32, b: u32) -> u32 {
        let da = self.idx_to_digits(a);
        let db = self.idx_to_digits(b);
        let prod = fp_mul(&da, &db, self.p);
        let mut r = fp_rem(&prod, &self.modulus, self.p);
        r.resize(self.d as usize, 0);
        self.digits_to_idx(&r)
    }

    fn pow_digits(&self, base: u32, mut exp: u64) -> u32 {
        let mut acc = 1u32; // element 1 has index 1
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_digits(acc, b);
            }
            b = self.mul_digits(b, b);
            exp >>= 1;
        }
        acc
    }

    fn find_generator(&mut self) {
        let order = self.size - 1;
        let factors = prime_factors(order);
        // start at the modulus root beta (index p); degree-1 fields have no
        // element beyond the prime ones, so scan those instead
        let start = if self.d == 1 { 1 } else { self.p };
        for cand in start..self.size as u32 {
            if factors.iter().all(|&r| self.pow_digits(cand, order / r) != 1) {
                self.generator_idx = cand;
                return;
            }
        }
        unreachable!("every finite field has a multiplicative generator");
    }

    fn build_tables(&mut self) {
        let order = (self.size - 1) as usize;
        self.exp = vec![0u32; order];
        self.log = vec![u32::MAX; self.size as usize];
        let mut cur = 1u32;
        for j in 0..order {
            self.exp[j] = cur;
            debug_assert!(self.log[cur as usize] == u32::MAX, "generator order too small");
            self.log[cur as usize] = j as u32;
            cur = self.mul_digits(cur, self.generator_idx);
        }
        assert_eq!(cur, 1, "generator does not have full order");
        self.subfield_gen_idx = self.exp[((self.size - 1) / (self.q - 1)) as usize % order];
        if self.q == self.size {
            // N = 1: F_q is the whole field
            self.subfield_gen_idx = self.generator_idx;
        }
    }

    fn build_coord_solver(&mut self) {
        // columns: digits(zeta^l * beta^j), l minor, j major
        let d = self.d as usize;
        let beta = if self.d == 1 { 1u32.min(self.p - 1) } else { self.p }; // beta = x, or 1 when d = 1
        let beta = if self.d == 1 { 1 } else { beta };
        let mut cols = Vec::with_capacity(d);
        let mut bpow = 1u32;
        for _j in 0..self.n_ext as usize {
            let mut zpow = 1u32;
            for _l in 0..self.e as usize {
                cols.push(self.idx_to_digits(self.mul_digits(bpow, zpow)));
                zpow = self.mul_digits(zpow, self.subfield_gen_idx);
            }
            bpow = self.mul_digits(bpow, beta);
        }
        // invert the d x d matrix over F_p (columns as built)
        let p = self.p as u64;
        let mut aug: Vec<Vec<u64>> = (0..d)
            .map(|r| {
                let mut row: Vec<u64> = (0..d).map(|c| cols[c][r] as u64).collect();
                row.extend((0..d).map(|c| u64::from(c == r)));
                row
            })
            .collect();
        for col in 0..d {
            let piv = (col..d).find(|&r| aug[r][col] != 0).expect("basis matrix is invertible");
            aug.swap(col, piv);
            let inv = fp_inv_scalar(aug[col][col] as u32, self.p) as u64;
            for c in 0..2 * d {
                aug[col][c] = aug[col][c] * inv % p;
            }
            for r in 0..d {
                if r != col && aug[r][col] != 0 {
                    let f = aug[r][col];
                    for c in 0..2 * d {
                        aug[r][c] = (aug[r][c] + p * p - f * aug[col][c] % p) % p;
                    }
                }
            }
        }
        self.coord_inv = aug
            .into_iter()
            .map(|row| row[d..].iter().map(|&x| x as u32).collect())
            .collect();
    }

    // -- public accessors ---------------------------------------------------

    pub fn p(&self) -> u64 {
        self.p as u64
    }
    pub fn e(&self) -> u32 {
        self.e
    }
    /// Extension degree `N` of the top field over `F_q`.
    pub fn ext_degree(&self) -> u32 {
        self.n_ext
    }
    /// `q = p^e`.
    pub fn q(&self) -> u64 {
        self.q
    }
    /// `q^N`, the number of elements.
    pub fn order(&self) -> u64 {
        self.size
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    pub fn id(&self) -> u64 {
        self.id
    }

    // -- index-level arithmetic ---------------------------------------------

    pub(crate) fn add_idx(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        let (mut va, mut vb) = (a as u64, b as u64);
        let p = self.p as u64;
        let mut out: u64 = 0;
        let mut place: u64 = 1;
        while va > 0 || vb > 0 {
            out += (va % p + vb % p) % p * place;
            va /= p;
            vb /= p;
            place *= p;
        }
        out as u32
    }

    pub(crate) fn neg_idx(&self, a: u32) -> u32 {
        if self.p == 2 || a == 0 {
            return a;
        }
        let p = self.p as u64;
        let mut v = a as u64;
        let mut out: u64 = 0;
        let mut place: u64 = 1;
        while v > 0 {
            let dg = v % p;
            out += if dg == 0 { 0 } else { p - dg } * place;
            v /= p;
            place *= p;
        }
        out as u32
    }

    pub(crate) fn sub_idx(&self, a: u32, b: u32) -> u32 {
        self.add_idx(a, self.neg_idx(b))
    }

    pub(crate) fn mul_idx(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let order = self.size - 1;
        let j = (self.log[a as usize] as u64 + self.log[b as usize] as u64) % order;
        self.exp[j as usize]
    }

    pub(crate) fn inv_idx(&self, a: u32) -> u32 {
        assert!(a != 0, "division by zero field element");
        let order = self.size - 1;
        let j = (order - self.log[a as usize] as u64) % order;
        self.exp[j as usize]
    }

    pub(crate) fn pow_idx(&self, a: u32, k: i64) -> u32 {
        let order = (self.size - 1) as i64;
        if a == 0 {
            assert!(k > 0, "0 to a non-positive power");
            return 0;
        }
        let j = (self.log[a as usize] as i64 * (k % order)).rem_euclid(order);
        self.exp[j as usize]
    }

    /// x -> x^{q^i}; exponent arithmetic mod the group order.
    pub(crate) fn frob_idx(&self, a: u32, i: i64) -> u32 {
        if a == 0 {
            return 0;
        }
        let order = self.size - 1;
        let i = i.rem_euclid(self.n_ext as i64) as u32;
        let mut qi: u64 = 1;
        for _ in 0..i {
            qi = qi * self.q % order;
        }
        let j = (self.log[a as usize] as u64 * qi) % order;
        self.exp[j as usize]
    }

    // -- element construction -----------------------------------------------

    pub fn felt(self: &Arc<Self>, idx: u64) -> Felt {
        assert!(idx < self.size, "element index out of range");
        Felt { ctx: Arc::clone(self), idx: idx as u32 }
    }
    pub fn zero(self: &Arc<Self>) -> Felt {
        self.felt(0)
    }
    pub fn one(self: &Arc<Self>) -> Felt {
        self.felt(1)
    }
    pub fn generator(self: &Arc<Self>) -> Felt {
        self.felt(self.generator_idx as u64)
    }
    /// A fixed generator of the multiplicative group of the `F_q` level.
    pub fn subfield_generator(self: &Arc<Self>) -> Felt {
        self.felt(self.subfield_gen_idx as u64)
    }
    /// Embeds `0 <= c < p` as the prime-field element `c`.
    pub fn from_prime(self: &Arc<Self>, c: u64) -> Felt {
        self.felt(c % self.p as u64)
    }

    pub fn elements(self: &Arc<Self>) -> impl Iterator<Item = Felt> + '_ {
        let ctx = Arc::clone(self);
        (0..self.size).map(move |i| ctx.felt(i))
    }

    /// Parses "decimal-index" or "g^k" element literals.
    pub fn parse_element(self: &Arc<Self>, s: &str) -> Result<Felt, GfError> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("g^") {
            let k: i64 = rest.parse().map_err(|_| GfError::BadElementLiteral(s.into()))?;
            return Ok(self.generator().pow(k));
        }
        if s == "g" {
            return Ok(self.generator());
        }
        let idx: u64 = s.parse().map_err(|_| GfError::BadElementLiteral(s.into()))?;
        if idx >= self.size {
            return Err(GfError::BadElementLiteral(s.into()));
        }
        Ok(self.felt(idx))
    }

    /// Parses a "p^e^N[:modulus=c0,c1,...,1]" field spec string.
    pub fn parse_spec(spec: &str) -> Result<Arc<FieldCtx>, GfError> {
        let (tower, modulus) = match spec.split_once(':') {
            Some((t, rest)) => {
                let m = rest
                    .strip_prefix("modulus=")
                    .ok_or_else(|| GfError::BadFieldSpec(spec.into()))?;
                let coeffs: Result<Vec<u32>, _> = m.split(',').map(|c| c.trim().parse()).collect();
                (t, Some(coeffs.map_err(|_| GfError::BadFieldSpec(spec.into()))?))
            }
            None => (spec, None),
        };
        let parts: Vec<&str> = tower.trim().split('^').collect();
        if parts.len() != 3 {
            return Err(GfError::BadFieldSpec(spec.into()));
        }
        let p: u64 = parts[0].parse().map_err(|_| GfError::BadFieldSpec(spec.into()))?;
        let e: u32 = parts[1].parse().map_err(|_| GfError::BadFieldSpec(spec.into()))?;
        let n: u32 = parts[2].parse().map_err(|_| GfError::BadFieldSpec(spec.into()))?;
        FieldCtx::new(p, e, n, modulus)
    }

    /// F_q-coordinates of `x` in the polynomial basis `1, β, …, β^{N-1}`.
    pub fn fq_coords(self: &Arc<Self>, x: &Felt) -> Vec<Felt> {
        assert_eq!(self.id, x.ctx.id, "context mismatch");
        let d = self.d as usize;
        let digits = self.idx_to_digits(x.idx);
        let p = self.p as u64;
        // c = coord_inv * digits over F_p
        let c: Vec<u32> = (0..d)
            .map(|r| {
                let mut acc: u64 = 0;
                for k in 0..d {
                    acc = (acc + self.coord_inv[r][k] as u64 * digits[k] as u64) % p;
                }
                acc as u32
            })
            .collect();
        // coord_j = sum_l c[j*e+l] * zeta^l
        (0..self.n_ext as usize)
            .map(|j| {
                let mut acc = 0u32;
                let mut zpow = 1u32;
                for l in 0..self.e as usize {
                    let term = self.mul_idx(self.pow_scalar(c[j * self.e as usize + l]), zpow);
                    acc = self.add_idx(acc, term);
                    zpow = self.mul_idx(zpow, self.subfield_gen_idx);
                }
                self.felt(acc as u64)
            })
            .collect()
    }

    /// Index of the prime-field scalar `c` (its base-p vector is (c,0,…)).
    fn pow_scalar(&self, c: u32) -> u32 {
        c % self.p
    }
}

// ---------------------------------------------------------------------------
// Felt
// ---------------------------------------------------------------------------

/// An element of the top field of a [`FieldCtx`] tower.
#[derive(Clone)]
pub struct Felt {
    pub(crate) ctx: Arc<FieldCtx>,
    pub(crate) idx: u32,
}

impl Felt {
    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }
    /// Integer index: the coefficient vector read base `p`.
    pub fn index(&self) -> u64 {
        self.idx as u64
    }
    pub fn is_zero(&self) -> bool {
        self.idx == 0
    }
    pub fn is_one(&self) -> bool {
        self.idx == 1
    }

    pub fn same_ctx(&self, other: &Felt) -> bool {
        self.ctx.id == other.ctx.id
    }

    pub fn inv(&self) -> Felt {
        Felt { ctx: Arc::clone(&self.ctx), idx: self.ctx.inv_idx(self.idx) }
    }

    pub fn pow(&self, k: i64) -> Felt {
        Felt { ctx: Arc::clone(&self.ctx), idx: self.ctx.pow_idx(self.idx, k) }
    }

    /// `x^{q^i}`, the `i`-th power of the `F_q`-Frobenius. Additive and
    /// multiplicative; `i` is reduced mod `N`.
    pub fn frobenius(&self, i: i64) -> Felt {
        Felt { ctx: Arc::clone(&self.ctx), idx: self.ctx.frob_idx(self.idx, i) }
    }

    /// Relative norm onto `F_{q^d}`: `x^{(q^N-1)/(q^d-1)}`.
    pub fn norm_rel(&self, over_degree: u32) -> Result<Felt, GfError> {
        let n = self.ctx.n_ext;
        if over_degree == 0 || n % over_degree != 0 {
            return Err(GfError::DegreeNotDividing(over_degree as usize, n as usize));
        }
        if self.idx == 0 {
            return Ok(self.clone());
        }
        let qd = self.ctx.q.pow(over_degree);
        let exp = (self.ctx.size - 1) / (qd - 1);
        Ok(self.pow(exp as i64))
    }

    /// Membership in `F_{q^d} ∩ F_{q^N} = F_{q^{gcd(d,N)}}`.
    pub fn in_subfield(&self, d: u32) -> bool {
        if self.idx == 0 {
            return true;
        }
        let g = gcd(d as u64, self.ctx.n_ext as u64) as u32;
        self.frobenius(g as i64).idx == self.idx
    }

    /// Canonical literal: "0", "1", or "g^k".
    pub fn to_literal(&self) -> String {
        if self.idx == 0 {
            "0".into()
        } else if self.idx == 1 {
            "1".into()
        } else {
            format!("g^{}", self.ctx.log[self.idx as usize])
        }
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl fmt::Debug for Felt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.idx)
    }
}

impl PartialEq for Felt {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.id == other.ctx.id && self.idx == other.idx
    }
}
impl Eq for Felt {}

macro_rules! felt_binop {
    ($trait:ident, $method:ident, $idx_op:ident) => {
        impl std::ops::$trait for &Felt {
            type Output = Felt;
            fn $method(self, rhs: &Felt) -> Felt {
                assert!(self.same_ctx(rhs), "context mismatch in field operation");
                Felt { ctx: Arc::clone(&self.ctx), idx: self.ctx.$idx_op(self.idx, rhs.idx) }
            }
        }
        impl std::ops::$trait for Felt {
            type Output = Felt;
            fn $method(self, rhs: Felt) -> Felt {
                std::ops::$trait::$method(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Felt> for Felt {
            type Output = Felt;
            fn $method(self, rhs: &Felt) -> Felt {
                std::ops::$trait::$method(&self, rhs)
            }
        }
    };
}

felt_binop!(Add, add, add_idx);
felt_binop!(Sub, sub, sub_idx);
felt_binop!(Mul, mul, mul_idx);

impl std::ops::Neg for &Felt {
    type Output = Felt;
    fn neg(self) -> Felt {
        Felt { ctx: Arc::clone(&self.ctx), idx: self.ctx.neg_idx(self.idx) }
    }
}
impl std::ops::Neg for Felt {
    type Output = Felt;
    fn neg(self) -> Felt {
        -&self
    }
}

impl std::ops::Div for &Felt {
    type Output = Felt;
    fn div(self, rhs: &Felt) -> Felt {
        assert!(self.same_ctx(rhs), "context mismatch in field operation");
        Felt { ctx: Arc::clone(&self.ctx), idx: self.ctx.mul_idx(self.idx, self.ctx.inv_idx(rhs.idx)) }
    }
}
impl std::ops::Div for Felt {
    type Output = Felt;
    fn div(self, rhs: Felt) -> Felt {
        &self / &rhs
    }
}

/// All roots in `F_{q^N}` of a dense univariate polynomial, by enumeration.
///
/// Coefficients low-to-high; returns roots sorted by element index.
pub fn poly_roots(ctx: &Arc<FieldCtx>, coeffs: &[Felt]) -> Result<Vec<Felt>, GfError> {
    let mut cs: Vec<&Felt> = coeffs.iter().collect();
    while cs.last().map(|c| c.is_zero()) == Some(true) {
        cs.pop();
    }
    if cs.is_empty() {
        return Err(GfError::ZeroPolynomial);
    }
    if cs.iter().any(|c| c.ctx.id != ctx.id) {
        return Err(GfError::ContextMismatch);
    }
    let mut roots = Vec::new();
    for x in ctx.elements() {
        let mut acc = ctx.zero();
        for c in cs.iter().rev() {
            acc = &acc * &x + *c;
        }
        if acc.is_zero() {
            roots.push(x);
        }
    }
    Ok(roots)
}

/// Embedding `F_{q^n} ↪ F_{q^{nm}}` determined by mapping the small field's
/// generator to the smallest-index root of its minimal polynomial.
pub struct Embedding {
    small: Arc<FieldCtx>,
    big: Arc<FieldCtx>,
    image_log: u64,
}

impl Embedding {
    pub fn new(small: &Arc<FieldCtx>, big: &Arc<FieldCtx>) -> Result<Embedding, GfError> {
        if small.p != big.p || small.e != big.e || big.n_ext % small.n_ext != 0 {
            return Err(GfError::DegreeNotDividing(small.n_ext as usize, big.n_ext as usize));
        }
        // minimal polynomial of g_small over F_p, via linear algebra on digits
        let minpoly = minimal_polynomial_fp(small, small.generator_idx);
        // lift coefficients (prime-field scalars embed as themselves)
        let coeffs: Vec<Felt> = minpoly.iter().map(|&c| big.from_prime(c as u64)).collect();
        let roots = poly_roots(big, &coeffs)?;
        let root = roots.first().expect("minimal polynomial splits in the big field").clone();
        Ok(Embedding { small: Arc::clone(small), big: Arc::clone(big), image_log: big.log[root.idx as usize] as u64 })
    }

    pub fn small(&self) -> &Arc<FieldCtx> {
        &self.small
    }
    pub fn big(&self) -> &Arc<FieldCtx> {
        &self.big
    }

    pub fn map(&self, x: &Felt) -> Felt {
        assert_eq!(x.ctx.id, self.small.id, "context mismatch");
        if x.idx == 0 {
            return self.big.zero();
        }
        let j = self.small.log[x.idx as usize] as u64;
        let order = self.big.size - 1;
        let jl = (j % order) as u128 * (self.image_log % order) as u128 % order as u128;
        self.big.felt(self.big.exp[jl as usize] as u64)
    }
}

fn minimal_polynomial_fp(ctx: &Arc<FieldCtx>, elt: u32) -> Vec<u32> {
    // Gaussian elimination on the digit vectors of 1, x, x^2, ...
    let d = ctx.d as usize;
    let p = ctx.p as u64;
    let mut rows: Vec<(Vec<u32>, Vec<u32>)> = Vec::new(); // (reduced digits, combo coeffs)
    let mut pow = 1u32;
    for k in 0..=d {
        let mut vec = ctx.idx_to_digits(pow);
        let mut combo = vec![0u32; d + 1];
        combo[k] = 1;
        // reduce against existing rows
        for (rvec, rcombo) in &rows {
            let lead = rvec.iter().position(|&c| c != 0).unwrap();
            if vec[lead] != 0 {
                let f = vec[lead] as u64 * fp_inv_scalar(rvec[lead], ctx.p) as u64 % p;
                for i in 0..d {
                    vec[i] = ((vec[i] as u64 + p * p - f * rvec[i] as u64 % p) % p) as u32;
                }
                for i in 0..=d {
                    combo[i] = ((combo[i] as u64 + p * p - f * rcombo[i] as u64 % p) % p) as u32;
                }
            }
        }
        if vec.iter().all(|&c| c == 0) {
            // combo gives the minimal polynomial (monic after normalization)
            let lead = combo.iter().rposition(|&c| c != 0).unwrap();
            let inv = fp_inv_scalar(combo[lead], ctx.p) as u64;
            let mut out: Vec<u32> = combo[..=lead].iter().map(|&c| (c as u64 * inv % p) as u32).collect();
            fp_trim(&mut out);
            return out;
        }
        rows.push((vec, combo));
        pow = ctx.mul_digits(pow, elt);
    }
    unreachable!("element of a degree-d extension has minimal polynomial of degree <= d");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f2_prime_field() {
        let ctx = FieldCtx::new(2, 1, 1, None).unwrap();
        assert_eq!(ctx.order(), 2);
        let one = ctx.one();
        assert!((&one + &one).is_zero());
    }

    #[test]
    fn f81_element_count() {
        let ctx = FieldCtx::new(3, 1, 4, None).unwrap();
        // enumerate and count distinct elements
        let mut seen = vec![false; 81];
        let mut count = 0;
        for x in ctx.elements() {
            if !seen[x.index() as usize] {
                seen[x.index() as usize] = true;
                count += 1;
            }
        }
        assert_eq!(count, 81);
    }

    #[test]
    fn f729_contains_f9() {
        let ctx = FieldCtx::new(3, 1, 6, None).unwrap();
        // fixed points of x -> x^{q^2}
        let count = ctx.elements().filter(|x| x.frobenius(2) == *x).count();
        assert_eq!(count, 9);
        let sub = ctx.elements().filter(|x| x.in_subfield(2)).count();
        assert_eq!(sub, 9);
        assert!(!ctx.generator().in_subfield(2));
    }

    #[test]
    fn frobenius_identity_and_fixed_field() {
        let ctx = FieldCtx::new(3, 1, 4, None).unwrap();
        for x in ctx.elements() {
            assert_eq!(x.frobenius(0), x);
        }
        let fixed = ctx.elements().filter(|x| x.frobenius(1) == *x).count();
        assert_eq!(fixed, 3);
    }

    #[test]
    fn frobenius_matches_repeated_squaring() {
        let ctx = FieldCtx::new(3, 1, 6, None).unwrap();
        let g = ctx.generator();
        // oracle: x^27 by repeated multiplication
        let mut acc = ctx.one();
        for _ in 0..27 {
            acc = &acc * &g;
        }
        assert_eq!(g.frobenius(3), acc);
        assert_eq!(g.frobenius(3), g.pow(27));
    }

    #[test]
    fn frobenius_is_additive_and_multiplicative() {
        let ctx = FieldCtx::new(3, 1, 4, None).unwrap();
        let xs: Vec<Felt> = ctx.elements().collect();
        for i in (0..xs.len()).step_by(7) {
            for j in (0..xs.len()).step_by(11) {
                let (x, y) = (&xs[i], &xs[j]);
                assert_eq!((x + y).frobenius(1), x.frobenius(1) + y.frobenius(1));
                assert_eq!((x * y).frobenius(1), x.frobenius(1) * y.frobenius(1));
            }
        }
    }

    #[test]
    fn frobenius_composition() {
        let ctx = FieldCtx::new(2, 1, 5, None).unwrap();
        for x in ctx.elements() {
            for i in 0..5i64 {
                for j in 0..5i64 {
                    assert_eq!(x.frobenius(i).frobenius(j), x.frobenius((i + j) % 5));
                }
            }
        }
    }

    #[test]
    fn norm_values_equidistributed() {
        // F_81/F_3: each nonzero value of F_3 attained by exactly 40 elements
        let ctx = FieldCtx::new(3, 1, 4, None).unwrap();
        let mut counts = [0usize; 3];
        for x in ctx.elements().skip(1) {
            let n = x.norm_rel(1).unwrap();
            assert!(n.in_subfield(1));
            counts[n.index() as usize] += 1;
        }
        assert_eq!(counts[0], 0);
        assert_eq!(counts[1], 40);
        assert_eq!(counts[2], 40);
    }

    #[test]
    fn norm_of_identity_and_zero() {
        let ctx = FieldCtx::new(3, 1, 4, None).unwrap();
        assert!(ctx.one().norm_rel(2).unwrap().is_one());
        assert!(ctx.zero().norm_rel(2).unwrap().is_zero());
        assert!(ctx.one().norm_rel(3).is_err());
    }

    #[test]
    fn norm_is_multiplicative_exhaustive() {
        let ctx = FieldCtx::new(3, 1, 4, None).unwrap();
        let xs: Vec<Felt> = ctx.elements().collect();
        for x in &xs {
            for y in &xs {
                assert_eq!(
                    (x * y).norm_rel(1).unwrap(),
                    x.norm_rel(1).unwrap() * y.norm_rel(1).unwrap()
                );
            }
        }
    }

    #[test]
    fn in_subfield_agrees_with_bruteforce_embedding_image() {
        let ctx = FieldCtx::new(3, 1, 6, None).unwrap();
        // brute-force image of F_9 = fixed set of frob(2); compare
        let image: Vec<u64> =
            ctx.elements().filter(|x| x.frobenius(2) == *x).map(|x| x.index()).collect();
        for x in ctx.elements() {
            assert_eq!(x.in_subfield(2), image.contains(&x.index()));
        }
        assert!(ctx.zero().in_subfield(4));
        assert!(ctx.one().in_subfield(5));
    }

    #[test]
    fn subfield_membership_uses_gcd() {
        let ctx = FieldCtx::new(2, 1, 6, None).unwrap();
        // F_{q^4} ∩ F_{q^6} = F_{q^2}
        let in4 = ctx.elements().filter(|x| x.in_subfield(4)).count();
        assert_eq!(in4, 4);
    }

    #[test]
    fn poly_roots_artin_schreier() {
        // X^q - X has exactly the q elements of F_q
        let ctx = FieldCtx::new(3, 1, 4, None).unwrap();
        let mut coeffs = vec![ctx.zero(); 4];
        coeffs[1] = -ctx.one();
        coeffs[3] = ctx.one(); // X^3 - X
        let roots = poly_roots(&ctx, &coeffs).unwrap();
        assert_eq!(roots.len(), 3);
        for r in &roots {
            assert!(r.in_subfield(1));
        }
    }

    #[test]
    fn poly_roots_edges() {
        let ctx = FieldCtx::new(3, 1, 2, None).unwrap();
        assert!(poly_roots(&ctx, &[ctx.one()]).unwrap().is_empty());
        assert!(poly_roots(&ctx, &[ctx.zero()]).is_err());
    }

    #[test]
    fn field_axioms_random_triples() {
        let ctx = FieldCtx::new(2, 1, 5, None).unwrap();
        // deterministic LCG over the index space; >= 10^4 triples
        let m = ctx.order();
        let mut s: u64 = 12345;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 33) % m
        };
        for _ in 0..10_000 {
            let (a, b, c) = (ctx.felt(next()), ctx.felt(next()), ctx.felt(next()));
            assert_eq!((&a + &b) + &c, &a + &(&b + &c));
            assert_eq!((&a * &b) * &c, &a * &(&b * &c));
            assert_eq!(&a * &(&b + &c), &a * &b + &a * &c);
            if !a.is_zero() {
                assert!((&a * &a.inv()).is_one());
            }
            assert!((&a + &(-&a)).is_zero());
        }
    }

    #[test]
    fn supplied_modulus_validation() {
        // X^2 + 1 is reducible over F_2
        assert_eq!(
            FieldCtx::new(2, 1, 2, Some(vec![1, 0, 1])).unwrap_err(),
            GfError::ReducibleModulus(2)
        );
        // X^2 + X + 1 is fine
        let ctx = FieldCtx::new(2, 1, 2, Some(vec![1, 1, 1])).unwrap();
        assert_eq!(ctx.order(), 4);
        // degree mismatch
        assert!(matches!(
            FieldCtx::new(2, 1, 3, Some(vec![1, 1, 1])),
            Err(GfError::DegreeMismatch { .. })
        ));
        assert_eq!(FieldCtx::new(4, 1, 2, None).unwrap_err(), GfError::NotPrime(4));
    }

    #[test]
    fn tower_with_e_greater_than_one() {
        // F_4 ⊂ F_16 as q=4, N=2
        let ctx = FieldCtx::new(2, 2, 2, None).unwrap();
        assert_eq!(ctx.q(), 4);
        assert_eq!(ctx.order(), 16);
        // F_q level has q elements
        let sub = ctx.elements().filter(|x| x.in_subfield(1)).count();
        assert_eq!(sub, 4);
        // fq_coords round-trip: x = sum coords[j] * beta^j
        let beta = ctx.felt(2);
        for x in ctx.elements() {
            let coords = ctx.fq_coords(&x);
            let mut acc = ctx.zero();
            let mut bp = ctx.one();
            for c in &coords {
                assert!(c.in_subfield(1));
                acc = acc + c * &bp;
                bp = &bp * &beta;
            }
            assert_eq!(acc, x);
        }
    }

    #[test]
    fn embedding_is_a_ring_homomorphism() {
        let small = FieldCtx::new(3, 1, 2, None).unwrap();
        let big = FieldCtx::new(3, 1, 4, None).unwrap();
        let emb = Embedding::new(&small, &big).unwrap();
        let xs: Vec<Felt> = small.elements().collect();
        for x in &xs {
            for y in &xs {
                assert_eq!(emb.map(&(x + y)), emb.map(x) + emb.map(y));
                assert_eq!(emb.map(&(x * y)), emb.map(x) * emb.map(y));
            }
        }
        assert!(emb.map(&small.one()).is_one());
        // image lands in the q^2-subfield
        for x in &xs {
            assert!(emb.map(x).in_subfield(2));
        }
    }

    #[test]
    fn element_literals_round_trip() {
        let ctx = FieldCtx::new(3, 1, 4, None).unwrap();
        for x in ctx.elements() {
            let lit = x.to_literal();
            assert_eq!(ctx.parse_element(&lit).unwrap(), x);
        }
        assert!(ctx.parse_element("nope").is_err());
        assert!(ctx.parse_element("100000").is_err());
    }

    #[test]
    fn field_spec_parsing() {
        let ctx = FieldCtx::parse_spec("3^1^4").unwrap();
        assert_eq!(ctx.order(), 81);
        let ctx2 = FieldCtx::parse_spec("2^1^2:modulus=1,1,1").unwrap();
        assert_eq!(ctx2.order(), 4);
        assert!(FieldCtx::parse_spec("3^1").is_err());
        assert!(FieldCtx::parse_spec("3^1^4:mod=1").is_err());
    }
}
